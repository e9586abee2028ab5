#include "swarm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "swarm/errors.hpp"

namespace swarm {
namespace {

// Integer fields, including the 64-bit seed, share the size_t alternative.
static_assert(std::is_same_v<std::size_t, std::uint64_t>);
using FieldRef = std::variant<double*, std::size_t*, bool*, std::vector<double>*,
                              AdvantageTarget*>;

struct Field {
  const char* name;
  FieldRef ref;
};

std::vector<Field> world_fields(WorldConfig& w) {
  return {
      {"arena_length", &w.arena_length},
      {"arena_width", &w.arena_width},
      {"max_steps", &w.max_steps},
      {"uav_altitude", &w.uav_altitude},
      {"uav_speed", &w.uav_speed},
      {"step_duration", &w.step_duration},
      {"carrier_frequency", &w.carrier_frequency},
      {"bs_tx_power", &w.bs_tx_power},
      {"bs_tx_gain", &w.bs_tx_gain},
      {"uav_rx_gain", &w.uav_rx_gain},
      {"noise_power", &w.noise_power},
      {"sensing_threshold", &w.sensing_threshold},
      {"max_resolved", &w.max_resolved},
      {"shadow_std", &w.shadow_std},
      {"gamma1", &w.gamma1},
      {"gamma2", &w.gamma2},
      {"sinr_offset", &w.sinr_offset},
      {"literal_db_sinr", &w.literal_db_sinr},
      {"power_levels", &w.power_levels},
      {"comm_base_frequency", &w.comm_base_frequency},
      {"comm_channel_spacing", &w.comm_channel_spacing},
      {"num_uavs", &w.num_uavs},
      {"num_base_stations", &w.num_base_stations},
      {"num_targets", &w.num_targets},
      {"message_dim", &w.message_dim},
      {"bs_altitude", &w.bs_altitude},
      {"rcs_mean", &w.rcs_mean},
      {"rcs_std", &w.rcs_std},
      {"target_alt_min", &w.target_alt_min},
      {"target_alt_max", &w.target_alt_max},
      {"normalize_observations", &w.normalize_observations},
      {"snr_scale", &w.snr_scale},
      {"z_scale", &w.z_scale},
      {"discount", &w.discount},
      {"seed", &w.seed},
  };
}

std::vector<Field> training_fields(TrainingConfig& t) {
  return {
      {"epochs", &t.epochs},
      {"batch_size", &t.batch_size},
      {"learning_rate", &t.learning_rate},
      {"value_coef", &t.value_coef},
      {"rms_decay", &t.rms_decay},
      {"rms_epsilon", &t.rms_epsilon},
      {"grad_clip", &t.grad_clip},
      {"advantage_target", &t.advantage_target},
      {"checkpoint_interval", &t.checkpoint_interval},
      {"ffn_width", &t.ffn_width},
      {"decoder_hidden", &t.decoder_hidden},
      {"key_width", &t.key_width},
      {"threads", &t.threads},
  };
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  double value{};
  const char* begin = t.data();
  const char* end = begin + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || t.empty()) {
    throw ConfigError("expected a real number, got '" + t + "'");
  }
  return value;
}

template <class Int>
Int parse_unsigned(const std::string& text) {
  const std::string t = trim(text);
  Int value{};
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("expected a non-negative integer, got '" + t + "'");
  }
  return value;
}

bool parse_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("expected a boolean, got '" + t + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  if (out.empty()) throw ConfigError("expected a comma-separated list of reals");
  return out;
}

AdvantageTarget parse_target(const std::string& text) {
  const std::string t = trim(text);
  if (t == "return_to_go") return AdvantageTarget::kReturnToGo;
  if (t == "per_step") return AdvantageTarget::kPerStep;
  throw ConfigError("expected return_to_go or per_step, got '" + t + "'");
}

void assign(const FieldRef& ref, const std::string& text) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          *p = parse_double(text);
        } else if constexpr (std::is_same_v<T, std::size_t>) {
          *p = parse_unsigned<std::size_t>(text);
        } else if constexpr (std::is_same_v<T, bool>) {
          *p = parse_bool(text);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          *p = parse_list(text);
        } else {
          *p = parse_target(text);
        }
      },
      ref);
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string render(const FieldRef& ref) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(*p);
        } else if constexpr (std::is_same_v<T, std::size_t>) {
          return std::to_string(*p);
        } else if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string out;
          for (std::size_t i = 0; i < p->size(); ++i) {
            if (i) out += ",";
            out += format_double((*p)[i]);
          }
          return out;
        } else {
          return to_string(*p);
        }
      },
      ref);
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw ConfigError("invalid config field '" + field + "': " + why);
}

void apply_section(const boost::property_tree::ptree& section,
                   std::vector<Field> fields, const std::string& origin,
                   const std::string& section_name) {
  for (const auto& [key, node] : section) {
    auto it = std::find_if(fields.begin(), fields.end(),
                           [&](const Field& f) { return key == f.name; });
    if (it == fields.end()) {
      throw ConfigError(origin + ": [" + section_name + "] unknown key '" + key + "'");
    }
    try {
      assign(it->ref, node.data());
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ": [" + section_name + "] " + key + ": " + e.what());
    }
  }
}

}  // namespace

void WorldConfig::validate() const {
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) invalid(name, "must be positive and finite");
  };
  positive("arena_length", arena_length);
  positive("arena_width", arena_width);
  positive("uav_altitude", uav_altitude);
  positive("carrier_frequency", carrier_frequency);
  positive("comm_base_frequency", comm_base_frequency);
  positive("comm_channel_spacing", comm_channel_spacing);
  positive("snr_scale", snr_scale);
  positive("z_scale", z_scale);
  if (!(step_length() > 0.0) || !std::isfinite(step_length())) {
    invalid("uav_speed", "uav_speed * step_duration must be positive");
  }
  if (max_steps == 0) invalid("max_steps", "must be at least 1");
  if (max_resolved == 0) invalid("max_resolved", "q_max must be at least 1");
  if (num_uavs == 0) invalid("num_uavs", "at least one UAV is required");
  if (num_base_stations == 0) invalid("num_base_stations", "at least one base station is required");
  if (num_targets == 0) invalid("num_targets", "at least one target is required");
  if (message_dim == 0) invalid("message_dim", "must be at least 1");
  if (!(gamma1 < gamma2)) invalid("gamma1", "requires gamma1 < gamma2");
  if (!(discount >= 0.0 && discount <= 1.0)) invalid("discount", "must lie in [0, 1]");
  if (!(shadow_std >= 0.0)) invalid("shadow_std", "must be non-negative");
  if (!(rcs_std >= 0.0) || !std::isfinite(rcs_mean)) invalid("rcs_std", "must be non-negative");
  if (!(target_alt_min > 0.0) || !(target_alt_max >= target_alt_min)) {
    invalid("target_alt_min", "need 0 < target_alt_min <= target_alt_max");
  }
  if (!(bs_altitude >= 0.0)) invalid("bs_altitude", "must be non-negative");
  if (power_levels.empty()) invalid("power_levels", "must be non-empty");
  if (!std::is_sorted(power_levels.begin(), power_levels.end())) {
    invalid("power_levels", "must be sorted ascending");
  }
}

void TrainingConfig::validate() const {
  if (batch_size == 0) invalid("batch_size", "must be at least 1");
  if (!(learning_rate > 0.0)) invalid("learning_rate", "must be positive");
  if (!(value_coef >= 0.0)) invalid("value_coef", "must be non-negative");
  if (!(rms_decay >= 0.0 && rms_decay < 1.0)) invalid("rms_decay", "must lie in [0, 1)");
  if (!(rms_epsilon > 0.0)) invalid("rms_epsilon", "must be positive");
  if (threads == 0) invalid("threads", "must be at least 1");
}

std::string to_string(AdvantageTarget target) {
  return target == AdvantageTarget::kReturnToGo ? "return_to_go" : "per_step";
}

Config parse_config(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Config config;
  for (const auto& [name, section] : tree) {
    if (name == "world") {
      apply_section(section, world_fields(config.world), origin, name);
    } else if (name == "training") {
      apply_section(section, training_fields(config.training), origin, name);
    } else if (section.empty() && !section.data().empty()) {
      throw ConfigError(origin + ": key '" + name + "' outside of a section");
    } else {
      throw ConfigError(origin + ": unknown section [" + name + "]");
    }
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

std::string to_config_text(const Config& config) {
  Config copy = config;
  std::string out = "[world]\n";
  for (const auto& f : world_fields(copy.world)) {
    out += std::string(f.name) + " = " + render(f.ref) + "\n";
  }
  out += "\n[training]\n";
  for (const auto& f : training_fields(copy.training)) {
    out += std::string(f.name) + " = " + render(f.ref) + "\n";
  }
  return out;
}

std::string config_hash(const Config& config) {
  Config keyed = config;
  keyed.training.epochs = 0;
  keyed.training.threads = 1;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_config_text(keyed)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace swarm
