#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace swarm {

/// Physical, spectral and episode constants. Defaults follow the reference
/// simulation table; values the table leaves open carry documented defaults
/// (see README, "Model defaults").
struct WorldConfig {
  // Arena and flight.
  double arena_length = 1000.0;  // L, meters (x extent)
  double arena_width = 1000.0;   // H, meters (y extent)
  std::size_t max_steps = 100;   // T_max
  double uav_altitude = 25.0;    // h, meters
  double uav_speed = 20.0;       // nu, m/s
  double step_duration = 1.0;    // seconds per step

  // Sensing link budget.
  double carrier_frequency = 28e9;  // f_c, Hz
  double bs_tx_power = 46.0;        // dBm
  double bs_tx_gain = 11.0;         // dBi
  double uav_rx_gain = 11.0;        // dBi
  double noise_power = -99.0;       // dBm
  double sensing_threshold = -10.0; // gamma_s, dB
  std::size_t max_resolved = 5;     // q_max

  // Inter-UAV communication.
  double shadow_std = 3.56;  // dB
  double gamma1 = -10.0;     // dB, detection threshold
  double gamma2 = 0.0;       // dB, decoding threshold
  double sinr_offset = 30.0; // dB
  bool literal_db_sinr = false;
  std::vector<double> power_levels{50.0, 55.0, 60.0, 65.0, 70.0};  // dBm
  double comm_base_frequency = 2.4e9;   // Hz
  double comm_channel_spacing = 5e6;    // Hz

  // Population.
  std::size_t num_uavs = 5;           // M
  std::size_t num_base_stations = 3;  // K
  std::size_t num_targets = 100;      // q
  std::size_t message_dim = 32;       // s
  double bs_altitude = 30.0;
  double rcs_mean = -20.0;  // dBsm
  double rcs_std = 5.0;     // dBsm
  double target_alt_min = 10.0;
  double target_alt_max = 120.0;

  // Observation scaling.
  bool normalize_observations = true;
  double snr_scale = 50.0;  // dB
  double z_scale = 100.0;   // meters

  double discount = 0.9;  // gamma
  std::uint64_t seed = 1;

  /// Per-step displacement, nu * dt.
  double step_length() const { return uav_speed * step_duration; }

  /// Throws ConfigError naming the first violated field.
  void validate() const;
};

enum class AdvantageTarget { kReturnToGo, kPerStep };

struct TrainingConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 5;
  double learning_rate = 1e-4;
  double value_coef = 0.014;  // beta
  double rms_decay = 0.99;
  double rms_epsilon = 1e-8;
  double grad_clip = 5.0;  // global L2 norm; <= 0 disables
  AdvantageTarget advantage_target = AdvantageTarget::kReturnToGo;
  std::size_t checkpoint_interval = 10;
  // Layer widths; 0 means "same as message_dim".
  std::size_t ffn_width = 0;
  std::size_t decoder_hidden = 0;
  std::size_t key_width = 0;
  std::size_t threads = 1;

  void validate() const;
};

struct Config {
  WorldConfig world;
  TrainingConfig training;

  void validate() const {
    world.validate();
    training.validate();
  }
};

/// Parses an INI-style file with [world] and [training] sections whose keys
/// match the struct field names. Unknown keys and unparsable values raise
/// ConfigError with file and field context. Missing keys keep defaults.
Config load_config(const std::filesystem::path& path);
Config parse_config(const std::string& text, const std::string& origin = "<string>");

/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const Config& config);

/// FNV-1a 64 over the canonical text, as 16 hex digits. Ignores `epochs`
/// and `threads`, which change neither a run's trajectory nor its resume
/// compatibility.
std::string config_hash(const Config& config);

std::string to_string(AdvantageTarget target);

}  // namespace swarm
