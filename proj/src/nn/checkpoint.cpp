#include "swarm/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "swarm/errors.hpp"

namespace swarm::nn {
namespace {

constexpr const char* kMagic = "swarm-checkpoint";
constexpr int kVersion = 1;

void put_double(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  out.write(bytes, 8);
}

double get_double(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& why) {
  throw IoError("checkpoint '" + path.string() + "': " + why);
}

}  // namespace

void save_parameters(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out << kMagic << ' ' << kVersion << '\n' << params.count() << '\n';
  for (std::size_t p = 0; p < params.count(); ++p) {
    const auto& shape = params.tensor(p).shape;
    out << params.name(p) << ' ' << shape.size();
    for (auto d : shape) out << ' ' << d;
    out << '\n';
  }
  out << "data\n";
  for (std::size_t p = 0; p < params.count(); ++p) {
    for (double v : params.tensor(p).data) put_double(out, v);
  }
  if (!out) fail(path, "write failed");
}

ParameterSet load_parameters(const std::filesystem::path& path, const ParameterSet& layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  std::string line;
  std::getline(in, line);
  {
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != kMagic || version != kVersion) fail(path, "not a version-1 checkpoint");
  }
  std::size_t count = 0;
  std::getline(in, line);
  std::istringstream(line) >> count;
  if (count != layout.count()) {
    fail(path, "holds " + std::to_string(count) + " tensors, expected " +
                   std::to_string(layout.count()));
  }
  for (std::size_t p = 0; p < count; ++p) {
    std::getline(in, line);
    std::istringstream row(line);
    std::string name;
    std::size_t rank = 0;
    row >> name >> rank;
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) row >> d;
    if (!row || name != layout.name(p) || shape != layout.tensor(p).shape) {
      fail(path, "tensor " + std::to_string(p) + " ('" + name + "') does not match layout '" +
                     layout.name(p) + "'");
    }
  }
  std::getline(in, line);
  if (line != "data") fail(path, "missing data marker");
  ParameterSet out = layout.zeros_like();
  for (std::size_t p = 0; p < out.count(); ++p) {
    for (auto& v : out.tensor(p).data) v = get_double(in);
  }
  if (!in) fail(path, "truncated data section");
  return out;
}

void write_manifest(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("manifest '" + path.string() + "': cannot open for writing");
  for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
  if (!out) throw IoError("manifest '" + path.string() + "': write failed");
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("manifest '" + path.string() + "': cannot open for reading");
  std::map<std::string, std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    entries[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return entries;
}

}  // namespace swarm::nn
