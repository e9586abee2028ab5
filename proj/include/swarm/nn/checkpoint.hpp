#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include "swarm/nn/tensor.hpp"

namespace swarm::nn {

/// Binary checkpoint: a text header
///   swarm-checkpoint 1
///   <count>
///   <name> <rank> <dim>...      (one line per tensor, canonical order)
///   data
/// followed by every tensor's values as little-endian IEEE-754 doubles.
void save_parameters(const std::filesystem::path& path, const ParameterSet& params);

/// Reads a checkpoint and checks it against `layout` (names and shapes must
/// match exactly). Throws IoError with the path on any mismatch.
ParameterSet load_parameters(const std::filesystem::path& path, const ParameterSet& layout);

/// Sidecar text manifest: key=value lines (config_hash, epoch, ...).
void write_manifest(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& entries);
std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);

}  // namespace swarm::nn
