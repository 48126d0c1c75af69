#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "marsmc/smc.hpp"

namespace marsmc::pipeline {

/// Binary particle cloud, little-endian:
///   header (16 bytes): "MSMC", u32 version, u32 P, u32 k
///   u64 stage, f64 rho
///   params (k x P, column-major f64), weights, logliks, logpriors (P f64 each)
inline constexpr std::uint32_t kCloudFormatVersion = 1;

void write_cloud(std::ostream& out, const ParticleCloud& cloud);
void write_cloud(const std::filesystem::path& path, const ParticleCloud& cloud);
/// Throws DataError on a bad magic, unsupported version or truncated payload.
ParticleCloud read_cloud(std::istream& in);
ParticleCloud read_cloud(const std::filesystem::path& path);

}  // namespace marsmc::pipeline
