#include "marsmc/pipeline/cloud_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "marsmc/errors.hpp"

namespace marsmc::pipeline {
namespace {

static_assert(std::endian::native == std::endian::little, "cloud format assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'S', 'M', 'C'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_block(std::ostream& out, const double* p, std::size_t count) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
}

template <typename T>
T take(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("particle cloud: truncated file");
  return v;
}

void take_block(std::istream& in, double* p, std::size_t count) {
  if (!in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(double))))
    throw DataError("particle cloud: truncated file");
}

}  // namespace

void write_cloud(std::ostream& out, const ParticleCloud& cloud) {
  const auto P = static_cast<std::uint32_t>(cloud.size());
  const auto k = static_cast<std::uint32_t>(cloud.dim());
  out.write(kMagic, 4);
  put(out, kCloudFormatVersion);
  put(out, P);
  put(out, k);
  put(out, static_cast<std::uint64_t>(cloud.stage));
  put(out, cloud.rho);
  put_block(out, cloud.params.data(), static_cast<std::size_t>(cloud.params.size()));
  put_block(out, cloud.weights.data(), P);
  put_block(out, cloud.logliks.data(), P);
  put_block(out, cloud.logpriors.data(), P);
  if (!out) throw DataError("particle cloud: write failed");
}

void write_cloud(const std::filesystem::path& path, const ParticleCloud& cloud) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_cloud(out, cloud);
}

ParticleCloud read_cloud(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw DataError("particle cloud: bad magic");
  const auto version = take<std::uint32_t>(in);
  if (version != kCloudFormatVersion)
    throw DataError("particle cloud: unsupported version " + std::to_string(version));
  const auto P = take<std::uint32_t>(in);
  const auto k = take<std::uint32_t>(in);
  ParticleCloud cloud;
  cloud.stage = static_cast<std::size_t>(take<std::uint64_t>(in));
  cloud.rho = take<double>(in);
  cloud.params.resize(k, P);
  cloud.weights.resize(P);
  cloud.logliks.resize(P);
  cloud.logpriors.resize(P);
  take_block(in, cloud.params.data(), static_cast<std::size_t>(k) * P);
  take_block(in, cloud.weights.data(), P);
  take_block(in, cloud.logliks.data(), P);
  take_block(in, cloud.logpriors.data(), P);
  return cloud;
}

ParticleCloud read_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_cloud(in);
}

}  // namespace marsmc::pipeline
