#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "marsmc/priors.hpp"
#include "marsmc/select.hpp"
#include "marsmc/simulate.hpp"
#include "marsmc/smc.hpp"

namespace marsmc::pipeline {

using Json = nlohmann::json;

/// Every accepted key with its default value. Keys absent here are rejected.
const Json& default_config();

/// Resolved run configuration: defaults <- config file <- --set overrides.
class RunConfig {
 public:
  RunConfig();
  explicit RunConfig(Json resolved);

  /// Loads a config file; a run manifest is also accepted (its embedded config is used).
  static RunConfig from_file(const std::filesystem::path& path);

  /// Recursively merges `overlay`, rejecting unknown keys and object/scalar mismatches.
  void merge(const Json& overlay);
  /// "a.b.c=value"; value is parsed as JSON when possible, else taken as a string.
  void set(const std::string& assignment);

  const Json& json() const { return json_; }

  SmcConfig smc() const;
  PriorConfig prior() const;
  /// Model orders/distribution from "model"; n is supplied by the data.
  ModelSpec model(int n) const;
  CandidateGrid grid() const;
  DgpSpec dgp() const;
  int detrend_degree() const;
  int preprocess_detrend_degree() const;
  std::string input() const;
  std::filesystem::path output_dir() const;
  std::string mc_mode() const;
  std::size_t mc_replications() const;
  bool dump_cloud() const;
  bool checkpoint() const;

  /// Typed accessors for every section; throws ConfigError on the first problem.
  void validate(const std::string& command) const;

 private:
  Json json_;
};

}  // namespace marsmc::pipeline
