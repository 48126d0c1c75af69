#pragma once

// Mixed causal-noncausal VAR specification:
//
//   Psi(L) Phi(L^-1) y_t = u_t,
//   Psi(L)    = I - Psi_1 L - ... - Psi_r L^r
//   Phi(L^-1) = I - Phi_1 L^-1 - ... - Phi_s L^-s
//
// Parameter vector layout (k entries):
//   vec(Psi_1) .. vec(Psi_r), vec(Phi_1) .. vec(Phi_s)   column-major n*n blocks
//   vech(Sigma)                                          lower triangle, column-major
//   nu                                                   StudentT / SkewedT
//   alpha (n entries)                                    SkewedT

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace marsmc {

enum class ErrorDist { Cauchy, StudentT, SkewedT };

std::string_view to_string(ErrorDist dist);
/// Accepts "cauchy", "student_t" (also "studentt", "t"), "skewed_t" (also "skewedt", "skew_t").
ErrorDist parse_error_dist(std::string_view name);

/// Spectral radius margin for the stationarity indicator.
inline constexpr double kStationarityMargin = 1e-8;

struct ModelSpec {
  int n = 1;
  int r = 0;
  int s = 0;
  ErrorDist dist = ErrorDist::StudentT;

  /// Throws ModelError unless n >= 1, r, s >= 0 and r + s >= 1.
  void validate() const;
  std::size_t num_params() const;
  /// e.g. "VMAR(1,1)-cauchy"
  std::string label() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct ParamLayout {
  std::size_t psi = 0;
  std::size_t phi = 0;
  std::size_t scale = 0;
  std::optional<std::size_t> nu;
  std::optional<std::size_t> alpha;
  std::size_t size = 0;

  static ParamLayout for_spec(const ModelSpec& spec);
};

/// Human-readable names, e.g. "Psi1[1,2]", "Sigma[2,1]", "nu", "alpha[1]".
std::vector<std::string> param_names(const ModelSpec& spec);

struct ModelParams {
  std::vector<Eigen::MatrixXd> psi;
  std::vector<Eigen::MatrixXd> phi;
  Eigen::MatrixXd sigma;
  std::optional<double> nu;
  std::optional<Eigen::VectorXd> alpha;
};

struct ParamVector {
  ModelSpec spec;
  Eigen::VectorXd theta;
};

/// Validates shapes, SPD sigma and nu/alpha presence; throws ModelError.
ParamVector encode_params(const ModelParams& params, const ModelSpec& spec);
ModelParams decode_params(const ModelSpec& spec, std::span<const double> theta);
inline ModelParams decode_params(const ParamVector& p) {
  return decode_params(p.spec, std::span<const double>(p.theta.data(), p.theta.size()));
}

/// Spectral radius of the companion matrix of (A_1 .. A_p); 0 for p == 0.
double companion_spectral_radius(std::span<const double> blocks, int n, int order);

/// Both companion matrices have spectral radius < 1 - kStationarityMargin.
bool is_stationary(const ModelSpec& spec, std::span<const double> theta);
inline bool is_stationary(const ParamVector& p) {
  return is_stationary(p.spec, std::span<const double>(p.theta.data(), p.theta.size()));
}

/// T x n observations; labels optionally carry a date column through the pipeline.
struct SeriesData {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
  std::vector<std::string> labels;
  std::string label_header;

  std::size_t T() const { return static_cast<std::size_t>(values.rows()); }
  int n() const { return static_cast<int>(values.cols()); }
};

/// (T - r - s) x n residuals; row j is the residual at time index r + j (0-based),
/// i.e. the first residual is at 1-based time r + 1. Throws ModelError if
/// T <= r + s or the dimensions disagree.
Eigen::MatrixXd residuals(const ModelSpec& spec, std::span<const double> theta,
                          const SeriesData& data);

/// Lower-level filter: writes residual columns into `out` (n columns of
/// T - r - s entries, column stride `out_stride`) using `scratch` of at least
/// n * (T - s) doubles. `y` is column-major T x n.
void filter_residuals(const ModelSpec& spec, std::span<const double> theta, const double* y,
                      std::size_t T, double* out, std::size_t out_stride, double* scratch);

/// In-place Cholesky of the n x n matrix decoded from vech. Writes the lower
/// factor column-major into `L` (n*n). Returns false if not positive definite.
bool cholesky_from_vech(std::span<const double> vech, int n, double* L);

}  // namespace marsmc
