#include "marsmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "marsmc/errors.hpp"
#include "marsmc/kernels.hpp"

namespace marsmc {

std::string_view to_string(ErrorDist dist) {
  switch (dist) {
    case ErrorDist::Cauchy:
      return "cauchy";
    case ErrorDist::StudentT:
      return "student_t";
    case ErrorDist::SkewedT:
      return "skewed_t";
  }
  return "unknown";
}

ErrorDist parse_error_dist(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "cauchy") return ErrorDist::Cauchy;
  if (lower == "student_t" || lower == "studentt" || lower == "t" || lower == "student-t")
    return ErrorDist::StudentT;
  if (lower == "skewed_t" || lower == "skewedt" || lower == "skew_t" || lower == "skewed-t")
    return ErrorDist::SkewedT;
  throw ModelError("unknown error distribution '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  if (n < 1) throw ModelError("series dimension n must be >= 1");
  if (r < 0 || s < 0) throw ModelError("orders r and s must be non-negative");
  if (r + s < 1) throw ModelError("r + s must be >= 1");
}

std::size_t ModelSpec::num_params() const { return ParamLayout::for_spec(*this).size; }

std::string ModelSpec::label() const {
  return (n == 1 ? "MAR(" : "VMAR(") + std::to_string(r) + "," + std::to_string(s) + ")-" +
         std::string(to_string(dist));
}

ParamLayout ParamLayout::for_spec(const ModelSpec& spec) {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(spec.n);
  ParamLayout layout;
  layout.psi = 0;
  layout.phi = n * n * static_cast<std::size_t>(spec.r);
  layout.scale = layout.phi + n * n * static_cast<std::size_t>(spec.s);
  std::size_t next = layout.scale + n * (n + 1) / 2;
  if (spec.dist != ErrorDist::Cauchy) layout.nu = next++;
  if (spec.dist == ErrorDist::SkewedT) {
    layout.alpha = next;
    next += n;
  }
  layout.size = next;
  return layout;
}

std::vector<std::string> param_names(const ModelSpec& spec) {
  const ParamLayout layout = ParamLayout::for_spec(spec);
  std::vector<std::string> names;
  names.reserve(layout.size);
  auto idx = [](int i, int j) { return "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]"; };
  for (int lag = 1; lag <= spec.r; ++lag)
    for (int col = 0; col < spec.n; ++col)
      for (int row = 0; row < spec.n; ++row) names.push_back("Psi" + std::to_string(lag) + idx(row, col));
  for (int lead = 1; lead <= spec.s; ++lead)
    for (int col = 0; col < spec.n; ++col)
      for (int row = 0; row < spec.n; ++row) names.push_back("Phi" + std::to_string(lead) + idx(row, col));
  for (int col = 0; col < spec.n; ++col)
    for (int row = col; row < spec.n; ++row) names.push_back("Sigma" + idx(row, col));
  if (layout.nu) names.emplace_back("nu");
  if (layout.alpha)
    for (int i = 0; i < spec.n; ++i) names.push_back("alpha[" + std::to_string(i + 1) + "]");
  return names;
}

namespace {

std::size_t vech_index(int row, int col, int n) {
  return static_cast<std::size_t>(col * n - col * (col - 1) / 2 + (row - col));
}

void check_block(const Eigen::MatrixXd& m, int n, const char* what) {
  if (m.rows() != n || m.cols() != n)
    throw ModelError(std::string(what) + " block must be " + std::to_string(n) + "x" + std::to_string(n));
  if (!m.allFinite()) throw ModelError(std::string(what) + " block has non-finite entries");
}

}  // namespace

bool cholesky_from_vech(std::span<const double> vech, int n, double* L) {
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) L[j * n + i] = 0.0;
  }
  for (int j = 0; j < n; ++j) {
    double d = vech[vech_index(j, j, n)];
    for (int k = 0; k < j; ++k) d -= L[k * n + j] * L[k * n + j];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    L[j * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double v = vech[vech_index(i, j, n)];
      for (int k = 0; k < j; ++k) v -= L[k * n + i] * L[k * n + j];
      L[j * n + i] = v / ljj;
    }
  }
  return true;
}

ParamVector encode_params(const ModelParams& params, const ModelSpec& spec) {
  const ParamLayout layout = ParamLayout::for_spec(spec);
  const int n = spec.n;
  if (static_cast<int>(params.psi.size()) != spec.r)
    throw ModelError("expected " + std::to_string(spec.r) + " causal blocks, got " + std::to_string(params.psi.size()));
  if (static_cast<int>(params.phi.size()) != spec.s)
    throw ModelError("expected " + std::to_string(spec.s) + " noncausal blocks, got " + std::to_string(params.phi.size()));
  for (const auto& m : params.psi) check_block(m, n, "Psi");
  for (const auto& m : params.phi) check_block(m, n, "Phi");
  check_block(params.sigma, n, "Sigma");
  const double sym_tol = 1e-12 * std::max(1.0, params.sigma.cwiseAbs().maxCoeff());
  if ((params.sigma - params.sigma.transpose()).cwiseAbs().maxCoeff() > sym_tol)
    throw ModelError("Sigma must be symmetric");

  ParamVector out{spec, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size))};
  double* theta = out.theta.data();
  std::size_t pos = layout.psi;
  for (const auto& m : params.psi)
    for (Eigen::Index k = 0; k < m.size(); ++k) theta[pos++] = m.data()[k];
  pos = layout.phi;
  for (const auto& m : params.phi)
    for (Eigen::Index k = 0; k < m.size(); ++k) theta[pos++] = m.data()[k];
  pos = layout.scale;
  for (int col = 0; col < n; ++col)
    for (int row = col; row < n; ++row) theta[pos++] = params.sigma(row, col);

  std::vector<double> L(static_cast<std::size_t>(n * n));
  if (!cholesky_from_vech(std::span<const double>(theta + layout.scale, n * (n + 1) / 2), n, L.data()))
    throw ModelError("Sigma is not symmetric positive definite");

  if (layout.nu) {
    if (!params.nu) throw ModelError(std::string(to_string(spec.dist)) + " requires nu");
    if (!(*params.nu > 2.0)) throw ModelError("nu must be > 2");
    theta[*layout.nu] = *params.nu;
  } else if (params.nu) {
    throw ModelError("cauchy model takes no nu parameter");
  }
  if (layout.alpha) {
    if (!params.alpha) throw ModelError("skewed_t requires alpha");
    if (params.alpha->size() != n) throw ModelError("alpha must have n entries");
    if (n == 1 && !((*params.alpha)(0) > 0.0))
      throw ModelError("univariate skewness alpha must be > 0");
    for (int i = 0; i < n; ++i) theta[*layout.alpha + static_cast<std::size_t>(i)] = (*params.alpha)(i);
  } else if (params.alpha) {
    throw ModelError("alpha is only defined for skewed_t");
  }
  return out;
}

ModelParams decode_params(const ModelSpec& spec, std::span<const double> theta) {
  const ParamLayout layout = ParamLayout::for_spec(spec);
  if (theta.size() != layout.size)
    throw ModelError("parameter vector has " + std::to_string(theta.size()) + " entries, expected " +
                     std::to_string(layout.size));
  const int n = spec.n;
  ModelParams out;
  std::size_t pos = layout.psi;
  for (int i = 0; i < spec.r; ++i, pos += static_cast<std::size_t>(n * n))
    out.psi.push_back(Eigen::Map<const Eigen::MatrixXd>(theta.data() + pos, n, n));
  pos = layout.phi;
  for (int i = 0; i < spec.s; ++i, pos += static_cast<std::size_t>(n * n))
    out.phi.push_back(Eigen::Map<const Eigen::MatrixXd>(theta.data() + pos, n, n));
  out.sigma.resize(n, n);
  pos = layout.scale;
  for (int col = 0; col < n; ++col)
    for (int row = col; row < n; ++row) {
      out.sigma(row, col) = theta[pos];
      out.sigma(col, row) = theta[pos];
      ++pos;
    }
  if (layout.nu) out.nu = theta[*layout.nu];
  if (layout.alpha) out.alpha = Eigen::Map<const Eigen::VectorXd>(theta.data() + *layout.alpha, n);
  return out;
}

double companion_spectral_radius(std::span<const double> blocks, int n, int order) {
  if (order == 0) return 0.0;
  const int dim = n * order;
  if (dim == 1) return std::abs(blocks[0]);
  if (dim == 2) {
    // 2x2: either n = 2, order 1 (column-major block) or n = 1, order 2.
    double a, b, c, d;
    if (n == 2) {
      a = blocks[0]; c = blocks[1]; b = blocks[2]; d = blocks[3];
    } else {
      a = blocks[0]; b = blocks[1]; c = 1.0; d = 0.0;
    }
    const double half_tr = 0.5 * (a + d);
    const double det = a * d - b * c;
    const double disc = half_tr * half_tr - det;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      return std::max(std::abs(half_tr + root), std::abs(half_tr - root));
    }
    return std::sqrt(det);
  }
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < order; ++i)
    companion.block(0, i * n, n, n) =
        Eigen::Map<const Eigen::MatrixXd>(blocks.data() + static_cast<std::size_t>(i * n * n), n, n);
  if (order > 1) companion.block(n, 0, n * (order - 1), n * (order - 1)).setIdentity();
  if (!companion.allFinite()) return std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stationary(const ModelSpec& spec, std::span<const double> theta) {
  const ParamLayout layout = ParamLayout::for_spec(spec);
  if (theta.size() != layout.size) return false;
  const std::size_t nn = static_cast<std::size_t>(spec.n * spec.n);
  const double bound = 1.0 - kStationarityMargin;
  const double causal =
      companion_spectral_radius(theta.subspan(layout.psi, nn * static_cast<std::size_t>(spec.r)), spec.n, spec.r);
  if (!(causal < bound)) return false;
  const double noncausal =
      companion_spectral_radius(theta.subspan(layout.phi, nn * static_cast<std::size_t>(spec.s)), spec.n, spec.s);
  return noncausal < bound;
}

void filter_residuals(const ModelSpec& spec, std::span<const double> theta, const double* y,
                      std::size_t T, double* out, std::size_t out_stride, double* scratch) {
  const ParamLayout layout = ParamLayout::for_spec(spec);
  const int n = spec.n;
  const std::size_t r = static_cast<std::size_t>(spec.r);
  const std::size_t s = static_cast<std::size_t>(spec.s);
  const std::size_t len_v = T - s;
  const std::size_t len_u = T - r - s;
  const auto& k = kernels::active();

  // v_t = y_t - sum_j Phi_j y_{t+j},  t = 0 .. T-s-1
  for (int a = 0; a < n; ++a) {
    double* va = scratch + static_cast<std::size_t>(a) * len_v;
    std::copy_n(y + static_cast<std::size_t>(a) * T, len_v, va);
    for (std::size_t j = 1; j <= s; ++j) {
      const double* block = theta.data() + layout.phi + (j - 1) * static_cast<std::size_t>(n * n);
      for (int b = 0; b < n; ++b) {
        const double c = block[b * n + a];
        if (c != 0.0) k.sub_scaled(va, y + static_cast<std::size_t>(b) * T + j, c, len_v);
      }
    }
  }
  // u_t = v_t - sum_i Psi_i v_{t-i},  t = r .. T-s-1
  for (int a = 0; a < n; ++a) {
    double* ua = out + static_cast<std::size_t>(a) * out_stride;
    std::copy_n(scratch + static_cast<std::size_t>(a) * len_v + r, len_u, ua);
    for (std::size_t i = 1; i <= r; ++i) {
      const double* block = theta.data() + layout.psi + (i - 1) * static_cast<std::size_t>(n * n);
      for (int b = 0; b < n; ++b) {
        const double c = block[b * n + a];
        if (c != 0.0) k.sub_scaled(ua, scratch + static_cast<std::size_t>(b) * len_v + r - i, c, len_u);
      }
    }
  }
}

Eigen::MatrixXd residuals(const ModelSpec& spec, std::span<const double> theta, const SeriesData& data) {
  const ParamLayout layout = ParamLayout::for_spec(spec);
  if (theta.size() != layout.size) throw ModelError("parameter vector size does not match the model");
  if (data.n() != spec.n) throw ModelError("data dimension does not match the model");
  const std::size_t T = data.T();
  const std::size_t lost = static_cast<std::size_t>(spec.r + spec.s);
  if (T <= lost) throw ModelError("sample too short: T must exceed r + s");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(T - lost), spec.n);
  std::vector<double> scratch(static_cast<std::size_t>(spec.n) * (T - static_cast<std::size_t>(spec.s)));
  filter_residuals(spec, theta, data.values.data(), T, out.data(), T - lost, scratch.data());
  return out;
}

}  // namespace marsmc
