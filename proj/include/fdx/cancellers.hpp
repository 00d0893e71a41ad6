#pragma once

// Digital self-interference cancellers. All four share one machinery: build a
// convolution matrix of basis functions of the known transmit samples, fit
// the observed receive samples by least squares during calibration, and
// subtract the modelled contribution afterwards.
//
//   Linear          basis {x}                     M coefficients
//   WidelyLinear    basis {x, conj(x)}            2M
//   NonlinearPH     basis {psi_p(x), odd p <= P}  M * ceil(P/2)
//   JointAugmented  {x, conj(x), psi_3.., psi_P}  2M + M * (ceil(P/2) - 1)
//
// with psi_p(x) = |x|^(p-1) x.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdx/linalg.hpp"
#include "fdx/signal.hpp"

namespace fdx {

// ---------------------------------------------------------------------------
// Kinds
// ---------------------------------------------------------------------------

enum class CancellerKind { Linear, WidelyLinear, NonlinearPH, JointAugmented };

inline const char* canceller_name(CancellerKind k) {
  switch (k) {
    case CancellerKind::Linear: return "linear";
    case CancellerKind::WidelyLinear: return "widely-linear";
    case CancellerKind::NonlinearPH: return "nonlinear-ph";
    case CancellerKind::JointAugmented: return "joint";
  }
  throw std::logic_error("canceller_name: unreachable");
}

inline CancellerKind canceller_from_name(const std::string& name) {
  if (name == "linear") return CancellerKind::Linear;
  if (name == "widely-linear") return CancellerKind::WidelyLinear;
  if (name == "nonlinear-ph") return CancellerKind::NonlinearPH;
  if (name == "joint") return CancellerKind::JointAugmented;
  throw std::invalid_argument("unknown canceller kind '" + name + "'");
}

/// Number of model coefficients for a kind at memory M and order P.
inline int canceller_columns(CancellerKind kind, int m, int p) {
  const int blocks = (p + 1) / 2;  // odd orders 1, 3, ..., P
  switch (kind) {
    case CancellerKind::Linear: return m;
    case CancellerKind::WidelyLinear: return 2 * m;
    case CancellerKind::NonlinearPH: return m * blocks;
    case CancellerKind::JointAugmented: return 2 * m + m * (blocks - 1);
  }
  throw std::logic_error("canceller_columns: unreachable");
}

// ---------------------------------------------------------------------------
// Basis matrices
// ---------------------------------------------------------------------------

/// Toeplitz convolution matrix: row n-(M-1) holds [x(n), ..., x(n-M+1)] for
/// n = M-1 ... len-1, so multiplying by taps h yields the valid region of
/// the convolution h * x.
inline ComplexMatrix build_linear_matrix(const cvec& x, int m) {
  if (m <= 0) throw std::invalid_argument("build_linear_matrix: memory must be positive");
  if (x.size() < std::size_t(m)) {
    throw std::invalid_argument("build_linear_matrix: signal shorter than the memory");
  }
  const std::size_t rows = x.size() - std::size_t(m) + 1;
  ComplexMatrix a(rows, m);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t n = r + std::size_t(m) - 1;
    for (int c = 0; c < m; ++c) a(r, c) = x[n - std::size_t(c)];
  }
  return a;
}

namespace detail {

inline cvec conj_vec(const cvec& x) {
  cvec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::conj(x[i]);
  return out;
}

inline cvec ph_basis_vec(const cvec& x, int p) {
  cvec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::pow(std::abs(x[i]), p - 1) * x[i];
  }
  return out;
}

inline ComplexMatrix hcat(const std::vector<ComplexMatrix>& blocks) {
  Eigen::Index rows = blocks.front().rows();
  Eigen::Index cols = 0;
  for (const auto& b : blocks) cols += b.cols();
  ComplexMatrix a(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    a.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return a;
}

}  // namespace detail

/// [X | X*]: the widely linear (conjugate-augmented) basis.
inline ComplexMatrix build_augmented_matrix(const cvec& x, int m) {
  return detail::hcat({build_linear_matrix(x, m), build_linear_matrix(detail::conj_vec(x), m)});
}

/// One block per odd order p <= P of the parallel-Hammerstein basis; the
/// p = 1 block is dropped when include_linear is false.
inline ComplexMatrix build_ph_matrix(const cvec& x, int p, int m, bool include_linear) {
  if (p < 1 || p % 2 == 0) {
    throw std::invalid_argument("build_ph_matrix: order must be odd and positive");
  }
  std::vector<ComplexMatrix> blocks;
  for (int q = include_linear ? 1 : 3; q <= p; q += 2) {
    blocks.push_back(build_linear_matrix(detail::ph_basis_vec(x, q), m));
  }
  if (blocks.empty()) {
    throw std::invalid_argument("build_ph_matrix: no basis blocks (P < 3 without linear)");
  }
  return detail::hcat(blocks);
}

/// [X | X* | psi_3 ... psi_P]: the joint augmented nonlinear basis.
inline ComplexMatrix build_joint_matrix(const cvec& x, int p, int m) {
  if (p < 3 || p % 2 == 0) {
    throw std::invalid_argument(
        "build_joint_matrix: order must be odd and at least 3 (otherwise use widely-linear)");
  }
  return detail::hcat({build_augmented_matrix(x, m), build_ph_matrix(x, p, m, false)});
}

inline ComplexMatrix build_canceller_matrix(CancellerKind kind, const cvec& x, int m, int p) {
  switch (kind) {
    case CancellerKind::Linear: return build_linear_matrix(x, m);
    case CancellerKind::WidelyLinear: return build_augmented_matrix(x, m);
    case CancellerKind::NonlinearPH: return build_ph_matrix(x, p, m, true);
    case CancellerKind::JointAugmented: return build_joint_matrix(x, p, m);
  }
  throw std::logic_error("build_canceller_matrix: unreachable");
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

struct CancellerEstimate {
  CancellerKind kind = CancellerKind::Linear;
  int memory = 0;
  int order = 1;
  std::size_t delay = 0;  ///< bulk delay of y relative to x found at calibration
  ComplexVector theta;

  /// Linear-response taps h1 (all kinds).
  cvec h1() const { return slice(0); }
  /// Conjugate-response taps h2 (widely-linear and joint kinds).
  cvec h2() const {
    if (kind != CancellerKind::WidelyLinear && kind != CancellerKind::JointAugmented) {
      throw std::logic_error("h2: estimate has no conjugate block");
    }
    return slice(1);
  }
  /// Effective PH taps for odd order p >= 3 (PH and joint kinds).
  cvec f_eff(int p) const {
    if (p < 3 || p % 2 == 0 || p > order) throw std::invalid_argument("f_eff: bad order");
    int block;
    if (kind == CancellerKind::NonlinearPH) {
      block = (p - 1) / 2;
    } else if (kind == CancellerKind::JointAugmented) {
      block = 2 + (p - 3) / 2;
    } else {
      throw std::logic_error("f_eff: estimate has no nonlinear blocks");
    }
    return slice(block);
  }

 private:
  cvec slice(int block) const {
    cvec out(static_cast<std::size_t>(memory));
    for (int i = 0; i < memory; ++i) out[std::size_t(i)] = theta(block * memory + i);
    return out;
  }
};

/// One-time bulk-delay search over lags [0, max_lag] of the cross-correlation
/// between x and y. Returns the earliest lag whose correlation magnitude is
/// within 6 dB of the global peak (leading-edge rule): under multipath a
/// later echo can slightly exceed the first arrival, and locking to it would
/// push the first tap outside the canceller's model window.
inline std::size_t align_delay(const cvec& x, const cvec& y, std::size_t max_lag) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("align_delay: signals must be nonempty and equal length");
  }
  max_lag = std::min(max_lag, y.size() - 1);
  std::vector<double> mag(max_lag + 1, 0.0);
  double best_mag = 0.0;
  for (std::size_t d = 0; d <= max_lag; ++d) {
    cd acc(0, 0);
    for (std::size_t n = 0; n + d < y.size(); ++n) acc += std::conj(x[n]) * y[n + d];
    mag[d] = std::abs(acc) / double(y.size() - d);
    best_mag = std::max(best_mag, mag[d]);
  }
  const double edge = best_mag * 0.5;  // 6 dB below the peak in power
  for (std::size_t d = 0; d <= max_lag; ++d) {
    if (mag[d] >= edge) return d;
  }
  return 0;
}

/// Fit a canceller of the given kind on a calibration frame (transmit
/// reference x_cal against detector observation y_cal, no signal of interest
/// present). Resolves the bulk delay, trims the first M-1 edge rows, solves
/// the least-squares system and partitions the coefficients.
inline CancellerEstimate estimate(CancellerKind kind, const ComplexSignal& x_cal,
                                  const ComplexSignal& y_cal, int m, int p) {
  if (x_cal.samples.size() != y_cal.samples.size()) {
    throw std::invalid_argument("estimate: calibration signals differ in length");
  }
  if (m <= 0) throw std::invalid_argument("estimate: memory must be positive");
  const int cols = canceller_columns(kind, m, p);
  const std::size_t need = 10u * std::size_t(cols);
  if (x_cal.samples.size() < need) {
    throw std::invalid_argument("estimate: calibration too short (" +
                                std::to_string(x_cal.samples.size()) + " samples, need at least " +
                                std::to_string(need) + " for " + canceller_name(kind) + ")");
  }

  CancellerEstimate est;
  est.kind = kind;
  est.memory = m;
  est.order =
      (kind == CancellerKind::Linear || kind == CancellerKind::WidelyLinear) ? 1 : p;
  est.delay = align_delay(x_cal.samples, y_cal.samples, 2u * std::size_t(m));

  // Advance y by the bulk delay, then drop the matrix's M-1 edge rows.
  const std::size_t usable = x_cal.samples.size() - est.delay;
  cvec x(x_cal.samples.begin(), x_cal.samples.begin() + std::ptrdiff_t(usable));
  const ComplexMatrix a = build_canceller_matrix(kind, x, m, p);
  ComplexVector rhs(a.rows());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    rhs(r) = y_cal.samples[std::size_t(r) + std::size_t(m) - 1 + est.delay];
  }
  est.theta = ls_solve(a, rhs);
  return est;
}

// ---------------------------------------------------------------------------
// Cancellation
// ---------------------------------------------------------------------------

/// Subtract the modelled self-interference: y(n) - [basis(x) theta](n) over
/// the valid region (the first M-1 samples are dropped from both signals,
/// plus the calibration-time bulk delay).
inline ComplexSignal cancel(const CancellerEstimate& est, const ComplexSignal& x,
                            const ComplexSignal& y) {
  if (x.samples.size() != y.samples.size()) {
    throw std::invalid_argument("cancel: x and y differ in length");
  }
  if (est.theta.size() != canceller_columns(est.kind, est.memory, est.order)) {
    throw std::invalid_argument("cancel: estimate shape inconsistent with its kind");
  }
  if (x.samples.size() < std::size_t(est.memory) + est.delay) {
    throw std::invalid_argument("cancel: signal shorter than the canceller memory");
  }
  const std::size_t usable = x.samples.size() - est.delay;
  cvec xs(x.samples.begin(), x.samples.begin() + std::ptrdiff_t(usable));
  const ComplexMatrix a = build_canceller_matrix(est.kind, xs, est.memory, est.order);
  const ComplexVector modelled = a * est.theta;
  ComplexSignal out;
  out.sample_rate = y.sample_rate;
  out.samples.resize(std::size_t(a.rows()));
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    out.samples[std::size_t(r)] =
        y.samples[std::size_t(r) + std::size_t(est.memory) - 1 + est.delay] - modelled(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Plain-text coefficient file: a short header naming kind, memory, order,
/// delay and count, then one complex coefficient per line as "re im".
inline void save_estimate(const CancellerEstimate& est, std::ostream& out) {
  out << "# canceller estimate v1\n";
  out << "kind " << canceller_name(est.kind) << "\n";
  out << "memory " << est.memory << "\n";
  out << "order " << est.order << "\n";
  out << "delay " << est.delay << "\n";
  out << "count " << est.theta.size() << "\n";
  out << std::setprecision(17) << std::scientific;
  for (Eigen::Index i = 0; i < est.theta.size(); ++i) {
    out << est.theta(i).real() << " " << est.theta(i).imag() << "\n";
  }
}

inline void save_estimate(const CancellerEstimate& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_estimate: cannot open '" + path + "'");
  save_estimate(est, out);
  if (!out) throw std::runtime_error("save_estimate: write failed for '" + path + "'");
}

inline CancellerEstimate load_estimate(std::istream& in) {
  auto expect_key = [&](const char* key) {
    std::string word;
    if (!(in >> word) || word != key) {
      throw std::invalid_argument(std::string("load_estimate: expected '") + key + "' field");
    }
  };
  std::string line;
  if (!std::getline(in, line) || line.rfind("# canceller estimate v1", 0) != 0) {
    throw std::invalid_argument("load_estimate: missing or unsupported header");
  }
  CancellerEstimate est;
  std::string name;
  expect_key("kind");
  in >> name;
  est.kind = canceller_from_name(name);
  expect_key("memory");
  in >> est.memory;
  expect_key("order");
  in >> est.order;
  expect_key("delay");
  in >> est.delay;
  expect_key("count");
  Eigen::Index count = 0;
  in >> count;
  if (!in || est.memory <= 0 || count <= 0) {
    throw std::invalid_argument("load_estimate: malformed header fields");
  }
  if (count != canceller_columns(est.kind, est.memory, est.order)) {
    throw std::invalid_argument("load_estimate: coefficient count does not match kind/M/P");
  }
  est.theta.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    double re = 0.0, im = 0.0;
    if (!(in >> re >> im)) {
      throw std::invalid_argument("load_estimate: truncated coefficient list");
    }
    est.theta(i) = cd(re, im);
  }
  return est;
}

inline CancellerEstimate load_estimate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_estimate: cannot open '" + path + "'");
  return load_estimate(in);
}

}  // namespace fdx
