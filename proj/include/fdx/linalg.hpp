#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "fdx/signal.hpp"

namespace fdx {

/// Dense complex matrix/vector aliases. Eigen's default column-major storage
/// is kept; regressor matrices are built row-per-sample, column-per-basis.
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

class rank_deficient_error : public std::runtime_error {
 public:
  rank_deficient_error(Eigen::Index rank, Eigen::Index cols)
      : std::runtime_error("ls_solve: rank-deficient system (rank " + std::to_string(rank) +
                           " of " + std::to_string(cols) + " columns)"),
        rank_(rank),
        cols_(cols) {}
  Eigen::Index rank() const { return rank_; }
  Eigen::Index cols() const { return cols_; }

 private:
  Eigen::Index rank_;
  Eigen::Index cols_;
};

/// Least-squares solve min ||A theta - y|| through column-pivoted Householder
/// QR (never explicit normal equations). An optional Tikhonov ridge solves the
/// augmented stack [A; sqrt(ridge) I] instead, which is always full rank.
inline ComplexVector ls_solve(const ComplexMatrix& a, const ComplexVector& y, double ridge = 0.0) {
  if (a.rows() != y.rows()) throw std::invalid_argument("ls_solve: row count mismatch");
  if (a.cols() == 0) throw std::invalid_argument("ls_solve: empty system");
  if (a.rows() < a.cols()) throw std::invalid_argument("ls_solve: underdetermined system");
  if (ridge < 0.0) throw std::invalid_argument("ls_solve: negative ridge");
  if (ridge > 0.0) {
    ComplexMatrix aug(a.rows() + a.cols(), a.cols());
    aug.topRows(a.rows()) = a;
    aug.bottomRows(a.cols()) =
        std::sqrt(ridge) * ComplexMatrix::Identity(a.cols(), a.cols());
    ComplexVector rhs = ComplexVector::Zero(aug.rows());
    rhs.head(y.rows()) = y;
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(aug);
    return qr.solve(rhs);
  }
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(a);
  if (qr.rank() < a.cols()) throw rank_deficient_error(qr.rank(), a.cols());
  return qr.solve(y);
}

inline ComplexVector to_eigen(const cvec& v) {
  ComplexVector out(Eigen::Index(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[Eigen::Index(i)] = v[i];
  return out;
}

inline cvec from_eigen(const ComplexVector& v) {
  cvec out(std::size_t(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[std::size_t(i)] = v[i];
  return out;
}

}  // namespace fdx
