#pragma once

// Dense symmetric / SPD matrix functions backed by a symmetric
// eigendecomposition. Everything here is a pure function over Eigen dense
// types; the scalar type is a template parameter (double everywhere in the
// engine).

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "msdpp/errors.hpp"

namespace msdpp {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Symmetric matrix (tangent vectors, sums of matrix logarithms).
template <typename Scalar>
using SymMatrix = DenseMatrix<Scalar>;
/// Symmetric positive definite matrix (similarity kernels, their exponentials).
template <typename Scalar>
using SpdMatrix = DenseMatrix<Scalar>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

inline constexpr double kDefaultSpdFloor = 1e-6;
inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kMaxExpArgument = 700.0;

/// Eigenvalues ascending, eigenvectors as orthonormal columns.
template <typename Scalar>
struct EigDecomp {
  DenseVector<Scalar> eigenvalues;
  DenseMatrix<Scalar> eigenvectors;

  /// Phi * diag(f(lambda)) * Phi^T, symmetrized.
  template <typename F>
  DenseMatrix<Scalar> reconstruct(F&& f) const {
    DenseVector<Scalar> mapped = eigenvalues.unaryExpr(std::forward<F>(f));
    DenseMatrix<Scalar> out =
        eigenvectors * mapped.asDiagonal() * eigenvectors.transpose();
    return (out + out.transpose()) * Scalar(0.5);
  }

  DenseMatrix<Scalar> reconstruct() const {
    return reconstruct([](Scalar x) { return x; });
  }
};

namespace detail {

template <typename Derived>
std::string describe(const Eigen::MatrixBase<Derived>& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols() << " matrix, |m|_F=" << m.norm()
     << ", max|m_ij|=" << (m.size() ? m.cwiseAbs().maxCoeff() : 0);
  return os.str();
}

}  // namespace detail

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m,
                  typename Derived::Scalar tol = kSymmetryTolerance) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const Scalar scale = std::max<Scalar>(Scalar(1), m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw ValidationError(std::string(what) + ": expected a non-empty square matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  if (!m.allFinite())
    throw ValidationError(std::string(what) + ": matrix has non-finite entries");
  if (!is_symmetric(m))
    throw ValidationError(std::string(what) + ": matrix is not symmetric (" +
                          detail::describe(m) + ")");
}

template <typename Derived>
EigDecomp<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require_symmetric(m, "sym_eig");
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(m.derived());
  if (solver.info() != Eigen::Success)
    throw NumericalError("sym_eig: eigensolver did not converge on " +
                         detail::describe(m));
  return {solver.eigenvalues(), solver.eigenvectors()};
}

template <typename Derived>
SymMatrix<typename Derived::Scalar> matrix_log(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eig(s);
  if (!(eig.eigenvalues(0) > Scalar(0))) {
    std::ostringstream os;
    os << "matrix_log: smallest eigenvalue " << eig.eigenvalues(0)
       << " is not positive (" << detail::describe(s) << ")";
    throw DomainError(os.str());
  }
  return eig.reconstruct([](Scalar x) { return std::log(x); });
}

template <typename Derived>
SpdMatrix<typename Derived::Scalar> matrix_exp(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const auto eig = sym_eig(a);
  const Scalar top = eig.eigenvalues(eig.eigenvalues.size() - 1);
  if (top > Scalar(kMaxExpArgument)) {
    std::ostringstream os;
    os << "matrix_exp: eigenvalue " << top << " overflows exp";
    throw NumericalError(os.str());
  }
  return eig.reconstruct([](Scalar x) { return std::exp(x); });
}

/// log det via Cholesky; falls back to eigenvalues when the factorization
/// breaks down on a matrix that is still numerically positive definite.
template <typename Derived>
typename Derived::Scalar log_det(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  require_symmetric(s, "log_det");
  Eigen::LLT<DenseMatrix<Scalar>> llt(s.derived());
  if (llt.info() == Eigen::Success) {
    const auto diag = llt.matrixLLT().diagonal();
    if ((diag.array() > Scalar(0)).all())
      return Scalar(2) * diag.array().log().sum();
  }
  const auto eig = sym_eig(s);
  if (!(eig.eigenvalues(0) > Scalar(0))) {
    std::ostringstream os;
    os << "log_det: matrix is not positive definite, smallest eigenvalue "
       << eig.eigenvalues(0);
    throw DomainError(os.str());
  }
  return eig.eigenvalues.array().log().sum();
}

template <typename Derived>
typename Derived::Scalar frobenius_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

/// Clamp eigenvalues from below at floor * (trace/dim) (or floor when the
/// mean diagonal is < 1). Matrices already above the floor are returned
/// unchanged.
template <typename Derived>
SpdMatrix<typename Derived::Scalar> ensure_spd(
    const Eigen::MatrixBase<Derived>& m,
    typename Derived::Scalar floor = typename Derived::Scalar(kDefaultSpdFloor)) {
  using Scalar = typename Derived::Scalar;
  if (!(floor > Scalar(0))) throw ValidationError("ensure_spd: floor must be positive");
  const auto eig = sym_eig(m);
  const Scalar mean_diag = m.trace() / Scalar(m.rows());
  const Scalar threshold = floor * std::max(Scalar(1), mean_diag);
  // Round-off slack, so a matrix this function produced passes unchanged.
  const Scalar slack = Scalar(8) * Scalar(m.rows()) * std::numeric_limits<Scalar>::epsilon() *
                       eig.eigenvalues.cwiseAbs().maxCoeff();
  if (eig.eigenvalues(0) >= threshold - slack) return m.derived();
  return eig.reconstruct([threshold](Scalar x) { return std::max(x, threshold); });
}

/// Principal submatrix m[idx, idx].
template <typename Derived, typename IndexRange>
DenseMatrix<typename Derived::Scalar> principal_submatrix(
    const Eigen::MatrixBase<Derived>& m, const IndexRange& idx) {
  const auto n = static_cast<Eigen::Index>(std::size(idx));
  DenseMatrix<typename Derived::Scalar> out(n, n);
  Eigen::Index r = 0;
  for (auto i : idx) {
    Eigen::Index c = 0;
    for (auto j : idx) out(r, c++) = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    ++r;
  }
  return out;
}

}  // namespace msdpp
