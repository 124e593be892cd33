#pragma once

// Dense 4x4 complex algebra for Dirac spinors: the Dirac matrices in the
// standard representation (beta diagonal), commutators, a cyclic Jacobi
// eigensolver for Hermitian 4x4 matrices and the propagator exp(-iHt).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "relspin/errors.hpp"

namespace relspin {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using Matrix4 = Eigen::Matrix<std::complex<Scalar>, 4, 4>;

template <typename Scalar>
using Spinor4 = Eigen::Matrix<std::complex<Scalar>, 4, 1>;

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using RealVector4 = Eigen::Matrix<Scalar, 4, 1>;

using Matrix4d = Matrix4<double>;
using Spinor4d = Spinor4<double>;
using Vector3d = Vector3<double>;
using cdouble = std::complex<double>;

/// The Dirac matrices alpha_i, beta and the spin matrices Sigma_i in the
/// standard (Dirac) representation:
///   beta = diag(1, 1, -1, -1), alpha_i = [[0, s_i], [s_i, 0]],
///   Sigma_i = [[s_i, 0], [0, s_i]]
/// with s_i the Pauli matrices.
template <typename Scalar>
struct DiracMatrices {
  std::array<Matrix4<Scalar>, 3> alpha;
  Matrix4<Scalar> beta;
  std::array<Matrix4<Scalar>, 3> sigma;
  Matrix4<Scalar> identity;
};

template <typename Scalar = double>
Eigen::Matrix<std::complex<Scalar>, 2, 2> pauli(int i) {
  using C = std::complex<Scalar>;
  Eigen::Matrix<C, 2, 2> s;
  switch (i) {
    case 0:
      s << C(0), C(1), C(1), C(0);
      break;
    case 1:
      s << C(0), C(0, -1), C(0, 1), C(0);
      break;
    case 2:
      s << C(1), C(0), C(0), C(-1);
      break;
    default:
      throw PreconditionError("pauli: index must be 0, 1 or 2");
  }
  return s;
}

template <typename Scalar = double>
const DiracMatrices<Scalar>& dirac_matrices() {
  static const DiracMatrices<Scalar> m = [] {
    DiracMatrices<Scalar> d;
    d.identity = Matrix4<Scalar>::Identity();
    d.beta = Matrix4<Scalar>::Zero();
    d.beta.diagonal() << Scalar(1), Scalar(1), Scalar(-1), Scalar(-1);
    for (int i = 0; i < 3; ++i) {
      const auto s = pauli<Scalar>(i);
      d.alpha[i].setZero();
      d.alpha[i].template block<2, 2>(0, 2) = s;
      d.alpha[i].template block<2, 2>(2, 0) = s;
      d.sigma[i].setZero();
      d.sigma[i].template block<2, 2>(0, 0) = s;
      d.sigma[i].template block<2, 2>(2, 2) = s;
    }
    return d;
  }();
  return m;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::PlainObject commutator(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  return a * b - b * a;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::PlainObject anticommutator(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b) {
  return a * b + b * a;
}

/// Largest entrywise deviation of A from A^dagger.
template <typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a,
                  typename Derived::RealScalar tol = 1e-10) {
  return hermiticity_defect(a) <= tol;
}

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& a,
                typename Derived::RealScalar tol = 1e-12) {
  using Plain = typename Derived::PlainObject;
  return (a.adjoint() * a - Plain::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff() <= tol;
}

/// Even (particle/antiparticle block-diagonal) part of a 4x4 matrix in the
/// beta-diagonal basis: (M + beta M beta) / 2.
template <typename Scalar>
Matrix4<Scalar> block_diagonal_part(const Matrix4<Scalar>& m) {
  Matrix4<Scalar> out = Matrix4<Scalar>::Zero();
  out.template block<2, 2>(0, 0) = m.template block<2, 2>(0, 0);
  out.template block<2, 2>(2, 2) = m.template block<2, 2>(2, 2);
  return out;
}

/// Odd (block-off-diagonal) part: (M - beta M beta) / 2.
template <typename Scalar>
Matrix4<Scalar> block_off_diagonal_part(const Matrix4<Scalar>& m) {
  return m - block_diagonal_part(m);
}

template <typename Scalar>
struct HermitianEigen {
  RealVector4<Scalar> values;  // ascending
  Matrix4<Scalar> vectors;     // columns, orthonormal
};

/// Eigendecomposition of a Hermitian 4x4 matrix by cyclic complex Jacobi.
///
/// Eigenvalues are returned in ascending order. Each eigenvector has the phase
/// fixed so that its first component of non-negligible magnitude is real and
/// positive. Throws PreconditionError when `a` is not Hermitian within
/// `hermitian_tol`.
template <typename Scalar>
HermitianEigen<Scalar> herm_eigs(const Matrix4<Scalar>& a, Scalar hermitian_tol = Scalar(1e-10)) {
  using C = std::complex<Scalar>;
  if (!a.allFinite()) throw PreconditionError("herm_eigs: non-finite matrix");
  if (hermiticity_defect(a) > hermitian_tol) {
    throw PreconditionError("herm_eigs: matrix is not Hermitian");
  }
  Matrix4<Scalar> m = (a + a.adjoint()) * Scalar(0.5);
  Matrix4<Scalar> v = Matrix4<Scalar>::Identity();
  const Scalar scale = std::max(m.norm(), std::numeric_limits<Scalar>::min());
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  for (int sweep = 0; sweep < 64; ++sweep) {
    Scalar off = 0;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) off += std::norm(m(p, q));
    if (std::sqrt(off) <= eps * eps * scale) break;

    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const Scalar apq = std::abs(m(p, q));
        if (apq <= eps * eps * scale) continue;
        const C w = m(p, q) / apq;
        const Scalar app = m(p, p).real();
        const Scalar aqq = m(q, q).real();
        const Scalar zeta = (aqq - app) / (Scalar(2) * apq);
        const Scalar t = (zeta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(zeta) + std::sqrt(Scalar(1) + zeta * zeta));
        const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
        const Scalar s = t * c;
        // U acts on columns (p, q): U = diag(1, conj(w)) * [[c, s], [-s, c]].
        const C upp = c, upq = s, uqp = -s * std::conj(w), uqq = c * std::conj(w);
        for (int k = 0; k < 4; ++k) {
          const C mkp = m(k, p), mkq = m(k, q);
          m(k, p) = mkp * upp + mkq * uqp;
          m(k, q) = mkp * upq + mkq * uqq;
        }
        for (int k = 0; k < 4; ++k) {
          const C mpk = m(p, k), mqk = m(q, k);
          m(p, k) = std::conj(upp) * mpk + std::conj(uqp) * mqk;
          m(q, k) = std::conj(upq) * mpk + std::conj(uqq) * mqk;
        }
        m(p, q) = m(q, p) = C(0);
        m(p, p) = C(m(p, p).real());
        m(q, q) = C(m(q, q).real());
        for (int k = 0; k < 4; ++k) {
          const C vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
      }
    }
  }

  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return m(i, i).real() < m(j, j).real(); });
  HermitianEigen<Scalar> out;
  for (int k = 0; k < 4; ++k) {
    out.values(k) = m(order[k], order[k]).real();
    Spinor4<Scalar> col = v.col(order[k]);
    for (int r = 0; r < 4; ++r) {
      const Scalar mag = std::abs(col(r));
      if (mag > Scalar(1e-8)) {
        col *= std::conj(col(r)) / mag;
        col(r) = C(std::abs(col(r)));
        break;
      }
    }
    out.vectors.col(k) = col;
  }
  return out;
}

/// exp(-i H t) = V diag(exp(-i lambda_k t)) V^dagger for Hermitian H.
template <typename Scalar>
Matrix4<Scalar> exp_minus_iHt(const Matrix4<Scalar>& h, Scalar t,
                              Scalar hermitian_tol = Scalar(1e-10)) {
  const auto eig = herm_eigs(h, hermitian_tol);
  Matrix4<Scalar> d = Matrix4<Scalar>::Zero();
  for (int k = 0; k < 4; ++k) d(k, k) = std::polar(Scalar(1), -eig.values(k) * t);
  return eig.vectors * d * eig.vectors.adjoint();
}

}  // namespace relspin
