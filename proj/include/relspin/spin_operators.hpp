#pragma once

// Fixed-momentum spin operators (Dirac, Foldy-Wouthuysen, Pryce), the free
// Dirac Hamiltonian and the proper-spin-operator condition checks.
//
// Units: hbar = 1. The speed of light is kept explicit; momentum-dependent
// corrections carry the powers of c needed to make each term dimensionally
// consistent (they reduce to the familiar c = 1 expressions).

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "relspin/dirac_algebra.hpp"
#include "relspin/errors.hpp"

namespace relspin {

template <typename Scalar>
struct PhysParams {
  Scalar m0 = Scalar(1);
  Scalar c = Scalar(1);
  Scalar e = Scalar(-1);

  void validate() const {
    if (!(m0 > 0) || !std::isfinite(m0)) throw PreconditionError("PhysParams: m0 must be > 0");
    if (!(c > 0) || !std::isfinite(c)) throw PreconditionError("PhysParams: c must be > 0");
    if (!std::isfinite(e)) throw PreconditionError("PhysParams: e must be finite");
  }
  Scalar rest_energy() const { return m0 * c * c; }
};

using PhysParamsd = PhysParams<double>;

template <typename Scalar>
using Momentum3 = Vector3<Scalar>;

enum class SpinKind { Dirac, FW, Pryce };

inline constexpr std::array<SpinKind, 3> kAllSpinKinds{SpinKind::Dirac, SpinKind::FW,
                                                       SpinKind::Pryce};

inline std::string_view to_string(SpinKind k) {
  switch (k) {
    case SpinKind::Dirac:
      return "dirac";
    case SpinKind::FW:
      return "fw";
    case SpinKind::Pryce:
      return "pryce";
  }
  return "?";
}

inline SpinKind spin_kind_from_string(std::string_view s) {
  if (s == "dirac") return SpinKind::Dirac;
  if (s == "fw") return SpinKind::FW;
  if (s == "pryce") return SpinKind::Pryce;
  throw PreconditionError("unknown spin kind '" + std::string(s) + "'");
}

template <typename Scalar>
using OperatorTriple = std::array<Matrix4<Scalar>, 3>;

/// Default refusal threshold for |p|, relative to m0 c.
inline constexpr double kDefaultMomentumFloor = 1e-12;

template <typename Scalar>
Scalar energy_ep(const Momentum3<Scalar>& p, const PhysParams<Scalar>& params) {
  const Scalar c = params.c;
  const Scalar mc2 = params.m0 * c * c;
  return std::sqrt(p.squaredNorm() * c * c + mc2 * mc2);
}

template <typename Scalar>
Matrix4<Scalar> free_dirac_matrix(const Momentum3<Scalar>& p, const PhysParams<Scalar>& params) {
  const auto& d = dirac_matrices<Scalar>();
  Matrix4<Scalar> h = d.beta * params.rest_energy();
  for (int i = 0; i < 3; ++i) h += d.alpha[i] * (params.c * p(i));
  return h;
}

namespace detail {

template <typename Scalar>
void require_nonzero_momentum(const Momentum3<Scalar>& p, const PhysParams<Scalar>& params,
                              Scalar floor_rel, const char* what) {
  if (!p.allFinite()) throw PreconditionError(std::string(what) + ": non-finite momentum");
  if (p.norm() <= floor_rel * params.m0 * params.c) {
    throw SingularMomentumError(std::string(what) +
                                ": momentum below the singular-point floor (p = 0 has no "
                                "direction-independent limit)");
  }
}

/// sum_i v_i M_i
template <typename Scalar>
Matrix4<Scalar> dot(const std::array<Matrix4<Scalar>, 3>& m, const Momentum3<Scalar>& v) {
  return m[0] * v(0) + m[1] * v(1) + m[2] * v(2);
}

}  // namespace detail

/// Spin operator S(p) of the requested kind as three 4x4 matrices.
///
///   Dirac: Sigma / 2
///   FW:    Sigma/2 + i beta c (p x alpha) / (2 E_p)
///          - c^2 p x (Sigma x p) / (2 E_p (E_p + m0 c^2))
///   Pryce: beta Sigma / 2 + (1 - beta) (Sigma.p) p / (2 p^2)
///
/// Pryce refuses |p| <= p_floor * m0 c with SingularMomentumError.
template <typename Scalar>
OperatorTriple<Scalar> spin_operator(SpinKind kind, const Momentum3<Scalar>& p,
                                     const PhysParams<Scalar>& params,
                                     Scalar p_floor = Scalar(kDefaultMomentumFloor)) {
  using C = std::complex<Scalar>;
  const auto& d = dirac_matrices<Scalar>();
  OperatorTriple<Scalar> s;
  switch (kind) {
    case SpinKind::Dirac:
      for (int i = 0; i < 3; ++i) s[i] = d.sigma[i] * Scalar(0.5);
      break;
    case SpinKind::FW: {
      if (!p.allFinite()) throw PreconditionError("spin_operator: non-finite momentum");
      const Scalar c = params.c;
      const Scalar ep = energy_ep(p, params);
      const Scalar p2 = p.squaredNorm();
      const Matrix4<Scalar> sigma_dot_p = detail::dot(d.sigma, p);
      const C coupling = C(0, 1) * c / (Scalar(2) * ep);
      const Scalar proj = c * c / (Scalar(2) * ep * (ep + params.rest_energy()));
      for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        const Matrix4<Scalar> p_cross_alpha = d.alpha[k] * p(j) - d.alpha[j] * p(k);
        // p x (Sigma x p) = Sigma p^2 - p (Sigma.p)
        const Matrix4<Scalar> p_cross_sigma_cross_p = d.sigma[i] * p2 - sigma_dot_p * p(i);
        s[i] = d.sigma[i] * Scalar(0.5) + coupling * (d.beta * p_cross_alpha) -
               proj * p_cross_sigma_cross_p;
      }
      break;
    }
    case SpinKind::Pryce: {
      detail::require_nonzero_momentum(p, params, p_floor, "spin_operator(Pryce)");
      const Scalar p2 = p.squaredNorm();
      const Matrix4<Scalar> one_minus_beta = d.identity - d.beta;
      const Matrix4<Scalar> sigma_dot_p = detail::dot(d.sigma, p);
      for (int i = 0; i < 3; ++i) {
        s[i] = d.beta * d.sigma[i] * Scalar(0.5) +
               one_minus_beta * sigma_dot_p * (p(i) / (Scalar(2) * p2));
      }
      break;
    }
  }
  return s;
}

/// Momentum-only correction Delta(p) of the position operator, r_kind = r + Delta(p).
///
///   FW:    i beta c alpha / (2 E_p)
///          + c^2 [i beta (alpha.p) p - (Sigma x p) |p|] / (2 E_p (E_p + m0 c^2) |p|)
///   Pryce: -(1 - beta) (Sigma x p) / (2 p^2)
///   Dirac: 0
///
/// The FW sign of the first term is the one for which r_FW x p + S_FW equals
/// r x p + Sigma/2. `negated_fw_lead = true` flips it to -i beta c alpha/(2E_p),
/// which breaks that identity; it exists to document the discrepancy.
template <typename Scalar>
OperatorTriple<Scalar> position_correction(SpinKind kind, const Momentum3<Scalar>& p,
                                           const PhysParams<Scalar>& params,
                                           Scalar p_floor = Scalar(kDefaultMomentumFloor),
                                           bool negated_fw_lead = false) {
  using C = std::complex<Scalar>;
  const auto& d = dirac_matrices<Scalar>();
  OperatorTriple<Scalar> out;
  switch (kind) {
    case SpinKind::Dirac:
      for (auto& m : out) m.setZero();
      break;
    case SpinKind::FW: {
      detail::require_nonzero_momentum(p, params, p_floor, "position_correction(FW)");
      const Scalar c = params.c;
      const Scalar ep = energy_ep(p, params);
      const Scalar pn = p.norm();
      const Matrix4<Scalar> alpha_dot_p = detail::dot(d.alpha, p);
      const C lead = C(0, negated_fw_lead ? -1 : 1) * c / (Scalar(2) * ep);
      const Scalar den = c * c / (Scalar(2) * ep * (ep + params.rest_energy()) * pn);
      for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        const Matrix4<Scalar> sigma_cross_p = d.sigma[j] * p(k) - d.sigma[k] * p(j);
        out[i] = lead * (d.beta * d.alpha[i]) +
                 den * (C(0, 1) * (d.beta * alpha_dot_p) * p(i) - sigma_cross_p * pn);
      }
      break;
    }
    case SpinKind::Pryce: {
      detail::require_nonzero_momentum(p, params, p_floor, "position_correction(Pryce)");
      const Scalar p2 = p.squaredNorm();
      const Matrix4<Scalar> one_minus_beta = d.identity - d.beta;
      for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        const Matrix4<Scalar> sigma_cross_p = d.sigma[j] * p(k) - d.sigma[k] * p(j);
        out[i] = -(one_minus_beta * sigma_cross_p) / (Scalar(2) * p2);
      }
      break;
    }
  }
  return out;
}

template <typename Scalar>
struct ConditionReport {
  SpinKind kind;
  Scalar su2_residual = 0;                      // max_ij ||[S_i,S_j] - i eps_ijk S_k||_F
  std::array<RealVector4<Scalar>, 3> spectrum;  // ascending, per component
  Scalar spectrum_residual = 0;                 // max |lambda - (-1/2,-1/2,1/2,1/2)|
  std::array<Scalar, 3> free_commutation{};     // ||[S_i, H_free]||_F per component
  Scalar free_commutation_residual = 0;         // max over components
};

template <typename Scalar>
ConditionReport<Scalar> condition_checks(SpinKind kind, const Momentum3<Scalar>& p,
                                         const PhysParams<Scalar>& params,
                                         Scalar p_floor = Scalar(kDefaultMomentumFloor)) {
  using C = std::complex<Scalar>;
  const auto s = spin_operator(kind, p, params, p_floor);
  const Matrix4<Scalar> h = free_dirac_matrix(p, params);
  ConditionReport<Scalar> r;
  r.kind = kind;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      Matrix4<Scalar> target = Matrix4<Scalar>::Zero();
      for (int k = 0; k < 3; ++k) {
        const int eps = ((i - j) * (j - k) * (k - i)) / 2;
        if (eps != 0) target += C(0, eps) * s[k];
      }
      r.su2_residual = std::max(r.su2_residual, (commutator(s[i], s[j]) - target).norm());
    }
  }
  RealVector4<Scalar> expected;
  expected << Scalar(-0.5), Scalar(-0.5), Scalar(0.5), Scalar(0.5);
  for (int i = 0; i < 3; ++i) {
    r.spectrum[i] = herm_eigs(s[i], Scalar(1e-10)).values;
    r.spectrum_residual =
        std::max(r.spectrum_residual, (r.spectrum[i] - expected).cwiseAbs().maxCoeff());
    r.free_commutation[i] = commutator(s[i], h).norm();
    r.free_commutation_residual = std::max(r.free_commutation_residual, r.free_commutation[i]);
  }
  return r;
}

}  // namespace relspin
