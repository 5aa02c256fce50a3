#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "potential.hpp"

namespace levy_expfun {

// kappa(q, .) and kappa_hat(q, .) with Phi(b) = kappa(q, -b) kappa_hat(q, b).
// kappa has leading coefficient 1; kappa_hat carries the remaining scale, so
// q = kappa(q,0) kappa_hat(q,0).
struct LadderFactors {
  RationalExponent kappa;
  RationalExponent kappa_hat;
  double kill_up = 0.0;
  double kill_down = 0.0;

  PotentialMeasure V_H() const { return kappa.reciprocal_measure(); }
  PotentialMeasure V_Hhat() const { return kappa_hat.reciprocal_measure(); }
  SubordinatorModel H() const { return kappa.as_subordinator(); }
  SubordinatorModel Hhat() const { return kappa_hat.as_subordinator(); }
};

// Numerator N(b) = Phi(b) (eta+ - b)(eta- + b), keeping only the factors of
// the jump sides that are present.
inline Poly laplace_numerator(const LevyModel& m) {
  const double d = m.drift();
  const auto& j = m.jumps;
  Poly base = {m.q, -d, -0.5 * m.Q * m.Q};
  Poly up = {1.0}, down = {1.0};
  if (m.has_up_jumps()) up = {j.eta_plus, -1.0};
  if (m.has_down_jumps()) down = {j.eta_minus, 1.0};
  Poly n = poly_mul(poly_mul(base, up), down);
  if (m.has_up_jumps()) n = poly_add(n, poly_mul({0.0, -j.lambda_plus}, down));
  if (m.has_down_jumps()) n = poly_add(n, poly_mul({0.0, j.lambda_minus}, up));
  poly_trim(n);
  return n;
}

inline LadderFactors factorize(const LevyModel& m) {
  require_admissible(m);
  Poly n = laplace_numerator(m);
  std::vector<double> roots = real_polynomial_roots(n);
  if (m.q == 0.0) {
    // b = 0 is an exact root; pin it
    std::size_t best = 0;
    for (std::size_t i = 1; i < roots.size(); ++i)
      if (std::abs(roots[i]) < std::abs(roots[best])) best = i;
    if (roots.empty() || std::abs(roots[best]) > 1e-8) throw RootFindingFailure("missing root at 0 for q = 0");
    roots[best] = 0.0;
  }
  LadderFactors f;
  std::size_t n_pos = 0;
  for (double r : roots) {
    if (r > 0.0) {
      f.kappa.roots.push_back(r);
      ++n_pos;
    } else {
      f.kappa_hat.roots.push_back(r == 0.0 ? 0.0 : -r);
    }
  }
  if (m.has_up_jumps()) f.kappa.poles.push_back(m.jumps.eta_plus);
  if (m.has_down_jumps()) f.kappa_hat.poles.push_back(m.jumps.eta_minus);
  f.kappa.scale = 1.0;
  // kappa(-b) kappa_hat(b) (eta+ - b)(eta- + b) = C prod(theta_i - b) prod(b + rho_j)
  // whose leading coefficient is C (-1)^{n_pos}
  double lead = n.back();
  f.kappa_hat.scale = (n_pos % 2 == 0) ? lead : -lead;
  if (!(f.kappa_hat.scale > 0.0)) throw RootFindingFailure("nonpositive scale for kappa_hat");
  f.kill_up = f.kappa(0.0);
  f.kill_down = m.q == 0.0 ? 0.0 : f.kappa_hat(0.0);
  if (!(f.kill_up > 0.0)) throw RootFindingFailure("kappa(q,0) must be positive");
  return f;
}

// max over the grid of |q/Psi(l) - kappa(0)/kappa(-il) * kappa_hat(0)/kappa_hat(il)| when q > 0,
// of |Phi(b) - kappa(-b) kappa_hat(b)| / max(1,|Phi(b)|) over real b in C when q = 0.
inline double factorization_residual(const LevyModel& m, const LadderFactors& f, int points = 50) {
  double worst = 0.0;
  using C = std::complex<double>;
  if (m.q > 0.0) {
    for (int i = 0; i < points; ++i) {
      double l = -20.0 + 40.0 * i / (points - 1);
      C lhs = m.q / char_exponent(m, l);
      C rhs = (f.kappa(0.0) / f.kappa(C(0.0, -l))) * (f.kappa_hat(0.0) / f.kappa_hat(C(0.0, l)));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  } else {
    double hi = std::min(exponential_moment_bound(m), f.kappa.roots.empty() ? 5.0 : f.kappa.roots.front());
    if (!std::isfinite(hi)) hi = 5.0;
    for (int i = 0; i < points; ++i) {
      double b = hi * (i + 0.5) / points;
      double phi = laplace_exponent(m, b);
      double rhs = f.kappa(-b) * f.kappa_hat(b);
      worst = std::max(worst, std::abs(phi - rhs) / std::max(1.0, std::abs(phi)));
    }
    for (int i = 0; i < points; ++i) {
      double l = -20.0 + 40.0 * i / (points - 1);
      C lhs = char_exponent(m, l);
      C rhs = f.kappa(C(0.0, -l)) * f.kappa_hat(C(0.0, l));
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
  }
  return worst;
}

inline PotentialMeasure supremum_law(const LadderFactors& f) { return f.V_H().scaled(f.kill_up); }

inline TwoSidedPotential potential_U(const LadderFactors& f) {
  PotentialMeasure vh = f.V_H(), vhh = f.V_Hhat();
  TwoSidedPotential u;
  u.atom0 = vh.atom0 * vhh.atom0;
  for (const auto& t : vh.terms) u.up.push_back({t.weight * vhh.laplace(t.rate), t.rate});
  for (const auto& t : vhh.terms) u.down.push_back({t.weight * vh.laplace(t.rate), t.rate});
  return u;
}

// Tail of the Levy measure of H by Vigon's equation:
//   Pi_H(x, inf) = int V_Hhat(dy) Pi(x + y, inf) = lambda+ e^{-eta+ x} int e^{-eta+ y} V_Hhat(dy)
inline double vigon_tail(const LevyModel& m, const LadderFactors& f, double x) {
  if (!m.has_up_jumps()) throw UnsupportedModel("no positive jumps");
  return m.jumps.lambda_plus * std::exp(-m.jumps.eta_plus * x) * f.V_Hhat().laplace(m.jumps.eta_plus);
}

}  // namespace levy_expfun
