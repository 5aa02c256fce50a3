#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace levy_expfun {

struct ExpTerm {
  double weight = 0.0;
  double rate = 0.0;
};

// atom0 * delta_0 + sum_j w_j e^{-r_j y} dy on y > 0
struct PotentialMeasure {
  double atom0 = 0.0;
  std::vector<ExpTerm> terms;

  double mass() const {
    double m = atom0;
    for (const auto& t : terms) m += t.rate > 0.0 ? t.weight / t.rate : (t.weight == 0.0 ? 0.0 : kInf);
    return m;
  }
  double laplace(double l) const {
    double v = atom0;
    for (const auto& t : terms) v += t.weight / (t.rate + l);
    return v;
  }
  double density(double y) const {
    if (y <= 0.0) return 0.0;
    double v = 0.0;
    for (const auto& t : terms) v += t.weight * std::exp(-t.rate * y);
    return v;
  }
  // mass of (y, inf)
  double tail(double y) const {
    if (y < 0.0) return mass();
    double v = 0.0;
    for (const auto& t : terms) v += t.weight / t.rate * std::exp(-t.rate * y);
    return v;
  }
  double cdf(double y) const { return y < 0.0 ? 0.0 : mass() - tail(y); }
  double mean() const {
    double v = 0.0;
    for (const auto& t : terms) v += t.weight / (t.rate * t.rate);
    return v;
  }
  PotentialMeasure scaled(double c) const {
    PotentialMeasure p = *this;
    p.atom0 *= c;
    for (auto& t : p.terms) t.weight *= c;
    return p;
  }
  // c e^{-k y} times this measure
  PotentialMeasure tilted(double k, double c = 1.0) const {
    PotentialMeasure p = scaled(c);
    for (auto& t : p.terms) t.rate += k;
    return p;
  }
  bool nonnegative_weights() const {
    return atom0 >= 0.0 && std::all_of(terms.begin(), terms.end(), [](const ExpTerm& t) { return t.weight >= 0.0; });
  }
  double min_rate() const {
    double r = kInf;
    for (const auto& t : terms) r = std::min(r, t.rate);
    return r;
  }
};

// U(dy) = atom0 delta_0 + sum A_i e^{-p_i y} dy on y > 0 + sum B_j e^{r_j y} dy on y < 0
struct TwoSidedPotential {
  double atom0 = 0.0;
  std::vector<ExpTerm> up;
  std::vector<ExpTerm> down;

  // int e^{b y} U(dy), for -min r < b < min p
  double laplace(double b) const {
    double v = atom0;
    for (const auto& t : up) v += t.weight / (t.rate - b);
    for (const auto& t : down) v += t.weight / (t.rate + b);
    return v;
  }
  double density(double y) const {
    double v = 0.0;
    if (y > 0.0)
      for (const auto& t : up) v += t.weight * std::exp(-t.rate * y);
    if (y < 0.0)
      for (const auto& t : down) v += t.weight * std::exp(t.rate * y);
    return v;
  }
};

// f(l) = scale * prod (l + roots_i) / prod (l + poles_j)
// A Laplace exponent of a ladder height subordinator with exponential jumps.
struct RationalExponent {
  double scale = 1.0;
  std::vector<double> roots;
  std::vector<double> poles;

  double operator()(double l) const {
    double v = scale;
    for (double r : roots) v *= (l + r);
    for (double p : poles) v /= (l + p);
    return v;
  }
  std::complex<double> operator()(std::complex<double> l) const {
    std::complex<double> v = scale;
    for (double r : roots) v *= (l + r);
    for (double p : poles) v /= (l + p);
    return v;
  }
  double derivative(double l) const {
    // f'(l) = sum over factors, product rule written out to stay exact when a root is -l
    double total = 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      double v = scale;
      for (std::size_t k = 0; k < roots.size(); ++k)
        if (k != i) v *= (l + roots[k]);
      for (double p : poles) v /= (l + p);
      total += v;
    }
    double f = (*this)(l);
    for (double p : poles) total -= f / (l + p);
    return total;
  }

  // Potential measure V with int e^{-l y} V(dy) = 1/f(l), by partial fractions.
  PotentialMeasure reciprocal_measure() const {
    if (poles.size() > roots.size()) throw UnsupportedModel("exponent does not grow: no potential measure");
    for (std::size_t i = 0; i < roots.size(); ++i)
      for (std::size_t k = i + 1; k < roots.size(); ++k)
        if (std::abs(roots[i] - roots[k]) <= 1e-10 * (1.0 + std::abs(roots[i])))
          throw RootFindingFailure("repeated ladder root; partial fractions need distinct roots");
    PotentialMeasure v;
    v.atom0 = poles.size() == roots.size() ? 1.0 / scale : 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      double x = -roots[i];
      double w = 1.0 / scale;
      for (double p : poles) w *= (x + p);
      for (std::size_t k = 0; k < roots.size(); ++k)
        if (k != i) w /= (x + roots[k]);
      v.terms.push_back({w, roots[i]});
    }
    return v;
  }

  // kill + drift l + sum_j c_j l/(l + eta_j); with c_j = -Res_{-eta_j}/eta_j
  SubordinatorModel as_subordinator() const {
    if (roots.size() > poles.size() + 1 || roots.size() < poles.size())
      throw UnsupportedModel("exponent is not a subordinator exponent");
    if (poles.size() > 1) throw UnsupportedModel("more than one jump component");
    SubordinatorModel s;
    s.kill = (*this)(0.0);
    s.drift = roots.size() == poles.size() + 1 ? scale : 0.0;
    if (!poles.empty()) {
      double eta = poles[0];
      double res = scale;
      for (double r : roots) res *= (r - eta);
      double c = -res / eta;
      if (c > 0.0) s.jumps = ExpJumps{c, eta};
      else if (c < -1e-12 * (1.0 + std::abs(s.kill)))
        throw UnsupportedModel("negative ladder jump intensity");
    }
    if (std::abs(s.kill) < 1e-300) s.kill = 0.0;
    return s;
  }

  static RationalExponent from_subordinator(const SubordinatorModel& s) {
    // kill + b l + c l/(l+eta) = [b l^2 + (kill + b eta + c) l + kill eta] / (l + eta)
    RationalExponent r;
    if (!s.jumps) {
      if (s.drift > 0.0) {
        r.scale = s.drift;
        r.roots = {s.kill / s.drift};
      } else {
        r.scale = s.kill;
      }
      return r;
    }
    double eta = s.jumps->rate, c = s.jumps->intensity;
    r.poles = {eta};
    if (s.drift > 0.0) {
      double A = s.drift, B = s.kill + s.drift * eta + c, C = s.kill * eta;
      double disc = std::sqrt(std::max(0.0, B * B - 4 * A * C));
      double r1 = (B + disc) / (2 * A);  // roots of A x^2 - B x + C in x = -l
      double r2 = r1 > 0.0 ? C / (A * r1) : 0.0;
      r.scale = A;
      r.roots = {r1, r2};
    } else {
      r.scale = s.kill + c;
      r.roots = {s.kill * eta / (s.kill + c)};
    }
    return r;
  }
};

// Polynomial helpers, ascending coefficients.
using Poly = std::vector<double>;

inline Poly poly_mul(const Poly& p, const Poly& r) {
  Poly out(p.size() + r.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < r.size(); ++j) out[i + j] += p[i] * r[j];
  return out;
}

inline Poly poly_add(const Poly& p, const Poly& r) {
  Poly out(std::max(p.size(), r.size()), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) out[i] += p[i];
  for (std::size_t i = 0; i < r.size(); ++i) out[i] += r[i];
  return out;
}

inline void poly_trim(Poly& p) {
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
}

inline long double poly_eval(const Poly& p, long double x, long double* deriv = nullptr) {
  long double v = 0.0L, d = 0.0L;
  for (std::size_t i = p.size(); i-- > 0;) {
    d = d * x + v;
    v = v * x + p[i];
  }
  if (deriv) *deriv = d;
  return v;
}

// All roots of p, which must be real. Companion-matrix eigenvalues, then Newton.
inline std::vector<double> real_polynomial_roots(Poly p, double tol = 1e-12, int max_iter = 200) {
  poly_trim(p);
  const int n = static_cast<int>(p.size()) - 1;
  if (n <= 0) return {};
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -p[i] / p[n];
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  if (es.info() != Eigen::Success) throw RootFindingFailure("companion eigenvalue solver failed");
  std::vector<double> roots;
  for (int i = 0; i < n; ++i) {
    std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z.real())))
      throw RootFindingFailure("complex root of the Wiener-Hopf polynomial");
    long double x = z.real();
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
      long double d;
      long double f = poly_eval(p, x, &d);
      if (f == 0.0L) {
        converged = true;
        break;
      }
      if (d == 0.0L) break;
      long double step = f / d;
      x -= step;
      if (std::abs(step) <= tol * (1.0L + std::abs(x))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw RootFindingFailure("Newton polish did not converge");
    roots.push_back(static_cast<double>(x));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace levy_expfun
