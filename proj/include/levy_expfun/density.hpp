#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "potential.hpp"
#include "wienerhopf.hpp"

namespace levy_expfun {

struct GridSpec {
  double t_min = 1e-3;
  double t_max = 1e3;
  std::size_t points = 800;
};

// k is piecewise linear in x = log t on the grid. Outside the grid:
//   left:  k = k_0 (left_constant) or 0;
//   right: k = k_{M-1} (t/t_{M-1})^{-right_exponent} if right_exponent > 0,
//          k = k_{M-1} up to support_end if that is finite, else 0.
struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> k_values;
  std::vector<double> tail_values;
  double mass_defect = 0.0;

  bool left_constant = false;
  double right_exponent = 0.0;
  double support_end = kInf;

  std::size_t size() const { return grid.size(); }
  double x(std::size_t i) const { return std::log(grid[i]); }

  double k_at(double t) const;
  double tail_at(double t) const;
  double cdf_at(double t) const { return 1.0 - tail_at(t); }
  // int_0^t (u/t)^p k(u) du/u
  double lower_power_integral(double p, double t) const;
  // int_t^inf (t/u)^r k(u) du/u
  double upper_power_integral(double r, double t) const;
  // int_0^inf t^s k(t) dt
  double mellin(double s) const;
  double mass() const { return mellin(0.0); }
};

namespace detail {

// int_lo^hi e^{c y} dy, with infinite ends allowed where convergent
inline double expint(double c, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (std::isinf(hi)) {
    if (c >= 0.0) return kInf;
    return -std::exp(c * lo) / c;
  }
  if (std::isinf(lo)) {
    if (c <= 0.0) return kInf;
    return std::exp(c * hi) / c;
  }
  double w = hi - lo, z = c * w;
  if (std::abs(z) < 1e-6) return std::exp(c * lo) * w * (1.0 + z / 2.0 + z * z / 6.0);
  return std::exp(c * lo) * std::expm1(z) / c;
}

// Weights (wa, wb) with int_a^b e^{p(x - X)} k(x) dx = wa k(a) + wb k(b) for k linear on [a, b].
inline std::pair<double, double> segment_weights(double p, double a, double b, double X) {
  double h = b - a, c = p * h, e0 = std::exp(p * (a - X));
  double i0, i1;
  if (std::abs(c) < 1e-4) {
    i0 = h * (1.0 + c / 2.0 + c * c / 6.0 + c * c * c / 24.0);
    i1 = h * (0.5 + c / 3.0 + c * c / 8.0 + c * c * c / 30.0);
  } else {
    double ec = std::exp(c);
    i0 = h * (ec - 1.0) / c;
    i1 = h * ((ec * (c - 1.0) + 1.0) / (c * c));
  }
  return {e0 * (i0 - i1), e0 * i1};
}

// Adds coef * (weights of int_lo^hi e^{p(x - X)} k(e^x) dx) to row.
// lo may be -inf and hi may be +inf.
struct KernelGeometry {
  std::vector<double> xs;
  bool left_constant = false;
  double right_exponent = 0.0;
  double x_end = kInf;  // log of support_end

  void add(std::vector<double>& row, double coef, double p, double X, double lo, double hi) const {
    const std::size_t M = xs.size();
    const double x0 = xs.front(), xM = xs.back();
    if (!(hi > lo)) return;
    if (lo < x0 && left_constant) {
      double w = expint(p, lo - X, std::min(hi, x0) - X);
      row[0] += coef * w;
    }
    double a = std::max(lo, x0), b = std::min(hi, xM);
    if (b > a) {
      // first segment index with xs[s+1] > a
      std::size_t s = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), a) - xs.begin());
      s = s == 0 ? 0 : s - 1;
      for (; s + 1 < M && xs[s] < b; ++s) {
        double sa = xs[s], sb = xs[s + 1];
        double ca = std::max(a, sa), cb = std::min(b, sb);
        if (!(cb > ca)) continue;
        auto [wa, wb] = segment_weights(p, ca, cb, X);
        // k(ca), k(cb) in terms of node values
        double h = sb - sa, la = (ca - sa) / h, lb = (cb - sa) / h;
        row[s] += coef * (wa * (1.0 - la) + wb * (1.0 - lb));
        row[s + 1] += coef * (wa * la + wb * lb);
      }
    }
    if (hi > xM) {
      double ra = std::max(lo, xM);
      if (right_exponent > 0.0) {
        // k = k_M e^{-a (x - xM)}: e^{p(x-X)} k = k_M e^{-a(X - xM)} e^{(p-a)(x-X)}
        double w = std::exp(-right_exponent * (X - xM)) * expint(p - right_exponent, ra - X, hi - X);
        row[M - 1] += coef * w;
      } else if (std::isfinite(x_end) && x_end > xM) {
        double rb = std::min(hi, x_end);
        if (rb > ra) row[M - 1] += coef * expint(p, ra - X, rb - X);
      }
    }
  }
};

inline KernelGeometry geometry_of(const DensityEstimate& e) {
  KernelGeometry g;
  g.xs.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) g.xs[i] = std::log(e.grid[i]);
  g.left_constant = e.left_constant;
  g.right_exponent = e.right_exponent;
  g.x_end = std::log(e.support_end);
  return g;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

inline double apply(const DensityEstimate& e, double p, double X, double lo, double hi) {
  std::vector<double> row(e.size(), 0.0);
  geometry_of(e).add(row, 1.0, p, X, lo, hi);
  return dot(row, e.k_values);
}

}  // namespace detail

inline double DensityEstimate::k_at(double t) const {
  if (!(t > 0.0)) return 0.0;
  if (t >= support_end) return 0.0;
  if (t < grid.front()) return left_constant ? k_values.front() : 0.0;
  if (t > grid.back()) {
    if (right_exponent > 0.0) return k_values.back() * std::pow(t / grid.back(), -right_exponent);
    return std::isfinite(support_end) ? k_values.back() : 0.0;
  }
  std::size_t s = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), t) - grid.begin());
  if (s >= grid.size()) return k_values.back();
  s = s == 0 ? 0 : s - 1;
  double xa = std::log(grid[s]), xb = std::log(grid[s + 1]), w = (std::log(t) - xa) / (xb - xa);
  return k_values[s] * (1.0 - w) + k_values[s + 1] * w;
}

inline double DensityEstimate::tail_at(double t) const {
  if (!(t > 0.0)) return 1.0;
  return detail::apply(*this, 1.0, 0.0, std::log(t), kInf);
}

inline double DensityEstimate::lower_power_integral(double p, double t) const {
  double X = std::log(t);
  return detail::apply(*this, p, X, -kInf, X);
}

inline double DensityEstimate::upper_power_integral(double r, double t) const {
  double X = std::log(t);
  return detail::apply(*this, -r, X, X, kInf);
}

inline double DensityEstimate::mellin(double s) const {
  return detail::apply(*this, s + 1.0, 0.0, -kInf, kInf);
}

struct SolverOptions {
  double sweep_tolerance = 1e-8;
  double stall_tolerance = 1e-6;
  int max_sweeps = 500;
  double clip_tolerance = 1e-4;
  // widen the working grid so truncation of the mass does not bias the solve
  bool extend = true;
  std::size_t max_points = 2000;
};

// Density of I from
//   int_t^inf k(s) ds = int k(t e^{-y}) U(dy)   for all t > 0,
// discretised at the grid nodes with exact quadrature of the exponential
// kernels against piecewise-linear k. The homogeneous equation leaves the scale
// free, so one equation is replaced by int k = 1. The system is solved by LU
// and refined by residual-correction sweeps.
inline DensityEstimate solve_renewal(const LevyModel& m, const TwoSidedPotential& U, const GridSpec& spec,
                                     const SolverOptions& opt = {}) {
  require_admissible(m);
  if (!(spec.t_min > 0.0) || !(spec.t_max > spec.t_min) || spec.points < 4)
    throw InvalidModel("grid needs 0 < t_min < t_max and at least 4 points");
  DensityEstimate est;
  est.support_end = m.support_end();
  double t_max = spec.t_max;
  if (t_max > est.support_end) t_max = est.support_end;
  if (!(t_max > spec.t_min)) throw InvalidModel("grid lies beyond the support of I");
  if (auto sub = m.as_negated_subordinator(); sub && sub->drift > 0.0) {
    // near the end k ~ (end - t)^{(kill + c)/drift - 1}; the discretisation
    // cannot represent an unbounded k there
    if ((sub->kill + sub->jump_intensity()) / sub->drift < 1.0)
      throw UnsupportedModel("density is unbounded at the support end");
  }
  est.left_constant = m.q > 0.0;
  if (!std::isfinite(est.support_end)) {
    if (auto theta = positive_root(m)) est.right_exponent = *theta + 1.0;
  }
  double lo = spec.t_min, hi = t_max;
  std::size_t M = spec.points;
  if (opt.extend) {
    lo = spec.t_min / 50.0;
    hi = std::isfinite(est.support_end) ? est.support_end : t_max * 100.0;
    const double per_unit = (spec.points - 1) / std::log(t_max / spec.t_min);
    const auto want = static_cast<std::size_t>(std::ceil(per_unit * std::log(hi / lo))) + 1;
    M = std::clamp(want, spec.points, std::max(spec.points, opt.max_points));
  }
  const double x0 = std::log(lo), x1 = std::log(hi);
  for (std::size_t i = 0; i < M; ++i) est.grid.push_back(std::exp(x0 + (x1 - x0) * i / (M - 1)));
  est.grid.back() = hi;

  detail::KernelGeometry g;
  g.xs.resize(M);
  for (std::size_t i = 0; i < M; ++i) g.xs[i] = std::log(est.grid[i]);
  g.left_constant = est.left_constant;
  g.right_exponent = est.right_exponent;
  g.x_end = std::log(est.support_end);

  Eigen::MatrixXd A(M, M);
  std::vector<double> row(M);
  for (std::size_t i = 0; i < M; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    const double X = g.xs[i];
    g.add(row, 1.0, 1.0, 0.0, X, kInf);
    row[i] -= U.atom0;
    for (const auto& t : U.up) g.add(row, -t.weight, t.rate, X, -kInf, X);
    for (const auto& t : U.down) g.add(row, -t.weight, -t.rate, X, X, kInf);
    for (std::size_t j = 0; j < M; ++j) A(i, j) = row[j];
  }
  std::fill(row.begin(), row.end(), 0.0);
  g.add(row, 1.0, 1.0, 0.0, -kInf, kInf);
  for (std::size_t j = 0; j < M; ++j) A(M - 1, j) = row[j];
  Eigen::VectorXd b = Eigen::VectorXd::Zero(M);
  b(M - 1) = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd k = lu.solve(b);
  double last = kInf;
  int sweep = 0;
  for (; sweep < opt.max_sweeps; ++sweep) {
    Eigen::VectorXd r = b - A * k;
    Eigen::VectorXd dk = lu.solve(r);
    k += dk;
    last = dk.lpNorm<Eigen::Infinity>() / std::max(1e-300, k.lpNorm<Eigen::Infinity>());
    if (last < opt.sweep_tolerance) break;
  }
  if (!std::isfinite(last) || last > opt.stall_tolerance)
    throw NoConvergence("refinement sweeps stalled at " + std::to_string(last));

  // clip negative noise
  est.k_values.assign(k.data(), k.data() + M);
  std::vector<double> neg(M, 0.0);
  bool any = false;
  for (std::size_t i = 0; i < M; ++i)
    if (est.k_values[i] < 0.0) {
      neg[i] = -est.k_values[i];
      est.k_values[i] = 0.0;
      any = true;
    }
  if (any) {
    double clipped = detail::dot(row, neg);
    if (clipped > opt.clip_tolerance)
      throw NegativeDensity("clipping removed mass " + std::to_string(clipped));
  }
  double total = detail::dot(row, est.k_values);
  est.mass_defect = total - 1.0;
  for (auto& v : est.k_values) v /= total;

  est.tail_values.resize(M);
  for (std::size_t i = 0; i < M; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    g.add(row, 1.0, 1.0, 0.0, g.xs[i], kInf);
    est.tail_values[i] = std::min(1.0, detail::dot(row, est.k_values));
  }
  for (std::size_t i = M - 1; i-- > 0;) est.tail_values[i] = std::max(est.tail_values[i], est.tail_values[i + 1]);
  return est;
}

// |T(t_i) - int k(t_i e^{-y}) U(dy)| / T(t_i) at interior nodes with T(t_i) > floor.
inline double renewal_residual(const DensityEstimate& est, const TwoSidedPotential& U, double floor = 1e-12) {
  detail::KernelGeometry g = detail::geometry_of(est);
  const std::size_t M = est.size();
  std::vector<double> row(M);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < M; ++i) {
    const double X = g.xs[i];
    std::fill(row.begin(), row.end(), 0.0);
    g.add(row, 1.0, 1.0, 0.0, X, kInf);
    double T = detail::dot(row, est.k_values);
    std::fill(row.begin(), row.end(), 0.0);
    row[i] += U.atom0;
    for (const auto& t : U.up) g.add(row, t.weight, t.rate, X, -kInf, X);
    for (const auto& t : U.down) g.add(row, t.weight, -t.rate, X, X, kInf);
    double rhs = detail::dot(row, est.k_values);
    if (T > floor) worst = std::max(worst, std::abs(T - rhs) / T);
  }
  return worst;
}

// A DensityEstimate holding a known density on a log grid; used to feed exact
// laws into the residual checks.
template <class F>
DensityEstimate tabulate_density(F&& k, const GridSpec& spec, bool left_constant, double right_exponent,
                                 double support_end = kInf) {
  DensityEstimate e;
  e.left_constant = left_constant;
  e.right_exponent = right_exponent;
  e.support_end = support_end;
  const double x0 = std::log(spec.t_min), x1 = std::log(spec.t_max);
  for (std::size_t i = 0; i < spec.points; ++i) {
    double t = std::exp(x0 + (x1 - x0) * i / (spec.points - 1));
    e.grid.push_back(t);
    e.k_values.push_back(k(t));
  }
  for (std::size_t i = 0; i < spec.points; ++i) e.tail_values.push_back(e.tail_at(e.grid[i]));
  return e;
}

// Left minus right side of
//   -(Q^2/2)(x^2 k)' + ((Q^2/2 + d) x + 1) k(x)
//       = lambda- int_x^inf (x/u)^{eta-} k(u) du - lambda+ int_0^x (u/x)^{eta+} k(u) du
// for an unkilled process with bounded-variation drift d and exponential jumps.
inline double cpy_residual(const LevyModel& m, const DensityEstimate& est, double x) {
  if (m.q > 0.0) throw UnsupportedModel("CPY equation needs infinite lifetime (q = 0)");
  require_admissible(m);
  const double Q2 = 0.5 * m.Q * m.Q, d = m.drift();
  const double h = std::log(est.grid[1] / est.grid[0]);
  auto f = [&](double y) { return y * y * est.k_at(y); };
  double deriv = (f(x * std::exp(h)) - f(x * std::exp(-h))) / (2.0 * h * x);
  double lhs = -Q2 * deriv + ((Q2 + d) * x + 1.0) * est.k_at(x);
  double rhs = 0.0;
  const auto& j = m.jumps;
  if (j.lambda_minus > 0.0) rhs += j.lambda_minus * x * est.upper_power_integral(j.eta_minus - 1.0, x);
  if (j.lambda_plus > 0.0) rhs -= j.lambda_plus * x * est.lower_power_integral(j.eta_plus + 1.0, x);
  return lhs - rhs;
}

// Left minus right side of
//   int_0^x k(s)/s ds = (Q^2/2) x k(x)
//     + b^ int_0^inf (Pi_H(w) + kappa(0,0)) x e^{-w} k(x e^{-w}) dw
//     + b  int_0^inf Pi_Hhat(z) x e^{z} k(x e^{z}) dz
//     + int int (Pi_H(w) + kappa(0,0)) Pi_Hhat(z) x e^{z-w} k(x e^{z-w}) dz dw
// where b, b^ are the drifts and Pi_H, Pi_Hhat the Levy tails of the ladder
// height subordinators. With exponential ladder tails every term reduces to
// power-kernel integrals of k.
inline double extended_cpy_residual(const LevyModel& m, const LadderFactors& f, const DensityEstimate& est,
                                    double x) {
  if (m.q > 0.0) throw UnsupportedModel("identity needs q = 0");
  require_admissible(m);
  SubordinatorModel H = f.H(), Hh = f.Hhat();
  const double k0 = f.kill_up;
  const double b = H.drift, bh = Hh.drift;
  const double cH = H.jump_intensity(), eH = H.jump_rate();
  const double cHh = Hh.jump_intensity(), eHh = Hh.jump_rate();
  auto lower = [&](double p) { return x * est.lower_power_integral(p, x); };
  auto upper = [&](double r) { return x * est.upper_power_integral(r, x); };
  double lhs = est.lower_power_integral(0.0, x);
  double rhs = 0.5 * m.Q * m.Q * x * est.k_at(x);
  // b^ int (Pi_H(w) + k0) x e^{-w} k(x e^{-w}) dw
  if (bh > 0.0) {
    if (cH > 0.0) rhs += bh * cH * lower(eH + 1.0);
    rhs += bh * k0 * lower(1.0);
  }
  // b int Pi_Hhat(z) x e^{z} k(x e^{z}) dz
  if (b > 0.0 && cHh > 0.0) rhs += b * cHh * upper(eHh - 1.0);
  // double integral, split by the sign of y = z - w
  if (cHh > 0.0) {
    double above = (cH > 0.0 ? cH / (eH + eHh) : 0.0) + k0 / eHh;
    rhs += cHh * above * upper(eHh - 1.0);
    if (cH > 0.0) rhs += cHh * cH / (eH + eHh) * lower(eH + 1.0);
    rhs += cHh * k0 / eHh * lower(1.0);
  }
  return lhs - rhs;
}

// Worst violation of (-1)^n Delta^n v >= 0 for n = 1..max_order, relative to
// the largest |Delta^n v| of that order, or to noise_floor when that is larger.
// Zero means the signs alternate.
inline std::vector<double> alternation_violations(const std::vector<double>& v, int max_order = 4,
                                                  double noise_floor = 0.0) {
  std::vector<double> out;
  std::vector<double> d = v;
  for (int n = 1; n <= max_order; ++n) {
    std::vector<double> nd(d.size() - 1);
    for (std::size_t i = 0; i + 1 < d.size(); ++i) nd[i] = d[i + 1] - d[i];
    d = nd;
    double scale = noise_floor, worst = 0.0;
    for (double x : d) scale = std::max(scale, std::abs(x));
    double sign = (n % 2 == 0) ? 1.0 : -1.0;
    for (double x : d) worst = std::max(worst, -sign * x);
    out.push_back(scale > 0.0 ? worst / scale : 0.0);
  }
  return out;
}

// h(t) = E[k(t/R)/R] = int k(u) g(t/u) du/u for R independent of I with density g:
// the density of I R. Midpoint rule in log u over the grid, extended to the
// support end or three decades past the grid.
template <class G>
std::vector<double> mixed_density(const DensityEstimate& est, G&& g, const std::vector<double>& t,
                                  std::size_t nodes = 8000) {
  const double lo = std::log(est.grid.front());
  const double hi = std::log(std::isfinite(est.support_end) ? est.support_end : est.grid.back() * 1e3);
  const double h = (hi - lo) / static_cast<double>(nodes);
  std::vector<double> k(nodes), u(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    u[j] = std::exp(lo + (j + 0.5) * h);
    k[j] = est.k_at(u[j]);
  }
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < nodes; ++j)
      if (k[j] != 0.0) s += k[j] * g(t[i] / u[j]);
    out[i] = static_cast<double>(s * h);
  }
  return out;
}

}  // namespace levy_expfun
