#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "density.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "montecarlo.hpp"

namespace levy_expfun {

enum class MellinSource { Recurrence, MonteCarlo, ClosedForm };

struct MellinPoint {
  double s = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;
  // sample sources only: mean with the smallest trim fraction of values dropped
  double trimmed = 0.0;
};

struct MellinProfile {
  std::vector<MellinPoint> points;
  MellinSource source = MellinSource::Recurrence;
};

// E[I^{beta0 - 1}] for some beta0 in (0, 1].
struct MomentAnchor {
  double beta0 = 1.0;
  double value = 1.0;
};

// E[I^beta] = beta / Phi(beta) E[I^{beta-1}], iterated from the anchor.
inline double moment_I(const LevyModel& m, double beta, const MomentAnchor& anchor = {}) {
  if (!(anchor.beta0 > 0.0 && anchor.beta0 <= 1.0)) throw InvalidModel("anchor beta0 must lie in (0, 1]");
  double steps = beta - anchor.beta0;
  long n = std::lround(steps);
  if (std::abs(steps - n) > 1e-9) throw OutsideDomain("beta is not anchor beta0 plus an integer");
  if (n < -1) throw OutsideDomain("beta below the anchor");
  double v = anchor.value;
  for (long j = 0; j <= n; ++j) {
    double b = anchor.beta0 + j;
    double phi = laplace_exponent(m, b);
    if (!std::isfinite(phi) || !(phi > 0.0))
      throw OutsideDomain("beta = " + std::to_string(b) + " is outside the set where Phi > 0");
    v *= b / phi;
  }
  return v;
}

// log E[R^s] from the infinite product
//   E[R^s] = e^{-s gamma} prod_k e^{s phi'(k)/phi(k)} phi(k)/phi(k+s),
// summed to K and closed with an Euler-Maclaurin tail. Needs phi > 0 on [1+s, inf).
inline double log_moment_R_product(const SubordinatorModel& sub, double s, std::size_t K = 4000) {
  double r_min = RationalExponent::from_subordinator(sub).reciprocal_measure().min_rate();
  if (!(1.0 + s > -r_min) || !(sub.phi(1.0 + s) > 0.0)) throw OutsideDomain("E[R^s] is infinite");
  if (s == 0.0) return 0.0;
  const double gamma = residual_gamma(sub).value;
  auto g = [&](double k) { return s * sub.dphi(k) / sub.phi(k) + std::log(sub.phi(k)) - std::log(sub.phi(k + s)); };
  long double sum = 0.0L;
  for (std::size_t k = 1; k <= K; ++k) sum += g(static_cast<double>(k));
  const double Kd = static_cast<double>(K);
  // int_K^{K+s} log phi, Gauss-Legendre on 8 nodes
  static const double xg[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
  static const double wg[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  double integral = 0.0;
  for (int i = 0; i < 4; ++i) {
    integral += wg[i] * (std::log(sub.phi(Kd + 0.5 * s * (1 + xg[i]))) + std::log(sub.phi(Kd + 0.5 * s * (1 - xg[i]))));
  }
  integral *= 0.5 * s;
  double h = 1e-2;
  double gp = (g(Kd + h) - g(Kd - h)) / (2 * h);
  double tail = integral - s * std::log(sub.phi(Kd)) - 0.5 * g(Kd) - gp / 12.0;
  return static_cast<double>(sum) + tail - s * gamma;
}

// E[R^lambda]: prod_{k<=n} phi(k) for integers; for real lambda either the
// chain E[R^l] = phi(l) E[R^{l-1}] from an anchor (lambda0, E[R^{lambda0-1}]),
// or, without an anchor, the infinite product.
inline double moment_R(const SubordinatorModel& sub, double lambda, std::optional<MomentAnchor> anchor = std::nullopt) {
  sub.validate();
  long n = std::lround(lambda);
  if (std::abs(lambda - n) < 1e-12 && n >= 0) {
    double v = 1.0;
    for (long k = 1; k <= n; ++k) v *= sub.phi(static_cast<double>(k));
    return v;
  }
  if (anchor) {
    double steps = lambda - anchor->beta0;
    long m = std::lround(steps);
    if (std::abs(steps - m) > 1e-9 || m < -1) throw OutsideDomain("lambda is not anchor plus a nonnegative integer");
    double v = anchor->value;
    for (long j = 0; j <= m; ++j) v *= sub.phi(anchor->beta0 + j);
    return v;
  }
  return std::exp(log_moment_R_product(sub, lambda));
}

inline double hill_estimator(std::vector<double> v, double top_fraction = 0.01) {
  std::sort(v.begin(), v.end(), std::greater<double>());
  std::size_t k = std::max<std::size_t>(10, static_cast<std::size_t>(top_fraction * v.size()));
  if (k + 1 > v.size()) k = v.size() - 1;
  if (!(v[k] > 0.0)) return kInf;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(v[i] / v[k]);
  return s > 0.0 ? static_cast<double>(k) / s : kInf;
}

inline MellinProfile mellin_I(const DensityEstimate& est, const std::vector<double>& s_list) {
  MellinProfile p;
  p.source = MellinSource::ClosedForm;
  for (double s : s_list) {
    if (est.right_exponent > 0.0 && s >= est.right_exponent - 1.0)
      throw DivergentMoment("s = " + std::to_string(s) + " at or beyond the tail index");
    if (est.left_constant && s <= -1.0) throw DivergentMoment("s <= -1 with positive density at 0");
    double v = est.mellin(s);
    p.points.push_back({s, v, 0.0, v});
  }
  return p;
}

inline MellinProfile mellin_I(const SampleSet& samples, const std::vector<double>& s_list,
                              double trim_fraction = 1e-4) {
  MellinProfile p;
  p.source = MellinSource::MonteCarlo;
  const auto& v = samples.values;
  const double n = static_cast<double>(v.size());
  std::optional<double> upper_index, lower_index;
  for (double s : s_list) {
    if (s > 0.0) {
      if (!upper_index) upper_index = hill_estimator(v);
      double a = *upper_index, se = a / std::sqrt(0.01 * n);
      if (s >= a - 2.0 * se) throw DivergentMoment("s = " + std::to_string(s) + " vs tail index " + std::to_string(a));
    } else if (s < 0.0) {
      if (!lower_index) {
        std::vector<double> inv(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) inv[i] = 1.0 / v[i];
        lower_index = hill_estimator(inv);
      }
      double a = *lower_index, se = a / std::sqrt(0.01 * n);
      if (-s >= a - 2.0 * se)
        throw DivergentMoment("s = " + std::to_string(s) + " vs left tail index " + std::to_string(a));
    }
    long double sum = 0.0L, sum2 = 0.0L;
    for (double x : v) {
      long double y = std::pow(x, s);
      sum += y;
      sum2 += y * y;
    }
    double mean = static_cast<double>(sum / n);
    double var = static_cast<double>(sum2 / n) - mean * mean;
    double trimmed = mean;
    if (s < 0.0) {
      std::vector<double> sorted = v;
      std::sort(sorted.begin(), sorted.end());
      std::size_t drop = static_cast<std::size_t>(trim_fraction * n);
      long double ts = 0.0L;
      for (std::size_t i = drop; i < sorted.size(); ++i) ts += std::pow(sorted[i], s);
      trimmed = static_cast<double>(ts / (sorted.size() - drop));
    }
    p.points.push_back({s, mean, std::sqrt(std::max(0.0, var) / n), trimmed});
  }
  return p;
}

// max over s of |E[I_{-sigma}^s] E[R_sigma^s] / Gamma(1+s) - 1|.
// Integer s: recurrence for the first factor and prod phi(k) for the second.
// Other s: Mellin transform of the solved density of I_{-sigma} and the
// infinite product for E[R^s].
inline double check_gamma_identity(const SubordinatorModel& sub_hat, const std::vector<double>& s_list,
                                   std::size_t grid_points = 3000) {
  sub_hat.validate();
  LevyModel neg = LevyModel::neg_subordinator(sub_hat);
  std::optional<DensityEstimate> est;
  double worst = 0.0;
  for (double s : s_list) {
    if (!(s > -1.0)) throw OutsideDomain("check_gamma_identity needs s > -1");
    double mi, mr;
    long n = std::lround(s);
    if (std::abs(s - n) < 1e-12 && n >= 0) {
      mi = n == 0 ? 1.0 : moment_I(neg, s);
      mr = moment_R(sub_hat, s);
    } else {
      if (!est) {
        GridSpec g;
        g.t_min = 1e-9;
        g.t_max = std::isfinite(neg.support_end()) ? neg.support_end() : 200.0 / sub_hat.phi(1.0);
        g.points = grid_points;
        est = solve_renewal(neg, potential_U(factorize(neg)), g);
      }
      mi = est->mellin(s);
      mr = moment_R(sub_hat, s);
    }
    worst = std::max(worst, std::abs(mi * mr / std::tgamma(1.0 + s) - 1.0));
  }
  return worst;
}

}  // namespace levy_expfun
