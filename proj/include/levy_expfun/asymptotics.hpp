#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "density.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "moments.hpp"
#include "montecarlo.hpp"
#include "wienerhopf.hpp"

namespace levy_expfun {

enum class TailKind { Cramer, Subexponential, ConvolutionEquivalent, LeftTailKilled, LeftTailUnkilled };

inline const char* tail_kind_name(TailKind k) {
  switch (k) {
    case TailKind::Cramer: return "Cramer";
    case TailKind::Subexponential: return "Subexponential";
    case TailKind::ConvolutionEquivalent: return "ConvolutionEquivalent";
    case TailKind::LeftTailKilled: return "LeftTailKilled";
    case TailKind::LeftTailUnkilled: return "LeftTailUnkilled";
  }
  return "?";
}

struct TailRow {
  double t = 0.0;
  double predicted = 0.0;
  double empirical = 0.0;
  double ratio = 0.0;
};

struct TailReport {
  TailKind kind = TailKind::Cramer;
  double exponent = 0.0;
  double constant = 0.0;
  std::string validity;
  std::optional<std::vector<TailRow>> comparison;
};

inline double cramer_root(const LevyModel& m) {
  require_admissible(m);
  auto r = positive_root(m);
  if (!r) throw NoRoot("Phi stays positive on the finiteness strip");
  double theta = *r;
  if (!(theta < exponential_moment_bound(m)))
    throw InfiniteTiltedMean("E[xi_1^+ e^{theta xi_1}] is infinite");
  if (laplace_exponent_derivative(m, theta) == 0.0) throw InfiniteTiltedMean("Phi'(theta) = 0");
  return theta;
}

// E[xi_1 e^{b xi_1}; 1 < zeta] = -Phi'(b) e^{-Phi(b)}
inline double tilted_mean(const LevyModel& m, double b) {
  return -laplace_exponent_derivative(m, b) * std::exp(-laplace_exponent(m, b));
}

// Where E[I^{theta-1}] comes from.
struct MomentSource {
  std::optional<double> value;  // E[I^{theta-1}] itself
  const DensityEstimate* density = nullptr;
  const SampleSet* samples = nullptr;

  static MomentSource closed_form(double v) { return {v, nullptr, nullptr}; }
  static MomentSource from_density(const DensityEstimate& d) { return {std::nullopt, &d, nullptr}; }
  static MomentSource from_samples(const SampleSet& s) { return {std::nullopt, nullptr, &s}; }
};

// E[I^{beta}] for beta > -1 from a source: integer part by the recurrence,
// fractional anchor from the density or the samples.
inline double moment_from_source(const LevyModel& m, double beta, const MomentSource& src) {
  if (src.value) return *src.value;
  double b0 = (beta + 1.0) - std::floor(beta + 1.0);
  if (b0 < 1e-12) b0 = 1.0;
  MomentAnchor anchor{b0, 1.0};
  if (b0 != 1.0) {
    double s = b0 - 1.0;
    if (src.density) anchor.value = src.density->mellin(s);
    else if (src.samples) anchor.value = mellin_I(*src.samples, {s}).points[0].value;
    else throw InvalidModel("no moment source");
  }
  return std::abs(beta - (b0 - 1.0)) < 1e-12 ? anchor.value : moment_I(m, beta, anchor);
}

inline std::vector<TailRow> upper_tail_table(const SampleSet& s, double exponent, double constant,
                                             std::vector<double> levels = {0.99, 0.995, 0.999}) {
  std::vector<double> v = s.values;
  std::sort(v.begin(), v.end());
  std::vector<TailRow> rows;
  const double n = static_cast<double>(v.size());
  for (double q : levels) {
    std::size_t idx = std::min(v.size() - 1, static_cast<std::size_t>(q * n));
    double t = v[idx];
    double emp = static_cast<double>(v.end() - std::upper_bound(v.begin(), v.end(), t)) / n;
    double pred = constant * std::pow(t, -exponent);
    rows.push_back({t, pred, emp, emp / pred});
  }
  return rows;
}

// t^theta P(I > t) -> E[I^{theta-1}] / E[xi_1 e^{theta xi_1}; 1 < zeta]
inline TailReport cramer_constant(const LevyModel& m, double theta, const MomentSource& src,
                                  const SampleSet* comparison = nullptr) {
  TailReport r;
  r.kind = TailKind::Cramer;
  r.exponent = theta;
  double e = moment_from_source(m, theta - 1.0, src);
  double denom = tilted_mean(m, theta);
  if (!(denom > 0.0)) throw HypothesisFailure("E[xi_1 e^{theta xi_1}] is not positive");
  r.constant = e / denom;
  r.validity = "Cramer root theta with finite tilted mean; non-lattice";
  if (comparison) r.comparison = upper_tail_table(*comparison, theta, r.constant);
  return r;
}

// Ladder exponent of Hhat normalised as in the spectrally negative case,
// phi_Hhat = kappa(q,0) kappa_hat, so that q = phi_Hhat(0) when q > 0.
inline double phi_Hhat_normalised(const LadderFactors& f, double l) { return f.kill_up * f.kappa_hat(l); }

inline void require_spectrally_negative(const LevyModel& m) {
  if (m.has_up_jumps()) throw HypothesisFailure("model has positive jumps");
}

// theta E[I^{theta-1}] / phi_Hhat(theta)
inline double cramer_constant_spectrally_negative(const LevyModel& m, const LadderFactors& f, double theta,
                                                  double moment) {
  require_spectrally_negative(m);
  return theta * moment / phi_Hhat_normalised(f, theta);
}

// |P(I>t) - C t^{-theta}| ~ c2 P(I>t)/t with c2 = theta^2 / phi_Hhat(theta + 1)
inline double second_order_coefficient(const LevyModel& m, const LadderFactors& f, double theta) {
  require_spectrally_negative(m);
  return theta * theta / phi_Hhat_normalised(f, theta + 1.0);
}

// C_theta = E[xi_1 e^{theta xi_1}; 1 < zeta] / E[I^{theta-1}]
inline double rate_constant(const LevyModel& m, double theta, const MomentSource& src) {
  return tilted_mean(m, theta) / moment_from_source(m, theta - 1.0, src);
}

// Prediction for Pi^+ in S_alpha. Exponential jump tails are in L_alpha but
// not in S_alpha: Pi^+ * Pi^+ / Pi^+ grows linearly. Also, with Pi^+
// exponential of rate eta+, Phi -> -inf at eta+, so a Cramer root always
// exists below eta+ and the theorem's non-Cramer condition fails. The catalog
// therefore never meets the hypotheses; this reports why.
inline TailReport convolution_equiv_tail(const LevyModel& m, double alpha) {
  require_admissible(m);
  if (!m.has_up_jumps()) throw HypothesisFailure("no positive jumps");
  if (alpha != m.jumps.eta_plus)
    throw HypothesisFailure("Pi^+ has exponential index eta+ = " + std::to_string(m.jumps.eta_plus));
  if (auto theta = positive_root(m))
    throw HypothesisFailure("Cramer condition holds with theta = " + std::to_string(*theta) +
                            " < eta+; use cramer_constant");
  throw HypothesisFailure("exponential tails are not convolution equivalent (Pi^+ not in S_alpha)");
}

// The case (iii) formula itself, for callers that supply a tail in S_alpha:
// P(I > t) ~ E[I^alpha] / (-log E[e^{alpha xi_1}; 1<zeta]) * Pi^+(log t)
inline double convolution_equiv_constant(double moment_alpha, double phi_alpha) {
  if (!(phi_alpha > 0.0)) throw HypothesisFailure("needs E[e^{alpha xi_1}; 1 < zeta] < 1");
  return moment_alpha / phi_alpha;
}

inline TailReport left_tail(const LevyModel& m, const LadderFactors& f, const SampleSet* samples = nullptr) {
  require_admissible(m);
  (void)f;
  if (!m.has_down_jumps() && m.has_up_jumps() && m.Q == 0.0)
    throw HypothesisFailure("spectrally positive model: small-ball behaviour outside the scope");
  TailReport r;
  if (m.q > 0.0) {
    r.kind = TailKind::LeftTailKilled;
    r.exponent = 1.0;
    r.constant = m.q;
    r.validity = "q > 0: P(I <= t) ~ q t";
  } else {
    r.kind = TailKind::LeftTailUnkilled;
    if (!m.has_down_jumps())
      throw HypothesisFailure("Gaussian left tail, outside Theorem corollarysmtg(ii) scope");
    double alpha = m.jumps.eta_minus;
    double phi = laplace_exponent(m, -alpha);
    // E[e^{-alpha xi_1}] is infinite at the jump rate itself
    if (!std::isfinite(phi) || !(phi > 0.0))
      throw HypothesisFailure("E[e^{-alpha xi_1}] < 1 fails at alpha = eta- (moment is infinite)");
    r.exponent = 1.0 + alpha;
    r.validity = "q = 0, exponential negative jumps";
    if (!samples) throw HypothesisFailure("needs samples for E[I^{-alpha}]");
    double e = mellin_I(*samples, {-alpha}).points[0].value;
    r.constant = e / (1.0 + alpha);
  }
  if (samples && r.kind == TailKind::LeftTailKilled) {
    std::vector<double> v = samples->values;
    std::sort(v.begin(), v.end());
    std::vector<TailRow> rows;
    const double n = static_cast<double>(v.size());
    for (double lvl : {0.001, 0.01, 0.05, 0.1}) {
      double t = v[static_cast<std::size_t>(lvl * n)];
      double emp = static_cast<double>(std::upper_bound(v.begin(), v.end(), t) - v.begin()) / n;
      double pred = r.constant * t;
      rows.push_back({t, pred, emp, emp / pred});
    }
    r.comparison = rows;
  }
  return r;
}

// Slope of P(I <= t)/t as t -> 0: least squares of F(t) = c t + d t^2 over the
// smallest decile of the sample.
inline double left_tail_slope(const SampleSet& s, double fraction = 0.1) {
  std::vector<double> v = s.values;
  std::sort(v.begin(), v.end());
  const std::size_t m = static_cast<std::size_t>(fraction * v.size());
  const double n = static_cast<double>(v.size());
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double t = v[i], F = (i + 1) / n;
    a11 += t * t;
    a12 += t * t * t;
    a22 += t * t * t * t;
    b1 += F * t;
    b2 += F * t * t;
  }
  double det = a11 * a22 - a12 * a12;
  return (b1 * a22 - b2 * a12) / det;
}

struct TransferConstants {
  double upper = 0.0;  // E[I_{-Hhat}^alpha R_H^{-alpha}]
  double lower = 0.0;  // kappa(q,0) E[R_H^{alpha-1}]
  double upper_stderr = 0.0;
  bool lower_degenerate = false;
};

// Constants in
//   P(I > t) ~ E[I_{-Hhat}^alpha R_H^{-alpha}] P(e^{sup xi} > t)
//   P(I <= t) ~ kappa(q,0) E[R_H^{alpha-1}] P(I_{-Hhat} <= t)
// Both factors are independent, so the first splits into two Mellin values.
inline TransferConstants rv_transfer_constant(const LevyModel& m, const LadderFactors& f, double alpha,
                                              std::size_t n = 100000, std::uint64_t seed = 42) {
  require_admissible(m);
  (void)m;
  SubordinatorModel H = f.H(), Hh = f.Hhat();
  TransferConstants c;
  double ih;
  double ih_se = 0.0;
  long k = std::lround(alpha);
  bool integer = std::abs(alpha - k) < 1e-12 && k >= 0;
  if (Hh.is_pure_drift()) {
    ih = std::pow(1.0 / Hh.drift, alpha);
  } else if (integer) {
    ih = k == 0 ? 1.0 : moment_I(LevyModel::neg_subordinator(Hh), alpha);
  } else {
    auto s = sample_I_subordinator(Hh, n, seed);
    auto p = mellin_I(s, {alpha}).points[0];
    ih = p.value;
    ih_se = p.stderr_;
  }
  double rh = moment_R(H, -alpha);
  c.upper = ih * rh;
  c.upper_stderr = ih_se * rh;
  c.lower = f.kill_up * (alpha - 1.0 > -1.0 ? moment_R(H, alpha - 1.0) : kInf);
  c.lower_degenerate = Hh.is_pure_drift();
  return c;
}

}  // namespace levy_expfun
