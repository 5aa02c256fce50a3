#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>

#include "errors.hpp"

namespace levy_expfun {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ExpJumps {
  double intensity = 0.0;  // total mass c of the Levy measure
  double rate = 1.0;       // jump sizes are Exp(rate)
};

// phi(l) = kill + drift*l + c*l/(l + eta)
struct SubordinatorModel {
  double kill = 0.0;
  double drift = 0.0;
  std::optional<ExpJumps> jumps;

  void validate() const {
    if (!(kill >= 0.0) || !(drift >= 0.0) || !std::isfinite(kill) || !std::isfinite(drift))
      throw InvalidModel("subordinator kill and drift must be finite and >= 0");
    if (jumps) {
      if (!(jumps->intensity > 0.0) || !(jumps->rate > 0.0) || !std::isfinite(jumps->intensity) ||
          !std::isfinite(jumps->rate))
        throw InvalidModel("subordinator jump intensity and rate must be finite and > 0");
    }
    if (kill == 0.0 && drift == 0.0 && !jumps)
      throw InvalidModel("subordinator is identically zero");
  }

  double jump_intensity() const { return jumps ? jumps->intensity : 0.0; }
  double jump_rate() const { return jumps ? jumps->rate : 1.0; }

  double phi(double l) const {
    double v = kill + drift * l;
    if (jumps) v += jumps->intensity * l / (l + jumps->rate);
    return v;
  }
  double dphi(double l) const {
    double v = drift;
    if (jumps) {
      double s = l + jumps->rate;
      v += jumps->intensity * jumps->rate / (s * s);
    }
    return v;
  }
  // E[sigma_1] for the unkilled subordinator
  double mean() const { return drift + (jumps ? jumps->intensity / jumps->rate : 0.0); }
  bool is_pure_drift() const { return kill == 0.0 && !jumps; }
};

enum class Family { KilledDrift, BrownianDrift, SpectrallyNegativeBM, DoubleExpJumps, NegSubordinator };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::KilledDrift: return "KilledDrift";
    case Family::BrownianDrift: return "BrownianDrift";
    case Family::SpectrallyNegativeBM: return "SpectrallyNegativeBM";
    case Family::DoubleExpJumps: return "DoubleExpJumps";
    case Family::NegSubordinator: return "NegSubordinator";
  }
  return "?";
}

struct DoubleExpParams {
  double lambda_plus = 0.0;
  double eta_plus = 1.0;
  double lambda_minus = 0.0;
  double eta_minus = 1.0;
};

// int_{|x|<1} x Pi(dx) for an Exp(eta) jump law of intensity lam
inline double truncated_first_moment(double lam, double eta) {
  if (lam == 0.0) return 0.0;
  return lam * (-std::expm1(-eta) / eta - std::exp(-eta));
}

// A killed Levy process given by its quadruplet (q, a, Q, Pi), with
//   Psi(l) = q + a i l + Q^2 l^2 / 2 + int (1 - e^{i l x} - i l x 1_{|x|<1}) Pi(dx)
// and E[exp(i l xi_1); 1 < zeta] = exp(-Psi(l)).
// Every family has exponential jumps on either side, so the process also has
// a bounded-variation drift d = m1 - a, m1 = int_{|x|<1} x Pi(dx), which is
// what path simulation and the integro-differential residuals use.
struct LevyModel {
  Family family = Family::KilledDrift;
  double q = 0.0;
  double a = 0.0;
  double Q = 0.0;
  DoubleExpParams jumps;
  std::optional<SubordinatorModel> sub;  // NegSubordinator only

  static LevyModel killed_drift(double q, double a) {
    LevyModel m;
    m.family = Family::KilledDrift;
    m.q = q;
    m.a = a;
    m.validate();
    return m;
  }
  static LevyModel brownian_drift(double q, double a, double Q) {
    LevyModel m;
    m.family = Family::BrownianDrift;
    m.q = q;
    m.a = a;
    m.Q = Q;
    m.validate();
    return m;
  }
  static LevyModel spectrally_negative(double q, double a, double Q, double lambda_minus, double eta_minus) {
    LevyModel m;
    m.family = Family::SpectrallyNegativeBM;
    m.q = q;
    m.a = a;
    m.Q = Q;
    m.jumps.lambda_minus = lambda_minus;
    m.jumps.eta_minus = eta_minus;
    m.validate();
    return m;
  }
  static LevyModel double_exp(double q, double a, double Q, DoubleExpParams p) {
    LevyModel m;
    m.family = Family::DoubleExpJumps;
    m.q = q;
    m.a = a;
    m.Q = Q;
    m.jumps = p;
    m.validate();
    return m;
  }
  // xi = -sigma
  static LevyModel neg_subordinator(const SubordinatorModel& s) {
    s.validate();
    LevyModel m;
    m.family = Family::NegSubordinator;
    m.sub = s;
    m.q = s.kill;
    m.jumps.lambda_minus = s.jump_intensity();
    m.jumps.eta_minus = s.jump_rate();
    m.a = truncated_first_moment(0.0, 1.0) - truncated_first_moment(m.jumps.lambda_minus, m.jumps.eta_minus) +
          s.drift;
    m.validate();
    return m;
  }

  // Quadruplet coefficient a that gives bounded-variation drift d.
  static double a_for_drift(double d, const DoubleExpParams& p) {
    return truncated_first_moment(p.lambda_plus, p.eta_plus) - truncated_first_moment(p.lambda_minus, p.eta_minus) -
           d;
  }

  double drift() const {
    return truncated_first_moment(jumps.lambda_plus, jumps.eta_plus) -
           truncated_first_moment(jumps.lambda_minus, jumps.eta_minus) - a;
  }

  bool has_up_jumps() const { return jumps.lambda_plus > 0.0; }
  bool has_down_jumps() const { return jumps.lambda_minus > 0.0; }

  // Paths never increase: I is then bounded by 1/|d|.
  bool is_nonincreasing() const { return Q == 0.0 && !has_up_jumps() && drift() <= 0.0; }
  double support_end() const {
    if (!is_nonincreasing()) return kInf;
    double d = drift();
    return d < 0.0 ? -1.0 / d : kInf;
  }

  // The subordinator sigma with xi = -sigma, when there is one.
  std::optional<SubordinatorModel> as_negated_subordinator() const {
    if (!is_nonincreasing()) return std::nullopt;
    SubordinatorModel s;
    s.kill = q;
    s.drift = -drift();
    if (has_down_jumps()) s.jumps = ExpJumps{jumps.lambda_minus, jumps.eta_minus};
    if (s.kill == 0.0 && s.drift == 0.0 && !s.jumps) return std::nullopt;
    return s;
  }

  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(q) || !finite(a) || !finite(Q)) throw InvalidModel("q, a, Q must be finite");
    if (q < 0.0) throw InvalidModel("q must be >= 0");
    if (Q < 0.0) throw InvalidModel("Q must be >= 0");
    const auto& j = jumps;
    if (!(j.lambda_plus >= 0.0) || !(j.lambda_minus >= 0.0) || !finite(j.lambda_plus) || !finite(j.lambda_minus))
      throw InvalidModel("jump intensities must be finite and >= 0");
    if (!(j.eta_plus > 0.0) || !(j.eta_minus > 0.0) || !finite(j.eta_plus) || !finite(j.eta_minus))
      throw InvalidModel("jump rates must be finite and > 0");
    switch (family) {
      case Family::KilledDrift:
        if (Q != 0.0 || j.lambda_plus != 0.0 || j.lambda_minus != 0.0)
          throw InvalidModel("KilledDrift has no Gaussian or jump part");
        break;
      case Family::BrownianDrift:
        if (j.lambda_plus != 0.0 || j.lambda_minus != 0.0) throw InvalidModel("BrownianDrift has no jumps");
        break;
      case Family::SpectrallyNegativeBM:
        if (j.lambda_plus != 0.0) throw InvalidModel("SpectrallyNegativeBM has no positive jumps");
        if (!(Q > 0.0)) throw InvalidModel("SpectrallyNegativeBM needs Q > 0");
        break;
      case Family::DoubleExpJumps:
        break;
      case Family::NegSubordinator:
        if (!sub) throw InvalidModel("NegSubordinator without subordinator");
        if (Q != 0.0 || j.lambda_plus != 0.0) throw InvalidModel("NegSubordinator must be nonincreasing");
        break;
    }
  }

  std::string tag() const;
};

inline std::complex<double> char_exponent(const LevyModel& m, double l) {
  using C = std::complex<double>;
  const C i(0.0, 1.0);
  C v = C(m.q) - i * l * m.drift() + 0.5 * m.Q * m.Q * l * l;
  const auto& j = m.jumps;
  if (j.lambda_plus > 0.0) v += j.lambda_plus * (1.0 - j.eta_plus / (j.eta_plus - i * l));
  if (j.lambda_minus > 0.0) v += j.lambda_minus * (1.0 - j.eta_minus / (j.eta_minus + i * l));
  return v;
}

// Phi(b) = Psi(-i b), so that E[exp(b xi_1); 1 < zeta] = exp(-Phi(b)).
// +inf where the exponential moment is infinite.
inline double laplace_exponent(const LevyModel& m, double b) {
  const auto& j = m.jumps;
  if (j.lambda_plus > 0.0 && b >= j.eta_plus) return kInf;
  if (j.lambda_minus > 0.0 && b <= -j.eta_minus) return kInf;
  double v = m.q - m.drift() * b - 0.5 * m.Q * m.Q * b * b;
  if (j.lambda_plus > 0.0) v -= j.lambda_plus * b / (j.eta_plus - b);
  if (j.lambda_minus > 0.0) v += j.lambda_minus * b / (j.eta_minus + b);
  return v;
}

inline double laplace_exponent_derivative(const LevyModel& m, double b) {
  const auto& j = m.jumps;
  double v = -m.drift() - m.Q * m.Q * b;
  if (j.lambda_plus > 0.0) v -= j.lambda_plus * j.eta_plus / ((j.eta_plus - b) * (j.eta_plus - b));
  if (j.lambda_minus > 0.0) v += j.lambda_minus * j.eta_minus / ((j.eta_minus + b) * (j.eta_minus + b));
  return v;
}

// Largest b with a finite exponential moment (exclusive).
inline double exponential_moment_bound(const LevyModel& m) {
  return m.has_up_jumps() ? m.jumps.eta_plus : kInf;
}

// Pre-killing mean of xi_1.
inline double mean(const LevyModel& m) {
  const auto& j = m.jumps;
  return m.drift() + (j.lambda_plus > 0.0 ? j.lambda_plus / j.eta_plus : 0.0) -
         (j.lambda_minus > 0.0 ? j.lambda_minus / j.eta_minus : 0.0);
}

struct Admissibility {
  bool ok = false;
  std::string diagnostic;
};

inline Admissibility admissible(const LevyModel& m) {
  m.validate();
  if (m.q > 0.0) return {true, "killed at rate q > 0"};
  double mu = mean(m);
  if (!std::isfinite(mu)) return {false, "mean is not finite"};
  if (mu < 0.0) return {true, "drifts to -infinity"};
  if (mu > 0.0) return {false, "drifts to +infinity"};
  return {false, "oscillates (zero mean)"};
}

inline void require_admissible(const LevyModel& m) {
  auto r = admissible(m);
  if (!r.ok) throw InvalidModel("model not admissible: " + r.diagnostic);
}

inline std::string LevyModel::tag() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s(q=%.17g,a=%.17g,Q=%.17g,lp=%.17g,ep=%.17g,lm=%.17g,em=%.17g)", family_name(family),
                q, a, Q, jumps.lambda_plus, jumps.eta_plus, jumps.lambda_minus, jumps.eta_minus);
  return buf;
}

// Positive root of Phi on (0, exponential_moment_bound), or nullopt when Phi stays
// positive there. Bisection to bracket, Newton to polish.
inline std::optional<double> positive_root(const LevyModel& m) {
  const double bmax = exponential_moment_bound(m);
  auto f = [&](double b) { return laplace_exponent(m, b); };
  double lo = 0.0, hi;
  if (std::isfinite(bmax)) {
    // Phi -> -inf as b -> eta_plus, walk towards the pole
    hi = 0.5 * bmax;
    int guard = 0;
    while (f(hi) > 0.0) {
      lo = hi;
      hi = bmax - 0.5 * (bmax - hi);
      if (++guard > 200 || hi >= bmax) return std::nullopt;
    }
  } else {
    hi = 1.0;
    while (f(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e8) return std::nullopt;
    }
  }
  if (m.q == 0.0 && lo == 0.0) {
    // Phi(0) = 0 here; need a point where Phi > 0
    double s = hi;
    while (s > 1e-14 && f(s) <= 0.0) s *= 0.5;
    if (f(s) <= 0.0) return std::nullopt;
    lo = s;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 20; ++it) {
    double fx = f(x), d = laplace_exponent_derivative(m, x);
    if (fx == 0.0 || d == 0.0) break;
    double nx = x - fx / d;
    if (!(nx > lo - 1e-12 && nx < hi + 1e-12)) break;
    if (std::abs(nx - x) < 1e-16 * std::abs(x)) {
      x = nx;
      break;
    }
    x = nx;
  }
  return x;
}

}  // namespace levy_expfun
