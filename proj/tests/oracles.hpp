#pragma once

// Closed forms and brute-force references, written without the library so
// that the tests compare two independent computations.

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace oracle {

inline std::string model_path(const std::string& name) { return std::string(LEVY_EXPFUN_MODELS_DIR) + "/" + name + ".json"; }

// xi_t = d t + Q B_t + compound Poisson with Exp(ep) up-jumps at rate lp and
// Exp(em) down-jumps at rate lm, killed at rate q; log E[e^{b xi_1}; 1 < zeta] = -Phi(b).
struct Process {
  double q = 0, d = 0, Q = 0, lp = 0, ep = 1, lm = 0, em = 1;

  double Phi(double b) const {
    double v = q - d * b - 0.5 * Q * Q * b * b;
    if (lp > 0) v -= lp * b / (ep - b);
    if (lm > 0) v += lm * b / (em + b);
    return v;
  }
  // E[e^{i l xi_1}] = e^{-Psi(l)}, unkilled part plus q
  std::complex<double> Psi(double l) const {
    using C = std::complex<double>;
    const C i(0, 1);
    C v = q - i * d * l + 0.5 * Q * Q * l * l;
    if (lp > 0) v -= lp * (ep / (ep - i * l) - 1.0);
    if (lm > 0) v -= lm * (em / (em + i * l) - 1.0);
    return v;
  }
};

// Catalog entries in the drift parametrisation.
inline Process killed_drift(double q, double a) { return {q, -a, 0, 0, 1, 0, 1}; }
inline Process dufresne() { return {0, -2, 2, 0, 1, 0, 1}; }
inline Process spec_neg() { return {0, -0.5, 1, 0, 1, 1, 2}; }
inline Process kou(double q = 0) { return {q, -1, 1, 1, 3, 1, 2}; }

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    double mid = 0.5 * (lo + hi), fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// E[I^n] = n! / prod_{k<=n} Phi(k)
inline double integer_moment(const Process& p, int n) {
  double v = 1.0;
  for (int k = 1; k <= n; ++k) v *= k / p.Phi(k);
  return v;
}

// KilledDrift(q, a): I = (1 - e^{-a zeta})/a, zeta ~ Exp(q)
inline double killed_drift_density(double q, double a, double t) {
  if (t <= 0 || t >= 1 / a) return 0.0;
  return q * std::pow(1 - a * t, q / a - 1);
}
inline double killed_drift_cdf(double q, double a, double t) {
  if (t <= 0) return 0.0;
  if (t >= 1 / a) return 1.0;
  return 1 - std::pow(1 - a * t, q / a);
}

// int_0^inf e^{2B_t - 2t} dt = 1/(2 G), G ~ Exp(1)
inline double dufresne_density(double t) { return t > 0 ? std::exp(-0.5 / t) / (2 * t * t) : 0.0; }
inline double dufresne_cdf(double t) { return t > 0 ? std::exp(-0.5 / t) : 0.0; }
inline double dufresne_mellin(double s) { return std::pow(2.0, -s) * std::tgamma(1 - s); }

inline double gamma2_cdf(double x) { return x > 0 ? 1 - std::exp(-x) * (1 + x) : 0.0; }
inline double exp_cdf(double x) { return x > 0 ? 1 - std::exp(-x) : 0.0; }
inline double uniform_cdf(double x) { return x <= 0 ? 0.0 : (x >= 1 ? 1.0 : x); }

// Beta(1, 2), density 2(1 - t): the KilledDrift(2, 1) law
inline double beta12_cdf(double x) { return killed_drift_cdf(2, 1, x); }

inline double sup_norm(const std::vector<double>& a, const std::vector<double>& b) {
  double w = 0;
  for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
  return w;
}

// Frozen references (mpmath, 30 digits, from the Phi above).
inline constexpr double kKouRootsUp[2] = {1.3681733162459649214, 4.1171761770513598076};
inline constexpr double kKouRootDown = -2.485349493297324729;
inline constexpr double kKouKilledRoots[4] = {1.6585983773332643021, 4.2110041608379355828, -2.530060602890557802,
                                              -0.33954193528064208301};
inline constexpr double kSpecNegRoot = 1.5615528128088302749;  // (sqrt(17) - 1)/2
inline constexpr double kSpecNegRootDown = -2.5615528128088302749;

}  // namespace oracle
