#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "potential.hpp"
#include "random.hpp"
#include "wienerhopf.hpp"

namespace levy_expfun {

enum class Scheme { PathIntegral, Perpetuity, ClosedForm, ProductTruncation };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::PathIntegral: return "PathIntegral";
    case Scheme::Perpetuity: return "Perpetuity";
    case Scheme::ClosedForm: return "ClosedForm";
    case Scheme::ProductTruncation: return "ProductTruncation";
  }
  return "?";
}

struct SampleSet {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string model_tag;
  std::size_t n = 0;
  Scheme scheme = Scheme::PathIntegral;
  std::map<std::string, double> diagnostics;
};

struct PathOptions {
  double dt = 1e-2;
  double horizon = 100.0;
  // a path stops once the rest of the integral is below this fraction of
  // what has been accumulated, except with probability about this size
  double stop_tolerance = 1e-10;
  double decile_tolerance = 1e-3;
  int max_doublings = 4;
};

namespace detail {

struct PathParams {
  double d, Q, lp, ep, lm, em, q, dt;
  PathParams(const LevyModel& m, double step)
      : d(m.drift()),
        Q(m.Q),
        lp(m.jumps.lambda_plus),
        ep(m.jumps.eta_plus),
        lm(m.jumps.lambda_minus),
        em(m.jumps.eta_minus),
        q(m.q),
        dt(step) {}
};

struct PathOutcome {
  double integral = 0.0;
  double xi = 0.0;
  double sup = 0.0;
  double last_decile = 0.0;
  bool killed = false;
};

// Event-driven Euler scheme: steps of length dt, cut at jump times, the
// killing time and the horizon. Gaussian increments are exact; the integral is
// exact between events when Q = 0 and trapezoidal otherwise.
// rel_gap > 0 enables early stopping: for the integral when
// e^{xi} < rel_gap * integral, for the supremum when e^{xi} < rel_gap * e^{sup}.
template <bool kTrackSup>
PathOutcome run_path(const PathParams& p, CounterRng& rng, double horizon, double rel_gap) {
  PathOutcome o;
  double t = 0.0, xi = 0.0, e = 1.0;
  const double kill_t = p.q > 0.0 ? rng.exponential() / p.q : kInf;
  double next_up = p.lp > 0.0 ? rng.exponential() / p.lp : kInf;
  double next_dn = p.lm > 0.0 ? rng.exponential() / p.lm : kInf;
  const double decile = 0.9 * horizon;
  const double Q2 = p.Q * p.Q;
  for (;;) {
    double t_next = std::min({t + p.dt, horizon, kill_t, next_up, next_dn});
    double h = t_next - t;
    double inc = p.d * h;
    double piece;
    if (p.Q > 0.0) {
      inc += p.Q * std::sqrt(h) * rng.normal();
      double e_new = std::exp(xi + inc);
      piece = 0.5 * h * (e + e_new);
      if constexpr (kTrackSup) {
        // maximum of the Brownian bridge over the step
        double m = 0.5 * (2.0 * xi + inc + std::sqrt(inc * inc - 2.0 * Q2 * h * std::log(rng.uniform())));
        o.sup = std::max(o.sup, m);
      }
      e = e_new;
      xi += inc;
    } else {
      double dh = p.d * h;
      piece = e * (dh == 0.0 ? h : std::expm1(dh) / p.d);
      xi += inc;
      e = std::exp(xi);
      if constexpr (kTrackSup) o.sup = std::max(o.sup, xi);
    }
    o.integral += piece;
    if (t_next > decile) o.last_decile += piece * (t_next - std::max(t, decile)) / h;
    t = t_next;
    if (t >= kill_t) {
      o.killed = true;
      break;
    }
    if (t >= horizon) break;
    if (t == next_up) {
      xi += rng.exponential() / p.ep;
      next_up += rng.exponential() / p.lp;
      e = std::exp(xi);
    }
    if (t == next_dn) {
      xi -= rng.exponential() / p.em;
      next_dn += rng.exponential() / p.lm;
      e = std::exp(xi);
    }
    if constexpr (kTrackSup) {
      o.sup = std::max(o.sup, xi);
      if (rel_gap > 0.0 && xi < o.sup + std::log(rel_gap)) break;
    } else {
      if (rel_gap > 0.0 && e < rel_gap * o.integral) break;
    }
  }
  o.xi = xi;
  return o;
}

inline double bisect_decreasing(const std::function<double(double)>& f, double target, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// log of the stopping gap: the overall supremum exceeds it with probability <= tol.
inline double stop_gap(const LevyModel& m, double tol) {
  double g = -std::log(tol);
  PotentialMeasure sup = supremum_law(factorize(m));
  if (!sup.terms.empty() && sup.tail(g) > tol)
    g = bisect_decreasing([&](double x) { return sup.tail(x); }, tol, g, 1e4);
  return g;
}

template <class F>
std::vector<double> fill(std::size_t n, F&& f) {
  std::vector<double> v(n);
  parallel_for(n, [&](std::size_t i) { v[i] = f(i); });
  return v;
}

}  // namespace detail

inline double sample_potential(const PotentialMeasure& law, CounterRng& rng) {
  double u = rng.uniform();
  if (u < law.atom0) return 0.0;
  u -= law.atom0;
  for (std::size_t j = 0; j < law.terms.size(); ++j) {
    double p = law.terms[j].weight / law.terms[j].rate;
    if (u < p || j + 1 == law.terms.size()) return rng.exponential() / law.terms[j].rate;
    u -= p;
  }
  return 0.0;
}

inline SampleSet sample_I_path(const LevyModel& m, std::size_t n, double dt, double horizon, std::uint64_t seed,
                               const PathOptions& opt = {}) {
  require_admissible(m);
  if (!(dt > 0.0) || !(horizon > dt)) throw InvalidModel("need 0 < dt < horizon");
  detail::PathParams p(m, dt);
  const double rel_gap = std::exp(-detail::stop_gap(m, opt.stop_tolerance));
  double T = horizon;
  for (int doubling = 0;; ++doubling) {
    std::vector<double> last(n);
    std::vector<double> v = detail::fill(n, [&](std::size_t i) {
      CounterRng rng(seed, kStreamPath, i);
      auto o = detail::run_path<false>(p, rng, T, rel_gap);
      last[i] = o.last_decile;
      return o.integral;
    });
    double tot = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tot += v[i];
      tail += last[i];
    }
    if (tail <= opt.decile_tolerance * tot) {
      SampleSet s{std::move(v), seed, m.tag(), n, Scheme::PathIntegral, {}};
      s.diagnostics["horizon"] = T;
      s.diagnostics["dt"] = dt;
      s.diagnostics["last_decile_fraction"] = tot > 0.0 ? tail / tot : 0.0;
      return s;
    }
    if (doubling == opt.max_doublings)
      throw TruncationBias("last decile of the horizon still carries " + std::to_string(tail / tot) +
                           " of the integral after 4 doublings");
    T *= 2.0;
  }
}

inline SampleSet sample_supremum(const LevyModel& m, std::size_t n, double dt, double horizon, std::uint64_t seed,
                                 const PathOptions& opt = {}) {
  require_admissible(m);
  detail::PathParams p(m, dt);
  const double rel_gap = std::exp(-detail::stop_gap(m, opt.stop_tolerance));
  double T = horizon;
  for (int doubling = 0;; ++doubling) {
    std::vector<char> open(n, 0);
    std::vector<double> v = detail::fill(n, [&](std::size_t i) {
      CounterRng rng(seed, kStreamSupremum, i);
      auto o = detail::run_path<true>(p, rng, T, rel_gap);
      // a path still within the gap of its maximum at the horizon may yet rise
      open[i] = !o.killed && o.xi >= o.sup + std::log(rel_gap);
      return o.sup;
    });
    std::size_t n_open = std::count(open.begin(), open.end(), 1);
    if (static_cast<double>(n_open) <= opt.decile_tolerance * static_cast<double>(n)) {
      SampleSet s{std::move(v), seed, m.tag(), n, Scheme::PathIntegral, {}};
      s.diagnostics["horizon"] = T;
      s.diagnostics["open_fraction"] = static_cast<double>(n_open) / n;
      return s;
    }
    if (doubling == opt.max_doublings) throw TruncationBias("supremum paths still open at the horizon");
    T *= 2.0;
  }
}

// Number of unit-time blocks so that E[M^eps]^n < 1e-6 for the best probe eps.
inline std::size_t perpetuity_iterations(const LevyModel& m) {
  double best = 0.0;
  for (int k = 1; k <= 20; ++k) {
    double phi = laplace_exponent(m, 0.05 * k);
    if (std::isfinite(phi)) best = std::max(best, phi);
  }
  if (!(best > 0.0)) throw NonContraction("E[M^eps] >= 1 for every probe eps in (0,1]");
  return static_cast<std::size_t>(std::ceil(std::log(1e6) / best));
}

inline SampleSet sample_I_perpetuity(const LevyModel& m, std::size_t n, std::size_t iterations, std::uint64_t seed,
                                     double dt = 1e-2) {
  require_admissible(m);
  if (iterations == 0) iterations = perpetuity_iterations(m);
  detail::PathParams p(m, dt);
  std::vector<double> v = detail::fill(n, [&](std::size_t i) {
    CounterRng rng(seed, kStreamPerpetuity, i);
    double I = 0.0;
    for (std::size_t k = 0; k < iterations; ++k) {
      auto o = detail::run_path<false>(p, rng, 1.0, 0.0);
      double M = o.killed ? 0.0 : std::exp(o.xi);
      I = o.integral + M * I;
    }
    return I;
  });
  SampleSet s{std::move(v), seed, m.tag(), n, Scheme::Perpetuity, {}};
  s.diagnostics["iterations"] = static_cast<double>(iterations);
  s.diagnostics["dt"] = dt;
  return s;
}

// I_{-sigma} = int_0^zeta e^{-sigma_s} ds, exactly: sigma is drift between
// exponential jump/kill events.
inline double sample_sub_functional(const SubordinatorModel& s, CounterRng& rng) {
  const double c = s.jump_intensity();
  const double rate = s.kill + c;
  if (rate == 0.0) return 1.0 / s.drift;
  double I = 0.0, sigma = 0.0;
  for (;;) {
    double tau = rng.exponential() / rate;
    double e = std::exp(-sigma);
    I += e * (s.drift > 0.0 ? -std::expm1(-s.drift * tau) / s.drift : tau);
    sigma += s.drift * tau;
    if (rng.uniform() * rate < s.kill) break;
    sigma += rng.exponential() / s.jumps->rate;
    // the rest is e^{-sigma} times an independent copy
    if (std::exp(-sigma) < 1e-17 * I) break;
  }
  return I;
}

inline SampleSet sample_I_subordinator(const SubordinatorModel& s, std::size_t n, std::uint64_t seed,
                                       std::uint64_t stream = kStreamSubFunctional) {
  s.validate();
  std::vector<double> v = detail::fill(n, [&](std::size_t i) {
    CounterRng rng(seed, stream, i);
    return sample_sub_functional(s, rng);
  });
  return SampleSet{std::move(v), seed, "I_-sigma", n, Scheme::ClosedForm, {}};
}

// Constant gamma_sigma = lim_n sum_{j<=n} phi'(j)/phi(j) - log phi(n), by
// Richardson extrapolation over n = 8, 16, 32, ...
struct ResidualConstant {
  double value = 0.0;
  double last_increment = 0.0;
  std::size_t terms = 0;
};

inline ResidualConstant residual_gamma(const SubordinatorModel& s) {
  constexpr int kLevels = 18;
  std::vector<std::vector<double>> R(kLevels);
  long double partial = 0.0L;
  std::size_t j = 0, n = 8;
  ResidualConstant out;
  for (int m = 0; m < kLevels; ++m, n *= 2) {
    for (; j < n; ++j) {
      double x = static_cast<double>(j + 1);
      partial += s.dphi(x) / s.phi(x);
    }
    R[m].push_back(static_cast<double>(partial - std::log(static_cast<long double>(s.phi(static_cast<double>(n))))));
    double f = 1.0;
    for (int k = 1; k <= m; ++k) {
      f *= 2.0;
      R[m].push_back((f * R[m][k - 1] - R[m - 1][k - 1]) / (f - 1.0));
    }
    out.value = R[m][m];
    out.terms = n;
    if (m >= 3) {
      out.last_increment = std::abs(R[m][m] - R[m - 1][m - 1]);
      if (out.last_increment < 1e-13) break;
    }
  }
  return out;
}

// Per-k laws of G^(k) ~ phi(k) e^{-kx} V(dx) and the truncation point.
struct ResidualPlan {
  SubordinatorModel sub;
  double gamma = 0.0;
  double gamma_increment = 0.0;
  std::size_t K = 0;
  double tail_variance = 0.0;
  double atom = 0.0;
  std::vector<ExpTerm> v_terms;
  std::vector<double> mean_sum;  // running sum of E[G^(k)]
};

inline double residual_term_variance(const SubordinatorModel& s, const PotentialMeasure& V, double k) {
  double phik = s.phi(k), m1 = 0.0, m2 = 0.0;
  for (const auto& t : V.terms) {
    double r = t.rate + k;
    m1 += phik * t.weight / (r * r);
    m2 += 2.0 * phik * t.weight / (r * r * r);
  }
  return m2 - m1 * m1;
}

inline ResidualPlan plan_residual(const SubordinatorModel& s, std::size_t truncation_K = 0,
                                  double tail_tolerance = 1e-3) {
  s.validate();
  if (!(s.phi(1.0) > 0.0)) throw InvalidModel("phi(1) must be positive");
  ResidualPlan plan;
  plan.sub = s;
  PotentialMeasure V = RationalExponent::from_subordinator(s).reciprocal_measure();
  if (!V.nonnegative_weights()) throw UnsupportedModel("potential density with negative weights");
  plan.atom = V.atom0;
  plan.v_terms = V.terms;
  auto tail_var = [&](std::size_t K) {
    double sum = 0.0;
    const std::size_t L = 64 * K;
    for (std::size_t k = K + 1; k <= L; ++k) sum += residual_term_variance(s, V, static_cast<double>(k));
    return sum + static_cast<double>(L) * residual_term_variance(s, V, static_cast<double>(L));
  };
  if (truncation_K > 0) {
    plan.K = truncation_K;
  } else {
    std::size_t K = 16;
    while (tail_var(K) >= tail_tolerance) {
      K *= 2;
      if (K > 1000000) throw TruncationBias("tail variance bound not reached at K = 1e6");
    }
    plan.K = K;
  }
  plan.tail_variance = V.terms.empty() ? 0.0 : tail_var(plan.K);
  ResidualConstant g = residual_gamma(s);
  plan.gamma = g.value;
  plan.gamma_increment = g.last_increment;
  return plan;
}

inline double sample_residual_one(const ResidualPlan& plan, CounterRng& rng) {
  const auto& s = plan.sub;
  double log_r = -plan.gamma;
  if (!plan.v_terms.empty()) {
    for (std::size_t k = 1; k <= plan.K; ++k) {
      double x = static_cast<double>(k), phik = s.phi(x);
      double u = rng.uniform(), g = 0.0;
      double acc = phik * plan.atom;
      if (u >= acc) {
        std::size_t j = 0;
        for (; j + 1 < plan.v_terms.size(); ++j) {
          acc += phik * plan.v_terms[j].weight / (plan.v_terms[j].rate + x);
          if (u < acc) break;
        }
        g = rng.exponential() / (plan.v_terms[j].rate + x);
      }
      log_r += s.dphi(x) / phik - g;
    }
    // Gaussian closure for the remaining centred terms
    if (plan.tail_variance > 0.0) log_r += std::sqrt(plan.tail_variance) * rng.normal();
  }
  return std::exp(log_r);
}

inline SampleSet sample_residual(const SubordinatorModel& s, std::size_t n, std::size_t truncation_K,
                                 std::uint64_t seed, std::uint64_t stream = kStreamResidual) {
  ResidualPlan plan = plan_residual(s, truncation_K);
  std::vector<double> v = detail::fill(n, [&](std::size_t i) {
    CounterRng rng(seed, stream, i);
    return sample_residual_one(plan, rng);
  });
  SampleSet out{std::move(v), seed, "R_sigma", n, Scheme::ProductTruncation, {}};
  out.diagnostics["K"] = static_cast<double>(plan.K);
  out.diagnostics["tail_variance"] = plan.tail_variance;
  out.diagnostics["gamma"] = plan.gamma;
  out.diagnostics["gamma_increment"] = plan.gamma_increment;
  return out;
}

// Systematic resampling of pool indices with the given weights.
inline std::vector<std::size_t> systematic_resample(const std::vector<double>& w, std::size_t n, CounterRng& rng) {
  double total = 0.0;
  for (double x : w) total += x;
  std::vector<std::size_t> idx(n);
  double u = rng.uniform() / n, acc = w.empty() ? 0.0 : w[0] / total;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double target = u + static_cast<double>(i) / n;
    while (target > acc && j + 1 < w.size()) acc += w[++j] / total;
    idx[i] = j;
  }
  // spread the picks so that order carries no information
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.next_u64() % i]);
  return idx;
}

inline double effective_sample_size(const std::vector<double>& w) {
  double s = 0.0, s2 = 0.0;
  for (double x : w) {
    s += x;
    s2 += x * x;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

// J_H with P(J in dy) = kappa(q,0) y P(1/R_H in dy).
inline SampleSet sample_J(const LadderFactors& f, std::size_t n, std::uint64_t seed, std::size_t pool_factor = 10) {
  SubordinatorModel H = f.H();
  SampleSet out;
  out.seed = seed;
  out.model_tag = "J_H";
  out.n = n;
  if (!H.jumps) {
    out.scheme = Scheme::ClosedForm;
    if (H.drift == 0.0) {
      out.values.assign(n, 1.0 / H.kill);
    } else {
      // R_H = b Gamma(kill/b + 1), so J_H = 1/(b Gamma(kill/b))
      double shape = H.kill / H.drift;
      out.values = detail::fill(n, [&](std::size_t i) {
        CounterRng rng(seed, kStreamJ, i);
        return 1.0 / (H.drift * rng.gamma(shape));
      });
    }
    return out;
  }
  out.scheme = Scheme::ProductTruncation;
  SampleSet pool = sample_residual(H, n * pool_factor, 0, seed, kStreamResidualPool);
  std::vector<double> w(pool.values.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / pool.values[i];
  double ess = effective_sample_size(w);
  out.diagnostics["ess"] = ess;
  if (ess < n / 10.0) throw LowEffectiveSampleSize("ESS " + std::to_string(ess));
  CounterRng rng(seed, kStreamResample, 0);
  for (std::size_t i : systematic_resample(w, n, rng)) out.values.push_back(w[i]);
  return out;
}

// Draws from a probability law given as a potential measure (e.g. the supremum law).
inline SampleSet sample_law(const PotentialMeasure& law, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  std::vector<double> v = detail::fill(n, [&](std::size_t i) {
    CounterRng rng(seed, stream, i);
    return sample_potential(law, rng);
  });
  return SampleSet{std::move(v), seed, "law", n, Scheme::ClosedForm, {}};
}

inline SampleSet sample_exponential(std::size_t n, std::uint64_t seed) {
  std::vector<double> v = detail::fill(n, [&](std::size_t i) {
    CounterRng rng(seed, kStreamExponential, i);
    return rng.exponential();
  });
  return SampleSet{std::move(v), seed, "Exp(1)", n, Scheme::ClosedForm, {}};
}

// Estimate of E[exp(b xi_1); 1 < zeta] with its standard error, by path simulation.
inline std::pair<double, double> simulate_exponential_moment(const LevyModel& m, double b, std::size_t n,
                                                             double dt, std::uint64_t seed) {
  detail::PathParams p(m, dt);
  std::vector<double> v = detail::fill(n, [&](std::size_t i) {
    CounterRng rng(seed, kStreamPath, i);
    auto o = detail::run_path<false>(p, rng, 1.0, 0.0);
    return o.killed ? 0.0 : std::exp(b * o.xi);
  });
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  double mean = s / n;
  return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean) / n)};
}

}  // namespace levy_expfun
