#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "moments.hpp"
#include "montecarlo.hpp"
#include "wienerhopf.hpp"

namespace levy_expfun {

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

template <class Cdf>
double ks_one_sample(std::vector<double> a, Cdf&& F) {
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double f = F(a[i]);
    d = std::max({d, std::abs((i + 1) / n - f), std::abs(f - i / n)});
  }
  return d;
}

// Asymptotic critical value c(alpha) sqrt((n+m)/(n m)), c = sqrt(-log(alpha/2)/2).
inline double ks_critical(std::size_t n, std::size_t m, double alpha = 0.01) {
  double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

inline double ks_critical_one_sample(std::size_t n, double alpha = 0.01) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0) / static_cast<double>(n));
}

// Dvoretzky-Kiefer-Wolfowitz band half-width at level alpha.
inline double dkw_bound(std::size_t n, double alpha = 0.05) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

enum class IdentityId {
  PPS_fact,
  PPS_sup,
  BY_exponential,
  Undershoot_cor2,
  J_corollary2,
  Perpetuity_consistency,
  Control_exponential,  // I against Exp(1): expected to fail
};

inline const char* identity_name(IdentityId id) {
  switch (id) {
    case IdentityId::PPS_fact: return "PPS_fact";
    case IdentityId::PPS_sup: return "PPS_sup";
    case IdentityId::BY_exponential: return "BY_exponential";
    case IdentityId::Undershoot_cor2: return "Undershoot_cor2";
    case IdentityId::J_corollary2: return "J_corollary2";
    case IdentityId::Perpetuity_consistency: return "Perpetuity_consistency";
    case IdentityId::Control_exponential: return "Control_exponential";
  }
  return "?";
}

inline IdentityId parse_identity(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  for (IdentityId id : {IdentityId::PPS_fact, IdentityId::PPS_sup, IdentityId::BY_exponential,
                        IdentityId::Undershoot_cor2, IdentityId::J_corollary2, IdentityId::Perpetuity_consistency,
                        IdentityId::Control_exponential}) {
    std::string name = identity_name(id);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name == s) return id;
  }
  throw UnsupportedIdentity("unknown identity '" + s + "'");
}

struct MellinZ {
  double s = 0.0;
  double z = 0.0;
};

struct IdentityReport {
  IdentityId identity_id = IdentityId::PPS_fact;
  double ks_stat = 0.0;
  double ks_critical_1pct = 0.0;
  std::vector<MellinZ> mellin_z;
  bool verdict = false;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct IdentityOptions {
  double dt = 1e-2;
  double horizon = 100.0;
  std::vector<double> s_list = {-0.5, 0.25, 0.5};
};

// Both sides of an identity in law, as independent samples.
struct IdentitySides {
  std::vector<double> lhs;
  std::vector<double> rhs;
  double s_upper = kInf;  // Mellin transforms finite for s below this
  double s_lower = -1.0;  // and above this
};

inline std::vector<double> product(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline IdentitySides identity_sides(IdentityId id, const LevyModel& m, std::size_t n, std::uint64_t seed,
                                    const IdentityOptions& opt = {}) {
  require_admissible(m);
  IdentitySides sides;
  if (auto th = positive_root(m)) sides.s_upper = *th;
  auto path_I = [&] { return sample_I_path(m, n, opt.dt, opt.horizon, seed).values; };
  auto factors = [&] { return factorize(m); };
  switch (id) {
    case IdentityId::PPS_fact: {
      // I = J_H I_{-Hhat}
      LadderFactors f = factors();
      sides.lhs = path_I();
      SubordinatorModel Hh = f.Hhat();
      sides.rhs = product(sample_J(f, n, seed).values, sample_I_subordinator(Hh, n, seed).values);
      break;
    }
    case IdentityId::PPS_sup: {
      // I = e^{sup xi} I_{-Hhat} / R_H
      LadderFactors f = factors();
      sides.lhs = path_I();
      auto sup = sample_law(supremum_law(f), n, seed, kStreamSupremumLaw).values;
      auto ih = sample_I_subordinator(f.Hhat(), n, seed).values;
      auto r = sample_residual(f.H(), n, 0, seed).values;
      sides.rhs.resize(n);
      for (std::size_t i = 0; i < n; ++i) sides.rhs[i] = std::exp(sup[i]) * ih[i] / r[i];
      break;
    }
    case IdentityId::BY_exponential: {
      // R_sigma I_{-sigma} = Exp(1); sigma = -xi when xi is a negated
      // subordinator, otherwise the ascending ladder height H
      SubordinatorModel sigma;
      if (auto s = m.as_negated_subordinator()) sigma = *s;
      else sigma = factors().H();
      sides.lhs = product(sample_residual(sigma, n, 0, seed).values, sample_I_subordinator(sigma, n, seed).values);
      sides.rhs = sample_exponential(n, seed).values;
      sides.s_upper = kInf;
      break;
    }
    case IdentityId::Undershoot_cor2: {
      // e^{-U} I = e^{sup xi} L, U ~ (b^ delta_0 + Pi_Hhat(y) dy)/E[Hhat_1],
      // L ~ t^{-1} P(I in dt)/E[1/I]
      if (m.q > 0.0) throw UnsupportedIdentity("stationary undershoot needs q = 0");
      LadderFactors f = factors();
      SubordinatorModel Hh = f.Hhat();
      double mean_h = Hh.mean();
      PotentialMeasure nu;
      nu.atom0 = Hh.drift / mean_h;
      if (Hh.jumps) nu.terms.push_back({Hh.jumps->intensity / mean_h, Hh.jumps->rate});
      auto u = sample_law(nu, n, seed, kStreamUndershoot).values;
      auto I = path_I();
      sides.lhs.resize(n);
      for (std::size_t i = 0; i < n; ++i) sides.lhs[i] = std::exp(-u[i]) * I[i];
      auto sup = sample_law(supremum_law(f), n, seed, kStreamSupremumLaw).values;
      const std::size_t pool_n = 4 * n;
      auto pool = sample_I_path(m, pool_n, opt.dt, opt.horizon, seed ^ 0x5bd1e995ULL).values;
      std::vector<double> w(pool_n);
      for (std::size_t i = 0; i < pool_n; ++i) w[i] = 1.0 / pool[i];
      if (effective_sample_size(w) < n / 10.0) throw LowEffectiveSampleSize("undershoot resampling");
      CounterRng rng(seed, kStreamResample, 1);
      auto idx = systematic_resample(w, n, rng);
      sides.rhs.resize(n);
      for (std::size_t i = 0; i < n; ++i) sides.rhs[i] = std::exp(sup[i]) * pool[idx[i]];
      break;
    }
    case IdentityId::J_corollary2: {
      // J_H = e^{G^(0)} / R_H with G^(0) ~ kappa(q,0) V_H
      LadderFactors f = factors();
      sides.lhs = sample_J(f, n, seed).values;
      auto g0 = sample_law(supremum_law(f), n, seed, kStreamSupremumLaw).values;
      auto r = sample_residual(f.H(), n, 0, seed).values;
      sides.rhs.resize(n);
      for (std::size_t i = 0; i < n; ++i) sides.rhs[i] = std::exp(g0[i]) / r[i];
      break;
    }
    case IdentityId::Perpetuity_consistency: {
      sides.lhs = path_I();
      sides.rhs = sample_I_perpetuity(m, n, 0, seed, opt.dt).values;
      break;
    }
    case IdentityId::Control_exponential: {
      sides.lhs = path_I();
      sides.rhs = sample_exponential(n, seed).values;
      sides.s_upper = std::min(sides.s_upper, 1.0);
      break;
    }
  }
  return sides;
}

inline std::pair<double, double> mean_and_se(const std::vector<double>& v, double s) {
  long double a = 0.0L, b = 0.0L;
  for (double x : v) {
    long double y = std::pow(static_cast<long double>(x), s);
    a += y;
    b += y * y;
  }
  const double n = static_cast<double>(v.size());
  double mean = static_cast<double>(a / n);
  double var = static_cast<double>(b / n) - mean * mean;
  return {mean, std::sqrt(std::max(0.0, var) / n)};
}

inline IdentityReport compare_sides(IdentityId id, const IdentitySides& sides, const std::vector<double>& s_list,
                                    std::uint64_t seed) {
  IdentityReport r;
  r.identity_id = id;
  r.n = sides.lhs.size();
  r.seed = seed;
  r.ks_stat = ks_two_sample(sides.lhs, sides.rhs);
  r.ks_critical_1pct = ks_critical(sides.lhs.size(), sides.rhs.size());
  bool ok = r.ks_stat < r.ks_critical_1pct;
  for (double s : s_list) {
    if (!(s < sides.s_upper) || !(s > sides.s_lower)) continue;
    auto [m1, se1] = mean_and_se(sides.lhs, s);
    auto [m2, se2] = mean_and_se(sides.rhs, s);
    double se = std::sqrt(se1 * se1 + se2 * se2);
    double z = se > 0.0 ? (m1 - m2) / se : (m1 == m2 ? 0.0 : kInf);
    r.mellin_z.push_back({s, z});
    ok = ok && std::abs(z) < 4.0;
  }
  r.verdict = ok;
  return r;
}

inline IdentityReport check_identity(IdentityId id, const LevyModel& m, std::size_t n, std::uint64_t seed,
                                     const IdentityOptions& opt = {}) {
  IdentitySides sides = identity_sides(id, m, n, seed, opt);
  return compare_sides(id, sides, opt.s_list, seed);
}

}  // namespace levy_expfun
