// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "levy_expfun/cli.hpp"
#include "levy_expfun/levy_expfun.hpp"
#include "oracles.hpp"

using namespace levy_expfun;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "[x] ") + what;
  }
};

std::string f(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = lo * std::pow(hi / lo, i / (n - 1.0));
  return t;
}

DensityEstimate solve(const LevyModel& m, GridSpec g) { return solve_renewal(m, potential_U(factorize(m)), g); }

const LevyModel kDufresne = LevyModel::brownian_drift(0, 2, 2);

Outcome exact_law_recovery() {
  Outcome o;
  for (double q : {1.0, 2.0}) {
    auto t0 = std::chrono::steady_clock::now();
    DensityEstimate e = solve(LevyModel::killed_drift(q, 1.0), {1e-3, 0.999, 800});
    double secs = seconds_since(t0);
    double worst = 0;
    for (double t : log_grid(1e-3, 0.999, 1000))
      worst = std::max(worst, std::abs(e.k_at(t) - oracle::killed_drift_density(q, 1.0, t)));
    o.require(worst < 1e-3, "q=" + f("%g", q) + " sup err " + f("%.2e", worst));
    o.require(secs < 10.0, f("%.2f s", secs));
  }
  return o;
}

Outcome dufresne_cross_check() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  DensityEstimate e = solve(kDufresne, {0.05, 20, 400});
  double worst = 0;
  for (double t : log_grid(0.05, 20, 1000)) worst = std::max(worst, std::abs(e.k_at(t) - oracle::dufresne_density(t)));
  o.require(worst < 5e-3, "density sup err " + f("%.2e", worst));
  const std::size_t n = 100000;
  double crit = ks_critical_one_sample(n);
  double ks_path = ks_one_sample(sample_I_path(kDufresne, n, 1e-2, 100, 11).values, oracle::dufresne_cdf);
  o.require(ks_path < crit, "path KS " + f("%.4f", ks_path) + " < " + f("%.4f", crit));
  double ks_perp = ks_one_sample(sample_I_perpetuity(kDufresne, n, 0, 12).values, oracle::dufresne_cdf);
  o.require(ks_perp < crit, "perpetuity KS " + f("%.4f", ks_perp));
  double secs = seconds_since(t0);
  o.require(secs < 120.0, f("%.1f s", secs));
  return o;
}

Outcome moment_recurrence() {
  Outcome o;
  LevyModel kd = LevyModel::killed_drift(1, 1);
  double m1 = moment_I(kd, 1.0), m2 = moment_I(kd, 2.0);
  o.require(std::abs(m1 - 0.5) < 1e-12 && std::abs(m2 - 1.0 / 3.0) < 1e-12,
            "E[I]=" + f("%.15g", m1) + " E[I^2]=" + f("%.15g", m2));
  double anchor = std::sqrt(2.0) * std::tgamma(1.5);  // E[I^{-1/2}]
  double half = moment_I(kDufresne, 0.5, {0.5, anchor});
  double want = std::sqrt(0.5) * std::tgamma(0.5);
  o.require(std::abs(half - want) < 1e-3, "Dufresne E[I^0.5] err " + f("%.2e", std::abs(half - want)));
  return o;
}

// passes out of 20 seeds of an identity check
int seed_passes(IdentityId id, const LevyModel& m, std::size_t n, std::vector<IdentityReport>* keep = nullptr) {
  int passes = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    IdentityReport r = check_identity(id, m, n, seed, {1e-2, 100.0, {}});
    passes += r.ks_stat < r.ks_critical_1pct;
    if (keep) keep->push_back(r);
  }
  return passes;
}

Outcome lemma_two() {
  Outcome o;
  int p = seed_passes(IdentityId::BY_exponential, LevyModel::neg_subordinator({1.0, 1.0, std::nullopt}), 100000);
  o.require(p >= 19, "Gamma(2)*U vs Exp(1) KS passes " + std::to_string(p) + "/20");
  return o;
}

Outcome pps_factorization() {
  Outcome o;
  int p = seed_passes(IdentityId::PPS_fact, kDufresne, 100000);
  o.require(p >= 19, "J_H I_-Hhat vs path I KS passes " + std::to_string(p) + "/20");
  IdentityReport r = check_identity(IdentityId::PPS_fact, kDufresne, 100000, 1);
  for (auto z : r.mellin_z) o.require(std::abs(z.z) < 3.0, "s=" + f("%g", z.s) + " z=" + f("%.2f", z.z));
  o.require(r.mellin_z.size() == 3, "three Mellin points tested");
  return o;
}

Outcome cramer_tail() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  double theta = cramer_root(kDufresne);
  o.require(std::abs(theta - 1.0) < 1e-12, "theta-1 " + f("%.1e", theta - 1.0));
  MomentSource src;
  src.value = 1.0;
  SampleSet s = sample_I_path(kDufresne, 1000000, 1e-2, 100, 21);
  TailReport r = cramer_constant(kDufresne, theta, src, &s);
  o.require(std::abs(r.constant - 0.5) < 1e-10, "C=" + f("%.12g", r.constant));
  const TailRow& row = r.comparison->back();
  double stat = row.t * row.empirical;
  o.require(stat >= 0.45 && stat <= 0.55, "t P(I>t) at q999 = " + f("%.4f", stat));
  double secs = seconds_since(t0);
  o.require(secs < 300.0, f("%.1f s", secs));
  return o;
}

Outcome left_tail_slope_check() {
  Outcome o;
  for (double q : {1.0, 2.0}) {
    LevyModel m = LevyModel::killed_drift(q, 1.0);
    TailReport r = left_tail(m, factorize(m));
    double slope = left_tail_slope(sample_I_path(m, 1000000, 1e-2, 100, 31));
    o.require(std::abs(r.constant - q) < 1e-15, "q=" + f("%g", q) + " constant " + f("%g", r.constant));
    o.require(std::abs(slope / q - 1.0) < 0.05, "slope " + f("%.4f", slope));
  }
  return o;
}

Outcome wiener_hopf_residual() {
  Outcome o;
  double worst_fact = 0, worst_pot = 0;
  for (const auto& entry : builtin_catalog()) {
    const LevyModel& m = entry.model;
    LadderFactors fac = factorize(m);
    worst_fact = std::max(worst_fact, factorization_residual(m, fac, 50));
    TwoSidedPotential U = potential_U(fac);
    double hi = fac.kappa.roots.empty() ? 1.5 : fac.kappa.roots.front();
    double lo = fac.kappa_hat.roots.empty()
                    ? -1.5
                    : -*std::min_element(fac.kappa_hat.roots.begin(), fac.kappa_hat.roots.end());
    if (m.has_up_jumps()) hi = std::min(hi, m.jumps.eta_plus);
    for (int i = 1; i < 10; ++i) {
      double b = lo + (hi - lo) * i / 10.0;
      if (std::abs(b) < 1e-9) continue;
      double want = 1.0 / laplace_exponent(m, b);
      worst_pot = std::max(worst_pot, std::abs(U.laplace(b) - want) / std::max(1.0, std::abs(want)));
    }
  }
  o.require(worst_fact < 1e-10, "max factorization residual " + f("%.1e", worst_fact));
  o.require(worst_pot < 1e-9, "max potential Laplace error " + f("%.1e", worst_pot));
  return o;
}

Outcome self_consistency() {
  Outcome o;
  for (const char* name : {"kou", "kou_killed"}) {
    LevyModel m = load_model(oracle::model_path(name));
    TwoSidedPotential U = potential_U(factorize(m));
    DensityEstimate e = solve_renewal(m, U, {1e-3, 1e3, 1000});
    double res = renewal_residual(e, U);
    o.require(res < 1e-6, std::string(name) + " renewal residual " + f("%.1e", res));
    if (m.q == 0.0) {
      double worst = 0;
      for (double x : log_grid(0.1, 10, 25)) worst = std::max(worst, std::abs(cpy_residual(m, e, x)));
      o.require(worst < 1e-3, "CPY residual " + f("%.1e", worst));
    }
    const std::size_t n = 100000;
    double d = ks_one_sample(sample_I_path(m, n, 1e-2, 100, 41).values, [&](double t) { return e.cdf_at(t); });
    double tol = std::max(5e-3, 3 * dkw_bound(n));
    o.require(d < tol, "MC CDF distance " + f("%.4f", d) + " < " + f("%.4f", tol));
  }
  return o;
}

std::string run_cli_to_file(const std::vector<std::string>& args, const std::string& path) {
  std::vector<std::string> full = {"levy-expfun"};
  full.insert(full.end(), args.begin(), args.end());
  full.push_back("--out");
  full.push_back(path);
  std::vector<const char*> argv;
  for (auto& a : full) argv.push_back(a.c_str());
  std::ostringstream out, err;
  if (run(static_cast<int>(argv.size()), argv.data(), out, err) != 0) return "error: " + err.str();
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome property_suite() {
  Outcome o;
  // complete monotonicity of t -> E[k(t/R)/R] (equal to e^{-t})
  double worst_cm = 0;
  for (auto [kill, drift] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{3.0, 2.0}, std::pair{4.0, 1.0}}) {
    DensityEstimate e = solve(LevyModel::neg_subordinator({kill, drift, std::nullopt}), {1e-5, 1.0 / drift, 1500});
    const double shape = kill / drift + 1.0;
    auto g = [&](double x) {
      double y = x / drift;
      return std::exp((shape - 1) * std::log(y) - y - std::lgamma(shape)) / drift;
    };
    std::vector<double> t;
    for (int i = 0; i < 40; ++i) t.push_back(0.1 + 0.1 * i);
    for (double v : alternation_violations(mixed_density(e, g, t), 4)) worst_cm = std::max(worst_cm, v);
  }
  o.require(worst_cm < 1e-3, "mixed-density alternation violation " + f("%.1e", worst_cm));
  // k itself for integer q/a, where it is completely monotone
  double worst_k = 0;
  for (double q : {2.0, 3.0, 4.0}) {
    DensityEstimate e = solve(LevyModel::neg_subordinator({q, 1.0, std::nullopt}), {1e-4, 0.999, 1500});
    std::vector<double> k;
    for (int i = 0; i < 40; ++i) k.push_back(e.k_at(0.02 + 0.02 * i));
    for (double v : alternation_violations(k, 4, 1e-2)) worst_k = std::max(worst_k, v);
  }
  o.require(worst_k < 1e-2, "k alternation violation " + f("%.1e", worst_k));

  // byte-identical reruns through the CLI, and across thread counts
  std::string dir = "/tmp/levy_expfun_acceptance_";
  std::vector<std::string> sim = {"simulate", "--model", oracle::model_path("kou"), "--n", "20000", "--seed", "5"};
  std::string a = run_cli_to_file(sim, dir + "a.csv");
  std::string b = run_cli_to_file(sim, dir + "b.csv");
  setenv("LEVY_EXPFUN_THREADS", "1", 1);
  std::string c = run_cli_to_file(sim, dir + "c.csv");
  unsetenv("LEVY_EXPFUN_THREADS");
  std::vector<std::string> dens = {"density", "--model", oracle::model_path("kou"), "--points", "300"};
  std::string d1 = run_cli_to_file(dens, dir + "d1.csv"), d2 = run_cli_to_file(dens, dir + "d2.csv");
  o.require(a.rfind("error", 0) != 0 && a == b && a == c && d1 == d2, "byte-identical reruns");

  // the wrong-law control must be rejected every time
  int rejected = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    rejected += !check_identity(IdentityId::Control_exponential, kDufresne, 100000, seed).verdict;
  o.require(rejected == 20, "control rejected " + std::to_string(rejected) + "/20");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact-law recovery", exact_law_recovery},
      {"Dufresne cross-check", dufresne_cross_check},
      {"moment recurrence", moment_recurrence},
      {"R * I = Exp(1) factorization", lemma_two},
      {"I = J_H * I_-Hhat factorization", pps_factorization},
      {"Cramer tail", cramer_tail},
      {"left tail", left_tail_slope_check},
      {"Wiener-Hopf residual", wiener_hopf_residual},
      {"self-consistency without oracles", self_consistency},
      {"property suite", property_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s %2zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
