#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "levy_expfun.hpp"

namespace levy_expfun {

enum class Subcommand { Factorize, Simulate, Density, Moments, Tail, Check };
enum class OutputFormat { csv, json };

struct RunConfig {
  Subcommand subcommand = Subcommand::Factorize;
  std::string model_path;
  std::uint64_t seed = 42;
  std::size_t n = 100000;
  std::string output_path;
  OutputFormat format = OutputFormat::json;
};

// Models exercised by `check --all`.
struct CatalogEntry {
  std::string name;
  LevyModel model;
};

inline std::vector<CatalogEntry> builtin_catalog() {
  std::vector<CatalogEntry> c;
  c.push_back({"killed_drift", LevyModel::killed_drift(1.0, 1.0)});
  c.push_back({"killed_drift_q2", LevyModel::killed_drift(2.0, 1.0)});
  c.push_back({"bm_drift", LevyModel::brownian_drift(0.0, 2.0, 2.0)});
  c.push_back({"drift_sub", LevyModel::neg_subordinator({1.0, 1.0, std::nullopt})});
  c.push_back({"neg_sub_jumps", LevyModel::neg_subordinator({1.0, 1.0, ExpJumps{1.0, 2.0}})});
  DoubleExpParams sn;
  sn.lambda_minus = 1.0;
  sn.eta_minus = 2.0;
  c.push_back({"spec_neg", LevyModel::spectrally_negative(0.0, LevyModel::a_for_drift(-0.5, sn), 1.0, 1.0, 2.0)});
  DoubleExpParams kp{1.0, 3.0, 1.0, 2.0};
  c.push_back({"kou", LevyModel::double_exp(0.0, LevyModel::a_for_drift(-1.0, kp), 1.0, kp)});
  c.push_back({"kou_killed", LevyModel::double_exp(0.5, LevyModel::a_for_drift(-1.0, kp), 1.0, kp)});
  return c;
}

namespace detail {

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string key_of(double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", b);
  return buf;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad number '" + item + "' in list");
    }
  }
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

inline nlohmann::json exponent_json(const RationalExponent& r) {
  return {{"scale", r.scale}, {"roots", r.roots}, {"poles", r.poles}};
}

inline nlohmann::json report_json(const IdentityReport& r) {
  nlohmann::json z = nlohmann::json::array();
  for (const auto& m : r.mellin_z) z.push_back({{"s", m.s}, {"z", m.z}});
  return {{"identity_id", identity_name(r.identity_id)},
          {"ks_stat", r.ks_stat},
          {"ks_critical_1pct", r.ks_critical_1pct},
          {"mellin_z", z},
          {"verdict", r.verdict ? "pass" : "fail"},
          {"n", r.n},
          {"seed", r.seed}};
}

inline nlohmann::json tail_json(const TailReport& r) {
  nlohmann::json j = {{"kind", tail_kind_name(r.kind)},
                      {"exponent", r.exponent},
                      {"constant", r.constant},
                      {"validity", r.validity}};
  if (r.comparison) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : *r.comparison)
      rows.push_back({{"t", row.t}, {"predicted", row.predicted}, {"empirical", row.empirical}, {"ratio", row.ratio}});
    j["comparison"] = rows;
  } else {
    j["comparison"] = nullptr;
  }
  return j;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ValidationError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

 private:
  std::ofstream file_;
  std::ostream& fallback_;
};

// Grid used when a command needs a density without the user giving one.
inline GridSpec default_grid(const LevyModel& m) {
  GridSpec g;
  g.t_min = 1e-6;
  g.t_max = std::isfinite(m.support_end()) ? m.support_end() : 1e4;
  g.points = 1500;
  return g;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Exponential functionals of killed Levy processes", "levy-expfun"};
  app.require_subcommand(1);
  RunConfig cfg;
  bool as_json = false;
  std::string scheme = "path", beta_list, mode = "cramer", identity;
  double dt = 1e-2, horizon = 100.0, tmin = 0, tmax = 0;
  std::size_t points = 0;
  std::optional<double> anchor;
  bool all = false;

  auto add_model = [&](CLI::App* s, bool required = true) {
    auto* o = s->add_option("--model", cfg.model_path, "model JSON file");
    if (required) o->required();
  };
  auto* fac = app.add_subcommand("factorize", "Wiener-Hopf factors");
  add_model(fac);
  fac->add_flag("--json", as_json, "print JSON");

  auto* sim = app.add_subcommand("simulate", "sample the exponential functional");
  add_model(sim);
  sim->add_option("--scheme", scheme, "path|perpetuity")->check(CLI::IsMember({"path", "perpetuity"}));
  sim->add_option("--n", cfg.n, "sample size")->check(CLI::PositiveNumber);
  sim->add_option("--dt", dt, "time step")->check(CLI::PositiveNumber);
  sim->add_option("--horizon", horizon, "initial horizon")->check(CLI::PositiveNumber);
  sim->add_option("--seed", cfg.seed, "seed");
  sim->add_option("--out", cfg.output_path, "CSV output");

  auto* den = app.add_subcommand("density", "solve for the density");
  add_model(den);
  den->add_option("--tmin", tmin)->required()->check(CLI::PositiveNumber);
  den->add_option("--tmax", tmax)->required()->check(CLI::PositiveNumber);
  den->add_option("--points", points)->required()->check(CLI::Range(4, 100000));
  den->add_option("--out", cfg.output_path, "CSV output");

  auto* mom = app.add_subcommand("moments", "moments by the recurrence");
  add_model(mom);
  mom->add_option("--beta", beta_list, "comma separated exponents")->required();
  mom->add_option("--anchor", anchor, "E[I^{beta0-1}] for the fractional residue beta0");

  auto* tail = app.add_subcommand("tail", "tail asymptotics");
  add_model(tail);
  tail->add_option("--mode", mode)->check(CLI::IsMember({"cramer", "convequiv", "lefttail"}));
  tail->add_option("--n", cfg.n)->check(CLI::PositiveNumber);
  tail->add_option("--seed", cfg.seed);
  tail->add_option("--dt", dt)->check(CLI::PositiveNumber);

  auto* chk = app.add_subcommand("check", "verify an identity in law");
  add_model(chk, false);
  chk->add_option("--identity", identity);
  chk->add_flag("--all", all, "run every identity on every built-in model, CSV summary");
  chk->add_option("--n", cfg.n)->check(CLI::PositiveNumber);
  chk->add_option("--seed", cfg.seed);
  chk->add_option("--dt", dt)->check(CLI::PositiveNumber);
  chk->add_option("--out", cfg.output_path, "CSV output for --all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fac) {
      LevyModel m = load_model(cfg.model_path);
      LadderFactors f = factorize(m);
      if (as_json) {
        nlohmann::json j = {{"kappa", detail::exponent_json(f.kappa)},
                            {"kappa_hat", detail::exponent_json(f.kappa_hat)},
                            {"kill_up", f.kill_up},
                            {"kill_down", f.kill_down},
                            {"residual", factorization_residual(m, f)}};
        out << j.dump(2) << "\n";
      } else {
        auto list = [](const std::vector<double>& v) {
          std::string s;
          for (double x : v) s += (s.empty() ? "" : ",") + detail::fmt(x);
          return s.empty() ? std::string("-") : s;
        };
        out << "kappa     scale=" << detail::fmt(f.kappa.scale) << " roots=" << list(f.kappa.roots)
            << " poles=" << list(f.kappa.poles) << "\n";
        out << "kappa_hat scale=" << detail::fmt(f.kappa_hat.scale) << " roots=" << list(f.kappa_hat.roots)
            << " poles=" << list(f.kappa_hat.poles) << "\n";
        out << "kill_up=" << detail::fmt(f.kill_up) << " kill_down=" << detail::fmt(f.kill_down) << "\n";
      }
      return 0;
    }
    if (*sim) {
      LevyModel m = load_model(cfg.model_path);
      require_admissible(m);
      SampleSet s = scheme == "path" ? sample_I_path(m, cfg.n, dt, horizon, cfg.seed)
                                     : sample_I_perpetuity(m, cfg.n, 0, cfg.seed, dt);
      detail::Output o(cfg.output_path, out);
      auto& os = o.stream();
      os << "# seed=" << s.seed << "\n# model=" << s.model_tag << "\n# scheme=" << scheme_name(s.scheme)
         << "\n# n=" << s.n << "\n";
      for (const auto& [k, v] : s.diagnostics) os << "# " << k << "=" << detail::fmt(v) << "\n";
      for (double v : s.values) os << detail::fmt(v) << "\n";
      return 0;
    }
    if (*den) {
      LevyModel m = load_model(cfg.model_path);
      DensityEstimate e = solve_renewal(m, potential_U(factorize(m)), {tmin, tmax, points});
      detail::Output o(cfg.output_path, out);
      auto& os = o.stream();
      os << "t,k,tail\n";
      // the solver works on a wider grid; report on the requested one
      const double x0 = std::log(tmin), x1 = std::log(tmax);
      for (std::size_t i = 0; i < points; ++i) {
        double t = i + 1 == points ? tmax : std::exp(x0 + (x1 - x0) * i / (points - 1));
        os << detail::fmt(t) << "," << detail::fmt(e.k_at(t)) << "," << detail::fmt(e.tail_at(t)) << "\n";
      }
      return 0;
    }
    if (*mom) {
      LevyModel m = load_model(cfg.model_path);
      require_admissible(m);
      std::vector<double> betas = detail::parse_list(beta_list);
      nlohmann::json j = nlohmann::json::object();
      std::optional<DensityEstimate> est;
      for (double b : betas) {
        double b0 = b - std::ceil(b - 1.0);  // in (0, 1]
        if (b0 > 1.0 - 1e-12 && b0 < 1.0 + 1e-12) b0 = 1.0;
        MomentAnchor a{b0, 1.0};
        if (b0 != 1.0) {
          if (anchor) {
            a.value = *anchor;
          } else {
            if (!est) est = solve_renewal(m, potential_U(factorize(m)), detail::default_grid(m));
            a.value = est->mellin(b0 - 1.0);
          }
        }
        j[detail::key_of(b)] = moment_I(m, b, a);
      }
      out << j.dump() << "\n";
      return 0;
    }
    if (*tail) {
      LevyModel m = load_model(cfg.model_path);
      require_admissible(m);
      TailReport r;
      if (mode == "cramer") {
        double theta = cramer_root(m);
        SampleSet s = sample_I_path(m, cfg.n, dt, 100.0, cfg.seed);
        double frac = theta - std::floor(theta);
        if (frac < 1e-9 || frac > 1.0 - 1e-9) {
          r = cramer_constant(m, theta, MomentSource{}, &s);
        } else {
          DensityEstimate e = solve_renewal(m, potential_U(factorize(m)), detail::default_grid(m));
          r = cramer_constant(m, theta, MomentSource::from_density(e), &s);
        }
      } else if (mode == "convequiv") {
        r = convolution_equiv_tail(m, m.jumps.eta_plus);
      } else {
        SampleSet s = sample_I_path(m, cfg.n, dt, 100.0, cfg.seed);
        r = left_tail(m, factorize(m), &s);
      }
      out << detail::tail_json(r).dump(2) << "\n";
      return 0;
    }
    if (*chk) {
      IdentityOptions opt;
      opt.dt = dt;
      if (all) {
        detail::Output o(cfg.output_path, out);
        auto& os = o.stream();
        os << "model,identity,status,ks_stat,ks_critical_1pct,max_abs_z,verdict\n";
        for (const auto& entry : builtin_catalog()) {
          for (IdentityId id : {IdentityId::PPS_fact, IdentityId::PPS_sup, IdentityId::BY_exponential,
                                IdentityId::Undershoot_cor2, IdentityId::J_corollary2,
                                IdentityId::Perpetuity_consistency}) {
            try {
              IdentityReport r = check_identity(id, entry.model, cfg.n, cfg.seed, opt);
              double zmax = 0.0;
              for (const auto& z : r.mellin_z) zmax = std::max(zmax, std::abs(z.z));
              os << entry.name << "," << identity_name(id) << ",ran," << detail::fmt(r.ks_stat) << ","
                 << detail::fmt(r.ks_critical_1pct) << "," << detail::fmt(zmax) << ","
                 << (r.verdict ? "pass" : "fail") << "\n";
            } catch (const std::exception& e) {
              std::string what = e.what();
              os << entry.name << "," << identity_name(id) << ",skipped,,,,\"" << what.substr(0, what.find(':'))
                 << "\"\n";
            }
          }
        }
        return 0;
      }
      if (identity.empty() || cfg.model_path.empty())
        throw ValidationError("check needs --identity and --model, or --all");
      LevyModel m = load_model(cfg.model_path);
      IdentityReport r = check_identity(parse_identity(identity), m, cfg.n, cfg.seed, opt);
      out << detail::report_json(r).dump(2) << "\n";
      return r.verdict ? 0 : 1;
    }
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace levy_expfun
