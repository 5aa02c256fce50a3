#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "errors.hpp"
#include "model.hpp"

namespace levy_expfun {

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidModel(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InvalidModel("unknown field '" + it.key() + "' in " + where);
}

inline double number(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw InvalidModel("missing field '" + key + "' in " + where);
  if (!j[key].is_number()) throw InvalidModel("field '" + key + "' in " + where + " must be a number");
  return j[key].get<double>();
}

inline double number_or(const nlohmann::json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

inline Family parse_family(const std::string& s) {
  for (Family f : {Family::KilledDrift, Family::BrownianDrift, Family::SpectrallyNegativeBM, Family::DoubleExpJumps,
                   Family::NegSubordinator})
    if (s == family_name(f)) return f;
  throw InvalidModel("unknown family '" + s + "'");
}

}  // namespace detail

// {"family": ..., "q": ..., "a": ..., "Q": ..., "jump_params": {...}}
//   DoubleExpJumps:        jump_params {lambda_plus, eta_plus, lambda_minus, eta_minus}
//   SpectrallyNegativeBM:  jump_params {lambda_minus, eta_minus}
//   NegSubordinator:       jump_params {kill, drift, jumps: {intensity, rate} | null};
//                          q, a, Q may be given and must then agree
inline LevyModel model_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j, {"family", "q", "a", "Q", "jump_params"}, "model");
  if (!j.contains("family") || !j["family"].is_string()) throw InvalidModel("missing string field 'family'");
  Family fam = detail::parse_family(j["family"].get<std::string>());
  nlohmann::json jp = j.contains("jump_params") ? j["jump_params"] : nlohmann::json::object();
  switch (fam) {
    case Family::KilledDrift:
      detail::reject_unknown(jp, {}, "jump_params");
      if (detail::number_or(j, "Q", 0.0, "model") != 0.0) throw InvalidModel("KilledDrift has Q = 0");
      return LevyModel::killed_drift(detail::number(j, "q", "model"), detail::number(j, "a", "model"));
    case Family::BrownianDrift:
      detail::reject_unknown(jp, {}, "jump_params");
      return LevyModel::brownian_drift(detail::number(j, "q", "model"), detail::number(j, "a", "model"),
                                       detail::number(j, "Q", "model"));
    case Family::SpectrallyNegativeBM:
      detail::reject_unknown(jp, {"lambda_minus", "eta_minus"}, "jump_params");
      return LevyModel::spectrally_negative(detail::number(j, "q", "model"), detail::number(j, "a", "model"),
                                            detail::number(j, "Q", "model"),
                                            detail::number(jp, "lambda_minus", "jump_params"),
                                            detail::number(jp, "eta_minus", "jump_params"));
    case Family::DoubleExpJumps: {
      detail::reject_unknown(jp, {"lambda_plus", "eta_plus", "lambda_minus", "eta_minus"}, "jump_params");
      DoubleExpParams p;
      p.lambda_plus = detail::number_or(jp, "lambda_plus", 0.0, "jump_params");
      p.eta_plus = detail::number_or(jp, "eta_plus", 1.0, "jump_params");
      p.lambda_minus = detail::number_or(jp, "lambda_minus", 0.0, "jump_params");
      p.eta_minus = detail::number_or(jp, "eta_minus", 1.0, "jump_params");
      return LevyModel::double_exp(detail::number(j, "q", "model"), detail::number(j, "a", "model"),
                                   detail::number_or(j, "Q", 0.0, "model"), p);
    }
    case Family::NegSubordinator: {
      detail::reject_unknown(jp, {"kill", "drift", "jumps"}, "jump_params");
      SubordinatorModel s;
      s.kill = detail::number(jp, "kill", "jump_params");
      s.drift = detail::number_or(jp, "drift", 0.0, "jump_params");
      if (jp.contains("jumps") && !jp["jumps"].is_null()) {
        detail::reject_unknown(jp["jumps"], {"intensity", "rate"}, "jumps");
        s.jumps = ExpJumps{detail::number(jp["jumps"], "intensity", "jumps"),
                           detail::number(jp["jumps"], "rate", "jumps")};
      }
      LevyModel m = LevyModel::neg_subordinator(s);
      auto agree = [&](const char* key, double v) {
        if (j.contains(key) && std::abs(detail::number(j, key, "model") - v) > 1e-12 * (1.0 + std::abs(v)))
          throw InvalidModel(std::string("field '") + key + "' disagrees with the subordinator");
      };
      agree("q", m.q);
      agree("a", m.a);
      agree("Q", 0.0);
      return m;
    }
  }
  throw InvalidModel("unreachable");
}

inline LevyModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidModel("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModel("malformed JSON in '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

inline nlohmann::json subordinator_to_json(const SubordinatorModel& s) {
  nlohmann::json j;
  j["kill"] = s.kill;
  j["drift"] = s.drift;
  if (s.jumps) j["jumps"] = {{"intensity", s.jumps->intensity}, {"rate", s.jumps->rate}};
  else j["jumps"] = nullptr;
  return j;
}

inline nlohmann::json model_to_json(const LevyModel& m) {
  nlohmann::json j;
  j["family"] = family_name(m.family);
  j["q"] = m.q;
  j["a"] = m.a;
  j["Q"] = m.Q;
  switch (m.family) {
    case Family::KilledDrift:
    case Family::BrownianDrift: j["jump_params"] = nlohmann::json::object(); break;
    case Family::SpectrallyNegativeBM:
      j["jump_params"] = {{"lambda_minus", m.jumps.lambda_minus}, {"eta_minus", m.jumps.eta_minus}};
      break;
    case Family::DoubleExpJumps:
      j["jump_params"] = {{"lambda_plus", m.jumps.lambda_plus},
                          {"eta_plus", m.jumps.eta_plus},
                          {"lambda_minus", m.jumps.lambda_minus},
                          {"eta_minus", m.jumps.eta_minus}};
      break;
    case Family::NegSubordinator: j["jump_params"] = subordinator_to_json(*m.sub); break;
  }
  return j;
}

}  // namespace levy_expfun
