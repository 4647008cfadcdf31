#include "nlllab/game_io.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "nlllab/costs.hpp"
#include "nlllab/error.hpp"

namespace nlllab {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::json spec_to_json(const GameSpec& spec) {
  nlohmann::json j;
  j["d"] = spec.d;
  j["sigma2"] = spec.sigma2;
  j["supports"] = spec.supports;
  j["cost"]["kind"] = spec.cost ? spec.cost->kind() : "";
  j["cost"]["params"] = spec.cost ? spec.cost->params() : std::map<std::string, double>{};
  j["gamma"] = spec.gamma;
  j["lip_ell"] = spec.lip_ell;
  j["lip_g"] = spec.lip_g;
  j["lip_dell"] = spec.lip_dell;
  return j;
}

GameSpec spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"d",      "sigma2", "supports", "cost",
                                              "gamma",  "lip_ell", "lip_g",   "lip_dell"};
  try {
    if (!j.is_object()) throw ConfigError("game spec must be a table");
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown game spec field '" + key + "'");
    }
    const int d = j.at("d").get<int>();
    const double sigma2 = j.value("sigma2", 0.0);
    const auto& cost = j.at("cost");
    const std::string kind = cost.at("kind").get<std::string>();
    const auto params = cost.value("params", std::map<std::string, double>{});
    static const std::set<std::string> known_params = {"c", "kappa_g", "kappa_ell", "lambda"};
    for (const auto& [key, _] : params) {
      if (!known_params.count(key)) throw ConfigError("unknown cost parameter '" + key + "'");
    }

    GameSpec spec;
    if (!j.contains("supports")) {
      const QuadraticCouplings k{params.count("c") ? params.at("c") : 1.0,
                                 params.count("kappa_g") ? params.at("kappa_g") : 1.0,
                                 params.count("kappa_ell") ? params.at("kappa_ell") : 0.0};
      if (kind == "quadratic") {
        spec = build_quadratic_nearest_neighbor(d, sigma2, k);
      } else if (kind == "quartic") {
        spec = build_quartic_nearest_neighbor(d, sigma2,
                                              params.count("lambda") ? params.at("lambda") : 0.0, k);
      } else {
        throw ConfigError("unknown cost kind '" + kind + "'");
      }
    } else {
      spec.d = d;
      spec.sigma2 = sigma2;
      spec.supports = j.at("supports").get<std::vector<std::vector<State>>>();
      spec.cost = make_cost(kind, params);
      for (const char* key : {"gamma", "lip_ell", "lip_g", "lip_dell"}) {
        if (!j.contains(key)) {
          throw ConfigError(std::string("explicit supports require '") + key + "'");
        }
      }
    }
    if (j.contains("gamma")) spec.gamma = j.at("gamma").get<double>();
    if (j.contains("lip_ell")) spec.lip_ell = j.at("lip_ell").get<double>();
    if (j.contains("lip_g")) spec.lip_g = j.at("lip_g").get<double>();
    if (j.contains("lip_dell")) spec.lip_dell = j.at("lip_dell").get<double>();
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("game spec: ") + e.what());
  }
}

GameSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open game spec " + path.string());
  try {
    return spec_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_spec(const GameSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << spec_to_json(spec).dump(2) << "\n";
}

std::uint64_t spec_fingerprint(const GameSpec& spec) {
  return fnv1a64(spec_to_json(spec).dump());
}

}  // namespace nlllab
