#pragma once

// JSON serialization for the core value types. Doubles round-trip
// bit-faithfully through nlohmann's shortest-representation printing.

#include <string>
#include <vector>

#include <json.hpp>

#include "wickholder/chaos.hpp"
#include "wickholder/errors.hpp"
#include "wickholder/integral_repr.hpp"

// DiagonalOperator and ChaosExpansion carry invariants and have no default
// constructor, so they plug into nlohmann via adl_serializer specializations
// with value-returning from_json.
namespace nlohmann {

template <>
struct adl_serializer<wickholder::DiagonalOperator> {
  static void to_json(json& j, const wickholder::DiagonalOperator& op) {
    j = json{{"eigs", op.eigs()}};
  }
  static wickholder::DiagonalOperator from_json(const json& j) {
    return wickholder::DiagonalOperator(j.at("eigs").get<std::vector<double>>());
  }
};

template <>
struct adl_serializer<wickholder::ChaosExpansion> {
  static void to_json(json& j, const wickholder::ChaosExpansion& phi) {
    json terms = json::array();
    for (const auto& [alpha, coeff] : phi.terms()) {
      terms.push_back({{"index", alpha}, {"coeff", coeff}});
    }
    j = json{{"dim", phi.dim()},
             {"degree_cap", phi.degree_cap()},
             {"terms", std::move(terms)}};
  }
  static wickholder::ChaosExpansion from_json(const json& j) {
    const int dim = j.at("dim").get<int>();
    const int cap = j.value("degree_cap", wickholder::kDefaultDegreeCap);
    wickholder::ChaosExpansion phi(dim, cap);
    for (const auto& term : j.at("terms")) {
      const auto alpha = term.at("index").get<wickholder::MultiIndex>();
      phi.add_coeff(alpha, term.at("coeff").get<double>());
    }
    return phi;
  }
};

}  // namespace nlohmann

namespace wickholder {

inline void to_json(nlohmann::json& j, const ExponentialVector& e) {
  j = nlohmann::json{{"xi", e.xi}};
}

inline void from_json(const nlohmann::json& j, ExponentialVector& e) {
  e.xi = j.at("xi").get<std::vector<double>>();
}

// Tagged union: {"exponential": [..]} or {"polynomial": {..}}.
inline TestFunction test_function_from_json(const nlohmann::json& j) {
  if (j.contains("exponential")) {
    return ExponentialVector{j.at("exponential").get<std::vector<double>>()};
  }
  if (j.contains("polynomial")) {
    return j.at("polynomial").get<ChaosExpansion>();
  }
  throw ConfigError("test function needs an \"exponential\" or \"polynomial\" key");
}

inline nlohmann::json test_function_to_json(const TestFunction& f) {
  if (std::holds_alternative<ExponentialVector>(f)) {
    return {{"exponential", std::get<ExponentialVector>(f).xi}};
  }
  return {{"polynomial", std::get<ChaosExpansion>(f)}};
}

// JSON has no inf/nan literals; reports encode them as strings.
inline nlohmann::json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace wickholder
