// wick-holder: batch front end for the Gaussian Wick calculus library.
//
// Usage: wick-holder <command> --config PATH [--format json|csv] [--seed N]
//                    [--tol X] [--quad-order N] [--jobs N] [--output PATH]
//
// Commands: check, boundary, verify, probe, repr, norm, jensen, nelson,
// corollary. Exit status: 0 all checks passed, 1 a mathematical check failed,
// 2 configuration or usage error. Reports are deterministic given the config
// document and --seed; --jobs never changes report bytes.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wickholder/wickholder.hpp"

using nlohmann::json;
using ojson = nlohmann::ordered_json;
using namespace wickholder;

namespace {

struct Flags {
  std::string config_path;
  std::string format = "json";
  std::string output;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  int quad_order = 0;  // 0: per-command default
  int jobs = default_jobs();
};

// Doubles in reports: JSON numbers for finite values, strings for inf/nan.
ojson onum(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int require_dim(const json& cfg) {
  if (!cfg.contains("dim")) throw ConfigError("config: missing \"dim\"");
  const int dim = cfg.at("dim").get<int>();
  if (dim < 1) throw ConfigError("config: \"dim\" must be >= 1");
  return dim;
}

double require_number(const json& cfg, const char* key) {
  if (!cfg.contains(key)) {
    throw ConfigError(std::string("config: missing \"") + key + "\"");
  }
  if (!cfg.at(key).is_number()) {
    throw ConfigError(std::string("config: \"") + key + "\" must be a number");
  }
  return cfg.at(key).get<double>();
}

// Operator spec: [e0, e1, ...] or {"eigs": [...]} or {"scalar": v}.
DiagonalOperator parse_operator(const json& cfg, const char* key, int dim) {
  if (!cfg.contains(key)) {
    throw ConfigError(std::string("config: missing operator \"") + key + "\"");
  }
  const json& j = cfg.at(key);
  std::vector<double> eigs;
  if (j.is_array()) {
    eigs = j.get<std::vector<double>>();
  } else if (j.is_object() && j.contains("scalar")) {
    eigs.assign(static_cast<std::size_t>(dim), j.at("scalar").get<double>());
  } else if (j.is_object() && j.contains("eigs")) {
    eigs = j.at("eigs").get<std::vector<double>>();
  } else {
    throw ConfigError(std::string("config: operator \"") + key +
                      "\" must be an eigenvalue array, {\"eigs\": [...]} or "
                      "{\"scalar\": v}");
  }
  if (static_cast<int>(eigs.size()) != dim) {
    throw ConfigError(std::string("config: operator \"") + key + "\" has " +
                      std::to_string(eigs.size()) + " eigenvalues, dim is " +
                      std::to_string(dim));
  }
  return DiagonalOperator(std::move(eigs));
}

TestFunction parse_function(const json& cfg, const char* key, int dim) {
  if (!cfg.contains(key)) {
    throw ConfigError(std::string("config: missing test function \"") + key + "\"");
  }
  TestFunction f = test_function_from_json(cfg.at(key));
  if (dim_of(f) != dim) {
    throw ConfigError(std::string("config: test function \"") + key +
                      "\" has dimension " + std::to_string(dim_of(f)) +
                      ", dim is " + std::to_string(dim));
  }
  return f;
}

NormMethod parse_method(const json& cfg) {
  const std::string m = cfg.value("method", "auto");
  if (m == "auto") return NormMethod::Auto;
  if (m == "closed-form") return NormMethod::ClosedForm;
  if (m == "quadrature") return NormMethod::Quadrature;
  if (m == "monte-carlo") return NormMethod::MonteCarlo;
  throw ConfigError("config: unknown method \"" + m +
                    "\" (auto, closed-form, quadrature, monte-carlo)");
}

VerifyOptions make_options(const json& cfg, const Flags& flags, int jobs) {
  VerifyOptions opt;
  opt.method = parse_method(cfg);
  if (flags.quad_order > 0) opt.start_order = flags.quad_order;
  opt.mc_samples = cfg.value("mc_samples", std::int64_t{1000000});
  opt.budget = cfg.value("budget", kDefaultEvalBudget);
  opt.seed = flags.seed;
  opt.jobs = jobs;
  return opt;
}

ojson operator_echo(const DiagonalOperator& op) { return ojson(op.eigs()); }

ojson function_echo(const TestFunction& f) {
  if (std::holds_alternative<ExponentialVector>(f)) {
    return ojson{{"exponential", std::get<ExponentialVector>(f).xi}};
  }
  const ChaosExpansion& phi = std::get<ChaosExpansion>(f);
  ojson terms = ojson::array();
  for (const auto& [alpha, coeff] : phi.terms()) {
    terms.push_back(ojson{{"index", alpha}, {"coeff", coeff}});
  }
  return ojson{{"polynomial", ojson{{"dim", phi.dim()},
                                    {"degree_cap", phi.degree_cap()},
                                    {"terms", std::move(terms)}}}};
}

ojson eig_rows_json(const EigReport& rep) {
  ojson rows = ojson::array();
  for (const EigRow& r : rep.rows) {
    rows.push_back(ojson{{"index", r.index},
                         {"alpha", onum(r.alpha)},
                         {"beta", onum(r.beta)},
                         {"t", onum(r.t)},
                         {"condition", r.condition},
                         {"lhs", onum(r.lhs)},
                         {"rhs", onum(r.rhs)},
                         {"margin", onum(r.margin)},
                         {"pass", r.pass}});
  }
  return rows;
}

ojson norm_info_json(const NormInfo& n) {
  ojson j{{"log_value", onum(n.log_value)},
          {"value", onum(n.value)},
          {"method", n.method}};
  if (n.method == "monte-carlo") j["stderr"] = onum(n.stderr_value);
  if (n.method == "quadrature") {
    j["order"] = n.order;
    j["achieved_rtol"] = onum(n.achieved_rtol);
  }
  return j;
}

ojson ratio_json(const RatioResult& r) {
  ojson den = ojson::array();
  for (const NormInfo& n : r.den) den.push_back(norm_info_json(n));
  return ojson{{"log_ratio", onum(r.log_ratio)},
               {"ratio", onum(r.ratio)},
               {"numerator", norm_info_json(r.num)},
               {"denominators", std::move(den)}};
}

struct CommandOutcome {
  ojson report;
  int status = 0;
};

// Shared flag echo appended to every resolved config (jobs and output are
// intentionally omitted: they never affect report content).
void echo_flags(ojson& cfg_echo, const Flags& flags) {
  cfg_echo["seed"] = flags.seed;
  cfg_echo["tol"] = flags.tol;
  cfg_echo["quad_order"] = flags.quad_order;
}

CommandOutcome run_check(const json& cfg, const Flags& flags) {
  const int dim = require_dim(cfg);
  const HolderConfig hc = HolderConfig::theorem(
      require_number(cfg, "p"), require_number(cfg, "q"), require_number(cfg, "r"),
      parse_operator(cfg, "C", dim), parse_operator(cfg, "D", dim),
      parse_operator(cfg, "T", dim));
  const EigReport rep = check_admissible(hc, flags.tol);
  const EigReport rec = equivalent_condition(hc, flags.tol);

  ojson cfg_echo{{"dim", dim}, {"p", hc.p}, {"q", hc.q}, {"r", hc.r},
                 {"C", operator_echo(hc.C)}, {"D", operator_echo(hc.D)},
                 {"T", operator_echo(hc.T)}};
  echo_flags(cfg_echo, flags);
  ojson result{{"rows", eig_rows_json(rep)},
               {"reciprocal_rows", eig_rows_json(rec)},
               {"min_margin", onum(rep.min_margin)},
               {"pass", rep.pass}};
  return {ojson{{"command", "check"}, {"config", std::move(cfg_echo)},
                {"result", std::move(result)}, {"pass", rep.pass}},
          rep.pass ? 0 : 1};
}

CommandOutcome run_boundary(const json& cfg, const Flags& flags) {
  const int dim = require_dim(cfg);
  const double p = require_number(cfg, "p"), q = require_number(cfg, "q");
  const DiagonalOperator C = parse_operator(cfg, "C", dim);
  const DiagonalOperator D = parse_operator(cfg, "D", dim);
  const DiagonalOperator T = parse_operator(cfg, "T", dim);
  // Validate theorem-form operator ranges (any r > 1 works for validation).
  (void)HolderConfig::theorem(p, q, 2.0, C, D, T);
  const double rstar = max_admissible_r(p, q, C, D, T);

  ojson rows = ojson::array();
  for (int i = 0; i < dim; ++i) {
    rows.push_back(ojson{{"index", i},
                         {"alpha", onum(C.eig(i))},
                         {"beta", onum(D.eig(i))},
                         {"t", onum(T.eig(i))},
                         {"bound", onum(exponent_bound(p, q, C.eig(i), D.eig(i),
                                                       T.eig(i)))}});
  }
  ojson cfg_echo{{"dim", dim}, {"p", p}, {"q", q},
                 {"C", operator_echo(C)}, {"D", operator_echo(D)},
                 {"T", operator_echo(T)}};
  echo_flags(cfg_echo, flags);
  ojson result{{"rows", std::move(rows)}, {"r_star", onum(rstar)}};
  return {ojson{{"command", "boundary"}, {"config", std::move(cfg_echo)},
                {"result", std::move(result)}, {"pass", true}},
          0};
}

CommandOutcome run_verify(const json& cfg, const Flags& flags, int jobs) {
  const int dim = require_dim(cfg);
  const HolderConfig hc = HolderConfig::theorem(
      require_number(cfg, "p"), require_number(cfg, "q"), require_number(cfg, "r"),
      parse_operator(cfg, "C", dim), parse_operator(cfg, "D", dim),
      parse_operator(cfg, "T", dim));
  const TestFunction phi = parse_function(cfg, "phi", dim);
  const TestFunction psi = parse_function(cfg, "psi", dim);
  const VerifyOptions opt = make_options(cfg, flags, jobs);
  const RatioResult res = verify_inequality(hc, phi, psi, opt);
  const bool pass = res.log_ratio <= std::log1p(flags.tol);

  ojson cfg_echo{{"dim", dim}, {"p", hc.p}, {"q", hc.q}, {"r", hc.r},
                 {"C", operator_echo(hc.C)}, {"D", operator_echo(hc.D)},
                 {"T", operator_echo(hc.T)},
                 {"phi", function_echo(phi)}, {"psi", function_echo(psi)},
                 {"method", cfg.value("method", "auto")},
                 {"mc_samples", opt.mc_samples}};
  echo_flags(cfg_echo, flags);
  ojson result = ratio_json(res);
  result["pass"] = pass;
  return {ojson{{"command", "verify"}, {"config", std::move(cfg_echo)},
                {"result", std::move(result)}, {"pass", pass}},
          pass ? 0 : 1};
}

CommandOutcome run_probe(const json& cfg, const Flags& flags) {
  const int dim = require_dim(cfg);
  const HolderConfig hc = HolderConfig::theorem(
      require_number(cfg, "p"), require_number(cfg, "q"), require_number(cfg, "r"),
      parse_operator(cfg, "C", dim), parse_operator(cfg, "D", dim),
      parse_operator(cfg, "T", dim));
  std::vector<double> u_list{1.0, 2.0, 4.0, 8.0};
  if (cfg.contains("u_list")) u_list = cfg.at("u_list").get<std::vector<double>>();

  ojson cfg_echo{{"dim", dim}, {"p", hc.p}, {"q", hc.q}, {"r", hc.r},
                 {"C", operator_echo(hc.C)}, {"D", operator_echo(hc.D)},
                 {"T", operator_echo(hc.T)}, {"u_list", u_list}};
  echo_flags(cfg_echo, flags);

  ojson report{{"command", "probe"}, {"config", std::move(cfg_echo)}};
  try {
    const SharpnessResult res = sharpness_probe(hc, u_list);
    ojson witnesses = ojson::array();
    for (const SharpnessWitness& w : res.witnesses) {
      witnesses.push_back(ojson{{"u", onum(w.u)},
                                {"predicted_log_ratio", onum(w.predicted_log_ratio)},
                                {"direct_log_ratio", onum(w.direct_log_ratio)}});
    }
    report["result"] = ojson{{"witness_found", true},
                             {"eig_index", res.eig_index},
                             {"alpha", onum(res.alpha)},
                             {"beta", onum(res.beta)},
                             {"t", onum(res.t)},
                             {"s_star", onum(res.s_star)},
                             {"f_star", onum(res.f_star)},
                             {"sup_finite", res.sup_finite},
                             {"witnesses", std::move(witnesses)}};
    report["pass"] = true;
    return {std::move(report), 0};
  } catch (const NoWitnessError& e) {
    report["result"] = ojson{{"witness_found", false}, {"message", e.what()}};
    report["pass"] = false;
    return {std::move(report), 1};
  }
}

CommandOutcome run_repr(const json& cfg, const Flags& flags, int jobs) {
  const int dim = require_dim(cfg);
  const DiagonalOperator C = parse_operator(cfg, "C", dim);
  const DiagonalOperator D = parse_operator(cfg, "D", dim);
  const DiagonalOperator T = parse_operator(cfg, "T", dim);
  const TestFunction phi = parse_function(cfg, "phi", dim);
  const TestFunction psi = parse_function(cfg, "psi", dim);
  const std::int64_t budget = cfg.value("budget", kDefaultEvalBudget);
  const int order = flags.quad_order > 0 ? flags.quad_order : 30;

  std::vector<std::vector<double>> points;
  if (cfg.contains("points")) {
    points = cfg.at("points").get<std::vector<std::vector<double>>>();
  } else {
    const int count = cfg.value("point_count", 5);
    CounterRng rng(flags.seed, 0);
    for (int k = 0; k < count; ++k) {
      std::vector<double> x(static_cast<std::size_t>(dim));
      for (double& v : x) v = rng.uniform(-2.0, 2.0);
      points.push_back(std::move(x));
    }
  }

  const ReprCheckResult res = repr_check(phi, psi, C, D, T, points, order, jobs, budget);
  const bool pass = res.max_deviation <= flags.tol;

  ojson cfg_echo{{"dim", dim},
                 {"C", operator_echo(C)}, {"D", operator_echo(D)},
                 {"T", operator_echo(T)},
                 {"phi", function_echo(phi)}, {"psi", function_echo(psi)},
                 {"points", points}, {"order", order}, {"budget", budget}};
  echo_flags(cfg_echo, flags);
  ojson rows = ojson::array();
  for (const ReprPoint& pt : res.points) {
    rows.push_back(ojson{{"x", pt.x},
                         {"lhs", onum(pt.lhs)},
                         {"rhs", onum(pt.rhs)},
                         {"deviation", onum(pt.deviation)}});
  }
  ojson result{{"rows", std::move(rows)},
               {"max_deviation", onum(res.max_deviation)},
               {"pass", pass}};
  return {ojson{{"command", "repr"}, {"config", std::move(cfg_echo)},
                {"result", std::move(result)}, {"pass", pass}},
          pass ? 0 : 1};
}

CommandOutcome run_norm(const json& cfg, const Flags& flags, int jobs) {
  const int dim = require_dim(cfg);
  const TestFunction phi = parse_function(cfg, "phi", dim);
  std::vector<double> l_values;
  if (cfg.contains("l_values")) {
    l_values = cfg.at("l_values").get<std::vector<double>>();
  } else {
    l_values.push_back(cfg.value("l", 2.0));
  }
  const NormMethod method = parse_method(cfg);
  const VerifyOptions opt = make_options(cfg, flags, jobs);

  ojson rows = ojson::array();
  for (double l : l_values) {
    NormInfo info;
    NormMethod m = method;
    if (m == NormMethod::Auto) {
      if (std::holds_alternative<ExponentialVector>(phi)) {
        m = NormMethod::ClosedForm;
      } else {
        m = l == 2.0 ? NormMethod::ClosedForm : NormMethod::Quadrature;
      }
    }
    switch (m) {
      case NormMethod::ClosedForm: {
        if (std::holds_alternative<ExponentialVector>(phi)) {
          info.log_value = exp_lp_log_norm(std::get<ExponentialVector>(phi), l);
          info.value = std::exp(info.log_value);
        } else if (l == 2.0) {
          info.value = l2_norm(std::get<ChaosExpansion>(phi));
          info.log_value = std::log(info.value);
        } else {
          throw ConfigError("norm: closed form for a polynomial needs l = 2");
        }
        info.method = "closed-form";
        break;
      }
      case NormMethod::Quadrature: {
        AnyEvaluator f(phi);
        const AdaptiveResult ad = lp_norm_adaptive(f, l, dim, opt.quad_rtol,
                                                   opt.start_order, opt.max_order,
                                                   opt.budget);
        info.value = ad.value;
        info.log_value = std::log(ad.value);
        info.method = "quadrature";
        info.order = ad.order;
        info.achieved_rtol = ad.achieved_rtol;
        break;
      }
      default: {
        AnyEvaluator f(phi);
        const McResult mc = mc_lp_norm(f, l, dim, opt.mc_samples, opt.seed, jobs);
        info.value = mc.value;
        info.log_value = std::log(mc.value);
        info.method = "monte-carlo";
        info.stderr_value = mc.stderr_value;
        break;
      }
    }
    ojson row = norm_info_json(info);
    row["l"] = onum(l);
    rows.push_back(std::move(row));
  }

  ojson cfg_echo{{"dim", dim}, {"phi", function_echo(phi)},
                 {"l_values", l_values},
                 {"method", cfg.value("method", "auto")},
                 {"mc_samples", opt.mc_samples}};
  echo_flags(cfg_echo, flags);
  ojson result{{"rows", std::move(rows)}};
  return {ojson{{"command", "norm"}, {"config", std::move(cfg_echo)},
                {"result", std::move(result)}, {"pass", true}},
          0};
}

CommandOutcome run_jensen(const json& cfg, const Flags& flags) {
  const double p = require_number(cfg, "p"), q = require_number(cfg, "q");
  const double alpha = require_number(cfg, "alpha");
  const double beta = require_number(cfg, "beta");
  const double t = require_number(cfg, "t");
  const JensenReport rep = jensen_identity_check(p, q, alpha, beta, t);
  const bool pass = rep.max_residual <= flags.tol &&
                    rep.grid_sup <= 1.0 + flags.tol &&
                    std::abs(rep.value_at_unit - 1.0) <= flags.tol;

  ojson cfg_echo{{"p", p}, {"q", q}, {"alpha", alpha}, {"beta", beta}, {"t", t}};
  echo_flags(cfg_echo, flags);
  ojson residuals = ojson::array();
  for (const auto& [name, value] : rep.residuals) {
    residuals.push_back(ojson{{"name", name}, {"value", onum(value)}});
  }
  ojson result{{"r", onum(rep.r)},
               {"r_prime", onum(rep.r_prime)},
               {"gamma", onum(rep.gamma)},
               {"delta", onum(rep.delta)},
               {"a", onum(rep.a)},
               {"b", onum(rep.b)},
               {"c", onum(rep.c)},
               {"m", onum(rep.m)},
               {"n", onum(rep.n)},
               {"U", onum(rep.U)},
               {"V", onum(rep.V)},
               {"W", onum(rep.W)},
               {"residuals", std::move(residuals)},
               {"max_residual", onum(rep.max_residual)},
               {"grid_sup", onum(rep.grid_sup)},
               {"value_at_unit", onum(rep.value_at_unit)},
               {"argmax_K", onum(rep.argmax_K)},
               {"argmax_L", onum(rep.argmax_L)},
               {"pass", pass}};
  return {ojson{{"command", "jensen"}, {"config", std::move(cfg_echo)},
                {"result", std::move(result)}, {"pass", pass}},
          pass ? 0 : 1};
}

CommandOutcome run_nelson(const json& cfg, const Flags& flags, int jobs) {
  const int dim = require_dim(cfg);
  const double p = require_number(cfg, "p"), r = require_number(cfg, "r");
  const DiagonalOperator C = parse_operator(cfg, "C", dim);
  const TestFunction phi = parse_function(cfg, "phi", dim);
  const VerifyOptions opt = make_options(cfg, flags, jobs);
  const RatioResult res = nelson_check(p, r, C, phi, opt);
  const bool pass = res.log_ratio <= std::log1p(flags.tol);

  ojson cfg_echo{{"dim", dim}, {"p", p}, {"r", r}, {"C", operator_echo(C)},
                 {"phi", function_echo(phi)},
                 {"method", cfg.value("method", "auto")},
                 {"mc_samples", opt.mc_samples}};
  echo_flags(cfg_echo, flags);
  ojson result = ratio_json(res);
  result["pass"] = pass;
  return {ojson{{"command", "nelson"}, {"config", std::move(cfg_echo)},
                {"result", std::move(result)}, {"pass", pass}},
          pass ? 0 : 1};
}

CommandOutcome run_corollary(const json& cfg, const Flags& flags, int jobs) {
  const int dim = require_dim(cfg);
  const HolderConfig hc = HolderConfig::corollary(
      require_number(cfg, "p"), require_number(cfg, "q"), require_number(cfg, "r"),
      parse_operator(cfg, "B", dim), parse_operator(cfg, "C", dim),
      parse_operator(cfg, "D", dim), parse_operator(cfg, "T", dim));
  const EigReport rep = check_corollary(hc, flags.tol);

  ojson cfg_echo{{"dim", dim}, {"p", hc.p}, {"q", hc.q}, {"r", hc.r},
                 {"B", operator_echo(*hc.B)}, {"C", operator_echo(hc.C)},
                 {"D", operator_echo(hc.D)}, {"T", operator_echo(hc.T)}};
  ojson result{{"rows", eig_rows_json(rep)},
               {"min_margin", onum(rep.min_margin)},
               {"pass", rep.pass}};
  bool pass = rep.pass;

  const bool with_ratio = cfg.contains("phi") && cfg.contains("psi");
  if (with_ratio) {
    const TestFunction phi = parse_function(cfg, "phi", dim);
    const TestFunction psi = parse_function(cfg, "psi", dim);
    cfg_echo["phi"] = function_echo(phi);
    cfg_echo["psi"] = function_echo(psi);
    cfg_echo["method"] = cfg.value("method", "auto");
    if (rep.pass) {
      const RatioResult res =
          verify_weighted_inequality(hc, phi, psi, make_options(cfg, flags, jobs));
      const bool ratio_pass = res.log_ratio <= std::log1p(flags.tol);
      ojson rj = ratio_json(res);
      rj["pass"] = ratio_pass;
      result["ratio"] = std::move(rj);
      pass = pass && ratio_pass;
    }
  }
  echo_flags(cfg_echo, flags);
  result["pass"] = pass;
  return {ojson{{"command", "corollary"}, {"config", std::move(cfg_echo)},
                {"result", std::move(result)}, {"pass", pass}},
          pass ? 0 : 1};
}

CommandOutcome run_single(const std::string& cmd, const json& cfg, const Flags& flags,
                          int jobs) {
  if (cmd == "check") return run_check(cfg, flags);
  if (cmd == "boundary") return run_boundary(cfg, flags);
  if (cmd == "verify") return run_verify(cfg, flags, jobs);
  if (cmd == "probe") return run_probe(cfg, flags);
  if (cmd == "repr") return run_repr(cfg, flags, jobs);
  if (cmd == "norm") return run_norm(cfg, flags, jobs);
  if (cmd == "jensen") return run_jensen(cfg, flags);
  if (cmd == "nelson") return run_nelson(cfg, flags, jobs);
  if (cmd == "corollary") return run_corollary(cfg, flags, jobs);
  throw ConfigError("unknown command: " + cmd);
}

// Exit status for an exception: mathematical no-result (1) vs usage (2).
int status_for_error(const std::exception& e) {
  if (dynamic_cast<const NoWitnessError*>(&e)) return 1;
  return 2;
}

// ---------------------------------------------------------------------------
// CSV rendering: "# key=value" config lines, then scalar "key,value" lines,
// then one table block per array-of-objects field, in report order.

void csv_scalar(std::ostream& out, const std::string& key, const ojson& v) {
  out << key << ",";
  if (v.is_number_float()) {
    out << fmt17(v.get<double>());
  } else if (v.is_boolean()) {
    out << (v.get<bool>() ? "true" : "false");
  } else if (v.is_string()) {
    out << v.get<std::string>();
  } else {
    out << v.dump();
  }
  out << "\n";
}

std::string csv_cell(const ojson& v) {
  if (v.is_number_float()) return fmt17(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      if (!s.empty()) s += ' ';
      s += e.is_number_float() ? fmt17(e.get<double>()) : e.dump();
    }
    return s;
  }
  return v.dump();
}

void csv_config_lines(std::ostream& out, const ojson& cfg, const std::string& prefix) {
  for (const auto& [key, value] : cfg.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      csv_config_lines(out, value, name);
    } else {
      out << "# " << name << "=" << csv_cell(value) << "\n";
    }
  }
}

void csv_result(std::ostream& out, const std::string& prefix, const ojson& result) {
  // Scalars (and flat arrays) first, then tables, preserving field order
  // within each group.
  for (const auto& [key, value] : result.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) continue;
    if (value.is_array() && !value.empty() && value.front().is_object()) continue;
    csv_scalar(out, name, value);
  }
  for (const auto& [key, value] : result.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      csv_result(out, name, value);
    } else if (value.is_array() && !value.empty() && value.front().is_object()) {
      out << "\n## " << name << "\n";
      std::string header;
      for (const auto& [col, cell] : value.front().items()) {
        if (!header.empty()) header += ',';
        header += col;
      }
      out << header << "\n";
      for (const auto& row : value) {
        std::string line;
        for (const auto& [col, cell] : row.items()) {
          if (!line.empty()) line += ',';
          line += csv_cell(cell);
        }
        out << line << "\n";
      }
    }
  }
}

std::string render(const ojson& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  std::ostringstream out;
  out << "# command=" << report.at("command").get<std::string>() << "\n";
  csv_config_lines(out, report.at("config"), "config");
  if (report.contains("pass")) csv_scalar(out, "pass", report.at("pass"));
  if (report.contains("status")) csv_scalar(out, "status", report.at("status"));
  if (report.contains("result")) csv_result(out, "result", report.at("result"));
  if (report.contains("items")) {
    int idx = 0;
    for (const auto& item : report.at("items")) {
      out << "\n#### item " << idx++ << "\n";
      csv_config_lines(out, item.at("config"), "config");
      if (item.contains("pass")) csv_scalar(out, "pass", item.at("pass"));
      if (item.contains("error")) csv_scalar(out, "error", item.at("error"));
      if (item.contains("result")) csv_result(out, "result", item.at("result"));
    }
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian Wick calculus and sharp Holder-Young inequality lab"};
  app.require_subcommand(1);

  Flags flags;
  const std::vector<std::string> commands{"check", "boundary", "verify",
                                          "probe", "repr", "norm",
                                          "jensen", "nelson", "corollary"};
  const std::vector<std::string> blurbs{
      "admissibility report (operator and exponent conditions)",
      "largest admissible r for given p, q, C, D, T",
      "norm-ratio verification of the inequality",
      "sharpness witness for a violated exponent condition",
      "two-path check of the mixing integral representation",
      "Lp norms of a test function",
      "equality-case algebraic identities and objective grid scan",
      "hypercontractive special case",
      "weighted-form admissibility and norm ratio"};
  for (std::size_t k = 0; k < commands.size(); ++k) {
    CLI::App* sub = app.add_subcommand(commands[k], blurbs[k]);
    sub->add_option("--config", flags.config_path, "path to a JSON config document")
        ->required();
    sub->add_option("--format", flags.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", flags.seed, "seed for sampling and Monte Carlo");
    sub->add_option("--tol", flags.tol, "pass tolerance for checks");
    sub->add_option("--quad-order", flags.quad_order,
                    "quadrature order (start order for adaptive norms)");
    sub->add_option("--jobs", flags.jobs, "worker threads (never affects bytes)");
    sub->add_option("--output", flags.output, "write the report here instead of stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the error message
    return code == 0 ? 0 : 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  json cfg;
  try {
    std::ifstream in(flags.config_path);
    if (!in) {
      std::cerr << "error: cannot open config file: " << flags.config_path << "\n";
      return 2;
    }
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    std::cerr << "error: config parse failure: " << e.what() << "\n";
    return 2;
  }

  ojson report;
  int status = 0;
  try {
    if (cfg.contains("sweep")) {
      if (!cfg.at("sweep").is_array()) {
        throw ConfigError("config: \"sweep\" must be an array of config objects");
      }
      const auto& items = cfg.at("sweep");
      std::vector<CommandOutcome> outcomes(items.size());
      parallel_chunks(static_cast<std::int64_t>(items.size()), 1, flags.jobs,
                      [&](std::int64_t idx, std::int64_t, std::int64_t) {
                        const auto& item = items[static_cast<std::size_t>(idx)];
                        try {
                          outcomes[static_cast<std::size_t>(idx)] =
                              run_single(cmd, item, flags, 1);
                        } catch (const std::exception& e) {
                          CommandOutcome bad;
                          bad.report = ojson{{"command", cmd},
                                             {"config", ojson{{"sweep_index", idx}}},
                                             {"error", std::string(e.what())},
                                             {"pass", false}};
                          bad.status = status_for_error(e);
                          outcomes[static_cast<std::size_t>(idx)] = std::move(bad);
                        }
                      });
      bool pass = true;
      ojson merged = ojson::array();
      for (CommandOutcome& o : outcomes) {
        status = std::max(status, o.status);
        pass = pass && o.status == 0;
        merged.push_back(std::move(o.report));
      }
      ojson cfg_echo{{"sweep_size", items.size()}};
      echo_flags(cfg_echo, flags);
      report = ojson{{"command", cmd}, {"config", std::move(cfg_echo)},
                     {"items", std::move(merged)}, {"pass", pass},
                     {"status", status}};
    } else {
      CommandOutcome outcome = run_single(cmd, cfg, flags, flags.jobs);
      report = std::move(outcome.report);
      status = outcome.status;
      report["status"] = status;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return status_for_error(e);
  }

  const std::string text = render(report, flags.format);
  if (flags.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(flags.output, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write output file: " << flags.output << "\n";
      return 2;
    }
    out << text;
  }
  return status;
}
