// End-to-end tests of the wick-holder binary. The test runner exports the
// binary path in WICK_HOLDER_BIN (set by the CMake test properties).

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include <sys/wait.h>

using nlohmann::json;

namespace {

struct CliResult {
  std::string out;
  int status = -1;
};

std::string binary_path() {
  const char* bin = std::getenv("WICK_HOLDER_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

// Runs the binary with the given arguments, capturing stdout (stderr is
// captured too when merge_stderr is set).
CliResult run_cli(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = binary_path() + " " + args +
                          (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, n);
  const int rc = pclose(pipe);
  res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return res;
}

std::string write_config(const std::string& name, const json& cfg) {
  const auto dir = std::filesystem::temp_directory_path() / "wick-holder-cli-tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path);
  REQUIRE(out.good());
  out << cfg.dump(2) << "\n";
  return path.string();
}

}  // namespace

TEST_CASE("check: admissible config reports pass and exits 0") {
  const std::string path = write_config(
      "check_pass.json",
      json{{"dim", 1}, {"p", 4.0}, {"q", 4.0}, {"r", 2.0},
           {"C", {{"scalar", 1.0}}}, {"D", {{"scalar", 1.0}}},
           {"T", {{"scalar", 1.0}}}});
  const CliResult res = run_cli("check --config " + path);
  CHECK(res.status == 0);
  const json rep = json::parse(res.out);
  CHECK(rep.at("command") == "check");
  CHECK(rep.at("pass") == true);
  CHECK(rep.at("status") == 0);
  // Classic Holder at the boundary: every margin is exactly zero.
  CHECK(rep.at("result").at("min_margin").get<double>() == 0.0);
  for (const auto& row : rep.at("result").at("rows")) {
    CHECK(row.at("pass") == true);
  }
  // The resolved config is echoed in full.
  CHECK(rep.at("config").at("p") == 4.0);
  CHECK(rep.at("config").at("C") == json::array({1.0}));
}

TEST_CASE("check: violated exponent condition exits 1") {
  const std::string path = write_config(
      "check_fail.json",
      json{{"dim", 1}, {"p", 2.0}, {"q", 2.0}, {"r", 1.5},
           {"C", {{"scalar", 1.0}}}, {"D", {{"scalar", 1.0}}},
           {"T", {{"scalar", 1.0}}}});
  const CliResult res = run_cli("check --config " + path);
  CHECK(res.status == 1);
  const json rep = json::parse(res.out);
  CHECK(rep.at("pass") == false);
  CHECK(rep.at("result").at("min_margin").get<double>() == Catch::Approx(-0.5));
}

TEST_CASE("boundary: classic pair has largest exponent 2") {
  const std::string path = write_config(
      "boundary.json",
      json{{"dim", 2}, {"p", 4.0}, {"q", 4.0},
           {"C", {1.0, 1.0}}, {"D", {{"scalar", 1.0}}}, {"T", {{"scalar", 1.0}}}});
  const CliResult res = run_cli("boundary --config " + path);
  CHECK(res.status == 0);
  const json rep = json::parse(res.out);
  CHECK(rep.at("result").at("r_star").get<double>() == 2.0);
}

TEST_CASE("verify: exponential pair in closed form passes") {
  const std::string path = write_config(
      "verify_exp.json",
      json{{"dim", 2}, {"p", 3.0}, {"q", 3.0}, {"r", 2.0},
           {"C", {0.5, 0.25}}, {"D", {0.5, 0.5}}, {"T", {1.0, 0.5}},
           {"phi", {{"exponential", {0.7, -0.3}}}},
           {"psi", {{"exponential", {0.2, 0.9}}}}});
  const CliResult res = run_cli("verify --config " + path);
  CHECK(res.status == 0);
  const json rep = json::parse(res.out);
  CHECK(rep.at("pass") == true);
  CHECK(rep.at("result").at("ratio").get<double>() <= 1.0 + 1e-9);
  CHECK(rep.at("result").at("numerator").at("method") == "closed-form");
  CHECK(rep.at("result").at("denominators").size() == 2);
}

TEST_CASE("verify: inadmissible configuration is a usage error (exit 2)") {
  const std::string path = write_config(
      "verify_bad.json",
      json{{"dim", 1}, {"p", 2.0}, {"q", 2.0}, {"r", 1.5},
           {"C", {{"scalar", 1.0}}}, {"D", {{"scalar", 1.0}}},
           {"T", {{"scalar", 1.0}}},
           {"phi", {{"exponential", {0.5}}}}, {"psi", {{"exponential", {0.5}}}}});
  const CliResult res = run_cli("verify --config " + path, true);
  CHECK(res.status == 2);
  CHECK(res.out.find("error:") != std::string::npos);
}

TEST_CASE("probe: pinned sharpness witness") {
  // p = q = 2, r = 1.5, identity operators: the exponent condition fails and
  // the optimal direction is s* = 3 with value f* = 2.
  const std::string path = write_config(
      "probe.json",
      json{{"dim", 1}, {"p", 2.0}, {"q", 2.0}, {"r", 1.5},
           {"C", {{"scalar", 1.0}}}, {"D", {{"scalar", 1.0}}},
           {"T", {{"scalar", 1.0}}}, {"u_list", {0.5, 1.0}}});
  const CliResult res = run_cli("probe --config " + path);
  CHECK(res.status == 0);
  const json rep = json::parse(res.out);
  CHECK(rep.at("pass") == true);
  CHECK(rep.at("result").at("witness_found") == true);
  CHECK(rep.at("result").at("s_star").get<double>() == Catch::Approx(3.0).margin(1e-12));
  CHECK(rep.at("result").at("f_star").get<double>() == Catch::Approx(2.0).margin(1e-12));
  const auto& w = rep.at("result").at("witnesses").at(1);
  CHECK(w.at("predicted_log_ratio").get<double>() ==
        Catch::Approx(w.at("direct_log_ratio").get<double>()).margin(1e-12));
}

TEST_CASE("probe: admissible configuration has no witness and exits 1") {
  const std::string path = write_config(
      "probe_adm.json",
      json{{"dim", 1}, {"p", 4.0}, {"q", 4.0}, {"r", 2.0},
           {"C", {{"scalar", 1.0}}}, {"D", {{"scalar", 1.0}}},
           {"T", {{"scalar", 1.0}}}});
  const CliResult res = run_cli("probe --config " + path);
  CHECK(res.status == 1);
  const json rep = json::parse(res.out);
  CHECK(rep.at("result").at("witness_found") == false);
}

TEST_CASE("repr: polynomial pair matches the double average") {
  const std::string path = write_config("repr.json", json::parse(R"({
    "dim": 1, "C": [0.6], "D": [0.7], "T": [1.3],
    "phi": {"polynomial": {"dim": 1, "terms": [{"index": [1], "coeff": 1.0}]}},
    "psi": {"polynomial": {"dim": 1, "terms": [{"index": [2], "coeff": 0.5}]}},
    "points": [[0.0], [1.0], [-1.5]]
  })"));
  const CliResult res = run_cli("repr --config " + path + " --quad-order 20 --tol 1e-9");
  CHECK(res.status == 0);
  const json rep = json::parse(res.out);
  CHECK(rep.at("pass") == true);
  CHECK(rep.at("result").at("max_deviation").get<double>() <= 1e-9);
  CHECK(rep.at("result").at("rows").size() == 3);
}

TEST_CASE("norm: closed form and quadrature rows") {
  const std::string path = write_config(
      "norm.json",
      json{{"dim", 1}, {"phi", {{"exponential", {0.8}}}},
           {"l_values", {1.5, 2.0, 3.0}}});
  const CliResult res = run_cli("norm --config " + path);
  CHECK(res.status == 0);
  const json rep = json::parse(res.out);
  const auto& rows = rep.at("result").at("rows");
  REQUIRE(rows.size() == 3);
  // log ||phi_xi||_l = (l-1) |xi|^2 / 2 with |xi|^2 = 0.64.
  CHECK(rows.at(0).at("log_value").get<double>() == Catch::Approx(0.5 * 0.32).margin(1e-14));
  CHECK(rows.at(2).at("log_value").get<double>() == Catch::Approx(0.64).margin(1e-14));
}

TEST_CASE("jensen: equality manifold identities") {
  const std::string path = write_config(
      "jensen.json",
      json{{"p", 4.0}, {"q", 4.0}, {"alpha", 1.0}, {"beta", 1.0}, {"t", 1.0}});
  const CliResult res = run_cli("jensen --config " + path);
  CHECK(res.status == 0);
  const json rep = json::parse(res.out);
  CHECK(rep.at("pass") == true);
  CHECK(rep.at("result").at("r").get<double>() == Catch::Approx(2.0).margin(1e-12));
  CHECK(rep.at("result").at("grid_sup").get<double>() <= 1.0 + 1e-9);
  CHECK(rep.at("result").at("value_at_unit").get<double>() ==
        Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("nelson: critical scaling has ratio exactly 1") {
  const std::string path = write_config(
      "nelson.json",
      json{{"dim", 1}, {"p", 2.0}, {"r", 4.0},
           {"C", {{"scalar", 1.7320508075688772}}},
           {"phi", {{"exponential", {0.9}}}}});
  const CliResult res = run_cli("nelson --config " + path);
  CHECK(res.status == 0);
  const json rep = json::parse(res.out);
  CHECK(rep.at("result").at("ratio").get<double>() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("corollary: weighted form admissibility and ratio") {
  const std::string path = write_config(
      "corollary.json",
      json{{"dim", 1}, {"p", 2.0}, {"q", 2.0}, {"r", 1.5},
           {"B", {1.0}}, {"C", {1.4142135623730951}}, {"D", {1.4142135623730951}},
           {"T", {1.0}},
           {"phi", {{"exponential", {0.4}}}}, {"psi", {{"exponential", {-0.2}}}}});
  const CliResult res = run_cli("corollary --config " + path);
  CHECK(res.status == 0);
  const json rep = json::parse(res.out);
  CHECK(rep.at("pass") == true);
  CHECK(rep.at("result").at("rows").size() == 5);
  CHECK(rep.at("result").at("ratio").at("ratio").get<double>() <= 1.0 + 1e-9);
}

TEST_CASE("usage errors exit 2 with a diagnostic") {
  SECTION("missing config file") {
    const CliResult res = run_cli("check --config /nonexistent/cfg.json", true);
    CHECK(res.status == 2);
    CHECK(res.out.find("error:") != std::string::npos);
  }
  SECTION("malformed JSON") {
    const auto dir = std::filesystem::temp_directory_path() / "wick-holder-cli-tests";
    std::filesystem::create_directories(dir);
    const auto path = dir / "broken.json";
    std::ofstream(path) << "{ not json";
    const CliResult res = run_cli("check --config " + path.string(), true);
    CHECK(res.status == 2);
    CHECK(res.out.find("parse failure") != std::string::npos);
  }
  SECTION("missing required field") {
    const std::string path = write_config("missing_dim.json", json{{"p", 2.0}});
    const CliResult res = run_cli("check --config " + path, true);
    CHECK(res.status == 2);
    CHECK(res.out.find("dim") != std::string::npos);
  }
  SECTION("unknown subcommand") {
    const CliResult res = run_cli("bogus --config x.json", true);
    CHECK(res.status == 2);
  }
  SECTION("dimension mismatch between dim and operator") {
    const std::string path = write_config(
        "dim_mismatch.json",
        json{{"dim", 2}, {"p", 4.0}, {"q", 4.0}, {"r", 2.0},
             {"C", {1.0}}, {"D", {1.0, 1.0}}, {"T", {1.0, 1.0}}});
    const CliResult res = run_cli("check --config " + path, true);
    CHECK(res.status == 2);
  }
}

TEST_CASE("reports are byte-identical across reruns and worker counts") {
  // Monte Carlo exercises the chunked sampler; repr exercises the parallel
  // two-path check. Both must not depend on --jobs.
  const std::string vpath = write_config(
      "verify_mc.json",
      json{{"dim", 1}, {"p", 3.0}, {"q", 3.0}, {"r", 2.0},
           {"C", {0.5}}, {"D", {0.5}}, {"T", {1.0}},
           {"method", "monte-carlo"}, {"mc_samples", 40000},
           {"phi", {{"exponential", {0.7}}}}, {"psi", {{"exponential", {-0.4}}}}});
  const CliResult a = run_cli("verify --config " + vpath + " --seed 7 --jobs 1");
  const CliResult b = run_cli("verify --config " + vpath + " --seed 7 --jobs 4");
  const CliResult c = run_cli("verify --config " + vpath + " --seed 7 --jobs 4");
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(b.out == c.out);

  const std::string rpath = write_config(
      "repr_jobs.json",
      json{{"dim", 1}, {"C", {0.6}}, {"D", {0.7}}, {"T", {1.3}},
           {"phi", {{"exponential", {0.5}}}}, {"psi", {{"exponential", {-0.8}}}},
           {"point_count", 6}});
  const CliResult ra = run_cli("repr --config " + rpath + " --quad-order 25 --jobs 1");
  const CliResult rb = run_cli("repr --config " + rpath + " --quad-order 25 --jobs 4");
  CHECK(ra.status == 0);
  CHECK(ra.out == rb.out);

  // A different seed must actually change the Monte Carlo estimate.
  const CliResult d = run_cli("verify --config " + vpath + " --seed 8 --jobs 2");
  CHECK(d.out != a.out);
}

TEST_CASE("csv format renders config comments and rows") {
  const std::string path = write_config(
      "check_csv.json",
      json{{"dim", 1}, {"p", 4.0}, {"q", 4.0}, {"r", 2.0},
           {"C", {{"scalar", 1.0}}}, {"D", {{"scalar", 1.0}}},
           {"T", {{"scalar", 1.0}}}});
  const CliResult res = run_cli("check --config " + path + " --format csv");
  CHECK(res.status == 0);
  CHECK(res.out.rfind("# command=check", 0) == 0);
  CHECK(res.out.find("# config.p=4") != std::string::npos);
  CHECK(res.out.find("pass,true") != std::string::npos);
  CHECK(res.out.find("## result.rows") != std::string::npos);
  CHECK(res.out.find("operator") != std::string::npos);
  // No unescaped raw JSON braces in the table section header line.
  CHECK(res.out.find("index,alpha,beta,t,condition,lhs,rhs,margin,pass") !=
        std::string::npos);
}

TEST_CASE("sweep: one report per item with merged status") {
  const json good{{"dim", 1}, {"p", 4.0}, {"q", 4.0}, {"r", 2.0},
                  {"C", {{"scalar", 1.0}}}, {"D", {{"scalar", 1.0}}},
                  {"T", {{"scalar", 1.0}}}};
  json bad = good;
  bad["r"] = 3.0;  // exponent condition fails
  const std::string path =
      write_config("sweep.json", json{{"sweep", {good, bad, good}}});
  const CliResult res = run_cli("check --config " + path + " --jobs 3");
  CHECK(res.status == 1);
  const json rep = json::parse(res.out);
  REQUIRE(rep.at("items").size() == 3);
  CHECK(rep.at("items").at(0).at("pass") == true);
  CHECK(rep.at("items").at(1).at("pass") == false);
  CHECK(rep.at("items").at(2).at("pass") == true);
  CHECK(rep.at("pass") == false);

  // Sweep output is independent of the worker count.
  const CliResult res1 = run_cli("check --config " + path + " --jobs 1");
  CHECK(res1.out == res.out);
}

TEST_CASE("output file option writes the same bytes as stdout") {
  const std::string path = write_config(
      "check_out.json",
      json{{"dim", 1}, {"p", 4.0}, {"q", 4.0}, {"r", 2.0},
           {"C", {{"scalar", 0.5}}}, {"D", {{"scalar", 0.5}}},
           {"T", {{"scalar", 1.0}}}});
  const auto dir = std::filesystem::temp_directory_path() / "wick-holder-cli-tests";
  const auto out_path = dir / "report.json";
  const CliResult direct = run_cli("check --config " + path);
  const CliResult filed =
      run_cli("check --config " + path + " --output " + out_path.string());
  CHECK(filed.status == 0);
  CHECK(filed.out.empty());
  std::ifstream in(out_path, std::ios::binary);
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  CHECK(contents == direct.out);
}
