#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsq_cli/commands.hpp"

using namespace nlsq;
using namespace nlsq::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "nlsq");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<double> fields(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(std::stod(f));
  return out;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("nlsq_cli_test_" + name);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("number formatting and grid") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(22.0) == "22");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(1e-20) == "1e-20");
  const std::vector<double> g = tau_grid(0.0, 3.0, 4);
  CHECK(g == std::vector<double>{0.0, 1.0, 2.0, 3.0});
  CHECK(tau_grid(0.1, 0.7, 7).back() == 0.7);
}

TEST_CASE("sweep config validation") {
  SweepConfig c;
  CHECK_NOTHROW(validate(c));
  c.steps = 1;
  CHECK_THROWS_AS(validate(c), UsageError);
  c = {};
  c.k_max = 7;
  CHECK_THROWS_AS(validate(c), UsageError);
  c = {};
  c.tau_start = 1.0;
  c.tau_end = 1.0;
  CHECK_THROWS_AS(validate(c), UsageError);
  c = {};
  c.n_particles = 0;
  CHECK_THROWS_AS(validate(c), UsageError);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"sweep", "--steps", "1"}).code == 1);
  CHECK(invoke({"sweep", "--kmax", "7"}).code == 1);
  CHECK(invoke({"sweep", "--model", "xyz"}).code == 1);
  CHECK(invoke({"sweep", "--format", "yaml"}).code == 1);
  CHECK(invoke({"sweep", "--bogus"}).code == 1);
  CHECK(invoke({"fock", "--order", "4"}).code == 1);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("CSV schema omits disabled columns") {
  const Outcome lin = invoke({"sweep", "--n", "4", "--kmax", "1", "--steps", "3", "--workers", "1"});
  REQUIRE(lin.code == 0);
  const auto l = lines(lin.out);
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "tau,xi2inv_k1,ent_bound");
  CHECK(fields(l[1]).size() == 3);

  const Outcome full = invoke(
      {"sweep", "--n", "4", "--kmax", "3", "--steps", "3", "--parity", "--qfi", "--workers", "2"});
  REQUIRE(full.code == 0);
  CHECK(lines(full.out)[0] == "tau,xi2inv_k1,xi2inv_k2,xi2inv_k3,xi2inv_parity,f_max,ent_bound");

  const Outcome qfi_only = invoke({"sweep", "--n", "4", "--kmax", "2", "--steps", "2", "--qfi"});
  CHECK(lines(qfi_only.out)[0] == "tau,xi2inv_k1,xi2inv_k2,f_max,ent_bound");
}

TEST_CASE("revival record at tau = pi") {
  const Outcome r = invoke({"sweep", "--n", "16", "--kmax", "3", "--steps", "2", "--tau-start",
                            "0", "--tau-end", "3.141592653589793", "--qfi"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 3);
  const auto a = fields(l[1]);
  const auto b = fields(l[2]);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-8));
  CHECK(a[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hierarchy holds in every emitted record") {
  const Outcome r = invoke({"sweep", "--n", "10", "--kmax", "4", "--steps", "21", "--qfi"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  for (std::size_t i = 1; i < l.size(); ++i) {
    const auto f = fields(l[i]);
    for (std::size_t k = 1; k + 1 < 5; ++k) CHECK(f[k + 1] >= f[k] - 1e-9);
    CHECK(f[5] >= f[4] - 1e-9);
  }
}

TEST_CASE("sweep output is deterministic and independent of worker count") {
  const std::vector<std::string> base = {"sweep", "--n", "8", "--kmax", "3", "--steps", "17",
                                         "--parity", "--qfi", "--format", "json"};
  auto with_workers = [&](const char* w) {
    auto args = base;
    args.push_back("--workers");
    args.push_back(w);
    return invoke(args);
  };
  const Outcome a = with_workers("1");
  const Outcome b = with_workers("1");
  const Outcome c = with_workers("5");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);

  const nlohmann::json doc = nlohmann::json::parse(a.out);
  CHECK(doc["records"].size() == 17);
  CHECK(doc["records"][0]["n_opt_by_k"].size() == 3);
  CHECK(doc["records"][16]["tau"].get<double>() == doctest::Approx(3.141592653589793));
}

TEST_CASE("output file and nonwritable path") {
  const fs::path p = temp_file("sweep.csv");
  const Outcome r = invoke({"sweep", "--n", "4", "--kmax", "1", "--steps", "2", "--out", p.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "tau,xi2inv_k1,ent_bound");
  fs::remove(p);

  const Outcome bad =
      invoke({"sweep", "--n", "4", "--steps", "2", "--out", "/nonexistent-dir/x/out.csv"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("cannot write") != std::string::npos);
}

TEST_CASE("config file fills options not given as flags") {
  const fs::path p = temp_file("config.json");
  {
    std::ofstream out(p);
    out << R"({"n": 6, "steps": 3, "kmax": 2, "tau_end": 1.0, "format": "json", "qfi": true})";
  }
  const Outcome r = invoke({"sweep", "--config", p.string(), "--n", "4"});
  REQUIRE(r.code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc["n"] == 4);
  CHECK(doc["steps"] == 3);
  CHECK(doc["kmax"] == 2);
  CHECK(doc["tau_end"].get<double>() == 1.0);
  CHECK(doc["records"][0].contains("f_max"));

  {
    std::ofstream out(p);
    out << R"({"n": 6, "colour": "red"})";
  }
  const Outcome unknown = invoke({"sweep", "--config", p.string()});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("colour") != std::string::npos);

  {
    std::ofstream out(p);
    out << R"({"n": "six"})";
  }
  CHECK(invoke({"sweep", "--config", p.string()}).code == 1);
  CHECK(invoke({"sweep", "--config", "/nonexistent.json"}).code == 1);
  fs::remove(p);
}

TEST_CASE("worker count from the environment") {
  CHECK(resolve_workers(3) == 3);
  ::setenv("NLSQ_WORKERS", "2", 1);
  CHECK(resolve_workers(0) == 2);
  ::setenv("NLSQ_WORKERS", "zero", 1);
  CHECK_THROWS_AS(resolve_workers(0), UsageError);
  ::unsetenv("NLSQ_WORKERS");
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("odd N under one-axis twisting warns") {
  const Outcome r = invoke({"sweep", "--n", "5", "--kmax", "1", "--steps", "2"});
  CHECK(r.code == 0);
  CHECK(r.err.find("odd N") != std::string::npos);
}

TEST_CASE("fock command") {
  FockConfig c;
  c.n = 0;
  CHECK(run_fock(c).chi2_inv == doctest::Approx(2.0).epsilon(1e-12));
  c.n = 5;
  const FockReport r = run_fock(c);
  CHECK(r.cutoff == 13);
  CHECK(r.chi2_inv == doctest::Approx(22.0).epsilon(1e-12));
  CHECK(r.xi2 == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  CHECK(r.cutoff_rel_change < 1e-12);
  CHECK(r.labels.size() == 6);
  c.order = 2;
  CHECK(run_fock(c).chi2_inv == doctest::Approx(1.0 / 5.5).epsilon(1e-12));

  const Outcome small = invoke({"fock", "--n", "5", "--cutoff", "8"});
  CHECK(small.code == 1);
  CHECK(small.err.find("cutoff") != std::string::npos);
  CHECK(invoke({"fock", "--n", "5", "--cutoff", "9"}).code == 0);

  const Outcome text = invoke({"fock", "--n", "5"});
  CHECK(text.code == 0);
  CHECK(text.out.find("chi2_inv 22\n") != std::string::npos);
  const Outcome js = invoke({"fock", "--n", "3", "--format", "json"});
  CHECK(nlohmann::json::parse(js.out)["chi2_inv"].get<double>() == doctest::Approx(14.0));
}

TEST_CASE("analyze command") {
  AnalyzeConfig c;
  c.n_particles = 4;
  c.tau = 0.1;
  c.order = 2;
  const AnalyzeReport r = run_analyze(c);
  CHECK(r.m_tilde.rows() == 3);
  CHECK(r.m_tilde.cols() == 3);
  CHECK(r.moments.m_matrix.rows() == 9);

  c.tau = 0.0;
  const AnalyzeReport css = run_analyze(c);
  CHECK(css.lambda_max == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(css.m_tilde(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(css.m_tilde(1, 1) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(css.m_tilde(2, 2)) < 1e-12);

  const Outcome o = invoke({"analyze", "--n", "4", "--tau", "0.1", "--kmax", "2"});
  REQUIRE(o.code == 0);
  const nlohmann::ordered_json doc = nlohmann::ordered_json::parse(o.out);
  CHECK(doc.dump(2) + "\n" == o.out);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      CHECK(doc["m"][i][j].get<double>() == r.moments.m_matrix(i, j));
      CHECK(doc["gamma"][i][j].get<double>() == r.moments.gamma(i, j));
    }
  }
  CHECK(doc["lambda_max"].get<double>() == r.lambda_max);
}

TEST_CASE("estimate command") {
  const std::vector<std::string> args = {"estimate", "--n", "16", "--generator", "x",
                                         "--observable", "y", "--mu", "1000", "--trials", "100",
                                         "--seed", "42"};
  const Outcome a = invoke(args);
  const Outcome b = invoke(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("predicted_variance 6.25e-05") != std::string::npos);

  auto mu1 = args;
  mu1[8] = "1";
  const Outcome w = invoke(mu1);
  CHECK(w.err.find("warning") != std::string::npos);

  EstimateConfig c;
  c.n_particles = 16;
  c.tau = 0.05;
  c.mu = 500;
  c.trials = 500;
  const EstimateOutcome opt = run_estimate(c);
  CHECK(opt.report.chi2 < 1.0 / 16.0);

  c.generator = "1,0";
  CHECK_THROWS_AS(run_estimate(c), UsageError);
  c.generator = "q";
  CHECK_THROWS_AS(run_estimate(c), UsageError);

  const Outcome wide = invoke({"estimate", "--n", "16", "--generator", "x", "--observable", "y",
                               "--window", "3", "--trials", "10"});
  CHECK(wide.code == 1);
}

}
