#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"
#include "stadium/cli.hpp"
#include "stadium/billiard_map.hpp"
#include "stadium/sft.hpp"

using nlohmann::json;

namespace {

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"stadium-entropy"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return stadium::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string name) : path(std::move(name)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_CASE("entropy-table emits increasing certified bounds") {
  TempFile out("cli_entropy.csv");
  CHECK(run({"entropy-table", "--ell", "10,100,1000", "--format", "csv", "--out",
             out.path}) == 0);
  const auto lines = csv_lines(slurp(out.path));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] ==
        "ell,N_used,spectral_radius,entropy,method,residual,eq0_root,"
        "limit_gap,certified");
  const auto row10 = split_csv(lines[1]);
  CHECK(row10[0] == "10");
  CHECK(row10[1] == "3");
  CHECK(std::stod(row10[2]) == doctest::Approx(2.3593041).epsilon(1e-6));
  CHECK(row10[8] == "1");
  double prev = 0.0;
  for (size_t i = 1; i < lines.size(); ++i) {
    const double entropy = std::stod(split_csv(lines[i])[3]);
    CHECK(entropy > prev);
    prev = entropy;
  }
}

TEST_CASE("entropy-table reaches the limit for huge tables") {
  TempFile out("cli_entropy_large.json");
  CHECK(run({"entropy-table", "--ell", "1000000", "--format", "json", "--out",
             out.path}) == 0);
  const json doc = json::parse(slurp(out.path));
  CHECK(doc["schema_version"] == 1);
  const auto& row = doc["rows"][0];
  CHECK(std::abs(double(row["entropy"]) - std::log(stadium::kSilverRatio)) < 1e-6);
  CHECK(row["method"] == "ClosedForm");
  CHECK(row["certified"] == true);
}

TEST_CASE("entropy-table flags short tables instead of refusing them") {
  TempFile out("cli_entropy_short.csv");
  CHECK(run({"entropy-table", "--ell", "3", "--out", out.path}) == 0);
  const auto row = split_csv(csv_lines(slurp(out.path))[1]);
  CHECK(row[1] == "0");
  CHECK(row[8] == "0");
  CHECK(std::stod(row[3]) == 0.0);
}

TEST_CASE("identical configurations produce byte-identical artifacts") {
  TempFile a("cli_det_a.json"), b("cli_det_b.json");
  const std::vector<std::string> args{"entropy-table", "--ell", "10,37.5",
                                      "--format", "json"};
  auto with_out = [&](const std::string& path) {
    auto v = args;
    v.push_back("--out");
    v.push_back(path);
    return v;
  };
  CHECK(run(with_out(a.path)) == 0);
  CHECK(run(with_out(b.path)) == 0);
  CHECK(slurp(a.path) == slurp(b.path));
}

TEST_CASE("simulate traces the axis orbit") {
  TempFile out("cli_sim_axis.csv");
  const double pi = std::numbers::pi;
  CHECK(run({"simulate", "--ell", "4", "--r0", std::to_string(pi / 2), "--phi0",
             "0", "--steps", "4", "--out", out.path}) == 0);
  const auto lines = csv_lines(slurp(out.path));
  REQUIRE(lines.size() == 6);
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto row = split_csv(lines[i]);
    CHECK(row[3] == (i % 2 == 1 ? "0" : "2"));  // alternating arcs
    CHECK(row[5] == "1");
    CHECK(row[6] == "1");
    if (i >= 2) CHECK(std::stod(row[4]) == doctest::Approx(6.0));
  }
}

TEST_CASE("simulate flags the period-two bouncer") {
  TempFile out("cli_sim_bouncer.json");
  const double pi = std::numbers::pi;
  CHECK(run({"simulate", "--ell", "4", "--r0", std::to_string(pi + 2.0),
             "--phi0", "0", "--steps", "10", "--n-cap", "3", "--format", "json",
             "--out", out.path}) == 0);
  const json doc = json::parse(slurp(out.path));
  CHECK(doc["membership"]["in_K"] == true);
  CHECK(doc["membership"]["in_KN"] == false);
  CHECK(doc["membership"]["reason"] == "SegmentRunTooLong");
  CHECK(doc["membership"]["violation_index"] == 3);
  CHECK(doc["singular_at_step"].is_null());
}

TEST_CASE("simulate reports singular starts in-band unless strict") {
  TempFile out("cli_sim_singular.json");
  const double pi = std::numbers::pi;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", pi / 2 - 1e-13);
  const std::string grazing(buf);
  CHECK(run({"simulate", "--ell", "4", "--r0", "0.5", "--phi0", grazing,
             "--steps", "5", "--format", "json", "--out", out.path}) == 0);
  const json doc = json::parse(slurp(out.path));
  CHECK(doc["singular_at_step"] == 0);
  CHECK(doc["trace"].size() == 1);
  CHECK(doc["membership"]["reason"] == "Singular");

  CHECK(run({"simulate", "--ell", "4", "--r0", "0.5", "--phi0", grazing,
             "--steps", "5", "--format", "json", "--out", out.path,
             "--strict"}) == stadium::kExitNumeric);
}

TEST_CASE("simulate traces pass a reflection-law post-check") {
  TempFile out("cli_sim_random.json");
  CHECK(run({"simulate", "--ell", "10", "--r0", "7.25", "--phi0", "0.37",
             "--steps", "12", "--format", "json", "--out", out.path}) == 0);
  const json doc = json::parse(slurp(out.path));
  const stadium::StadiumTable table(10.0);
  const auto& trace = doc["trace"];
  REQUIRE(trace.size() == 13);
  for (size_t k = 0; k + 1 < trace.size(); ++k) {
    const Eigen::Vector2d a =
        stadium::boundary_point(table, double(trace[k]["r"])).first;
    const Eigen::Vector2d b =
        stadium::boundary_point(table, double(trace[k + 1]["r"])).first;
    const Eigen::Vector2d incoming = (b - a).normalized();
    const double r1 = trace[k + 1]["r"];
    const Eigen::Vector2d n = stadium::inward_normal(table, r1);
    const Eigen::Vector2d reflected = incoming - 2.0 * incoming.dot(n) * n;
    const Eigen::Vector2d outgoing = stadium::velocity(
        table, stadium::PhasePoint{r1, double(trace[k + 1]["phi"])});
    CHECK((reflected - outgoing).norm() < 1e-9);
    CHECK(double(trace[k + 1]["flight_length"]) ==
          doctest::Approx((b - a).norm()).epsilon(1e-12));
  }
}

TEST_CASE("entropy-table honors the level cap") {
  TempFile out("cli_entropy_cap.csv");
  CHECK(run({"entropy-table", "--ell", "100", "--n-cap", "2", "--out",
             out.path}) == 0);
  const auto row = split_csv(csv_lines(slurp(out.path))[1]);
  CHECK(row[1] == "2");
  CHECK(std::stod(row[2]) == doctest::Approx(2.2695308).epsilon(1e-6));
}

TEST_CASE("verify emits a single-row summary in csv") {
  TempFile out("cli_verify.csv");
  CHECK(run({"verify", "--ell", "10", "--n-cap", "2", "--depth", "4",
             "--format", "csv", "--out", out.path}) == 0);
  const auto lines = csv_lines(slurp(out.path));
  REQUIRE(lines.size() == 2);
  const auto row = split_csv(lines[1]);
  CHECK(row[0] == "10");
  CHECK(row.back() == "1");
}

TEST_CASE("simulate validates the phase point") {
  CHECK(run({"simulate", "--ell", "4", "--r0", "-1", "--phi0", "0", "--steps",
             "3"}) == stadium::kExitUsage);
  CHECK(run({"simulate", "--ell", "4", "--r0", "99", "--phi0", "0", "--steps",
             "3"}) == stadium::kExitUsage);
}

TEST_CASE("find-orbit certifies a realizable word") {
  TempFile out("cli_orbit.json");
  CHECK(run({"find-orbit", "--ell", "10", "--word", "0 1 0", "--n-cap", "3",
             "--out", out.path}) == 0);
  const json doc = json::parse(slurp(out.path));
  CHECK(doc["word"] == json::array({0, 1, 0}));
  CHECK(doc["certificate"]["passes"] == true);
  CHECK(double(doc["certificate"]["max_reflection_residual"]) < 1e-9);
  CHECK(double(doc["certificate"]["curvature_margin"]) ==
        doctest::Approx(1.0 - 10.0 / 51.0));
  CHECK(doc["polyline"].size() == 2);
}

TEST_CASE("find-orbit emits the axis chord for the two-zero word") {
  TempFile out("cli_orbit_axis.json");
  CHECK(run({"find-orbit", "--ell", "10", "--word", "0 0", "--n-cap", "3",
             "--out", out.path}) == 0);
  const json doc = json::parse(slurp(out.path));
  CHECK(double(doc["certificate"]["total_length"]) == doctest::Approx(12.0));
}

TEST_CASE("find-orbit rejects bad words and short tables") {
  CHECK(run({"find-orbit", "--ell", "10", "--word", "0 1 1 0", "--n-cap",
             "3"}) == stadium::kExitUsage);
  CHECK(run({"find-orbit", "--ell", "7.9", "--word", "0 1 0", "--n-cap",
             "3"}) == stadium::kExitUsage);
  CHECK(run({"find-orbit", "--ell", "10", "--word", "0 x 0", "--n-cap",
             "3"}) == stadium::kExitUsage);
  CHECK(run({"find-orbit", "--ell", "10", "--word", "0 1 0", "--n-cap", "3",
             "--format", "csv"}) == stadium::kExitUsage);
}

TEST_CASE("verify passes at desk scale") {
  TempFile out("cli_verify.json");
  CHECK(run({"verify", "--ell", "10", "--n-cap", "3", "--depth", "5",
             "--format", "json", "--out", out.path}) == 0);
  const json doc = json::parse(slurp(out.path));
  CHECK(doc["passed"] == true);
  CHECK(doc["words_total"] == doc["words_passed"]);
  CHECK(doc["failures"].empty());
  CHECK(doc["entropy_agreement"]["k_shift"] == 1);
  CHECK(double(doc["entropy_agreement"]["max_discrepancy"]) < 1e-9);
  CHECK(double(doc["measure_distortion"]["max_abs_error"]) < 1e-3);
}

TEST_CASE("verify rejects out-of-contract depths") {
  CHECK(run({"verify", "--ell", "10", "--n-cap", "3", "--depth", "11"}) ==
        stadium::kExitUsage);
  CHECK(run({"verify", "--ell", "8", "--n-cap", "3", "--depth", "4"}) ==
        stadium::kExitUsage);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({}) == stadium::kExitUsage);
  CHECK(run({"entropy-table"}) == stadium::kExitUsage);
  CHECK(run({"simulate", "--ell", "4"}) == stadium::kExitUsage);
}
