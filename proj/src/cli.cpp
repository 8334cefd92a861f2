#include "stadium/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stadium/coding.hpp"
#include "stadium/io.hpp"
#include "stadium/orbit_finder.hpp"
#include "stadium/sft.hpp"

namespace stadium {
namespace {

void write_artifact(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw Error("cannot open output file: " + out_path);
  file << text;
}

std::vector<int> parse_word(const std::string& text) {
  std::istringstream in(text);
  std::vector<int> symbols;
  std::string token;
  while (in >> token) {
    size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(token, &used);
    } catch (const std::exception&) {
      throw DomainError("word symbols must be integers: '" + token + "'");
    }
    if (used != token.size())
      throw DomainError("word symbols must be integers: '" + token + "'");
    symbols.push_back(value);
  }
  if (symbols.empty()) throw DomainError("word must contain at least one symbol");
  return symbols;
}

// ---------------------------------------------------------------- entropy

struct EntropyTableConfig {
  std::vector<double> ells;
  int n_cap = 0;
  double tol = 1e-12;
  std::string format = "csv";
  std::string out;
};

int cmd_entropy_table(const EntropyTableConfig& cfg) {
  struct Row {
    double ell;
    EntropyBound bound;
    double eq0;
    double limit_gap;
  };
  std::vector<Row> rows;
  for (double ell : cfg.ells) {
    const EntropyBound bound = entropy_lower_bound(ell, cfg.n_cap, cfg.tol);
    const double eq0 =
        bound.n_used >= 1 ? eq0_root(bound.n_used + 1).spectral_radius : 1.0;
    rows.push_back({ell, bound,
                    eq0, std::abs(bound.result.spectral_radius - kSilverRatio)});
  }

  std::string text;
  if (cfg.format == "csv") {
    text += "ell,N_used,spectral_radius,entropy,method,residual,eq0_root,"
            "limit_gap,certified\n";
    for (const Row& row : rows)
      text += csv_row({format_double(row.ell), std::to_string(row.bound.n_used),
                       format_double(row.bound.result.spectral_radius),
                       format_double(row.bound.result.entropy),
                       to_string(row.bound.result.method),
                       format_double(row.bound.result.residual),
                       format_double(row.eq0), format_double(row.limit_gap),
                       row.bound.nontrivial ? "1" : "0"});
  } else {
    text += "{\"schema_version\":1,\"command\":\"entropy-table\",\"rows\":[";
    for (size_t i = 0; i < rows.size(); ++i) {
      const Row& row = rows[i];
      if (i) text += ",";
      text += "{\"ell\":" + format_double(row.ell) +
              ",\"N_used\":" + std::to_string(row.bound.n_used) +
              ",\"spectral_radius\":" +
              format_double(row.bound.result.spectral_radius) +
              ",\"entropy\":" + format_double(row.bound.result.entropy) +
              ",\"method\":" + json_string(to_string(row.bound.result.method)) +
              ",\"residual\":" + format_double(row.bound.result.residual) +
              ",\"eq0_root\":" + format_double(row.eq0) +
              ",\"limit_gap\":" + format_double(row.limit_gap) +
              ",\"certified\":" + format_bool(row.bound.nontrivial) + "}";
    }
    text += "]}\n";
  }
  write_artifact(text, cfg.out);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateConfig {
  double ell = 0.0;
  double r0 = 0.0;
  double phi0 = 0.0;
  int steps = 0;
  int n_cap = 1;
  bool strict = false;
  std::string format = "csv";
  std::string out;
};

int cmd_simulate(const SimulateConfig& cfg) {
  const StadiumTable table(cfg.ell);
  if (cfg.r0 < 0.0 || cfg.r0 >= table.perimeter())
    throw DomainError("r0 must lie in [0, perimeter)");
  if (std::abs(cfg.phi0) > std::numbers::pi / 2)
    throw DomainError("phi0 must lie in [-pi/2, pi/2]");
  if (cfg.steps < 0) throw DomainError("steps must be nonnegative");

  struct Row {
    int step;
    PhasePoint p;
    int piece;
    double flight_in;
    bool in_K, in_KN;
  };
  std::vector<Row> rows;
  int singular_at = -1;

  PhasePoint cur{cfg.r0, cfg.phi0};
  bool in_K = true, in_KN = true;
  int prev_symbol = -1, segment_run = 0, violation = -1;
  MembershipReason reason = MembershipReason::None;
  double flight_in = 0.0;
  for (int k = 0; k <= cfg.steps; ++k) {
    if (k > 0) {
      try {
        const auto outcome = step(table, cur);
        flight_in = outcome.flight_length;
        cur = outcome.next;
      } catch (const SingularTrajectory&) {
        singular_at = k - 1;
        if (in_K && in_KN) {
          in_K = in_KN = false;
          violation = k - 1;
          reason = MembershipReason::Singular;
        }
        break;
      }
    }
    const int symbol = static_cast<int>(piece_at(table, cur.r));
    const bool arc = is_arc(static_cast<BoundaryPiece>(symbol));
    if (arc && symbol == prev_symbol && in_K) {
      in_K = in_KN = false;
      if (violation < 0) {
        violation = k;
        reason = MembershipReason::SameArcTwice;
      }
    }
    segment_run = arc ? 0 : segment_run + 1;
    if (segment_run > cfg.n_cap && in_KN) {
      in_KN = false;
      if (violation < 0) {
        violation = k;
        reason = MembershipReason::SegmentRunTooLong;
      }
    }
    prev_symbol = symbol;
    rows.push_back({k, cur, symbol, k == 0 ? 0.0 : flight_in, in_K, in_KN});
  }

  std::string text;
  if (cfg.format == "csv") {
    text += "step,r,phi,piece,flight_length,in_K,in_KN\n";
    for (const Row& row : rows)
      text += csv_row({std::to_string(row.step), format_double(row.p.r),
                       format_double(row.p.phi), std::to_string(row.piece),
                       format_double(row.flight_in), row.in_K ? "1" : "0",
                       row.in_KN ? "1" : "0"});
  } else {
    text += "{\"schema_version\":1,\"command\":\"simulate\",\"ell\":" +
            format_double(cfg.ell) + ",\"start\":{\"r\":" +
            format_double(cfg.r0) + ",\"phi\":" + format_double(cfg.phi0) +
            "},\"steps_requested\":" + std::to_string(cfg.steps) +
            ",\"N\":" + std::to_string(cfg.n_cap) + ",\"singular_at_step\":" +
            (singular_at >= 0 ? std::to_string(singular_at) : "null") +
            ",\"membership\":{\"in_K\":" + format_bool(in_K) +
            ",\"in_KN\":" + format_bool(in_KN) + ",\"violation_index\":" +
            (violation >= 0 ? std::to_string(violation) : "null") +
            ",\"reason\":" + json_string(to_string(reason)) + "},\"trace\":[";
    for (size_t i = 0; i < rows.size(); ++i) {
      const Row& row = rows[i];
      if (i) text += ",";
      text += "{\"step\":" + std::to_string(row.step) +
              ",\"r\":" + format_double(row.p.r) +
              ",\"phi\":" + format_double(row.p.phi) +
              ",\"piece\":" + std::to_string(row.piece) +
              ",\"flight_length\":" + format_double(row.flight_in) +
              ",\"in_K\":" + format_bool(row.in_K) +
              ",\"in_KN\":" + format_bool(row.in_KN) + "}";
    }
    text += "]}\n";
  }
  write_artifact(text, cfg.out);
  return (singular_at >= 0 && cfg.strict) ? kExitNumeric : kExitOk;
}

// --------------------------------------------------------------- find-orbit

struct FindOrbitConfig {
  double ell = 0.0;
  std::string word;
  int n_cap = 0;
  double tol = 1e-10;
  std::string format = "json";
  std::string out;
};

std::string certificate_json(const OrbitCertificate& cert) {
  return "{\"max_reflection_residual\":" +
         format_double(cert.max_reflection_residual) +
         ",\"max_abs_arc_argument\":" + format_double(cert.max_abs_arc_argument) +
         ",\"endpoint_clearance\":" + format_double(cert.endpoint_clearance) +
         ",\"extra_intersection_found\":" +
         format_bool(cert.extra_intersection_found) +
         ",\"curvature_margin\":" + format_double(cert.curvature_margin) +
         ",\"total_length\":" + format_double(cert.total_length) +
         ",\"passes\":" + format_bool(cert.passes()) + "}";
}

int cmd_find_orbit(const FindOrbitConfig& cfg) {
  if (cfg.format != "json")
    throw DomainError("find-orbit emits JSON only");
  const StadiumTable table(cfg.ell);
  const SymbolWord word = SymbolWord::levels(parse_word(cfg.word), cfg.n_cap);
  const RealizedOrbit orbit = realize_word(table, word, cfg.n_cap, cfg.tol);

  std::string text =
      "{\"schema_version\":1,\"command\":\"find-orbit\",\"ell\":" +
      format_double(cfg.ell) + ",\"N\":" + std::to_string(cfg.n_cap) +
      ",\"word\":" + json_int_array(orbit.word.symbols) +
      ",\"phase_point\":{\"r\":" + format_double(orbit.start.r) +
      ",\"phi\":" + format_double(orbit.start.phi) +
      "},\"certificate\":" + certificate_json(orbit.certificate) +
      ",\"polyline\":[";
  for (size_t i = 0; i < orbit.polyline.points.size(); ++i) {
    if (i) text += ",";
    text += "[" + format_double(orbit.polyline.points[i].x()) + "," +
            format_double(orbit.polyline.points[i].y()) + "]";
  }
  text += "]}\n";
  write_artifact(text, cfg.out);
  return kExitOk;
}

// ------------------------------------------------------------------- verify

struct VerifyConfig {
  double ell = 0.0;
  int n_cap = 0;
  int depth = 0;
  double tol = 1e-9;
  std::string format = "json";
  std::string out;
};

int cmd_verify(const VerifyConfig& cfg) {
  if (cfg.depth < 1 || cfg.depth > 10)
    throw DomainError("depth must lie in 1..10");
  const StadiumTable table(cfg.ell);
  if (!(table.ell > 2.0 * cfg.n_cap + 2.0))
    throw DomainError("verification requires ell > 2N + 2");

  // Conjugacy sweep: realize every zero-delimited word up to the depth.
  const auto words = enumerate_zero_delimited_words(cfg.n_cap, cfg.depth);
  int passed = 0;
  double worst_residual = 0.0;
  std::vector<std::pair<SymbolWord, std::string>> failures;
  for (const SymbolWord& word : words) {
    try {
      const RealizedOrbit orbit = realize_word(table, word, cfg.n_cap);
      worst_residual = std::max(worst_residual,
                                orbit.certificate.max_reflection_residual);
      if (orbit.certificate.passes())
        ++passed;
      else
        failures.emplace_back(word, "certificate failed");
    } catch (const Error& e) {
      failures.emplace_back(word, e.what());
    }
  }

  // Three-way entropy agreement over the first ten level caps.
  double entropy_disc = 0.0;
  int k_shift = -1;
  bool shift_consistent = true;
  for (int n = 1; n <= 10; ++n) {
    const TransitionMatrix m = matrix_sigma_tilde(n);
    const double rho_power = spectral_radius(m).spectral_radius;
    const double rho_rome =
        rome_root(rome_reduce(m, {n /* state 0 */})).spectral_radius;
    int best_k = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 2; ++k) {
      const double d = std::abs(eq0_root(n + k).spectral_radius - rho_power);
      if (d < best) {
        best = d;
        best_k = k;
      }
    }
    if (k_shift < 0) k_shift = best_k;
    if (best_k != k_shift) shift_consistent = false;
    entropy_disc =
        std::max({entropy_disc, std::abs(rho_power - rho_rome), best});
  }

  // Invariant-measure distortion on a fixed sample.
  const auto sample = sample_regular_phase_points(table, 100, /*seed=*/20200128);
  double distortion_err = 0.0;
  for (const PhasePoint& p : sample)
    distortion_err =
        std::max(distortion_err, std::abs(measure_distortion(table, p, 1e-5) - 1.0));

  const bool ok = failures.empty() && shift_consistent &&
                  entropy_disc < cfg.tol && distortion_err < 1e-3;

  std::string text;
  if (cfg.format == "csv") {
    text += "ell,N,depth,words_total,words_passed,worst_reflection_residual,"
            "entropy_max_discrepancy,k_shift,distortion_max_abs_error,passed\n";
    text += csv_row({format_double(cfg.ell), std::to_string(cfg.n_cap),
                     std::to_string(cfg.depth), std::to_string(words.size()),
                     std::to_string(passed), format_double(worst_residual),
                     format_double(entropy_disc), std::to_string(k_shift),
                     format_double(distortion_err), ok ? "1" : "0"});
  } else {
    text += "{\"schema_version\":1,\"command\":\"verify\",\"ell\":" +
            format_double(cfg.ell) + ",\"N\":" + std::to_string(cfg.n_cap) +
            ",\"depth\":" + std::to_string(cfg.depth) +
            ",\"words_total\":" + std::to_string(words.size()) +
            ",\"words_passed\":" + std::to_string(passed) + ",\"failures\":[";
    for (size_t i = 0; i < failures.size(); ++i) {
      if (i) text += ",";
      text += "{\"word\":" + json_int_array(failures[i].first.symbols) +
              ",\"reason\":" + json_string(failures[i].second) + "}";
    }
    text += "],\"worst_reflection_residual\":" + format_double(worst_residual) +
            ",\"entropy_agreement\":{\"max_discrepancy\":" +
            format_double(entropy_disc) +
            ",\"k_shift\":" + std::to_string(k_shift) +
            ",\"shift_consistent\":" + format_bool(shift_consistent) +
            "},\"measure_distortion\":{\"samples\":" +
            std::to_string(sample.size()) +
            ",\"max_abs_error\":" + format_double(distortion_err) +
            "},\"passed\":" + format_bool(ok) + "}\n";
  }
  write_artifact(text, cfg.out);

  if (!ok) {
    for (const auto& [word, why] : failures)
      std::cerr << "verify: word " << to_string(word) << " failed: " << why
                << "\n";
    return kExitVerify;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Stadium billiard entropy toolkit"};
  app.require_subcommand(1);

  EntropyTableConfig entropy_cfg;
  auto* entropy = app.add_subcommand(
      "entropy-table", "Certified entropy lower bounds for a list of table lengths");
  entropy->add_option("--ell", entropy_cfg.ells, "Table length(s)")
      ->required()
      ->delimiter(',');
  entropy->add_option("--n-cap", entropy_cfg.n_cap, "Cap on the level alphabet");
  entropy->add_option("--tol", entropy_cfg.tol, "Perron-root tolerance");
  entropy->add_option("--format", entropy_cfg.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  entropy->add_option("--out", entropy_cfg.out, "Output path (default stdout)");

  SimulateConfig sim_cfg;
  auto* simulate = app.add_subcommand("simulate", "Trace a billiard trajectory");
  simulate->add_option("--ell", sim_cfg.ell, "Table length")->required();
  simulate->add_option("--r0", sim_cfg.r0, "Starting arc-length position")
      ->required();
  simulate->add_option("--phi0", sim_cfg.phi0, "Starting reflection angle")
      ->required();
  simulate->add_option("--steps", sim_cfg.steps, "Number of collisions to trace")
      ->required();
  simulate->add_option("--n-cap", sim_cfg.n_cap,
                       "Segment-run bound N for the membership flags");
  simulate->add_flag("--strict", sim_cfg.strict,
                     "Exit nonzero when the trajectory hits the singular set");
  simulate->add_option("--format", sim_cfg.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--out", sim_cfg.out, "Output path (default stdout)");

  FindOrbitConfig orbit_cfg;
  auto* orbit = app.add_subcommand(
      "find-orbit", "Realize a level word as a billiard orbit with a certificate");
  orbit->add_option("--ell", orbit_cfg.ell, "Table length")->required();
  orbit->add_option("--word", orbit_cfg.word, "Level word, e.g. \"0 1 2 0\"")
      ->required();
  orbit->add_option("--n-cap", orbit_cfg.n_cap, "Level alphabet cap N")
      ->required();
  orbit->add_option("--tol", orbit_cfg.tol, "Optimizer residual target");
  orbit->add_option("--format", orbit_cfg.format, "json");
  orbit->add_option("--out", orbit_cfg.out, "Output path (default stdout)");

  VerifyConfig verify_cfg;
  auto* verify = app.add_subcommand(
      "verify", "Exhaustive word realization + entropy agreement + measure checks");
  verify->add_option("--ell", verify_cfg.ell, "Table length")->required();
  verify->add_option("--n-cap", verify_cfg.n_cap, "Level alphabet cap N")
      ->required();
  verify->add_option("--depth", verify_cfg.depth, "Maximal word length (<= 10)")
      ->required();
  verify->add_option("--tol", verify_cfg.tol, "Entropy agreement tolerance");
  verify->add_option("--format", verify_cfg.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  verify->add_option("--out", verify_cfg.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (entropy->parsed()) return cmd_entropy_table(entropy_cfg);
    if (simulate->parsed()) return cmd_simulate(sim_cfg);
    if (orbit->parsed()) return cmd_find_orbit(orbit_cfg);
    if (verify->parsed()) return cmd_verify(verify_cfg);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace stadium
