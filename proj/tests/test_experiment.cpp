#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fr/experiment.hpp"
#include "fr/rng.hpp"
#include "json.hpp"

using namespace fr;

namespace {

const char* kSmallPlan = R"json({
  "frame": {"kind": "random_onb", "n": 6, "d": 6},
  "signal": {"model": "exact_analysis_sparse"},
  "noise": {"kind": "gaussian"},
  "methods": [{"kind": "ads"}, {"kind": "alasso", "value": 0.3}],
  "sweep": {"m": [4, 5], "s": [1], "sigma": [0.05, 0.1], "s_prime": [0, 1]},
  "trials_per_cell": 2,
  "master_seed": 7,
  "solver": {"max_iter": 3000, "tol_primal": 1e-7, "tol_dual": 1e-7,
             "tol_gap": 1e-6}
})json";

const char* kTinyPlan = R"json({
  "frame": {"kind": "random_onb", "n": 6, "d": 6},
  "methods": [{"kind": "alasso", "value": 0.3}],
  "sweep": {"m": [4, 5], "s": [1]},
  "trials_per_cell": 3,
  "master_seed": 11,
  "solver": {"max_iter": 2000, "tol_primal": 1e-7, "tol_dual": 1e-7}
})json";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

struct FileGuard {
  std::vector<std::string> paths;
  ~FileGuard() {
    for (const std::string& p : paths) std::remove(p.c_str());
  }
};

TrialRecord make_record(std::size_t cell, std::size_t trial, double error,
                        double signal_norm) {
  TrialRecord r;
  r.cell_index = cell;
  r.trial_index = trial;
  r.seed = 100 * cell + trial;
  r.method = "ads";
  r.m = 4 + cell;
  r.n = 6;
  r.d = 6;
  r.s = 1;
  r.sigma = 0.1;
  r.param = 0.5;
  r.error_l2 = error;
  r.objective = 1.0;
  r.feasibility_margin = 0.01;
  r.converged = true;
  r.signal_norm = signal_norm;
  return r;
}

}  // namespace

TEST_CASE("plan parsing fills every field and applies defaults") {
  const ExperimentPlan p = parse_plan(kSmallPlan);
  CHECK(p.frame.kind == FrameKind::random_onb);
  CHECK(p.frame.n == 6);
  CHECK(p.frame.d == 6);
  CHECK(p.sensing_kind == SensingKind::gaussian);
  CHECK(p.signal.model == SignalModel::exact_analysis_sparse);
  CHECK(p.noise_kind == NoiseKind::gaussian);
  REQUIRE(p.methods.size() == 2);
  CHECK(p.methods[0].kind == MethodKind::ads);
  CHECK(p.methods[0].paper_formula);
  CHECK(p.methods[1].kind == MethodKind::alasso);
  CHECK_FALSE(p.methods[1].paper_formula);
  CHECK(p.methods[1].value == 0.3);
  CHECK(p.sweep.m == std::vector<std::size_t>{4, 5});
  CHECK(p.sweep.sigma == std::vector<double>{0.05, 0.1});
  CHECK(p.trials_per_cell == 2);
  CHECK(p.master_seed == 7);
  CHECK(p.solver.max_iter == 3000);
  CHECK_FALSE(p.include_timing);
  CHECK(cell_count(p) == 16);
}

TEST_CASE("plan parsing rejects malformed input loudly") {
  CHECK_THROWS_AS((void)parse_plan("not json"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_plan("[1, 2]"), std::invalid_argument);

  // Unknown keys, top level and nested.
  CHECK_THROWS_AS(
      (void)parse_plan(R"({"frame": {"kind": "identity", "n": 4, "d": 4},
        "methods": [{"kind": "ads"}], "sweep": {"m": [3], "s": [1]},
        "trials_per_cell": 1, "surprise": true})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)parse_plan(R"({"frame": {"kind": "identity", "n": 4, "d": 4,
        "rows": 4}, "methods": [{"kind": "ads"}],
        "sweep": {"m": [3], "s": [1]}, "trials_per_cell": 1})"),
      std::invalid_argument);

  // Missing required keys.
  CHECK_THROWS_AS(
      (void)parse_plan(R"({"methods": [{"kind": "ads"}],
        "sweep": {"m": [3], "s": [1]}, "trials_per_cell": 1})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)parse_plan(R"({"frame": {"kind": "identity", "n": 4, "d": 4},
        "sweep": {"m": [3], "s": [1]}, "trials_per_cell": 1})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)parse_plan(R"({"frame": {"kind": "identity", "n": 4, "d": 4},
        "methods": [{"kind": "ads"}], "sweep": {"m": [3]},
        "trials_per_cell": 1})"),
      std::invalid_argument);

  // A method may take the closed-form parameter or an explicit one, not both.
  CHECK_THROWS_AS(
      (void)parse_plan(R"({"frame": {"kind": "identity", "n": 4, "d": 4},
        "methods": [{"kind": "ads", "paper_formula": true, "value": 0.5}],
        "sweep": {"m": [3], "s": [1]}, "trials_per_cell": 1})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)parse_plan(R"({"frame": {"kind": "identity", "n": 4, "d": 4},
        "methods": [{"kind": "ads", "paper_formula": false}],
        "sweep": {"m": [3], "s": [1]}, "trials_per_cell": 1})"),
      std::invalid_argument);

  // Bad values.
  CHECK_THROWS_AS(
      (void)parse_plan(R"({"frame": {"kind": "identity", "n": 4, "d": 4},
        "methods": [{"kind": "ads"}], "sweep": {"m": [3], "s": [1],
        "sigma": [-0.5]}, "trials_per_cell": 1})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)parse_plan(R"({"frame": {"kind": "identity", "n": 4, "d": 4},
        "methods": [{"kind": "ads"}], "sweep": {"m": [3], "s": [1]},
        "trials_per_cell": 0})"),
      std::invalid_argument);
}

TEST_CASE("sweep cells decompose with s_prime fastest and methods slowest") {
  const ExperimentPlan p = parse_plan(kSmallPlan);
  // With sizes (methods=2, m=2, s=1, sigma=2, s_prime=2) the flat index is
  // method-major: idx = (((method*2 + m)*1 + s)*2 + sigma)*2 + s_prime.
  const TrialRecord c0 = run_trial(p, 0, 0);
  CHECK(c0.method == "ads");
  CHECK(c0.m == 4);
  CHECK(c0.sigma == 0.05);
  CHECK(c0.s_prime == 0);
  const TrialRecord c1 = run_trial(p, 1, 0);
  CHECK(c1.s_prime == 1);
  CHECK(c1.sigma == 0.05);
  const TrialRecord c2 = run_trial(p, 2, 0);
  CHECK(c2.sigma == 0.1);
  CHECK(c2.s_prime == 0);
  const TrialRecord c4 = run_trial(p, 4, 0);
  CHECK(c4.m == 5);
  CHECK(c4.sigma == 0.05);
  CHECK(c4.method == "ads");
  const TrialRecord c8 = run_trial(p, 8, 0);
  CHECK(c8.method == "alasso");
  CHECK(c8.m == 4);

  CHECK_THROWS_AS((void)run_trial(p, 16, 0), std::out_of_range);
  CHECK_THROWS_AS((void)run_trial(p, 0, 2), std::out_of_range);
}

TEST_CASE("a trial is a pure function of plan, cell, and trial index") {
  const ExperimentPlan p = parse_plan(kSmallPlan);
  const TrialRecord a = run_trial(p, 3, 1);
  const TrialRecord b = run_trial(p, 3, 1);
  CHECK(a.seed == hash64({7, 3, 1}));
  CHECK(a.seed == b.seed);
  CHECK(a.error_l2 == b.error_l2);
  CHECK(a.objective == b.objective);
  CHECK(a.param == b.param);
  CHECK(a.feasibility_margin == b.feasibility_margin);
  CHECK(a.converged == b.converged);
  CHECK(a.signal_norm == b.signal_norm);
  CHECK_FALSE(a.wall_time_ms.has_value());

  ExperimentPlan timed = p;
  timed.include_timing = true;
  const TrialRecord t = run_trial(timed, 3, 1);
  REQUIRE(t.wall_time_ms.has_value());
  CHECK(*t.wall_time_ms >= 0.0);
  CHECK(t.error_l2 == a.error_l2);  // timing never perturbs results
}

TEST_CASE("worker count and FR_WORKERS never change the emitted bytes") {
  const ExperimentPlan p = parse_plan(kTinyPlan);
  FileGuard guard;
  guard.paths = {"exp_w1.csv", "exp_w3.csv", "exp_env.csv"};

  const ExperimentResult r1 = run_experiment(p, 1);
  const ExperimentResult r3 = run_experiment(p, 3);
  REQUIRE(r1.records.size() == 6);
  REQUIRE(r3.records.size() == 6);
  CHECK(r1.cells.size() == 2);
  emit_report(r1.records, r1.cells, ReportFormat::csv, "exp_w1.csv");
  emit_report(r3.records, r3.cells, ReportFormat::csv, "exp_w3.csv");
  CHECK(read_file("exp_w1.csv") == read_file("exp_w3.csv"));

  setenv("FR_WORKERS", "2", 1);
  const ExperimentResult renv = run_experiment(p, 0);
  emit_report(renv.records, renv.cells, ReportFormat::csv, "exp_env.csv");
  CHECK(read_file("exp_env.csv") == read_file("exp_w1.csv"));

  setenv("FR_WORKERS", "abc", 1);
  CHECK_THROWS_AS((void)run_experiment(p, 0), std::invalid_argument);
  unsetenv("FR_WORKERS");
}

TEST_CASE("csv reports round trip byte for byte") {
  const ExperimentPlan p = parse_plan(kTinyPlan);
  const ExperimentResult r = run_experiment(p, 1);
  FileGuard guard;
  guard.paths = {"exp_rt1.csv", "exp_rt2.csv"};
  emit_report(r.records, r.cells, ReportFormat::csv, "exp_rt1.csv");
  const std::vector<TrialRecord> parsed = read_records_csv("exp_rt1.csv");
  REQUIRE(parsed.size() == r.records.size());
  for (const TrialRecord& rec : parsed) CHECK(rec.signal_norm == -1.0);
  emit_report(parsed, {}, ReportFormat::csv, "exp_rt2.csv");
  CHECK(read_file("exp_rt1.csv") == read_file("exp_rt2.csv"));
}

TEST_CASE("csv reader rejects foreign or mangled files") {
  FileGuard guard;
  guard.paths = {"exp_bad1.csv", "exp_bad2.csv", "exp_bad3.csv"};
  write_file("exp_bad1.csv", "a,b,c\n1,2,3\n");
  CHECK_THROWS_AS((void)read_records_csv("exp_bad1.csv"), std::runtime_error);

  const std::string header =
      "cell_index,trial_index,seed,method,m,n,d,s,s_prime,sigma,"
      "lambda_or_mu_or_eps,error_l2,error_e,objective,bound,"
      "feasibility_margin,converged,wall_time_ms";
  write_file("exp_bad2.csv", header + "\n0,0,1,ads,4,6,6,1,0,0.1\n");
  CHECK_THROWS_AS((void)read_records_csv("exp_bad2.csv"), std::runtime_error);
  write_file("exp_bad3.csv",
             header + "\n0,0,1,ads,4,6,6,1,0,0.1,0.5,0.2,,1,,0.01,yes,\n");
  CHECK_THROWS_AS((void)read_records_csv("exp_bad3.csv"), std::runtime_error);
  CHECK_THROWS_AS((void)read_records_csv("exp_missing.csv"),
                  std::runtime_error);
}

TEST_CASE("aggregation computes medians, success rates, and violations") {
  std::vector<TrialRecord> recs;
  // Cell 0: odd count; errors 1, 3, 2; no successes; two bounds of 5 and 7;
  // one certified trial whose bound holds.
  recs.push_back(make_record(0, 0, 1.0, 1.0));
  recs.back().bound = 5.0;
  recs.back().certified = true;
  recs.push_back(make_record(0, 1, 3.0, 1.0));
  recs.back().bound = 7.0;
  recs.push_back(make_record(0, 2, 2.0, 1.0));
  recs.back().converged = false;
  // Cell 1: even count, one success.
  recs.push_back(make_record(1, 0, 1e-6, 1.0));
  recs.push_back(make_record(1, 1, 0.5, 1.0));
  // Cell 2: a parsed record (unknown norm) plus a certified violation.
  recs.push_back(make_record(2, 0, 2.0, -1.0));
  recs.push_back(make_record(2, 1, 9.0, 1.0));
  recs.back().bound = 4.0;
  recs.back().certified = true;
  // Cell 3: a failed trial (NaN) next to a good one.
  recs.push_back(make_record(3, 0, std::nan(""), 1.0));
  recs.push_back(make_record(3, 1, 2.0, 1.0));

  const std::vector<CellSummary> cells = aggregate_records(recs);
  REQUIRE(cells.size() == 4);

  CHECK(cells[0].trials == 3);
  CHECK(cells[0].converged_count == 2);
  CHECK(cells[0].mean_error == doctest::Approx(2.0));
  CHECK(cells[0].median_error == doctest::Approx(2.0));
  REQUIRE(cells[0].success_rate.has_value());
  CHECK(*cells[0].success_rate == 0.0);
  REQUIRE(cells[0].mean_bound.has_value());
  CHECK(*cells[0].mean_bound == doctest::Approx(6.0));
  CHECK(cells[0].certified_trials == 1);
  CHECK(cells[0].bound_violations == 0);

  CHECK(cells[1].median_error == doctest::Approx(0.5 * (1e-6 + 0.5)));
  REQUIRE(cells[1].success_rate.has_value());
  CHECK(*cells[1].success_rate == doctest::Approx(0.5));

  CHECK_FALSE(cells[2].success_rate.has_value());
  CHECK(cells[2].certified_trials == 1);
  CHECK(cells[2].bound_violations == 1);

  CHECK(cells[3].mean_error == doctest::Approx(2.0));
  CHECK(cells[3].median_error == doctest::Approx(2.0));
}

TEST_CASE("probability probes: floors, caps, and input validation") {
  CHECK_THROWS_AS(
      (void)empirical_probability(ProbeEvent::noise_l2, ProbeParams{}, 100, 1),
      std::invalid_argument);

  ProbeParams l2p;
  l2p.sigma = 1.0;
  l2p.m = 100;
  const ProbeResult l2 =
      empirical_probability(ProbeEvent::noise_l2, l2p, 1000, 5);
  CHECK(l2.reference == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(l2.rate >= l2.reference - 0.01);
  CHECK(l2.rate <= 1.0);

  ProbeParams supp;
  supp.sigma = 1.0;
  supp.d = 30;
  supp.m = 60;
  supp.alpha = 1.0;
  const ProbeResult sup =
      empirical_probability(ProbeEvent::analysis_sup, supp, 1000, 6);
  CHECK(sup.delta1 >= 0.0);
  CHECK(sup.delta1 < 1.0);
  CHECK(sup.reference > 0.98);
  CHECK(sup.rate >= sup.reference - 0.01);

  ProbeParams conc;
  conc.m = 50;
  conc.n = 25;
  conc.delta = 0.5;
  const ProbeResult cc =
      empirical_probability(ProbeEvent::concentration, conc, 1000, 7);
  CHECK(cc.reference ==
        doctest::Approx(3.0 * std::exp(-50.0 * 0.25 / 8.0)).epsilon(1e-12));
  CHECK(cc.rate <= cc.reference);
}

TEST_CASE("plotdata picks the first sweep axis with two values") {
  std::vector<TrialRecord> recs;
  recs.push_back(make_record(0, 0, 0.25, 1.0));  // m = 4
  recs.push_back(make_record(1, 0, 0.5, 1.0));   // m = 5
  FileGuard guard;
  guard.paths = {"exp_plot.txt"};
  emit_report(recs, aggregate_records(recs), ReportFormat::plotdata,
              "exp_plot.txt");
  const std::string text = read_file("exp_plot.txt");
  CHECK(text.find("# median error_l2 as a function of m") !=
        std::string::npos);
  CHECK(text.find("method=ads") != std::string::npos);
  CHECK(text.find("\n4 0.25\n") != std::string::npos);
  CHECK(text.find("\n5 0.5\n") != std::string::npos);
}

TEST_CASE("json reports carry records and aggregates with named columns") {
  std::vector<TrialRecord> recs;
  recs.push_back(make_record(0, 0, 0.25, 1.0));
  recs.push_back(make_record(0, 1, 0.75, 1.0));
  recs[1].bound = 3.0;
  FileGuard guard;
  guard.paths = {"exp_rep.json"};
  emit_report(recs, aggregate_records(recs), ReportFormat::json,
              "exp_rep.json");
  const nlohmann::json j = nlohmann::json::parse(read_file("exp_rep.json"));
  REQUIRE(j.contains("records"));
  REQUIRE(j.contains("aggregate"));
  REQUIRE(j.at("records").size() == 2);
  const nlohmann::json& r0 = j.at("records").at(0);
  CHECK(r0.at("method") == "ads");
  CHECK(r0.at("error_l2").get<double>() == doctest::Approx(0.25));
  CHECK(r0.at("bound").is_null());
  CHECK(j.at("records").at(1).at("bound").get<double>() ==
        doctest::Approx(3.0));
  const nlohmann::json& a0 = j.at("aggregate").at(0);
  CHECK(a0.at("trials").get<std::size_t>() == 2);
  CHECK(a0.at("median_error").get<double>() == doctest::Approx(0.5));
}

TEST_CASE("report format names resolve strictly") {
  CHECK(report_format_from_name("csv") == ReportFormat::csv);
  CHECK(report_format_from_name("json") == ReportFormat::json);
  CHECK(report_format_from_name("plotdata") == ReportFormat::plotdata);
  CHECK_THROWS_AS((void)report_format_from_name("xml"), std::invalid_argument);
}

TEST_CASE("plan outputs are written under the requested directory") {
  ExperimentPlan p = parse_plan(kTinyPlan);
  p.outputs = {{"csv", "records.csv"}, {"json", "report.json"}};
  const ExperimentResult r = run_experiment(p, 1);
  write_plan_outputs(p, r, "exp_outdir");
  FileGuard guard;
  guard.paths = {"exp_outdir/records.csv", "exp_outdir/report.json"};
  const std::string csv = read_file("exp_outdir/records.csv");
  CHECK(csv.rfind("cell_index,", 0) == 0);
  const nlohmann::json j =
      nlohmann::json::parse(read_file("exp_outdir/report.json"));
  CHECK(j.at("records").size() == r.records.size());
}
