#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fr/frame.hpp"
#include "fr/noise.hpp"
#include "fr/sensing.hpp"
#include "fr/signals.hpp"
#include "fr/solvers.hpp"

// Seeded end-to-end trials (frame -> sensing -> signal -> noise -> solve ->
// verify), sweep execution over parameter grids, Monte Carlo probability
// probes, and report emission. Every trial is a pure function of
// (plan, cell_index, trial_index), so results are independent of worker
// count and execution order.

namespace fr {

struct FramePlan {
  FrameKind kind = FrameKind::random_onb;
  std::size_t n = 0, d = 0;
  std::string path;  // when set, the frame is read from this file instead
};

struct MethodPlan {
  MethodKind kind = MethodKind::ads;
  // paper_formula resolves the parameter per cell: lambda = 2 sigma
  // sqrt(2 ln d), mu = 4 sigma sqrt(2 ln d), epsilon = the l2 noise bound
  // (separation variants use the augmented coefficient dimension d + M).
  bool paper_formula = true;
  double value = 0.0;  // explicit parameter when paper_formula is false
};

struct SweepGrid {
  std::vector<std::size_t> m;        // required, >= 1 entries
  std::vector<std::size_t> s;        // required, >= 1 entries
  std::vector<double> sigma = {0.0};
  std::vector<std::size_t> s_prime = {0};
};

struct ExperimentPlan {
  FramePlan frame;
  SensingKind sensing_kind = SensingKind::gaussian;
  std::string sensing_path;  // from_file sensing
  SignalSpec signal;         // per-cell s overrides signal.s
  NoiseKind noise_kind = NoiseKind::gaussian;
  // Corruption frame for sparse/composite noise and separation methods;
  // square (M = m) unless omega_d says otherwise.
  FrameKind omega_kind = FrameKind::identity;
  std::size_t omega_d = 0;  // 0 = match m
  double noise_amplitude = 1.0;
  double noise_epsilon = 0.0;  // bounded noise radius
  std::vector<MethodPlan> methods;
  SweepGrid sweep;
  std::size_t trials_per_cell = 1;
  std::uint64_t master_seed = 0;
  std::map<std::string, std::string> outputs;  // format name -> path
  SolverConfig solver;
  // Timing is off by default so reruns are byte-identical; switching it on
  // fills the wall_time_ms column with measured values.
  bool include_timing = false;
};

ExperimentPlan parse_plan(const std::string& json_text);
ExperimentPlan load_plan(const std::string& path);

struct TrialRecord {
  std::size_t cell_index = 0;
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  std::string method;
  std::size_t m = 0, n = 0, d = 0, s = 0, s_prime = 0;
  double sigma = 0.0;
  double param = 0.0;  // lambda, mu, or epsilon as resolved for this trial
  double error_l2 = 0.0;
  std::optional<double> error_e;  // separation methods only
  double objective = 0.0;
  std::optional<double> bound;  // absent when the bound's hypothesis fails
  double feasibility_margin = 0.0;
  bool converged = false;
  std::optional<double> wall_time_ms;
  // In-memory companions (never serialized): inputs to aggregation.
  double signal_norm = 0.0;
  bool certified = false;  // exact delta + hypothesis + realized noise event
};

struct CellSummary {
  std::size_t cell_index = 0;
  std::string method;
  std::size_t m = 0, s = 0, s_prime = 0;
  double sigma = 0.0;
  std::size_t trials = 0;
  std::size_t converged_count = 0;
  double mean_error = 0.0;
  double median_error = 0.0;
  // error_l2 <= 1e-4 * ||f||_2; absent when aggregating parsed records,
  // which do not carry the signal norm.
  std::optional<double> success_rate;
  std::optional<double> mean_bound;    // over trials that have a bound
  std::size_t certified_trials = 0;
  std::size_t bound_violations = 0;    // among certified trials; must be 0
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // ordered by (cell_index, trial_index)
  std::vector<CellSummary> cells;
};

// methods x m x s x sigma x s_prime, s_prime fastest.
std::size_t cell_count(const ExperimentPlan& plan);

TrialRecord run_trial(const ExperimentPlan& plan, std::size_t cell_index,
                      std::size_t trial_index);

// workers = 0: take FR_WORKERS from the environment, else run single-threaded.
ExperimentResult run_experiment(const ExperimentPlan& plan,
                                std::size_t workers = 0);

// Monte Carlo frequency of the three quantified probability statements.
enum class ProbeEvent {
  analysis_sup,   // ||D^* A^* z||_inf within its threshold (success floor)
  noise_l2,       // ||z||_2 within the l2 noise bound (success floor)
  concentration   // squared-norm deviation of [A, I] (violation cap)
};

struct ProbeParams {
  double sigma = 1.0;    // analysis_sup, noise_l2
  std::size_t d = 100;   // analysis_sup coefficient dimension (ONB, so n = d)
  std::size_t m = 100;
  std::size_t n = 50;    // concentration: width of the Gaussian block
  double alpha = 1.0;    // analysis_sup tail exponent
  double delta = 0.5;    // concentration deviation level
};

struct ProbeResult {
  double rate = 0.0;
  double reference = 0.0;  // success floor or violation cap
  double delta1 = 0.0;     // analysis_sup: certified order-1 constant used
};

ProbeResult empirical_probability(ProbeEvent event, const ProbeParams& params,
                                  std::size_t trials, std::uint64_t seed);

enum class ReportFormat { csv, json, plotdata };

ReportFormat report_format_from_name(const std::string& name);

// csv: the fixed 18-column schema; json: the same fields per record, plus
// cell summaries when provided; plotdata: (x, y = median error) blocks over
// the first sweep axis with >= 2 distinct values, one block per method and
// combination of the remaining axes.
void emit_report(const std::vector<TrialRecord>& records,
                 const std::vector<CellSummary>& cells, ReportFormat format,
                 const std::string& path);

// Strict inverse of the csv emitter; rejects unknown headers.
std::vector<TrialRecord> read_records_csv(const std::string& path);

// Rebuild per-cell summaries from records (success/certification fields are
// filled only when the records carry their in-memory companions).
std::vector<CellSummary> aggregate_records(
    const std::vector<TrialRecord>& records);

// Write every entry of plan.outputs under out_dir.
void write_plan_outputs(const ExperimentPlan& plan,
                        const ExperimentResult& result,
                        const std::string& out_dir);

}  // namespace fr
