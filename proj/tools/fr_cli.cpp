// Command-line front end: frame/sensing generation, restricted-isometry
// certification, recovery solves, closed-form bounds, Monte Carlo probability
// probes, experiment plans, and report conversion.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fr/bounds.hpp"
#include "fr/experiment.hpp"
#include "fr/frame.hpp"
#include "fr/market.hpp"
#include "fr/noise.hpp"
#include "fr/sensing.hpp"
#include "fr/solvers.hpp"

namespace {

using fr::DenseMatrix;
using fr::TightFrame;
using fr::Vec;
using ordered_json = nlohmann::ordered_json;

std::vector<double> parse_double_csv(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(',', start);
    const std::string tok = pos == std::string::npos
                                ? text.substr(start)
                                : text.substr(start, pos - start);
    if (!tok.empty()) {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size())
        throw std::invalid_argument("cannot parse number '" + tok + "'");
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void print_json(const ordered_json& o) { std::cout << o.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery with tight frames: generators, solvers, "
               "bounds, and experiment harness"};
  app.require_subcommand(1);

  // ---------------------------------------------------------------- frame
  struct {
    std::string kind;
    std::size_t n = 0, d = 0;
    std::uint64_t seed = 0;
    std::string out;
  } fg;
  CLI::App* frame_cmd = app.add_subcommand("frame", "Tight-frame utilities");
  frame_cmd->require_subcommand(1);
  CLI::App* frame_gen =
      frame_cmd->add_subcommand("gen", "Generate a tight frame (Matrix Market)");
  frame_gen->add_option("--kind", fg.kind,
                        "identity | random_onb | union_of_onb | random_parseval")
      ->required();
  frame_gen->add_option("--n", fg.n, "signal dimension")->required();
  frame_gen->add_option("--d", fg.d, "number of frame vectors")->required();
  frame_gen->add_option("--seed", fg.seed, "RNG seed (default 0)");
  frame_gen->add_option("--out", fg.out, "output .mtx path")->required();
  frame_gen->callback([&] {
    const TightFrame F =
        fr::build_frame(fr::frame_kind_from_name(fg.kind), fg.n, fg.d, fg.seed);
    fr::write_matrix_market(fg.out, F.D);
    ordered_json o;
    o["kind"] = F.kind;
    o["n"] = F.n();
    o["d"] = F.d();
    o["tightness_residual"] = F.tightness_residual;
    o["out"] = fg.out;
    print_json(o);
  });

  // ---------------------------------------------------------------- sense
  struct {
    std::string kind = "gaussian";
    std::size_t m = 0, n = 0;
    std::uint64_t seed = 0;
    std::string out;
  } sg;
  CLI::App* sense_cmd = app.add_subcommand("sense", "Sensing-matrix utilities");
  sense_cmd->require_subcommand(1);
  CLI::App* sense_gen =
      sense_cmd->add_subcommand("gen", "Draw a random sensing matrix");
  sense_gen->add_option("--kind", sg.kind, "gaussian | bernoulli")
      ->check(CLI::IsMember({"gaussian", "bernoulli"}));
  sense_gen->add_option("--m", sg.m, "rows (measurements)")->required();
  sense_gen->add_option("--n", sg.n, "columns (signal dimension)")->required();
  sense_gen->add_option("--seed", sg.seed, "RNG seed (default 0)");
  sense_gen->add_option("--out", sg.out, "output .mtx path")->required();
  sense_gen->callback([&] {
    fr::SensingSpec spec;
    spec.kind = sg.kind == "gaussian" ? fr::SensingKind::gaussian
                                      : fr::SensingKind::bernoulli;
    spec.m = sg.m;
    spec.n = sg.n;
    spec.seed = sg.seed;
    const DenseMatrix A = fr::draw_sensing(spec);
    fr::write_matrix_market(sg.out, A);
    ordered_json o;
    o["kind"] = sg.kind;
    o["m"] = A.rows;
    o["n"] = A.cols;
    o["out"] = sg.out;
    print_json(o);
  });

  // ----------------------------------------------------------------- drip
  struct {
    std::string A, D, mode = "exact";
    std::size_t s = 1, trials = 200;
    std::uint64_t seed = 0;
  } dr;
  CLI::App* drip_cmd = app.add_subcommand(
      "drip", "Restricted-isometry constant of A over frame-sparse directions");
  drip_cmd->add_option("--A", dr.A, "sensing matrix .mtx")->required();
  drip_cmd->add_option("--D", dr.D, "tight frame .mtx")->required();
  drip_cmd->add_option("--s", dr.s, "support size")->required();
  drip_cmd->add_option("--mode", dr.mode, "exact | mc")
      ->check(CLI::IsMember({"exact", "mc"}));
  drip_cmd->add_option("--trials", dr.trials, "mc mode: sampled supports");
  drip_cmd->add_option("--seed", dr.seed, "mc mode: RNG seed");
  drip_cmd->callback([&] {
    const DenseMatrix A = fr::read_matrix_market(dr.A);
    const TightFrame F = fr::frame_from_file(dr.D);
    const fr::DRipReport rep =
        dr.mode == "exact" ? fr::drip_exact(A, F, dr.s)
                           : fr::drip_monte_carlo(A, F, dr.s, dr.trials, dr.seed);
    std::cout << fr::drip_report_json(rep) << '\n';
  });

  // -------------------------------------------------------------- recover
  struct {
    std::string method, A, D, y, omega, out, out_e;
    double lambda = 0.0, mu = 0.0, eps = 0.0, sigma = 0.0;
    bool paper = false;
    std::size_t s_prime = 0;
    double tol = -1.0, tol_gap = -1.0;
    std::size_t max_iter = 0;
  } rv;
  CLI::App* rec_cmd = app.add_subcommand("recover", "Solve a recovery program");
  rec_cmd->add_option("--method", rv.method,
                      "abp | ads | alasso | sabp | sads | salasso")
      ->required()
      ->check(CLI::IsMember({"abp", "ads", "alasso", "sabp", "sads", "salasso"}));
  rec_cmd->add_option("--A", rv.A, "sensing matrix .mtx")->required();
  rec_cmd->add_option("--D", rv.D, "tight frame .mtx")->required();
  rec_cmd->add_option("--y", rv.y, "observations .mtx (vector)")->required();
  rec_cmd->add_option("--omega", rv.omega,
                      "corruption frame .mtx (separation methods; default "
                      "identity)");
  CLI::Option* opt_lambda =
      rec_cmd->add_option("--lambda", rv.lambda, "sup-constraint level (ads/sads)");
  CLI::Option* opt_mu =
      rec_cmd->add_option("--mu", rv.mu, "l1 penalty weight (alasso/salasso)");
  CLI::Option* opt_eps =
      rec_cmd->add_option("--eps", rv.eps, "residual ball radius (abp/sabp)");
  CLI::Option* opt_paper = rec_cmd->add_flag(
      "--paper-formula", rv.paper,
      "derive the parameter from --sigma via the published noise thresholds");
  CLI::Option* opt_sigma =
      rec_cmd->add_option("--sigma", rv.sigma, "noise level for --paper-formula");
  rec_cmd->add_option("--s-prime", rv.s_prime,
                      "corruption sparsity (separation verification)");
  rec_cmd->add_option("--tol", rv.tol, "primal/dual tolerance override");
  rec_cmd->add_option("--tol-gap", rv.tol_gap, "duality-gap tolerance override");
  rec_cmd->add_option("--max-iter", rv.max_iter, "iteration cap override");
  rec_cmd->add_option("--out", rv.out, "recovered signal .mtx path")->required();
  rec_cmd->add_option("--out-e", rv.out_e,
                      "recovered corruption .mtx path (separation methods)");
  rec_cmd->callback([&] {
    const fr::MethodKind kind = fr::method_from_name(rv.method);
    const fr::MethodKind base = fr::base_method(kind);
    const bool sep = fr::is_separation(kind);
    const DenseMatrix A = fr::read_matrix_market(rv.A);
    const TightFrame F = fr::frame_from_file(rv.D);
    const Vec y = fr::read_vector_market(rv.y);

    std::optional<TightFrame> omega;
    if (!rv.omega.empty()) {
      if (!sep)
        throw std::invalid_argument(
            "--omega applies only to the separation methods (sabp/sads/"
            "salasso)");
      omega = fr::frame_from_file(rv.omega);
    } else if (sep) {
      omega = fr::build_frame(fr::FrameKind::identity, A.rows, A.rows, 0);
    }

    const int given = static_cast<int>(opt_lambda->count() > 0) +
                      static_cast<int>(opt_mu->count() > 0) +
                      static_cast<int>(opt_eps->count() > 0) +
                      static_cast<int>(opt_paper->count() > 0);
    if (given != 1)
      throw std::invalid_argument(
          "provide exactly one of --lambda, --mu, --eps, or --paper-formula");
    double param = 0.0;
    if (rv.paper) {
      if (opt_sigma->count() == 0)
        throw std::invalid_argument("--paper-formula needs --sigma");
      const std::size_t d_eff = F.d() + (sep ? omega->d() : 0);
      if (base == fr::MethodKind::ads)
        param = fr::ads_lambda(rv.sigma, d_eff);
      else if (base == fr::MethodKind::alasso)
        param = fr::alasso_mu(rv.sigma, d_eff);
      else
        param = fr::l2_noise_bound(rv.sigma, A.rows).value;
    } else if (opt_lambda->count() > 0) {
      if (base != fr::MethodKind::ads)
        throw std::invalid_argument("--lambda applies to ads/sads only");
      param = rv.lambda;
    } else if (opt_mu->count() > 0) {
      if (base != fr::MethodKind::alasso)
        throw std::invalid_argument("--mu applies to alasso/salasso only");
      param = rv.mu;
    } else {
      if (base != fr::MethodKind::abp)
        throw std::invalid_argument("--eps applies to abp/sabp only");
      param = rv.eps;
    }

    fr::SolverConfig cfg;
    if (rv.max_iter > 0) cfg.max_iter = rv.max_iter;
    if (rv.tol >= 0.0) {
      cfg.tol_primal = rv.tol;
      cfg.tol_dual = rv.tol;
    }
    if (rv.tol_gap >= 0.0) cfg.tol_gap = rv.tol_gap;

    fr::RecoveryProblem prob{A, F, y, fr::MethodSpec{kind, param},
                             std::nullopt};
    if (sep) prob.separation = fr::SeparationSpec{*omega, rv.s_prime};
    const fr::SolverOutcome out = fr::solve(prob, cfg);
    fr::write_vector_market(rv.out, out.f_hat);
    if (out.e_hat && !rv.out_e.empty())
      fr::write_vector_market(rv.out_e, *out.e_hat);

    ordered_json o;
    o["method"] = rv.method;
    o["lambda_or_mu_or_eps"] = param;
    o["iterations"] = out.iterations;
    o["objective"] = out.objective;
    o["duality_gap"] = out.duality_gap;
    o["feasibility_margin"] = out.feasibility_margin;
    o["converged"] = out.converged;
    o["out"] = rv.out;
    if (out.e_hat && !rv.out_e.empty()) o["out_e"] = rv.out_e;
    print_json(o);
  });

  // ---------------------------------------------------------------- bound
  struct {
    std::string which, variant = "sads", mode = "expectation";
    std::string tails_csv, phi;
    double delta = 0.0, param = 0.0, norm11 = 1.0, sigma = 1.0;
    double R = 1.0, p = 0.5, C0 = 1.0, c_tail = 1.0, c_noise = 1.0, tail = 0.0;
    std::size_t s = 1, s_prime = 0, d = 2;
  } bo;
  CLI::App* bound_cmd =
      app.add_subcommand("bound", "Evaluate a closed-form bound (JSON)");
  bound_cmd->add_option("--which", bo.which,
                        "ads | alasso | abp | separation | minimax | powerlaw")
      ->required()
      ->check(CLI::IsMember(
          {"ads", "alasso", "abp", "separation", "minimax", "powerlaw"}));
  bound_cmd->add_option("--delta", bo.delta,
                        "restricted-isometry constant at the relevant order");
  bound_cmd->add_option("--s", bo.s, "sparsity level");
  bound_cmd->add_option("--s-prime", bo.s_prime, "corruption sparsity");
  bound_cmd->add_option("--param", bo.param, "lambda, mu, or epsilon");
  bound_cmd->add_option("--norm11", bo.norm11, "||D^* D||_{1,1} (alasso)");
  bound_cmd->add_option("--tails", bo.tails_csv,
                        "comma-separated tails[k], k = 1..s (default zeros)");
  bound_cmd->add_option("--sigma", bo.sigma, "noise level (minimax/powerlaw)");
  bound_cmd->add_option("--mode", bo.mode, "minimax: expectation | high_probability")
      ->check(CLI::IsMember({"expectation", "high_probability"}));
  bound_cmd->add_option("--Phi", bo.phi,
                        "minimax: design matrix .mtx for the exact trace risk");
  bound_cmd->add_option("--variant", bo.variant, "separation: sads | salasso | sabp")
      ->check(CLI::IsMember({"sads", "salasso", "sabp"}));
  bound_cmd->add_option("--c-tail", bo.c_tail, "abp/sabp tail constant");
  bound_cmd->add_option("--c-noise", bo.c_noise, "abp/sabp noise constant");
  bound_cmd->add_option("--tail", bo.tail, "abp: l1 tail mass at order s");
  bound_cmd->add_option("--R", bo.R, "powerlaw: coefficient radius");
  bound_cmd->add_option("--p", bo.p, "powerlaw: decay exponent in (0, 1]");
  bound_cmd->add_option("--d", bo.d, "powerlaw: coefficient dimension");
  bound_cmd->add_option("--C0", bo.C0, "powerlaw: leading constant");
  bound_cmd->callback([&] {
    fr::BoundInputs in;
    in.delta = bo.delta;
    in.s = bo.s;
    in.s_prime = bo.s_prime;
    in.param = bo.param;
    in.norm11 = bo.norm11;
    in.tails = bo.tails_csv.empty() ? Vec(bo.s, 0.0)
                                    : parse_double_csv(bo.tails_csv);
    if (bo.which == "ads") {
      std::cout << fr::bound_report_json(fr::ads_bound(in)) << '\n';
    } else if (bo.which == "alasso") {
      std::cout << fr::bound_report_json(fr::alasso_bound(in)) << '\n';
    } else if (bo.which == "abp") {
      const double v =
          fr::abp_bound(bo.tail, bo.s, bo.param, bo.c_tail, bo.c_noise);
      ordered_json o;
      o["bound"] = v;
      o["tail"] = bo.tail;
      o["s"] = bo.s;
      o["epsilon"] = bo.param;
      o["c_tail"] = bo.c_tail;
      o["c_noise"] = bo.c_noise;
      print_json(o);
    } else if (bo.which == "separation") {
      const fr::SeparationVariant var =
          bo.variant == "sads"
              ? fr::SeparationVariant::sads
              : (bo.variant == "salasso" ? fr::SeparationVariant::salasso
                                         : fr::SeparationVariant::sabp);
      std::cout << fr::bound_report_json(
                       fr::separation_bound(var, in, bo.c_tail, bo.c_noise))
                << '\n';
    } else if (bo.which == "minimax") {
      ordered_json o;
      if (!bo.phi.empty()) {
        const DenseMatrix Phi = fr::read_matrix_market(bo.phi);
        const fr::TraceRisk tr = fr::minimax_trace(Phi, bo.sigma);
        o["value"] = tr.value;
        o["unbounded"] = tr.unbounded;
      } else {
        const fr::MinimaxLower ml = fr::minimax_lower(
            bo.s, bo.sigma, bo.delta,
            bo.mode == "high_probability" ? fr::MinimaxMode::high_probability
                                          : fr::MinimaxMode::expectation);
        o["value"] = ml.value;
        o["probability_floor"] = opt_json(ml.probability_floor);
      }
      print_json(o);
    } else {  // powerlaw
      std::cout << fr::bound_report_json(
                       fr::power_law_risk(bo.R, bo.p, bo.sigma, bo.d, bo.s,
                                          bo.C0))
                << '\n';
    }
  });

  // ---------------------------------------------------------------- probe
  struct {
    std::string event;
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    double sigma = 1.0, alpha = 1.0, delta = 0.5;
    std::size_t d = 100, m = 100, n = 50;
  } pr;
  CLI::App* probe_cmd = app.add_subcommand(
      "probe", "Monte Carlo frequency of a quantified probability statement");
  probe_cmd->add_option("--event", pr.event, "lemma1 | gn | lemma6")
      ->required()
      ->check(CLI::IsMember({"lemma1", "gn", "lemma6"}));
  probe_cmd->add_option("--trials", pr.trials, "trial count (>= 1000)")
      ->required();
  probe_cmd->add_option("--seed", pr.seed, "RNG seed")->required();
  probe_cmd->add_option("--sigma", pr.sigma, "noise level (lemma1/gn)");
  probe_cmd->add_option("--d", pr.d, "coefficient dimension (lemma1)");
  probe_cmd->add_option("--m", pr.m, "measurement count");
  probe_cmd->add_option("--n", pr.n, "Gaussian block width (lemma6)");
  probe_cmd->add_option("--alpha", pr.alpha, "tail exponent (lemma1)");
  probe_cmd->add_option("--delta", pr.delta, "deviation level (lemma6)");
  probe_cmd->callback([&] {
    fr::ProbeEvent ev = fr::ProbeEvent::concentration;
    if (pr.event == "lemma1") ev = fr::ProbeEvent::analysis_sup;
    else if (pr.event == "gn") ev = fr::ProbeEvent::noise_l2;
    fr::ProbeParams pp;
    pp.sigma = pr.sigma;
    pp.d = pr.d;
    pp.m = pr.m;
    pp.n = pr.n;
    pp.alpha = pr.alpha;
    pp.delta = pr.delta;
    const fr::ProbeResult res =
        fr::empirical_probability(ev, pp, pr.trials, pr.seed);
    ordered_json o;
    o["event"] = pr.event;
    o["trials"] = pr.trials;
    o["seed"] = pr.seed;
    o["rate"] = res.rate;
    o["reference"] = res.reference;
    o["reference_kind"] =
        ev == fr::ProbeEvent::concentration ? "violation_cap" : "success_floor";
    if (ev == fr::ProbeEvent::analysis_sup) o["delta1"] = res.delta1;
    print_json(o);
  });

  // ----------------------------------------------------------- experiment
  struct {
    std::string plan;
    std::string out_dir = ".";
    std::size_t workers = 0;
    bool timing = false;
  } ex;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Experiment plans");
  exp_cmd->require_subcommand(1);
  CLI::App* exp_run = exp_cmd->add_subcommand("run", "Execute a plan");
  exp_run->add_option("plan", ex.plan, "plan JSON file")->required();
  exp_run->add_option("--out-dir", ex.out_dir,
                      "directory for the plan's outputs (default .)");
  exp_run->add_option("--workers", ex.workers,
                      "worker threads (0 = FR_WORKERS env, else 1)");
  exp_run->add_flag("--timing", ex.timing,
                    "fill wall_time_ms (timed reruns are not byte-identical)");
  exp_run->callback([&] {
    fr::ExperimentPlan plan = fr::load_plan(ex.plan);
    if (ex.timing) plan.include_timing = true;
    if (plan.outputs.empty()) plan.outputs["csv"] = "records.csv";
    const fr::ExperimentResult result = fr::run_experiment(plan, ex.workers);
    fr::write_plan_outputs(plan, result, ex.out_dir);
    ordered_json o;
    o["cells"] = fr::cell_count(plan);
    o["trials_per_cell"] = plan.trials_per_cell;
    o["records"] = result.records.size();
    ordered_json outs;
    for (const auto& [key, rel] : plan.outputs)
      outs[key] = ex.out_dir.empty() ? rel : ex.out_dir + "/" + rel;
    o["outputs"] = outs;
    print_json(o);
  });

  // --------------------------------------------------------------- report
  struct {
    std::string records, format, out;
  } rp;
  CLI::App* rep_cmd =
      app.add_subcommand("report", "Convert a records csv to another format");
  rep_cmd->add_option("--records", rp.records, "records csv produced by a run")
      ->required();
  rep_cmd->add_option("--format", rp.format, "csv | json | plotdata")
      ->required()
      ->check(CLI::IsMember({"csv", "json", "plotdata"}));
  rep_cmd->add_option("--out", rp.out, "output path")->required();
  rep_cmd->callback([&] {
    const std::vector<fr::TrialRecord> records =
        fr::read_records_csv(rp.records);
    const std::vector<fr::CellSummary> cells = fr::aggregate_records(records);
    fr::emit_report(records, cells, fr::report_format_from_name(rp.format),
                    rp.out);
    ordered_json o;
    o["records"] = records.size();
    o["out"] = rp.out;
    print_json(o);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
