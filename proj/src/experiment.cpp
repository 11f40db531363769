#include "fr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fr/bounds.hpp"
#include "fr/rng.hpp"
#include "json.hpp"

namespace fr {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kCsvHeader =
    "cell_index,trial_index,seed,method,m,n,d,s,s_prime,sigma,"
    "lambda_or_mu_or_eps,error_l2,error_e,objective,bound,feasibility_margin,"
    "converged,wall_time_ms";

// Largest support count for which the bound column uses the exact
// restricted-isometry certificate; beyond it a 200-sample Monte Carlo lower
// bound stands in (informational only, never marked certified).
constexpr std::size_t kExactBoundBudget = 20000;
constexpr std::size_t kBoundMcTrials = 200;

// Sub-seed tags hashed with the trial seed, one per independent draw.
constexpr std::uint64_t kSeedFrame = 0;
constexpr std::uint64_t kSeedSensing = 1;
constexpr std::uint64_t kSeedSignal = 2;
constexpr std::uint64_t kSeedNoise = 3;
constexpr std::uint64_t kSeedOmega = 4;
constexpr std::uint64_t kSeedBoundMc = 5;

FrameKind frame_kind_from(const std::string& s, const std::string& who) {
  if (s == "identity") return FrameKind::identity;
  if (s == "random_onb") return FrameKind::random_onb;
  if (s == "union_of_onb") return FrameKind::union_of_onb;
  if (s == "random_parseval") return FrameKind::random_parseval;
  throw std::invalid_argument(
      who + ": unknown frame kind '" + s +
      "' (expected identity, random_onb, union_of_onb, or random_parseval)");
}

SensingKind sensing_kind_from(const std::string& s) {
  if (s == "gaussian") return SensingKind::gaussian;
  if (s == "bernoulli") return SensingKind::bernoulli;
  if (s == "from_file") return SensingKind::from_file;
  throw std::invalid_argument(
      "plan: unknown sensing kind '" + s +
      "' (expected gaussian, bernoulli, or from_file)");
}

SignalModel signal_model_from(const std::string& s) {
  if (s == "exact_analysis_sparse") return SignalModel::exact_analysis_sparse;
  if (s == "synthesis_sparse") return SignalModel::synthesis_sparse;
  if (s == "power_law") return SignalModel::power_law;
  throw std::invalid_argument(
      "plan: unknown signal model '" + s +
      "' (expected exact_analysis_sparse, synthesis_sparse, or power_law)");
}

AmplitudeLaw amplitude_law_from(const std::string& s) {
  if (s == "unit") return AmplitudeLaw::unit;
  if (s == "rademacher") return AmplitudeLaw::rademacher;
  if (s == "gaussian") return AmplitudeLaw::gaussian;
  throw std::invalid_argument("plan: unknown amplitude law '" + s +
                              "' (expected unit, rademacher, or gaussian)");
}

NoiseKind noise_kind_from(const std::string& s) {
  if (s == "gaussian") return NoiseKind::gaussian;
  if (s == "bounded") return NoiseKind::bounded;
  if (s == "sparse") return NoiseKind::sparse;
  if (s == "composite") return NoiseKind::composite;
  throw std::invalid_argument(
      "plan: unknown noise kind '" + s +
      "' (expected gaussian, bounded, sparse, or composite)");
}

void expect_keys(const json& obj, const std::string& ctx,
                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw std::invalid_argument("plan: '" + ctx + "' must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("plan: unknown key '" + it.key() + "' in " +
                                  ctx);
  }
}

std::size_t get_size(const json& v, const std::string& what,
                     long long min_allowed) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw std::invalid_argument("plan: " + what + " must be an integer");
  const long long x = v.get<long long>();
  if (x < min_allowed)
    throw std::invalid_argument("plan: " + what + " must be >= " +
                                std::to_string(min_allowed) + ", got " +
                                std::to_string(x));
  return static_cast<std::size_t>(x);
}

double get_nonneg(const json& v, const std::string& what) {
  if (!v.is_number())
    throw std::invalid_argument("plan: " + what + " must be a number");
  const double x = v.get<double>();
  if (!(x >= 0.0))
    throw std::invalid_argument("plan: " + what + " must be >= 0");
  return x;
}

std::vector<std::size_t> get_size_list(const json& v, const std::string& what,
                                       long long min_allowed) {
  if (!v.is_array() || v.empty())
    throw std::invalid_argument("plan: " + what +
                                " must be a non-empty array");
  std::vector<std::size_t> out;
  out.reserve(v.size());
  for (const json& e : v) out.push_back(get_size(e, what + " entry", min_allowed));
  return out;
}

std::vector<double> get_double_list(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty())
    throw std::invalid_argument("plan: " + what +
                                " must be a non-empty array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) out.push_back(get_nonneg(e, what + " entry"));
  return out;
}

void validate_plan(const ExperimentPlan& p) {
  if (p.methods.empty())
    throw std::invalid_argument("experiment plan lists no methods");
  if (p.sweep.m.empty() || p.sweep.s.empty() || p.sweep.sigma.empty() ||
      p.sweep.s_prime.empty())
    throw std::invalid_argument(
        "experiment sweep must have at least one value on every axis "
        "(m, s, sigma, s_prime)");
  if (p.trials_per_cell == 0)
    throw std::invalid_argument("trials_per_cell must be >= 1");
  if (p.frame.path.empty() && (p.frame.n == 0 || p.frame.d == 0))
    throw std::invalid_argument(
        "experiment frame needs positive dimensions (or a file path)");
}

struct CellPoint {
  std::size_t method_idx = 0;
  std::size_t m = 0, s = 0, s_prime = 0;
  double sigma = 0.0;
};

CellPoint resolve_cell(const ExperimentPlan& p, std::size_t idx) {
  const std::size_t total = cell_count(p);
  if (idx >= total)
    throw std::out_of_range("cell index " + std::to_string(idx) +
                            " out of range (plan has " + std::to_string(total) +
                            " cells)");
  CellPoint pt;
  std::size_t i = idx;
  pt.s_prime = p.sweep.s_prime[i % p.sweep.s_prime.size()];
  i /= p.sweep.s_prime.size();
  pt.sigma = p.sweep.sigma[i % p.sweep.sigma.size()];
  i /= p.sweep.sigma.size();
  pt.s = p.sweep.s[i % p.sweep.s.size()];
  i /= p.sweep.s.size();
  pt.m = p.sweep.m[i % p.sweep.m.size()];
  i /= p.sweep.m.size();
  pt.method_idx = i;
  return pt;
}

double resolve_param(const MethodPlan& mp, double sigma, std::size_t d_eff,
                     std::size_t m) {
  if (!mp.paper_formula) return mp.value;
  switch (base_method(mp.kind)) {
    case MethodKind::ads:
      return ads_lambda(sigma, d_eff);
    case MethodKind::alasso:
      return alasso_mu(sigma, d_eff);
    default:
      return l2_noise_bound(sigma, m).value;
  }
}

std::size_t workers_from_env() {
  const char* env = std::getenv("FR_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (end == env || *end != '\0' || v == 0)
    throw std::invalid_argument("FR_WORKERS must be a positive integer, got '" +
                                std::string(env) + "'");
  return static_cast<std::size_t>(v);
}

TrialRecord failed_record(const ExperimentPlan& plan, std::size_t cell,
                          std::size_t trial) {
  TrialRecord rec;
  rec.cell_index = cell;
  rec.trial_index = trial;
  rec.seed = hash64({plan.master_seed, cell, trial});
  rec.n = plan.frame.n;
  rec.d = plan.frame.d;
  try {
    const CellPoint pt = resolve_cell(plan, cell);
    rec.method = method_name(plan.methods[pt.method_idx].kind);
    rec.m = pt.m;
    rec.s = pt.s;
    rec.s_prime = pt.s_prime;
    rec.sigma = pt.sigma;
  } catch (const std::exception&) {
    // Leave whatever could not be resolved at its defaults.
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.error_l2 = nan;
  rec.objective = nan;
  rec.feasibility_margin = nan;
  rec.converged = false;
  rec.signal_norm = -1.0;  // companion unknown
  return rec;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string();
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kCsvHeader << '\n';
  for (const TrialRecord& r : records) {
    out << r.cell_index << ',' << r.trial_index << ',' << r.seed << ','
        << r.method << ',' << r.m << ',' << r.n << ',' << r.d << ',' << r.s
        << ',' << r.s_prime << ',' << fmt_double(r.sigma) << ','
        << fmt_double(r.param) << ',' << fmt_double(r.error_l2) << ','
        << fmt_opt(r.error_e) << ',' << fmt_double(r.objective) << ','
        << fmt_opt(r.bound) << ',' << fmt_double(r.feasibility_margin) << ','
        << (r.converged ? '1' : '0') << ',' << fmt_opt(r.wall_time_ms) << '\n';
  }
}

ordered_json record_json(const TrialRecord& r) {
  ordered_json o;
  o["cell_index"] = r.cell_index;
  o["trial_index"] = r.trial_index;
  o["seed"] = r.seed;
  o["method"] = r.method;
  o["m"] = r.m;
  o["n"] = r.n;
  o["d"] = r.d;
  o["s"] = r.s;
  o["s_prime"] = r.s_prime;
  o["sigma"] = r.sigma;
  o["lambda_or_mu_or_eps"] = r.param;
  o["error_l2"] = r.error_l2;
  o["error_e"] = r.error_e ? ordered_json(*r.error_e) : ordered_json(nullptr);
  o["objective"] = r.objective;
  o["bound"] = r.bound ? ordered_json(*r.bound) : ordered_json(nullptr);
  o["feasibility_margin"] = r.feasibility_margin;
  o["converged"] = r.converged;
  o["wall_time_ms"] =
      r.wall_time_ms ? ordered_json(*r.wall_time_ms) : ordered_json(nullptr);
  return o;
}

ordered_json cell_json(const CellSummary& c) {
  ordered_json o;
  o["cell_index"] = c.cell_index;
  o["method"] = c.method;
  o["m"] = c.m;
  o["s"] = c.s;
  o["s_prime"] = c.s_prime;
  o["sigma"] = c.sigma;
  o["trials"] = c.trials;
  o["converged"] = c.converged_count;
  o["mean_error"] = c.mean_error;
  o["median_error"] = c.median_error;
  o["success_rate"] =
      c.success_rate ? ordered_json(*c.success_rate) : ordered_json(nullptr);
  o["mean_bound"] =
      c.mean_bound ? ordered_json(*c.mean_bound) : ordered_json(nullptr);
  o["certified"] = c.certified_trials;
  o["bound_violations"] = c.bound_violations;
  return o;
}

constexpr const char* kAxisNames[4] = {"m", "s", "sigma", "s_prime"};

double axis_value(const CellSummary& c, int axis) {
  switch (axis) {
    case 0:
      return static_cast<double>(c.m);
    case 1:
      return static_cast<double>(c.s);
    case 2:
      return c.sigma;
    default:
      return static_cast<double>(c.s_prime);
  }
}

std::string axis_label(const CellSummary& c, int axis) {
  switch (axis) {
    case 0:
      return std::to_string(c.m);
    case 1:
      return std::to_string(c.s);
    case 2:
      return fmt_double(c.sigma);
    default:
      return std::to_string(c.s_prime);
  }
}

void write_plotdata(std::ostream& out, const std::vector<CellSummary>& cells) {
  if (cells.empty()) {
    out << "# no cells\n";
    return;
  }
  std::set<double> distinct[4];
  for (const CellSummary& c : cells)
    for (int a = 0; a < 4; ++a) distinct[a].insert(axis_value(c, a));
  int primary = 0;
  for (int a = 0; a < 4; ++a)
    if (distinct[a].size() >= 2) {
      primary = a;
      break;
    }
  out << "# median error_l2 as a function of " << kAxisNames[primary] << '\n';
  struct Point {
    double x;
    std::string label;
    double y;
  };
  std::map<std::string, std::vector<Point>> groups;
  for (const CellSummary& c : cells) {
    std::string key = "method=" + c.method;
    for (int a = 0; a < 4; ++a) {
      if (a == primary) continue;
      key += ' ';
      key += kAxisNames[a];
      key += '=';
      key += axis_label(c, a);
    }
    groups[key].push_back(
        {axis_value(c, primary), axis_label(c, primary), c.median_error});
  }
  for (auto& [key, pts] : groups) {
    std::sort(pts.begin(), pts.end(),
              [](const Point& a, const Point& b) { return a.x < b.x; });
    out << "# " << key << '\n';
    for (const Point& p : pts)
      out << p.label << ' ' << fmt_double(p.y) << '\n';
    out << '\n';
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void csv_fail(std::size_t lineno, const std::string& what) {
  throw std::runtime_error("records csv line " + std::to_string(lineno) +
                           ": " + what);
}

double parse_double_field(const std::string& s, std::size_t lineno,
                          const char* col) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    csv_fail(lineno, std::string("cannot parse ") + col + " value '" + s + "'");
  return v;
}

std::uint64_t parse_u64_field(const std::string& s, std::size_t lineno,
                              const char* col) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    csv_fail(lineno, std::string("cannot parse ") + col + " value '" + s + "'");
  return v;
}

}  // namespace

ExperimentPlan parse_plan(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("plan: invalid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("plan: top level must be a JSON object");
  expect_keys(j, "plan",
              {"frame", "sensing", "signal", "noise", "methods", "sweep",
               "trials_per_cell", "master_seed", "outputs", "solver",
               "include_timing"});
  ExperimentPlan p;

  if (!j.contains("frame"))
    throw std::invalid_argument("plan: missing required key 'frame'");
  {
    const json& jf = j.at("frame");
    expect_keys(jf, "frame", {"kind", "n", "d", "path"});
    if (jf.contains("path")) {
      p.frame.path = jf.at("path").get<std::string>();
      if (p.frame.path.empty())
        throw std::invalid_argument("plan: frame path must not be empty");
    } else {
      if (!jf.contains("kind") || !jf.contains("n") || !jf.contains("d"))
        throw std::invalid_argument(
            "plan: frame needs kind, n, and d (or a file path)");
      p.frame.kind =
          frame_kind_from(jf.at("kind").get<std::string>(), "plan frame");
      p.frame.n = get_size(jf.at("n"), "frame n", 1);
      p.frame.d = get_size(jf.at("d"), "frame d", 1);
    }
  }

  if (j.contains("sensing")) {
    const json& js = j.at("sensing");
    expect_keys(js, "sensing", {"kind", "path"});
    if (js.contains("kind"))
      p.sensing_kind = sensing_kind_from(js.at("kind").get<std::string>());
    if (p.sensing_kind == SensingKind::from_file) {
      if (!js.contains("path"))
        throw std::invalid_argument(
            "plan: sensing kind from_file needs a path");
      p.sensing_path = js.at("path").get<std::string>();
    }
  }

  if (j.contains("signal")) {
    const json& js = j.at("signal");
    expect_keys(js, "signal", {"model", "R", "p", "amplitude_law"});
    if (js.contains("model"))
      p.signal.model = signal_model_from(js.at("model").get<std::string>());
    if (js.contains("R")) p.signal.R = get_nonneg(js.at("R"), "signal R");
    if (js.contains("p")) {
      p.signal.p = js.at("p").get<double>();
      if (!(p.signal.p > 0.0 && p.signal.p <= 1.0))
        throw std::invalid_argument("plan: signal p must lie in (0, 1]");
    }
    if (js.contains("amplitude_law"))
      p.signal.amplitude_law =
          amplitude_law_from(js.at("amplitude_law").get<std::string>());
  }

  if (j.contains("noise")) {
    const json& jn = j.at("noise");
    expect_keys(jn, "noise",
                {"kind", "epsilon", "amplitude", "omega_kind", "omega_d"});
    if (jn.contains("kind"))
      p.noise_kind = noise_kind_from(jn.at("kind").get<std::string>());
    if (jn.contains("epsilon"))
      p.noise_epsilon = get_nonneg(jn.at("epsilon"), "noise epsilon");
    if (jn.contains("amplitude"))
      p.noise_amplitude = get_nonneg(jn.at("amplitude"), "noise amplitude");
    if (jn.contains("omega_kind"))
      p.omega_kind =
          frame_kind_from(jn.at("omega_kind").get<std::string>(), "plan noise");
    if (jn.contains("omega_d"))
      p.omega_d = get_size(jn.at("omega_d"), "noise omega_d", 1);
  }

  if (!j.contains("methods"))
    throw std::invalid_argument("plan: missing required key 'methods'");
  {
    const json& jm = j.at("methods");
    if (!jm.is_array() || jm.empty())
      throw std::invalid_argument("plan: methods must be a non-empty array");
    for (const json& e : jm) {
      expect_keys(e, "methods[]", {"kind", "paper_formula", "value"});
      if (!e.contains("kind"))
        throw std::invalid_argument("plan: every method needs a kind");
      MethodPlan mp;
      mp.kind = method_from_name(e.at("kind").get<std::string>());
      const bool has_value = e.contains("value");
      const bool pf = e.value("paper_formula", !has_value);
      if (pf && has_value)
        throw std::invalid_argument(
            "plan: method '" + method_name(mp.kind) +
            "' sets both paper_formula and value; choose one");
      if (!pf && !has_value)
        throw std::invalid_argument(
            "plan: method '" + method_name(mp.kind) +
            "' needs either paper_formula=true or an explicit value");
      mp.paper_formula = pf;
      if (has_value) mp.value = get_nonneg(e.at("value"), "method value");
      p.methods.push_back(mp);
    }
  }

  if (!j.contains("sweep"))
    throw std::invalid_argument("plan: missing required key 'sweep'");
  {
    const json& jw = j.at("sweep");
    expect_keys(jw, "sweep", {"m", "s", "sigma", "s_prime"});
    if (!jw.contains("m") || !jw.contains("s"))
      throw std::invalid_argument("plan: sweep needs at least m and s axes");
    p.sweep.m = get_size_list(jw.at("m"), "sweep m", 1);
    p.sweep.s = get_size_list(jw.at("s"), "sweep s", 1);
    if (jw.contains("sigma"))
      p.sweep.sigma = get_double_list(jw.at("sigma"), "sweep sigma");
    if (jw.contains("s_prime"))
      p.sweep.s_prime = get_size_list(jw.at("s_prime"), "sweep s_prime", 0);
  }

  if (!j.contains("trials_per_cell"))
    throw std::invalid_argument("plan: missing required key 'trials_per_cell'");
  p.trials_per_cell = get_size(j.at("trials_per_cell"), "trials_per_cell", 1);
  if (j.contains("master_seed")) {
    const json& ms = j.at("master_seed");
    if (!ms.is_number_integer() && !ms.is_number_unsigned())
      throw std::invalid_argument("plan: master_seed must be an integer");
    p.master_seed = ms.get<std::uint64_t>();
  }

  if (j.contains("outputs")) {
    const json& jo = j.at("outputs");
    expect_keys(jo, "outputs", {"csv", "json", "plotdata"});
    for (auto it = jo.begin(); it != jo.end(); ++it)
      p.outputs[it.key()] = it.value().get<std::string>();
  }

  if (j.contains("solver")) {
    const json& js = j.at("solver");
    expect_keys(js, "solver",
                {"max_iter", "tol_primal", "tol_dual", "tol_gap", "admm_rho"});
    if (js.contains("max_iter"))
      p.solver.max_iter = get_size(js.at("max_iter"), "solver max_iter", 1);
    if (js.contains("tol_primal"))
      p.solver.tol_primal = get_nonneg(js.at("tol_primal"), "solver tol_primal");
    if (js.contains("tol_dual"))
      p.solver.tol_dual = get_nonneg(js.at("tol_dual"), "solver tol_dual");
    if (js.contains("tol_gap"))
      p.solver.tol_gap = get_nonneg(js.at("tol_gap"), "solver tol_gap");
    if (js.contains("admm_rho")) {
      p.solver.admm_rho = js.at("admm_rho").get<double>();
      if (!(p.solver.admm_rho > 0.0))
        throw std::invalid_argument("plan: solver admm_rho must be > 0");
    }
  }

  p.include_timing = j.value("include_timing", false);
  validate_plan(p);
  return p;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open plan file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

std::size_t cell_count(const ExperimentPlan& plan) {
  validate_plan(plan);
  return plan.methods.size() * plan.sweep.m.size() * plan.sweep.s.size() *
         plan.sweep.sigma.size() * plan.sweep.s_prime.size();
}

TrialRecord run_trial(const ExperimentPlan& plan, std::size_t cell_index,
                      std::size_t trial_index) {
  if (trial_index >= plan.trials_per_cell)
    throw std::out_of_range("trial index " + std::to_string(trial_index) +
                            " out of range (plan has " +
                            std::to_string(plan.trials_per_cell) +
                            " trials per cell)");
  const CellPoint pt = resolve_cell(plan, cell_index);
  const MethodPlan& mp = plan.methods[pt.method_idx];
  const bool sep = is_separation(mp.kind);
  const MethodKind base = base_method(mp.kind);

  TrialRecord rec;
  rec.cell_index = cell_index;
  rec.trial_index = trial_index;
  const std::uint64_t trial_seed =
      hash64({plan.master_seed, cell_index, trial_index});
  rec.seed = trial_seed;
  rec.method = method_name(mp.kind);
  rec.m = pt.m;
  rec.s = pt.s;
  rec.s_prime = pt.s_prime;
  rec.sigma = pt.sigma;

  const TightFrame frame =
      plan.frame.path.empty()
          ? build_frame(plan.frame.kind, plan.frame.n, plan.frame.d,
                        hash64({trial_seed, kSeedFrame}))
          : frame_from_file(plan.frame.path);
  rec.n = frame.n();
  rec.d = frame.d();

  SensingSpec sspec;
  sspec.kind = plan.sensing_kind;
  sspec.m = pt.m;
  sspec.n = frame.n();
  sspec.seed = hash64({trial_seed, kSeedSensing});
  sspec.path = plan.sensing_path;
  const DenseMatrix A = draw_sensing(sspec);
  if (A.rows != pt.m)
    throw std::invalid_argument(
        "sensing file provides " + std::to_string(A.rows) +
        " rows but the sweep cell asks for m = " + std::to_string(pt.m));

  SignalSpec sig_spec = plan.signal;
  sig_spec.s = pt.s;
  const SignalDraw sig =
      generate_signal(sig_spec, frame, hash64({trial_seed, kSeedSignal}));
  rec.signal_norm = norm2(sig.f);

  const bool noise_uses_omega =
      plan.noise_kind == NoiseKind::sparse ||
      plan.noise_kind == NoiseKind::composite;
  std::optional<TightFrame> omega;
  if (sep || noise_uses_omega) {
    const std::size_t od = plan.omega_d ? plan.omega_d : pt.m;
    omega = build_frame(plan.omega_kind, pt.m, od,
                        hash64({trial_seed, kSeedOmega}));
  }

  NoiseSpec nspec;
  nspec.kind = plan.noise_kind;
  nspec.sigma = pt.sigma;
  nspec.epsilon = plan.noise_epsilon;
  if (noise_uses_omega) nspec.omega = omega;
  nspec.s_prime = pt.s_prime;
  nspec.amplitude = plan.noise_amplitude;
  const NoiseDraw nz =
      draw_noise(nspec, pt.m, hash64({trial_seed, kSeedNoise}));

  Vec y = matvec(A, sig.f);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += nz.z[i] + nz.e[i];

  const std::size_t d_eff = frame.d() + (sep ? omega->d() : 0);
  const double param = resolve_param(mp, pt.sigma, d_eff, pt.m);
  rec.param = param;

  RecoveryProblem prob{A, frame, y, MethodSpec{mp.kind, param}, std::nullopt};
  if (sep) prob.separation = SeparationSpec{*omega, pt.s_prime};

  SolverOutcome out;
  if (plan.include_timing) {
    const auto t0 = std::chrono::steady_clock::now();
    out = solve(prob, plan.solver);
    const auto t1 = std::chrono::steady_clock::now();
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
  } else {
    out = solve(prob, plan.solver);
  }

  rec.error_l2 = norm2(vsub(out.f_hat, sig.f));
  if (sep && out.e_hat) rec.error_e = norm2(vsub(*out.e_hat, nz.e));
  rec.objective = out.objective;
  rec.feasibility_margin = out.feasibility_margin;
  rec.converged = out.converged;

  if (base != MethodKind::abp) {
    const DenseMatrix A_eff = sep ? augment_sensing(A) : A;
    const TightFrame frame_eff =
        sep ? block_diag_frame(frame, *omega) : frame;
    const std::size_t order = std::min<std::size_t>(
        3 * (pt.s + (sep ? pt.s_prime : 0)), frame_eff.d());
    double delta = 0.0;
    bool exact_cert = false;
    if (binomial_count(frame_eff.d(), order, kExactBoundBudget) <=
        kExactBoundBudget) {
      const DRipReport dr = drip_exact(A_eff, frame_eff, order);
      delta = dr.delta;
      exact_cert = dr.is_certificate;
    } else {
      delta = drip_monte_carlo(A_eff, frame_eff, order, kBoundMcTrials,
                               hash64({trial_seed, kSeedBoundMc}))
                  .delta;
    }
    const double cap = (base == MethodKind::ads) ? 0.5 : 0.25;
    if (delta < cap) {
      BoundInputs bi;
      bi.delta = delta;
      bi.s = pt.s;
      bi.s_prime = sep ? pt.s_prime : 0;
      bi.param = param;
      bi.norm11 = (base == MethodKind::alasso) ? norm_11(frame) : 1.0;
      bi.tails = sig.achieved_tails;
      BoundReport br;
      if (!sep)
        br = (base == MethodKind::ads) ? ads_bound(bi) : alasso_bound(bi);
      else
        br = separation_bound(base == MethodKind::ads
                                  ? SeparationVariant::sads
                                  : SeparationVariant::salasso,
                              bi);
      rec.bound = br.bound;
      // Certification additionally needs the realized correlated-noise event
      // behind the error bound. For the separation variants the sparse
      // corruption is part of the stacked signal, so only the dense part
      // counts as noise there.
      Vec noise_vec = nz.z;
      if (!sep)
        for (std::size_t i = 0; i < noise_vec.size(); ++i)
          noise_vec[i] += nz.e[i];
      const double sup =
          norm_inf(frame_analysis(frame_eff, matvec_t(A_eff, noise_vec)));
      const double gate = (base == MethodKind::ads) ? param : 0.5 * param;
      rec.certified = exact_cert && sup <= gate;
    }
  }
  return rec;
}

ExperimentResult run_experiment(const ExperimentPlan& plan,
                                std::size_t workers) {
  const std::size_t cells = cell_count(plan);
  const std::size_t trials = plan.trials_per_cell;
  const std::size_t total = cells * trials;
  std::size_t w = workers ? workers : workers_from_env();
  if (w > total) w = total == 0 ? 1 : total;

  ExperimentResult result;
  result.records.resize(total);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const std::size_t c = i / trials;
      const std::size_t t = i % trials;
      try {
        result.records[i] = run_trial(plan, c, t);
      } catch (const std::exception&) {
        result.records[i] = failed_record(plan, c, t);
      }
    }
  };
  if (w <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t i = 0; i < w; ++i) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  result.cells = aggregate_records(result.records);
  return result;
}

std::vector<CellSummary> aggregate_records(
    const std::vector<TrialRecord>& records) {
  std::map<std::size_t, std::vector<const TrialRecord*>> by_cell;
  for (const TrialRecord& r : records) by_cell[r.cell_index].push_back(&r);
  std::vector<CellSummary> cells;
  cells.reserve(by_cell.size());
  for (const auto& [idx, rs] : by_cell) {
    CellSummary c;
    c.cell_index = idx;
    const TrialRecord& head = *rs.front();
    c.method = head.method;
    c.m = head.m;
    c.s = head.s;
    c.s_prime = head.s_prime;
    c.sigma = head.sigma;
    c.trials = rs.size();
    std::vector<double> errs;
    errs.reserve(rs.size());
    double esum = 0.0, bsum = 0.0;
    std::size_t bcount = 0, succ = 0;
    bool norms_known = true;
    for (const TrialRecord* r : rs) {
      if (r->converged) ++c.converged_count;
      if (std::isfinite(r->error_l2)) {
        errs.push_back(r->error_l2);
        esum += r->error_l2;
      }
      if (r->signal_norm < 0.0)
        norms_known = false;
      else if (r->error_l2 <= 1e-4 * r->signal_norm)
        ++succ;
      if (r->bound) {
        bsum += *r->bound;
        ++bcount;
      }
      if (r->certified) {
        ++c.certified_trials;
        if (r->bound && r->error_l2 > *r->bound) ++c.bound_violations;
      }
    }
    if (errs.empty()) {
      c.mean_error = std::numeric_limits<double>::quiet_NaN();
      c.median_error = c.mean_error;
    } else {
      c.mean_error = esum / static_cast<double>(errs.size());
      std::sort(errs.begin(), errs.end());
      const std::size_t k = errs.size();
      c.median_error = (k % 2 == 1) ? errs[k / 2]
                                    : 0.5 * (errs[k / 2 - 1] + errs[k / 2]);
    }
    if (norms_known)
      c.success_rate = static_cast<double>(succ) / static_cast<double>(c.trials);
    if (bcount > 0) c.mean_bound = bsum / static_cast<double>(bcount);
    cells.push_back(std::move(c));
  }
  return cells;
}

ProbeResult empirical_probability(ProbeEvent event, const ProbeParams& params,
                                  std::size_t trials, std::uint64_t seed) {
  if (trials < 1000)
    throw std::invalid_argument(
        "empirical probabilities need at least 1000 trials, got " +
        std::to_string(trials));
  ProbeResult out;
  switch (event) {
    case ProbeEvent::analysis_sup: {
      if (params.d < 2)
        throw std::invalid_argument(
            "analysis_sup probe needs coefficient dimension d >= 2");
      if (params.m == 0)
        throw std::invalid_argument("analysis_sup probe needs m >= 1");
      if (!(params.sigma >= 0.0))
        throw std::invalid_argument("analysis_sup probe needs sigma >= 0");
      const TightFrame F = build_frame(FrameKind::identity, params.d, params.d,
                                       /*seed=*/0);
      SensingSpec sspec;
      sspec.kind = SensingKind::gaussian;
      sspec.m = params.m;
      sspec.n = params.d;
      sspec.seed = hash64({seed, 1});
      const DenseMatrix A = draw_sensing(sspec);
      out.delta1 = drip_exact(A, F, 1).delta;
      const TailBound thr =
          analysis_sup_threshold(params.sigma, params.d, params.alpha,
                                 out.delta1);
      std::size_t ok = 0;
      Vec z(params.m);
      for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(hash64({seed, 0, t}));
        for (double& v : z) v = params.sigma * rng.gaussian();
        const Vec corr = frame_analysis(F, matvec_t(A, z));
        if (norm_inf(corr) <= thr.value) ++ok;
      }
      out.rate = static_cast<double>(ok) / static_cast<double>(trials);
      out.reference = thr.probability_floor;
      return out;
    }
    case ProbeEvent::noise_l2: {
      const TailBound b = l2_noise_bound(params.sigma, params.m);
      std::size_t ok = 0;
      Vec z(params.m);
      for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(hash64({seed, 0, t}));
        for (double& v : z) v = params.sigma * rng.gaussian();
        if (norm2(z) <= b.value) ++ok;
      }
      out.rate = static_cast<double>(ok) / static_cast<double>(trials);
      out.reference = b.probability_floor;
      return out;
    }
    case ProbeEvent::concentration: {
      ProbeSpec ps;
      ps.m = params.m;
      ps.n = params.n;
      out.rate = concentration_probe(ps, params.delta, trials, seed);
      out.reference =
          3.0 * std::exp(-static_cast<double>(params.m) * params.delta *
                         params.delta / 8.0);
      return out;
    }
  }
  throw std::logic_error("empirical_probability: unhandled event");
}

void emit_report(const std::vector<TrialRecord>& records,
                 const std::vector<CellSummary>& cells, ReportFormat format,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report to '" + path + "'");
  switch (format) {
    case ReportFormat::csv:
      write_csv(out, records);
      break;
    case ReportFormat::json: {
      ordered_json root;
      ordered_json recs = ordered_json::array();
      for (const TrialRecord& r : records) recs.push_back(record_json(r));
      root["records"] = std::move(recs);
      ordered_json aggs = ordered_json::array();
      for (const CellSummary& c : cells) aggs.push_back(cell_json(c));
      root["aggregate"] = std::move(aggs);
      out << root.dump(2) << '\n';
      break;
    }
    case ReportFormat::plotdata: {
      if (cells.empty())
        write_plotdata(out, aggregate_records(records));
      else
        write_plotdata(out, cells);
      break;
    }
  }
  out.flush();
  if (!out)
    throw std::runtime_error("failed while writing report to '" + path + "'");
}

std::vector<TrialRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open records file '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("records file '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw std::runtime_error(
        "records file '" + path +
        "' does not start with the expected 18-column header");
  std::vector<TrialRecord> recs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 18)
      csv_fail(lineno, "expected 18 fields, found " + std::to_string(f.size()));
    TrialRecord r;
    r.cell_index =
        static_cast<std::size_t>(parse_u64_field(f[0], lineno, "cell_index"));
    r.trial_index =
        static_cast<std::size_t>(parse_u64_field(f[1], lineno, "trial_index"));
    r.seed = parse_u64_field(f[2], lineno, "seed");
    r.method = f[3];
    r.m = static_cast<std::size_t>(parse_u64_field(f[4], lineno, "m"));
    r.n = static_cast<std::size_t>(parse_u64_field(f[5], lineno, "n"));
    r.d = static_cast<std::size_t>(parse_u64_field(f[6], lineno, "d"));
    r.s = static_cast<std::size_t>(parse_u64_field(f[7], lineno, "s"));
    r.s_prime =
        static_cast<std::size_t>(parse_u64_field(f[8], lineno, "s_prime"));
    r.sigma = parse_double_field(f[9], lineno, "sigma");
    r.param = parse_double_field(f[10], lineno, "lambda_or_mu_or_eps");
    r.error_l2 = parse_double_field(f[11], lineno, "error_l2");
    if (!f[12].empty())
      r.error_e = parse_double_field(f[12], lineno, "error_e");
    r.objective = parse_double_field(f[13], lineno, "objective");
    if (!f[14].empty()) r.bound = parse_double_field(f[14], lineno, "bound");
    r.feasibility_margin =
        parse_double_field(f[15], lineno, "feasibility_margin");
    if (f[16] == "1")
      r.converged = true;
    else if (f[16] == "0")
      r.converged = false;
    else
      csv_fail(lineno, "converged must be 0 or 1, got '" + f[16] + "'");
    if (!f[17].empty())
      r.wall_time_ms = parse_double_field(f[17], lineno, "wall_time_ms");
    r.signal_norm = -1.0;  // in-memory companions are not serialized
    recs.push_back(std::move(r));
  }
  return recs;
}

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  if (name == "plotdata") return ReportFormat::plotdata;
  throw std::invalid_argument("unknown report format '" + name +
                              "' (expected csv, json, or plotdata)");
}

void write_plan_outputs(const ExperimentPlan& plan,
                        const ExperimentResult& result,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  for (const auto& [key, rel] : plan.outputs) {
    const ReportFormat fmt = report_format_from_name(key);
    const fs::path full =
        out_dir.empty() ? fs::path(rel) : fs::path(out_dir) / rel;
    if (full.has_parent_path()) fs::create_directories(full.parent_path());
    emit_report(result.records, result.cells, fmt, full.string());
  }
}

}  // namespace fr
