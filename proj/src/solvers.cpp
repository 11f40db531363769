#include "fr/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fr {
namespace {

constexpr double kResidualFloor = 1e-12;
constexpr std::uint64_t kNormSeed = 0x5eed;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_blocks(const LinOpPtr& K, const std::vector<FBlock>& blocks) {
  if (!K) throw std::invalid_argument("pdhg_solve: null operator");
  if (blocks.empty())
    throw std::invalid_argument("pdhg_solve: at least one F block required");
  std::size_t total = 0;
  for (const FBlock& b : blocks) {
    if (b.dim == 0) throw std::invalid_argument("pdhg_solve: empty F block");
    if (!b.center.empty() && b.center.size() != b.dim)
      throw std::invalid_argument(
          "pdhg_solve: block center length does not match the block dim");
    if (b.kind == FBlock::Kind::l1 && !(b.weight >= 0.0))
      throw std::invalid_argument("pdhg_solve: l1 weight must be >= 0");
    if ((b.kind == FBlock::Kind::l2_ball ||
         b.kind == FBlock::Kind::linf_ball) &&
        !(b.radius >= 0.0))
      throw std::invalid_argument("pdhg_solve: ball radius must be >= 0");
    total += b.dim;
  }
  if (total != K->out_dim())
    throw std::invalid_argument(
        "pdhg_solve: block dims sum to " + std::to_string(total) +
        " but the operator has " + std::to_string(K->out_dim()) + " rows");
}

double ball_distance(const FBlock& b, const double* w) {
  double dist = 0.0;
  if (b.kind == FBlock::Kind::l2_ball) {
    for (std::size_t i = 0; i < b.dim; ++i) {
      const double r = w[i] - (b.center.empty() ? 0.0 : b.center[i]);
      dist += r * r;
    }
    dist = std::sqrt(dist);
  } else {
    for (std::size_t i = 0; i < b.dim; ++i) {
      const double r = w[i] - (b.center.empty() ? 0.0 : b.center[i]);
      dist = std::max(dist, std::abs(r));
    }
  }
  return dist;
}

// prox of sigma * F_b^* evaluated at v (in place), via the Moreau identity
// where F_b^* has no direct closed form.
void prox_conjugate(const FBlock& b, double sigma, double* v) {
  switch (b.kind) {
    case FBlock::Kind::l1:
      // Conjugate is the indicator of the sup-norm box of radius weight.
      for (std::size_t i = 0; i < b.dim; ++i)
        v[i] = std::clamp(v[i], -b.weight, b.weight);
      return;
    case FBlock::Kind::l2_ball:
    case FBlock::Kind::linf_ball: {
      Vec u(b.dim);
      for (std::size_t i = 0; i < b.dim; ++i) u[i] = v[i] / sigma;
      const Vec pu =
          project_ball(u,
                       b.kind == FBlock::Kind::l2_ball ? BallKind::l2
                                                       : BallKind::linf,
                       b.center, b.radius);
      for (std::size_t i = 0; i < b.dim; ++i) v[i] -= sigma * pu[i];
      return;
    }
    case FBlock::Kind::sq_residual:
      for (std::size_t i = 0; i < b.dim; ++i) {
        const double c = b.center.empty() ? 0.0 : b.center[i];
        v[i] = (v[i] - sigma * c) / (1.0 + sigma);
      }
      return;
  }
}

// F_b^*(y_b), finite everywhere for the kinds used here (for l1 the dual
// iterate is always inside the box after prox_conjugate).
double conjugate_value(const FBlock& b, const double* y) {
  double inner_c = 0.0;
  if (!b.center.empty())
    for (std::size_t i = 0; i < b.dim; ++i) inner_c += b.center[i] * y[i];
  switch (b.kind) {
    case FBlock::Kind::l1:
      return 0.0;
    case FBlock::Kind::l2_ball: {
      double nrm = 0.0;
      for (std::size_t i = 0; i < b.dim; ++i) nrm += y[i] * y[i];
      return inner_c + b.radius * std::sqrt(nrm);
    }
    case FBlock::Kind::linf_ball: {
      double nrm = 0.0;
      for (std::size_t i = 0; i < b.dim; ++i) nrm += std::abs(y[i]);
      return inner_c + b.radius * nrm;
    }
    case FBlock::Kind::sq_residual: {
      double nrm = 0.0;
      for (std::size_t i = 0; i < b.dim; ++i) nrm += y[i] * y[i];
      return 0.5 * nrm + inner_c;
    }
  }
  return 0.0;
}

double smooth_value(const FBlock& b, const double* w) {
  switch (b.kind) {
    case FBlock::Kind::l1: {
      double nrm = 0.0;
      for (std::size_t i = 0; i < b.dim; ++i) nrm += std::abs(w[i]);
      return b.weight * nrm;
    }
    case FBlock::Kind::sq_residual: {
      double nrm = 0.0;
      for (std::size_t i = 0; i < b.dim; ++i) {
        const double r = w[i] - (b.center.empty() ? 0.0 : b.center[i]);
        nrm += r * r;
      }
      return 0.5 * nrm;
    }
    default:
      return 0.0;
  }
}

bool is_indicator(const FBlock& b) {
  return b.kind == FBlock::Kind::l2_ball || b.kind == FBlock::Kind::linf_ball;
}

LinOpPtr analysis_op(const TightFrame& F) {
  return adjoint_op(dense_op(F.D));  // f -> D^* f
}

void check_problem(const RecoveryProblem& p, const char* who) {
  if (p.A.rows != p.y.size())
    throw std::invalid_argument(
        std::string(who) + ": y has length " + std::to_string(p.y.size()) +
        " but the sensing matrix has " + std::to_string(p.A.rows) + " rows");
  if (p.A.cols != p.frame.n())
    throw std::invalid_argument(
        std::string(who) + ": sensing matrix has " + std::to_string(p.A.cols) +
        " columns but the frame lives in dimension " +
        std::to_string(p.frame.n()));
  if (!(p.method.param >= 0.0))
    throw std::invalid_argument(std::string(who) +
                                ": method parameter must be >= 0");
}


}  // namespace

MethodKind base_method(MethodKind k) {
  switch (k) {
    case MethodKind::sabp:
      return MethodKind::abp;
    case MethodKind::sads:
      return MethodKind::ads;
    case MethodKind::salasso:
      return MethodKind::alasso;
    default:
      return k;
  }
}

bool is_separation(MethodKind k) {
  return k == MethodKind::sabp || k == MethodKind::sads ||
         k == MethodKind::salasso;
}

std::string method_name(MethodKind k) {
  switch (k) {
    case MethodKind::abp:
      return "abp";
    case MethodKind::ads:
      return "ads";
    case MethodKind::alasso:
      return "alasso";
    case MethodKind::sabp:
      return "sabp";
    case MethodKind::sads:
      return "sads";
    case MethodKind::salasso:
      return "salasso";
  }
  throw std::logic_error("method_name: unhandled method kind");
}

MethodKind method_from_name(const std::string& name) {
  if (name == "abp") return MethodKind::abp;
  if (name == "ads") return MethodKind::ads;
  if (name == "alasso") return MethodKind::alasso;
  if (name == "sabp") return MethodKind::sabp;
  if (name == "sads") return MethodKind::sads;
  if (name == "salasso") return MethodKind::salasso;
  throw std::invalid_argument(
      "unknown method '" + name +
      "' (expected abp, ads, alasso, sabp, sads, or salasso)");
}

// Phi = [A, I_m].
DenseMatrix augment_sensing(const DenseMatrix& A) {
  DenseMatrix Phi(A.rows, A.cols + A.rows);
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t j = 0; j < A.cols; ++j) Phi.at(i, j) = A.at(i, j);
    Phi.at(i, A.cols + i) = 1.0;
  }
  return Phi;
}

Vec prox_l1(const Vec& v, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("prox_l1: t must be >= 0");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - t;
    out[i] = (mag > 0.0) ? (v[i] < 0.0 ? -mag : mag) : 0.0;
  }
  return out;
}

Vec project_ball(const Vec& v, BallKind kind, const Vec& center,
                 double radius) {
  if (!(radius >= 0.0))
    throw std::invalid_argument("project_ball: radius must be >= 0");
  if (!center.empty() && center.size() != v.size())
    throw std::invalid_argument(
        "project_ball: center length " + std::to_string(center.size()) +
        " does not match the point length " + std::to_string(v.size()));
  Vec out(v.size());
  if (kind == BallKind::linf) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double c = center.empty() ? 0.0 : center[i];
      out[i] = std::clamp(v[i], c - radius, c + radius);
    }
    return out;
  }
  double dist = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = v[i] - (center.empty() ? 0.0 : center[i]);
    dist += r * r;
  }
  dist = std::sqrt(dist);
  const double scale = (dist > radius && dist > 0.0) ? radius / dist : 1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = center.empty() ? 0.0 : center[i];
    out[i] = c + scale * (v[i] - c);
  }
  return out;
}

SolverOutcome pdhg_solve(const LinOpPtr& K, const std::vector<FBlock>& blocks,
                         const SolverConfig& cfg) {
  check_blocks(K, blocks);
  const std::size_t n = K->in_dim();
  const std::size_t r = K->out_dim();

  const double normK = power_iteration_norm(*K, cfg.norm_K_iters, kNormSeed);
  double tau, sigma;
  if (cfg.pdhg_steps) {
    tau = cfg.pdhg_steps->tau;
    sigma = cfg.pdhg_steps->sigma;
    if (!(tau > 0.0 && sigma > 0.0))
      throw std::invalid_argument("pdhg_solve: step sizes must be positive");
    if (tau * sigma * normK * normK > 1.0 + 1e-12)
      throw std::invalid_argument(
          "pdhg_solve: step sizes violate tau*sigma*||K||^2 <= 1 "
          "(tau*sigma*||K||^2 = " +
          std::to_string(tau * sigma * normK * normK) + ")");
  } else {
    tau = sigma = (normK > 0.0) ? 0.99 / (1.01 * normK) : 1.0;
  }

  Vec x(n, 0.0);
  Vec ydual(r, 0.0);
  Vec Kx = op_apply(K, x, ApplyMode::forward);
  Vec Kxbar = Kx;

  SolverOutcome out;
  out.duality_gap = kInf;
  double objective = 0.0;
  double margin = kInf;

  std::size_t it = 0;
  bool converged = false;
  Vec v(r), dres(r), xnew(n);
  while (it < cfg.max_iter && !converged) {
    ++it;
    // Dual ascent on y with the conjugate prox, block by block.
    for (std::size_t i = 0; i < r; ++i) v[i] = ydual[i] + sigma * Kxbar[i];
    std::size_t off = 0;
    for (const FBlock& b : blocks) {
      prox_conjugate(b, sigma, v.data() + off);
      off += b.dim;
    }
    // v now holds y_{k+1}.
    const Vec g = op_apply(K, v, ApplyMode::adjoint);
    for (std::size_t i = 0; i < n; ++i) xnew[i] = x[i] - tau * g[i];
    const Vec Kxnew = op_apply(K, xnew, ApplyMode::forward);

    // (x_k - x_{k+1})/tau = K^T y_{k+1}: stationarity residual of x.
    const double res_p = norm2(g);
    for (std::size_t i = 0; i < r; ++i)
      dres[i] = (ydual[i] - v[i]) / sigma + Kxbar[i] - Kxnew[i];
    const double res_d = norm2(dres);

    // Objective, margin, and gap at (x_{k+1}, y_{k+1}).
    objective = 0.0;
    margin = kInf;
    double fval = 0.0;
    bool feasible = true;
    double fstar = 0.0;
    off = 0;
    for (const FBlock& b : blocks) {
      const double* w = Kxnew.data() + off;
      if (is_indicator(b)) {
        const double slack = b.radius - ball_distance(b, w);
        margin = std::min(margin, slack);
        if (slack < -cfg.tol_primal * (1.0 + b.radius)) feasible = false;
      } else {
        const double val = smooth_value(b, w);
        objective += val;
        fval += val;
      }
      fstar += conjugate_value(b, v.data() + off);
      off += b.dim;
    }
    const double inner = dot(Kxnew, v);
    const double gap = feasible ? (fval + fstar - inner) : kInf;

    const double thr_p =
        std::max(cfg.tol_primal * (1.0 + norm2(xnew)), kResidualFloor);
    const double thr_d =
        std::max(cfg.tol_dual * (1.0 + norm2(v)), kResidualFloor);
    const double thr_gap =
        std::max(cfg.tol_gap * (1.0 + std::abs(objective)), kResidualFloor);
    converged = res_p <= thr_p && res_d <= thr_d && std::isfinite(gap) &&
                gap <= thr_gap;
    out.duality_gap = gap;

    // Over-relaxed shadow point for the next dual step.
    for (std::size_t i = 0; i < r; ++i) Kxbar[i] = 2.0 * Kxnew[i] - Kx[i];
    Kx = Kxnew;
    x = xnew;
    ydual = v;
  }

  out.f_hat = std::move(x);
  out.iterations = it;
  out.objective = objective;
  out.feasibility_margin = margin;  // +inf when no indicator blocks
  out.converged = converged;
  return out;
}

SolverOutcome solve_abp(const RecoveryProblem& p, const SolverConfig& cfg) {
  check_problem(p, "solve_abp");
  const LinOpPtr K = vstack_op(analysis_op(p.frame), dense_op(p.A));
  std::vector<FBlock> blocks(2);
  blocks[0] = {FBlock::Kind::l1, p.frame.d(), 1.0, {}, 0.0};
  blocks[1] = {FBlock::Kind::l2_ball, p.A.rows, 1.0, p.y, p.method.param};
  return pdhg_solve(K, blocks, cfg);
}

SolverOutcome solve_ads(const RecoveryProblem& p, const SolverConfig& cfg) {
  check_problem(p, "solve_ads");
  const LinOpPtr Aop = dense_op(p.A);
  const LinOpPtr analysis = analysis_op(p.frame);
  const LinOpPtr normal = compose_op(adjoint_op(Aop), Aop);  // f -> A^* A f
  const LinOpPtr K = vstack_op(analysis, compose_op(analysis, normal));
  const Vec center = matvec_t(p.frame.D, matvec_t(p.A, p.y));  // D^* A^* y
  std::vector<FBlock> blocks(2);
  blocks[0] = {FBlock::Kind::l1, p.frame.d(), 1.0, {}, 0.0};
  blocks[1] = {FBlock::Kind::linf_ball, p.frame.d(), 1.0, center,
               p.method.param};
  return pdhg_solve(K, blocks, cfg);
}

SolverOutcome solve_alasso(const RecoveryProblem& p, const SolverConfig& cfg) {
  check_problem(p, "solve_alasso");
  const double mu = p.method.param;
  const double rho = cfg.admm_rho;
  if (!(rho > 0.0))
    throw std::invalid_argument("solve_alasso: admm_rho must be positive");
  const std::size_t n = p.A.cols, d = p.frame.d();

  // f-update system: tightness collapses (A^* A + rho D D^*) to A^* A + rho I,
  // so one factorization serves every iteration.
  DenseMatrix Gm = matmul(transpose(p.A), p.A);
  for (std::size_t i = 0; i < n; ++i) Gm.at(i, i) += rho;
  const CholeskyFactor chol(Gm);
  const Vec Aty = matvec_t(p.A, p.y);

  Vec xcoef(d, 0.0), w(d, 0.0), f(n, 0.0), Dtf(d, 0.0);
  std::size_t it = 0;
  bool converged = false;
  while (it < cfg.max_iter && !converged) {
    ++it;
    Vec rhs = Aty;
    {
      Vec xw(d);
      for (std::size_t i = 0; i < d; ++i) xw[i] = xcoef[i] - w[i];
      axpy(rho, matvec(p.frame.D, xw), rhs);
    }
    f = chol.solve(rhs);
    Dtf = matvec_t(p.frame.D, f);

    Vec xold = std::move(xcoef);
    xcoef = prox_l1(vadd(Dtf, w), mu / rho);
    for (std::size_t i = 0; i < d; ++i) w[i] += Dtf[i] - xcoef[i];

    const double res_p = norm2(vsub(Dtf, xcoef));
    const double res_d = rho * norm2(matvec(p.frame.D, vsub(xcoef, xold)));
    const double thr_p =
        std::max(cfg.tol_primal * (1.0 + std::max(norm2(Dtf), norm2(xcoef))),
                 kResidualFloor);
    const double thr_d = std::max(
        cfg.tol_dual * (1.0 + rho * norm2(matvec(p.frame.D, w))),
        kResidualFloor);
    converged = res_p <= thr_p && res_d <= thr_d;
  }

  SolverOutcome out;
  out.f_hat = std::move(f);
  out.iterations = it;
  out.converged = converged;

  const Vec theta = vsub(matvec(p.A, out.f_hat), p.y);
  const Vec ares = matvec_t(p.frame.D, matvec_t(p.A, theta));  // D^* A^* theta
  out.objective = 0.5 * dot(theta, theta) + mu * norm1(Dtf);
  out.feasibility_margin = mu * norm_11(p.frame) - norm_inf(ares);
  // Lower bound from the scaled dual point: theta shrunk until the analysis
  // residual fits in the mu-box is always dual feasible.
  const double sup = norm_inf(ares);
  const double shrink = (sup > mu && sup > 0.0) ? mu / sup : 1.0;
  const double dual_obj = -0.5 * shrink * shrink * dot(theta, theta) -
                          shrink * dot(theta, p.y);
  out.duality_gap = out.objective - dual_obj;
  return out;
}

SolverOutcome solve_alasso_pdhg(const RecoveryProblem& p,
                                const SolverConfig& cfg) {
  check_problem(p, "solve_alasso_pdhg");
  const LinOpPtr K = vstack_op(analysis_op(p.frame), dense_op(p.A));
  std::vector<FBlock> blocks(2);
  blocks[0] = {FBlock::Kind::l1, p.frame.d(), p.method.param, {}, 0.0};
  blocks[1] = {FBlock::Kind::sq_residual, p.A.rows, 1.0, p.y, 0.0};
  SolverOutcome out = pdhg_solve(K, blocks, cfg);
  const Vec theta = vsub(matvec(p.A, out.f_hat), p.y);
  const Vec ares = matvec_t(p.frame.D, matvec_t(p.A, theta));
  out.feasibility_margin =
      p.method.param * norm_11(p.frame) - norm_inf(ares);
  return out;
}

SolverOutcome solve_separation(const RecoveryProblem& p,
                               const SolverConfig& cfg) {
  if (!p.separation)
    throw std::invalid_argument(
        "solve_separation: the problem carries no separation data");
  if (!is_separation(p.method.kind))
    throw std::invalid_argument(
        "solve_separation: method is not a separation variant");
  const std::size_t m = p.A.rows, n = p.A.cols;
  if (p.separation->omega.n() != m)
    throw std::invalid_argument(
        "solve_separation: the corruption frame has " +
        std::to_string(p.separation->omega.n()) + " rows, expected m=" +
        std::to_string(m));

  RecoveryProblem aug;
  aug.A = augment_sensing(p.A);
  aug.frame = block_diag_frame(p.frame, p.separation->omega);
  aug.y = p.y;
  aug.method = {base_method(p.method.kind), p.method.param};

  SolverOutcome out = solve(aug, cfg);
  Vec f_hat(out.f_hat.begin(), out.f_hat.begin() + static_cast<std::ptrdiff_t>(n));
  Vec e_hat(out.f_hat.begin() + static_cast<std::ptrdiff_t>(n), out.f_hat.end());
  out.f_hat = std::move(f_hat);
  out.e_hat = std::move(e_hat);
  return out;
}

SolverOutcome solve(const RecoveryProblem& p, const SolverConfig& cfg) {
  switch (p.method.kind) {
    case MethodKind::abp:
      return solve_abp(p, cfg);
    case MethodKind::ads:
      return solve_ads(p, cfg);
    case MethodKind::alasso:
      return solve_alasso(p, cfg);
    case MethodKind::sabp:
    case MethodKind::sads:
    case MethodKind::salasso:
      return solve_separation(p, cfg);
  }
  throw std::invalid_argument("solve: unknown method kind");
}

VerificationReport verify_outcome(
    const RecoveryProblem& p, const SolverOutcome& out,
    const std::optional<Vec>& f_true,
    const std::optional<std::vector<std::size_t>>& support,
    const SolverConfig& cfg) {
  // Resolve the effective program: separation problems are verified on the
  // augmented instance with u = [f_hat; e_hat].
  DenseMatrix A;
  TightFrame F;
  Vec u = out.f_hat;
  const MethodKind base = base_method(p.method.kind);
  if (is_separation(p.method.kind)) {
    if (!p.separation)
      throw std::invalid_argument(
          "verify_outcome: separation method without separation data");
    if (!out.e_hat)
      throw std::invalid_argument(
          "verify_outcome: separation outcome is missing e_hat");
    A = augment_sensing(p.A);
    F = block_diag_frame(p.frame, p.separation->omega);
    u.insert(u.end(), out.e_hat->begin(), out.e_hat->end());
  } else {
    A = p.A;
    F = p.frame;
  }
  const double param = p.method.param;

  VerificationReport rep;
  const Vec theta = vsub(matvec(A, u), p.y);
  const Vec ares = matvec_t(F.D, matvec_t(A, theta));  // D^* A^* (Au - y)
  switch (base) {
    case MethodKind::abp:
      rep.feasibility_margin = param - norm2(theta);
      break;
    case MethodKind::ads:
      rep.feasibility_margin = param - norm_inf(ares);
      break;
    case MethodKind::alasso:
      rep.feasibility_margin = param * norm_11(F) - norm_inf(ares);
      break;
    default:
      break;
  }

  const Vec Dtu = matvec_t(F.D, u);
  if (f_true) {
    if (f_true->size() != u.size())
      throw std::invalid_argument(
          "verify_outcome: f_true has length " +
          std::to_string(f_true->size()) + ", expected " +
          std::to_string(u.size()) +
          (is_separation(p.method.kind)
               ? " (separation problems verify the stacked [f; e] vector)"
               : ""));
    const Vec coef_true = matvec_t(F.D, *f_true);
    const Vec h = vsub(u, *f_true);
    const Vec coef_h = matvec_t(F.D, h);

    if (base == MethodKind::alasso) {
      const Vec theta_true = vsub(matvec(A, *f_true), p.y);
      rep.objective_excess =
          (0.5 * dot(theta, theta) + param * norm1(Dtu)) -
          (0.5 * dot(theta_true, theta_true) + param * norm1(coef_true));
    } else {
      rep.objective_excess = norm1(Dtu) - norm1(coef_true);
    }

    if (support && (base == MethodKind::ads || base == MethodKind::alasso)) {
      std::vector<bool> in_T(F.d(), false);
      for (std::size_t idx : *support) {
        if (idx >= F.d())
          throw std::invalid_argument(
              "verify_outcome: support index out of range");
        in_T[idx] = true;
      }
      double h_on = 0.0, h_off = 0.0, f_off = 0.0;
      for (std::size_t i = 0; i < F.d(); ++i) {
        if (in_T[i]) {
          h_on += std::abs(coef_h[i]);
        } else {
          h_off += std::abs(coef_h[i]);
          f_off += std::abs(coef_true[i]);
        }
      }
      rep.cone_slack = (base == MethodKind::ads)
                           ? (2.0 * f_off + h_on - h_off)
                           : (3.0 * h_on + 4.0 * f_off - h_off);
    }
  }

  if (base == MethodKind::alasso) {
    // Stationarity: distance of -A^*(Au - y) from mu * D * (admissible
    // subgradients). Signs are pinned where the analysis coefficient is
    // clearly active; the rest range over [-1, 1].
    const Vec g = matvec_t(A, theta);
    if (param == 0.0) {
      rep.stationarity_residual = norm2(g);
    } else {
      const double active_thr = 10.0 * cfg.tol_primal;
      const std::size_t d = F.d();
      Vec v(d, 0.0), lo(d), hi(d);
      for (std::size_t i = 0; i < d; ++i) {
        if (Dtu[i] > active_thr) {
          lo[i] = hi[i] = 1.0;
        } else if (Dtu[i] < -active_thr) {
          lo[i] = hi[i] = -1.0;
        } else {
          lo[i] = -1.0;
          hi[i] = 1.0;
        }
        v[i] = std::clamp(0.0, lo[i], hi[i]);
      }
      // Projected gradient on 1/2 ||g + mu D v||^2; the gradient map has
      // Lipschitz constant mu^2 because the frame is tight (||D||_2 = 1).
      const double step = 1.0 / (param * param);
      for (int iter = 0; iter < 500; ++iter) {
        Vec resid = g;
        axpy(param, matvec(F.D, v), resid);
        const Vec grad = matvec_t(F.D, resid);  // times mu below
        for (std::size_t i = 0; i < d; ++i)
          v[i] = std::clamp(v[i] - step * param * grad[i], lo[i], hi[i]);
      }
      Vec resid = g;
      axpy(param, matvec(F.D, v), resid);
      rep.stationarity_residual = norm2(resid);
    }
  }
  return rep;
}

}  // namespace fr
