#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fr/frame.hpp"
#include "fr/linalg.hpp"

// Proximal building blocks, two first-order engines (a primal-dual hybrid
// gradient method for the constrained programs, ADMM for the penalized one),
// and the recovery front-ends:
//   abp:    min ||D^* f||_1  s.t.  ||A f - y||_2 <= epsilon
//   ads:    min ||D^* f||_1  s.t.  ||D^* A^* (A f - y)||_inf <= lambda
//   alasso: min 1/2 ||A f - y||_2^2 + mu ||D^* f||_1
// plus the signal/noise separation variants (sabp, sads, salasso) obtained by
// running the same programs on Phi = [A, I] and W = diag(D, Omega).

namespace fr {

// Componentwise soft threshold: sign(v_i) * max(|v_i| - t, 0).
Vec prox_l1(const Vec& v, double t);

enum class BallKind { l2, linf };

// Euclidean projection onto the ball of the given kind.
Vec project_ball(const Vec& v, BallKind kind, const Vec& center,
                 double radius);

struct StepSizes {
  double tau = 0.0;
  double sigma = 0.0;
};

struct SolverConfig {
  std::size_t max_iter = 20000;
  double tol_primal = 1e-9;
  double tol_dual = 1e-9;
  double tol_gap = 1e-8;
  // Explicit primal/dual steps must satisfy tau*sigma*||K||^2 <= 1; when
  // absent both default to 0.99 / (1.01 * ||K||).
  std::optional<StepSizes> pdhg_steps;
  double admm_rho = 1.0;
  std::size_t norm_K_iters = 200;  // power-iteration budget for ||K||
};

// One additive piece of F in min_x F(K x), acting on a contiguous row block
// of K. Non-indicator blocks (l1, sq_residual) contribute to the reported
// objective; indicator blocks define the feasibility margin.
struct FBlock {
  enum class Kind {
    l1,          // weight * ||w - 0||_1
    l2_ball,     // indicator of ||w - center||_2 <= radius
    linf_ball,   // indicator of ||w - center||_inf <= radius
    sq_residual  // 1/2 * ||w - center||_2^2
  };
  Kind kind = Kind::l1;
  std::size_t dim = 0;
  double weight = 1.0;  // l1 only
  Vec center;           // balls / sq_residual; empty means the origin
  double radius = 0.0;  // balls only
};

struct SolverOutcome {
  Vec f_hat;
  std::optional<Vec> e_hat;  // separation variants only
  std::size_t iterations = 0;
  double objective = 0.0;
  double duality_gap = 0.0;
  // Program-specific slack: radius minus attained constraint value for the
  // constrained programs (negative = violation); for the penalized program,
  // mu*||D^* D||_{1,1} minus the analysis residual sup-norm.
  double feasibility_margin = 0.0;
  bool converged = false;
};

// min_x F(K x) with F split into row blocks. Block dims must sum to
// K->out_dim(). Deterministic for fixed inputs and config.
SolverOutcome pdhg_solve(const LinOpPtr& K, const std::vector<FBlock>& blocks,
                         const SolverConfig& config);

enum class MethodKind { abp, ads, alasso, sabp, sads, salasso };

// sabp/sads/salasso are the signal-plus-corruption variants of the base
// programs; base_method maps each onto the program it instantiates.
MethodKind base_method(MethodKind kind);
bool is_separation(MethodKind kind);
std::string method_name(MethodKind kind);
MethodKind method_from_name(const std::string& name);

// The stacked sensing matrix [A, I_m] used by the separation variants.
DenseMatrix augment_sensing(const DenseMatrix& A);

struct MethodSpec {
  MethodKind kind = MethodKind::ads;
  double param = 0.0;  // epsilon (abp), lambda (ads), mu (alasso)
};

struct SeparationSpec {
  TightFrame omega;  // m x M frame for the sparse corruption
  std::size_t s_prime = 0;
};

struct RecoveryProblem {
  DenseMatrix A;  // m x n
  TightFrame frame;
  Vec y;
  MethodSpec method;
  std::optional<SeparationSpec> separation;
};

SolverOutcome solve_abp(const RecoveryProblem& p, const SolverConfig& cfg = {});
SolverOutcome solve_ads(const RecoveryProblem& p, const SolverConfig& cfg = {});
// ADMM; the f-update system (A^* A + rho I) is factored once and reused.
SolverOutcome solve_alasso(const RecoveryProblem& p,
                           const SolverConfig& cfg = {});
// Same program through the primal-dual engine; exists to cross-check ADMM.
SolverOutcome solve_alasso_pdhg(const RecoveryProblem& p,
                                const SolverConfig& cfg = {});
// Builds Phi = [A, I], W = diag(D, Omega), runs the base method, splits the
// augmented iterate into (f_hat, e_hat).
SolverOutcome solve_separation(const RecoveryProblem& p,
                               const SolverConfig& cfg = {});
// Dispatch on p.method.kind.
SolverOutcome solve(const RecoveryProblem& p, const SolverConfig& cfg = {});

struct VerificationReport {
  // Program-specific margin, same convention as SolverOutcome.
  double feasibility_margin = 0.0;
  // Cone inequality slack (rhs - lhs), with h = f_hat - f_true and T the
  // caller-supplied support:
  //   sup-constrained: ||D^*_{T^c} h||_1 <= 2||D^*_{T^c} f||_1 + ||D^*_T h||_1
  //   penalized:       ||D^*_{T^c} h||_1 <= 3||D^*_T h||_1 + 4||D^*_{T^c} f||_1
  std::optional<double> cone_slack;
  // Penalized program only: min over admissible subgradients v of
  // ||A^*(A f_hat - y) + mu D v||_2 (projected gradient, 500 iterations).
  std::optional<double> stationarity_residual;
  // objective(f_hat) - objective(f_true), when f_true was supplied.
  std::optional<double> objective_excess;
};

// Diagnostic re-check of an outcome against its problem. For separation
// problems the augmented program is verified with u = [f_hat; e_hat].
VerificationReport verify_outcome(
    const RecoveryProblem& p, const SolverOutcome& out,
    const std::optional<Vec>& f_true = std::nullopt,
    const std::optional<std::vector<std::size_t>>& support = std::nullopt,
    const SolverConfig& cfg = {});

}  // namespace fr
