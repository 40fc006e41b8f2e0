#pragma once

#include <string>

#include "ddpc/types.hpp"

namespace ddpc {

// Strictly convex quadratic program
//   min 1/2 z'Hz + f'z
//   s.t. A_eq z = b_eq,  lb <= A_in z <= ub.
// Rows of A_in are two-sided; use +/-infinity for one-sided rows.
struct QpProblem {
  Matrix H;
  Vector f;
  Matrix A_eq;  // may have zero rows
  Vector b_eq;
  Matrix A_in;  // may have zero rows
  Vector lb, ub;

  int num_vars() const { return static_cast<int>(H.rows()); }
  int num_eq() const { return static_cast<int>(A_eq.rows()); }
  int num_in() const { return static_cast<int>(A_in.rows()); }
  void validate() const;  // throws std::invalid_argument
};

enum class QpStatus { kSolved, kMaxIterations, kInfeasible, kNonConvex };
const char* to_string(QpStatus status);

struct QpSettings {
  double feas_tol = 1e-6;    // primal residual, absolute + relative
  double opt_tol = 1e-6;     // dual residual, absolute + relative
  int max_iterations = 4000;
  double rho0 = 0.1;         // initial ADMM penalty
  double sigma = 1e-6;       // proximal regularization
  double alpha = 1.6;        // over-relaxation
  bool adaptive_rho = true;
  int rho_adapt_interval = 50;
  int scaling_iters = 10;    // Ruiz equilibration sweeps; 0 disables
  bool polish = true;
  double polish_reg = 1e-9;
  bool check_convexity = true;
  double nonconvex_tol = -1e-9;  // smallest admissible eigenvalue of H
  double infeas_tol = 1e-8;
};

struct KktResiduals {
  double primal = 0.0;  // max violation of Az in [l, u]
  double dual = 0.0;    // ||Hz + f + A'y||_inf
};

struct QpResult {
  Vector z;
  Vector y_eq;   // multipliers for equality rows
  Vector y_in;   // multipliers for inequality rows (sign-consistent with active side)
  QpStatus status = QpStatus::kMaxIterations;
  KktResiduals kkt;
  int iterations = 0;
  double solve_seconds = 0.0;
  bool polished = false;
};

// Dense OSQP-style operator-splitting solver. setup() factors the problem
// once; update_* calls reuse the factorization, which is what the receding
// horizon loop needs since its cost Hessian and constraint coefficients are
// fixed and only vectors change round to round. The iterate sequence is a
// deterministic function of the problem and settings.
class QpSolver {
 public:
  QpSolver() = default;

  void setup(const QpProblem& problem, const QpSettings& settings = {});
  bool is_setup() const { return n_ > 0; }

  void update_linear_cost(const Vector& f);
  void update_bounds(const Vector& b_eq, const Vector& lb, const Vector& ub);

  // Next solve starts from this unscaled primal/dual guess. Solves after
  // the first one warm start from the previous solution automatically.
  void warm_start(const Vector& z, const Vector& y_eq, const Vector& y_in);
  void cold_start();

  QpResult solve();

  static QpResult solve_once(const QpProblem& problem, const QpSettings& settings = {});

 private:
  void apply_scaling(const QpProblem& problem);
  void factor_kkt();
  void compute_unscaled_residuals(KktResiduals* res, double* eps_primal, double* eps_dual) const;
  bool primal_infeasible(const Vector& dy) const;
  void polish(QpResult* result) const;

  QpSettings settings_;
  int n_ = 0, m_eq_ = 0, m_in_ = 0, m_ = 0;

  // Scaled problem data (P = cDHD, q = cDf, A = E [A_eq; A_in] D, bounds El, Eu).
  Matrix P_, A_;
  Vector q_, l_, u_;
  Vector d_scale_, e_scale_;  // diagonals of D and E
  double c_scale_ = 1.0;

  // Original (unscaled) data kept for residuals and polishing.
  Matrix H_orig_, A_orig_;
  Vector f_orig_, l_orig_, u_orig_;

  Vector rho_;  // per-row penalty
  double rho_bar_ = 0.1;
  Eigen::LLT<Matrix> kkt_llt_;

  // Iterates (scaled).
  Vector x_, y_, z_;
  bool nonconvex_ = false;
};

// Matrix-market-style text dump of one problem (H, f, A_eq, b_eq, A_in,
// lb, ub as separate files with a common prefix).
void dump_qp(const QpProblem& problem, const std::string& prefix);

}  // namespace ddpc
