#include "ddpc/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ddpc/serialization.hpp"

namespace ddpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kRhoEqScale = 1e3;
constexpr double kMinScale = 1e-4;
constexpr double kMaxScale = 1e4;

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::kSolved: return "solved";
    case QpStatus::kMaxIterations: return "max_iterations";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kNonConvex: return "nonconvex";
  }
  return "unknown";
}

void QpProblem::validate() const {
  const int n = num_vars();
  check_arg(H.rows() == n && H.cols() == n, "QpProblem: H must be square");
  check_arg(f.size() == n, "QpProblem: f length mismatch");
  const double h_scale = n > 0 ? std::max(1.0, H.cwiseAbs().maxCoeff()) : 1.0;
  check_arg((H - H.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * h_scale,
            "QpProblem: H not symmetric within 1e-12");
  check_arg(H.allFinite() && f.allFinite(), "QpProblem: non-finite cost");
  check_arg(A_eq.cols() == n || A_eq.rows() == 0, "QpProblem: A_eq column mismatch");
  check_arg(b_eq.size() == A_eq.rows(), "QpProblem: b_eq length mismatch");
  check_arg(A_eq.rows() == 0 || (A_eq.allFinite() && b_eq.allFinite()),
            "QpProblem: non-finite equality data");
  check_arg(A_in.cols() == n || A_in.rows() == 0, "QpProblem: A_in column mismatch");
  check_arg(lb.size() == A_in.rows() && ub.size() == A_in.rows(),
            "QpProblem: inequality bound length mismatch");
  check_arg(A_in.rows() == 0 || A_in.allFinite(), "QpProblem: non-finite A_in");
  for (int i = 0; i < num_in(); ++i) {
    check_arg(lb(i) <= ub(i), "QpProblem: lb > ub");
    check_arg(!(std::isnan(lb(i)) || std::isnan(ub(i))), "QpProblem: NaN bound");
  }
}

void QpSolver::setup(const QpProblem& problem, const QpSettings& settings) {
  problem.validate();
  settings_ = settings;
  n_ = problem.num_vars();
  m_eq_ = problem.num_eq();
  m_in_ = problem.num_in();
  m_ = m_eq_ + m_in_;

  H_orig_ = problem.H;
  f_orig_ = problem.f;
  A_orig_.resize(m_, n_);
  if (m_eq_ > 0) A_orig_.topRows(m_eq_) = problem.A_eq;
  if (m_in_ > 0) A_orig_.bottomRows(m_in_) = problem.A_in;
  l_orig_.resize(m_);
  u_orig_.resize(m_);
  if (m_eq_ > 0) {
    l_orig_.head(m_eq_) = problem.b_eq;
    u_orig_.head(m_eq_) = problem.b_eq;
  }
  if (m_in_ > 0) {
    l_orig_.tail(m_in_) = problem.lb;
    u_orig_.tail(m_in_) = problem.ub;
  }

  nonconvex_ = false;
  if (settings_.check_convexity && n_ > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H_orig_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < settings_.nonconvex_tol) nonconvex_ = true;
  }

  apply_scaling(problem);

  rho_bar_ = settings_.rho0;
  rho_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    if (i < m_eq_) {
      rho_(i) = std::clamp(kRhoEqScale * rho_bar_, kRhoMin, kRhoMax);
    } else if (l_(i) == -kInf && u_(i) == kInf) {
      rho_(i) = kRhoMin;
    } else {
      rho_(i) = rho_bar_;
    }
  }

  x_ = Vector::Zero(n_);
  y_ = Vector::Zero(m_);
  z_ = Vector::Zero(m_);
  if (!nonconvex_) factor_kkt();
}

void QpSolver::apply_scaling(const QpProblem& problem) {
  P_ = problem.H;
  q_ = problem.f;
  A_ = A_orig_;
  l_ = l_orig_;
  u_ = u_orig_;
  d_scale_ = Vector::Ones(n_);
  e_scale_ = Vector::Ones(m_);
  c_scale_ = 1.0;
  if (settings_.scaling_iters <= 0) return;

  // Modified Ruiz equilibration on [P A'; A 0] plus cost normalization.
  for (int iter = 0; iter < settings_.scaling_iters; ++iter) {
    Vector dv(n_), ev(m_);
    for (int j = 0; j < n_; ++j) {
      double norm = P_.col(j).cwiseAbs().maxCoeff();
      if (m_ > 0) norm = std::max(norm, A_.col(j).cwiseAbs().maxCoeff());
      dv(j) = norm > 0.0 ? 1.0 / std::sqrt(norm) : 1.0;
      dv(j) = std::clamp(dv(j), kMinScale, kMaxScale);
    }
    for (int i = 0; i < m_; ++i) {
      const double norm = A_.row(i).cwiseAbs().maxCoeff();
      ev(i) = norm > 0.0 ? 1.0 / std::sqrt(norm) : 1.0;
      ev(i) = std::clamp(ev(i), kMinScale, kMaxScale);
    }
    P_ = dv.asDiagonal() * P_ * dv.asDiagonal();
    q_ = dv.asDiagonal() * q_;
    if (m_ > 0) {
      A_ = ev.asDiagonal() * A_ * dv.asDiagonal();
      l_ = (l_.array().isFinite()).select(ev.asDiagonal() * l_, l_);
      u_ = (u_.array().isFinite()).select(ev.asDiagonal() * u_, u_);
    }
    d_scale_ = d_scale_.cwiseProduct(dv);
    e_scale_ = e_scale_.cwiseProduct(ev);

    double cost_norm = 0.0;
    for (int j = 0; j < n_; ++j) cost_norm += P_.col(j).cwiseAbs().maxCoeff();
    cost_norm = std::max(cost_norm / std::max(n_, 1), inf_norm(q_));
    if (cost_norm > 0.0) {
      const double gamma = std::clamp(1.0 / cost_norm, kMinScale, kMaxScale);
      P_ *= gamma;
      q_ *= gamma;
      c_scale_ *= gamma;
    }
  }
}

void QpSolver::factor_kkt() {
  Matrix M = P_;
  M.diagonal().array() += settings_.sigma;
  if (m_ > 0) M.noalias() += A_.transpose() * rho_.asDiagonal() * A_;
  kkt_llt_.compute(M);
  double sigma = settings_.sigma;
  while (kkt_llt_.info() != Eigen::Success && sigma < 1.0) {
    sigma *= 100.0;
    Matrix M2 = M;
    M2.diagonal().array() += sigma;
    kkt_llt_.compute(M2);
  }
  check_arg(kkt_llt_.info() == Eigen::Success, "QpSolver: KKT factorization failed");
}

void QpSolver::update_linear_cost(const Vector& f) {
  check_arg(is_setup(), "QpSolver: setup required before update");
  check_arg(f.size() == n_ && f.allFinite(), "QpSolver: bad cost update");
  f_orig_ = f;
  q_ = c_scale_ * d_scale_.cwiseProduct(f);
}

void QpSolver::update_bounds(const Vector& b_eq, const Vector& lb, const Vector& ub) {
  check_arg(is_setup(), "QpSolver: setup required before update");
  check_arg(b_eq.size() == m_eq_ && lb.size() == m_in_ && ub.size() == m_in_,
            "QpSolver: bad bounds update");
  for (int i = 0; i < m_in_; ++i) check_arg(lb(i) <= ub(i), "QpSolver: lb > ub in update");
  if (m_eq_ > 0) {
    l_orig_.head(m_eq_) = b_eq;
    u_orig_.head(m_eq_) = b_eq;
  }
  if (m_in_ > 0) {
    l_orig_.tail(m_in_) = lb;
    u_orig_.tail(m_in_) = ub;
  }
  l_ = (l_orig_.array().isFinite()).select(e_scale_.asDiagonal() * l_orig_, l_orig_);
  u_ = (u_orig_.array().isFinite()).select(e_scale_.asDiagonal() * u_orig_, u_orig_);
}

void QpSolver::warm_start(const Vector& z0, const Vector& y_eq, const Vector& y_in) {
  check_arg(is_setup(), "QpSolver: setup required before warm_start");
  check_arg(z0.size() == n_ && y_eq.size() == m_eq_ && y_in.size() == m_in_,
            "QpSolver: warm start dim mismatch");
  x_ = z0.cwiseQuotient(d_scale_);
  Vector y(m_);
  if (m_eq_ > 0) y.head(m_eq_) = y_eq;
  if (m_in_ > 0) y.tail(m_in_) = y_in;
  y_ = c_scale_ * y.cwiseQuotient(e_scale_);
  z_ = A_ * x_;
}

void QpSolver::cold_start() {
  check_arg(is_setup(), "QpSolver: setup required");
  x_.setZero();
  y_.setZero();
  z_.setZero();
}

void QpSolver::compute_unscaled_residuals(KktResiduals* res, double* eps_primal,
                                          double* eps_dual) const {
  const Vector x_uns = d_scale_.cwiseProduct(x_);
  const Vector ax = A_orig_ * x_uns;
  const Vector y_uns = e_scale_.cwiseProduct(y_) / c_scale_;

  double viol = 0.0;
  for (int i = 0; i < m_; ++i) {
    if (std::isfinite(u_orig_(i))) viol = std::max(viol, ax(i) - u_orig_(i));
    if (std::isfinite(l_orig_(i))) viol = std::max(viol, l_orig_(i) - ax(i));
  }
  res->primal = viol;

  const Vector hx = H_orig_ * x_uns;
  const Vector aty = m_ > 0 ? Vector(A_orig_.transpose() * y_uns) : Vector::Zero(n_);
  res->dual = inf_norm(hx + f_orig_ + aty);

  const Vector z_uns = m_ > 0 ? Vector(z_.cwiseQuotient(e_scale_)) : Vector();
  *eps_primal = settings_.feas_tol * (1.0 + std::max(inf_norm(ax), inf_norm(z_uns)));
  *eps_dual = settings_.opt_tol *
              (1.0 + std::max({inf_norm(hx), inf_norm(aty), inf_norm(f_orig_)}));
}

bool QpSolver::primal_infeasible(const Vector& dy_scaled) const {
  if (m_ == 0) return false;
  const Vector dy = e_scale_.cwiseProduct(dy_scaled) / c_scale_;
  const double dy_norm = inf_norm(dy);
  if (dy_norm < 1e-12) return false;
  const double aty = inf_norm(A_orig_.transpose() * dy);
  if (aty > settings_.infeas_tol * dy_norm) return false;
  double support = 0.0;
  for (int i = 0; i < m_; ++i) {
    const double pos = std::max(dy(i), 0.0);
    const double neg = std::min(dy(i), 0.0);
    if (pos > 1e-14 * dy_norm) {
      if (!std::isfinite(u_orig_(i))) return false;
      support += u_orig_(i) * pos;
    }
    if (neg < -1e-14 * dy_norm) {
      if (!std::isfinite(l_orig_(i))) return false;
      support += l_orig_(i) * neg;
    }
  }
  return support < -settings_.infeas_tol * dy_norm;
}

QpResult QpSolver::solve() {
  check_arg(is_setup(), "QpSolver: setup required before solve");
  const auto t0 = std::chrono::steady_clock::now();

  QpResult result;
  result.y_eq = Vector::Zero(m_eq_);
  result.y_in = Vector::Zero(m_in_);
  if (nonconvex_) {
    result.z = Vector::Zero(n_);
    result.status = QpStatus::kNonConvex;
    return result;
  }

  Vector rhs(n_), x_tilde(n_), z_tilde(m_), z_pre(m_), z_new(m_), y_new(m_), dy(m_);
  const double alpha = settings_.alpha;
  QpStatus status = QpStatus::kMaxIterations;
  int iter = 0;
  KktResiduals res;

  for (iter = 1; iter <= settings_.max_iterations; ++iter) {
    rhs = settings_.sigma * x_ - q_;
    if (m_ > 0) rhs.noalias() += A_.transpose() * (rho_.cwiseProduct(z_) - y_);
    x_tilde = kkt_llt_.solve(rhs);

    if (m_ > 0) {
      z_tilde.noalias() = A_ * x_tilde;
      z_pre = alpha * z_tilde + (1.0 - alpha) * z_ + y_.cwiseQuotient(rho_);
      x_ = alpha * x_tilde + (1.0 - alpha) * x_;
      z_new = z_pre.cwiseMax(l_).cwiseMin(u_);
      y_new = rho_.cwiseProduct(z_pre - z_new);
      dy = y_new - y_;  // dual step, drives the infeasibility certificate
      y_ = y_new;
      z_ = z_new;
    } else {
      x_ = alpha * x_tilde + (1.0 - alpha) * x_;
    }

    double eps_p = 0.0, eps_d = 0.0;
    compute_unscaled_residuals(&res, &eps_p, &eps_d);
    // Internal split residual ||Ax - z|| controls termination together with
    // the dual residual; the reported primal value is the true violation.
    const double split = m_ > 0 ? inf_norm((A_ * x_ - z_).cwiseQuotient(e_scale_)) : 0.0;
    if (std::max(split, res.primal) <= eps_p && res.dual <= eps_d) {
      status = QpStatus::kSolved;
      break;
    }
    if (m_ > 0 && primal_infeasible(dy)) {
      status = QpStatus::kInfeasible;
      break;
    }

    if (settings_.adaptive_rho && iter % settings_.rho_adapt_interval == 0 && m_ > 0) {
      const Vector x_uns = d_scale_.cwiseProduct(x_);
      const double p_scale = std::max(
          {inf_norm(A_orig_ * x_uns), inf_norm(z_.cwiseQuotient(e_scale_)), 1e-10});
      const Vector y_uns = e_scale_.cwiseProduct(y_) / c_scale_;
      const double d_scale = std::max({inf_norm(H_orig_ * x_uns),
                                       inf_norm(A_orig_.transpose() * y_uns),
                                       inf_norm(f_orig_), 1e-10});
      const double ratio = (std::max(split, res.primal) / p_scale) /
                           std::max(res.dual / d_scale, 1e-16);
      const double rho_new = std::clamp(rho_bar_ * std::sqrt(ratio), kRhoMin, kRhoMax);
      if (rho_new > 5.0 * rho_bar_ || rho_new < rho_bar_ / 5.0) {
        rho_bar_ = rho_new;
        for (int i = 0; i < m_; ++i) {
          if (i < m_eq_) {
            rho_(i) = std::clamp(kRhoEqScale * rho_bar_, kRhoMin, kRhoMax);
          } else if (l_(i) == -kInf && u_(i) == kInf) {
            rho_(i) = kRhoMin;
          } else {
            rho_(i) = rho_bar_;
          }
        }
        factor_kkt();
      }
    }
  }

  result.iterations = std::min(iter, settings_.max_iterations);
  result.status = status;
  result.z = d_scale_.cwiseProduct(x_);
  const Vector y_uns = m_ > 0 ? Vector(e_scale_.cwiseProduct(y_) / c_scale_) : Vector();
  if (m_eq_ > 0) result.y_eq = y_uns.head(m_eq_);
  if (m_in_ > 0) result.y_in = y_uns.tail(m_in_);
  {
    double eps_p = 0.0, eps_d = 0.0;
    compute_unscaled_residuals(&res, &eps_p, &eps_d);
    result.kkt = res;
  }

  if (status == QpStatus::kSolved && settings_.polish) polish(&result);

  result.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

void QpSolver::polish(QpResult* result) const {
  // Active set from multiplier signs: y < 0 pins the lower bound, y > 0 the
  // upper. Equality rows are always active.
  std::vector<int> active;
  std::vector<double> target;
  active.reserve(m_);
  target.reserve(m_);
  for (int i = 0; i < m_eq_; ++i) {
    active.push_back(i);
    target.push_back(l_orig_(i));
  }
  const double y_tol = 1e-10;
  for (int i = m_eq_; i < m_; ++i) {
    const double yi = result->y_in(i - m_eq_);
    if (yi < -y_tol && std::isfinite(l_orig_(i))) {
      active.push_back(i);
      target.push_back(l_orig_(i));
    } else if (yi > y_tol && std::isfinite(u_orig_(i))) {
      active.push_back(i);
      target.push_back(u_orig_(i));
    }
  }

  const int na = static_cast<int>(active.size());
  const double reg = settings_.polish_reg;
  Matrix K = Matrix::Zero(n_ + na, n_ + na);
  K.topLeftCorner(n_, n_) = H_orig_;
  K.topLeftCorner(n_, n_).diagonal().array() += reg;
  for (int a = 0; a < na; ++a) {
    K.block(n_ + a, 0, 1, n_) = A_orig_.row(active[a]);
    K.block(0, n_ + a, n_, 1) = A_orig_.row(active[a]).transpose();
    K(n_ + a, n_ + a) = -reg;
  }
  Vector rhs(n_ + na);
  rhs.head(n_) = -f_orig_;
  for (int a = 0; a < na; ++a) rhs(n_ + a) = target[a];

  Eigen::PartialPivLU<Matrix> lu(K);
  Vector sol = lu.solve(rhs);
  // Iterative refinement against the unregularized KKT system.
  for (int pass = 0; pass < 2; ++pass) {
    Vector resid = rhs;
    resid.head(n_).noalias() -= H_orig_ * sol.head(n_);
    for (int a = 0; a < na; ++a) {
      resid.head(n_).noalias() -= A_orig_.row(active[a]).transpose() * sol(n_ + a);
      resid(n_ + a) -= A_orig_.row(active[a]).dot(sol.head(n_));
    }
    sol += lu.solve(resid);
  }

  const Vector x_pol = sol.head(n_);
  if (!x_pol.allFinite()) return;
  Vector y_pol = Vector::Zero(m_);
  for (int a = 0; a < na; ++a) y_pol(active[a]) = sol(n_ + a);

  // Residuals of the polished candidate.
  const Vector ax = A_orig_ * x_pol;
  double viol = 0.0;
  for (int i = 0; i < m_; ++i) {
    if (std::isfinite(u_orig_(i))) viol = std::max(viol, ax(i) - u_orig_(i));
    if (std::isfinite(l_orig_(i))) viol = std::max(viol, l_orig_(i) - ax(i));
  }
  const double dual =
      inf_norm(H_orig_ * x_pol + f_orig_ + (m_ > 0 ? Vector(A_orig_.transpose() * y_pol)
                                                   : Vector::Zero(n_)));
  if (std::max(viol, dual) <=
      std::max({result->kkt.primal, result->kkt.dual, 1e-12})) {
    result->z = x_pol;
    if (m_eq_ > 0) result->y_eq = y_pol.head(m_eq_);
    if (m_in_ > 0) result->y_in = y_pol.tail(m_in_);
    result->kkt.primal = viol;
    result->kkt.dual = dual;
    result->polished = true;
  }
}

QpResult QpSolver::solve_once(const QpProblem& problem, const QpSettings& settings) {
  QpSolver solver;
  solver.setup(problem, settings);
  return solver.solve();
}

void dump_qp(const QpProblem& problem, const std::string& prefix) {
  write_matrix_text(prefix + "_H.mtx", problem.H, "quadratic cost");
  write_matrix_text(prefix + "_f.mtx", problem.f, "linear cost");
  write_matrix_text(prefix + "_Aeq.mtx", problem.A_eq, "equality matrix");
  write_matrix_text(prefix + "_beq.mtx", problem.b_eq, "equality rhs");
  write_matrix_text(prefix + "_Ain.mtx", problem.A_in, "inequality matrix");
  write_matrix_text(prefix + "_lb.mtx", problem.lb, "lower bounds");
  write_matrix_text(prefix + "_ub.mtx", problem.ub, "upper bounds");
}

}  // namespace ddpc
