#include "ddpc/planner.hpp"

#include <Eigen/Cholesky>

#include <cmath>

#include "ddpc/bus.hpp"

namespace ddpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kConeRowsPerLegStep = 5;

// Per-step team weight blkdiag(W, ..., W), one copy per agent.
Matrix tile_block_diag(const Matrix& W, int copies) {
  Matrix out = Matrix::Zero(W.rows() * copies, W.cols() * copies);
  for (int a = 0; a < copies; ++a)
    out.block(a * W.rows(), a * W.cols(), W.rows(), W.cols()) = W;
  return out;
}

// (I_N (x) Wstep) * M, exploiting the block structure.
Matrix apply_step_weight(const Matrix& Wstep, const Matrix& M, int steps) {
  const int per = static_cast<int>(Wstep.rows());
  Matrix out(M.rows(), M.cols());
  for (int k = 0; k < steps; ++k)
    out.middleRows(k * per, per).noalias() = Wstep * M.middleRows(k * per, per);
  return out;
}

Vector apply_step_weight(const Matrix& Wstep, const Vector& v, int steps) {
  const int per = static_cast<int>(Wstep.rows());
  Vector out(v.size());
  for (int k = 0; k < steps; ++k)
    out.segment(k * per, per).noalias() = Wstep * v.segment(k * per, per);
  return out;
}

// Cone rows for one agent whose per-step force block starts at `offset`
// inside a stacked sample of width `stride`. Row ordering: step-major, then
// leg, then (fz, fx-, fx+, fy-, fy+).
void fill_cone_coefficients(Matrix& A, int row0, int steps, double mu, int stride,
                            int offset) {
  const double c = mu / std::sqrt(2.0);
  int r = row0;
  for (int k = 0; k < steps; ++k) {
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const int base = k * stride + offset + 3 * leg;
      A(r, base + 2) = 1.0;
      ++r;
      A(r, base + 0) = 1.0;
      A(r, base + 2) = -c;
      ++r;
      A(r, base + 0) = 1.0;
      A(r, base + 2) = c;
      ++r;
      A(r, base + 1) = 1.0;
      A(r, base + 2) = -c;
      ++r;
      A(r, base + 1) = 1.0;
      A(r, base + 2) = c;
      ++r;
    }
  }
}

void fill_cone_bounds(const ContactPlan& plan, double f_min, double f_max, int row0,
                      Vector& lb, Vector& ub) {
  int r = row0;
  for (int k = 0; k < plan.steps(); ++k) {
    for (int leg = 0; leg < kNumLegs; ++leg) {
      if (plan.in_stance(k, leg)) {
        lb(r) = f_min;
        ub(r) = f_max;
        ++r;
        lb(r) = -kInf;
        ub(r) = 0.0;
        ++r;
        lb(r) = 0.0;
        ub(r) = kInf;
        ++r;
        lb(r) = -kInf;
        ub(r) = 0.0;
        ++r;
        lb(r) = 0.0;
        ub(r) = kInf;
        ++r;
      } else {
        // All five rows collapse to equalities pinning f = 0.
        for (int q = 0; q < kConeRowsPerLegStep; ++q) {
          lb(r) = 0.0;
          ub(r) = 0.0;
          ++r;
        }
      }
    }
  }
}

Matrix stack_columns(const std::vector<Matrix>& per_agent, int steps) {
  // Interleave per-agent (d_i x steps) matrices into one stacked vector
  // layout (sum d_i) x steps.
  int total = 0;
  for (const Matrix& m : per_agent) total += static_cast<int>(m.rows());
  Matrix out(total, steps);
  int off = 0;
  for (const Matrix& m : per_agent) {
    out.middleRows(off, m.rows()) = m;
    off += static_cast<int>(m.rows());
  }
  return out;
}

Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unflatten(const Vector& v, int rows, int cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

void check_uniform_dims(const std::vector<AgentDims>& dims) {
  for (const AgentDims& d : dims) {
    check_arg(d.m == dims.front().m && d.p == dims.front().p,
              "planner: agents must share input/output dimensions");
  }
}

}  // namespace

PlannerConfig PlannerConfig::locomotion_defaults() {
  PlannerConfig c;
  Vector q(6);
  q << 1e6, 1e5, 1e5, 2e5, 1e5, 1e4;
  c.Q = q.asDiagonal();
  Vector r_leg(3);
  r_leg << 0.05, 0.05, 0.5;
  Vector r(12);
  for (int leg = 0; leg < 4; ++leg) r.segment(3 * leg, 3) = r_leg;
  c.R = r.asDiagonal();
  c.output_box.assign(6, Box{});
  c.output_box[0] = {0.15, 0.35};  // z
  c.output_box[3] = {-0.3, 0.3};   // roll
  c.output_box[4] = {-0.3, 0.3};   // pitch
  c.input_set = InputSet::kFrictionCone;
  return c;
}

void PlannerConfig::validate(const AgentDims& dims) const {
  check_arg(T_ini >= 1 && N >= 1, "PlannerConfig: horizons must be positive");
  check_arg(n_apply >= 1 && n_apply <= N, "PlannerConfig: n_apply outside [1, N]");
  check_arg(sample_rate > 0.0, "PlannerConfig: sample_rate must be positive");
  check_arg(Q.rows() == dims.p && Q.cols() == dims.p, "PlannerConfig: Q dims mismatch");
  check_arg(R.rows() == dims.m && R.cols() == dims.m, "PlannerConfig: R dims mismatch");
  Eigen::LLT<Matrix> llt_q(Q);
  Eigen::LLT<Matrix> llt_r(R);
  check_arg(llt_q.info() == Eigen::Success && llt_r.info() == Eigen::Success,
            "PlannerConfig: Q and R must be positive definite");
  check_arg(output_box.empty() || static_cast<int>(output_box.size()) == dims.p,
            "PlannerConfig: output_box size mismatch");
  check_arg(input_box.empty() || static_cast<int>(input_box.size()) == dims.m,
            "PlannerConfig: input_box size mismatch");
}

AgentWindow::AgentWindow(int m, int p, int T_ini) : m_(m), p_(p), T_ini_(T_ini) {
  check_arg(m >= 1 && p >= 1 && T_ini >= 1, "AgentWindow: bad dimensions");
  u_hist_ = Matrix::Zero(m, T_ini);
  y_hist_ = Matrix::Zero(p, T_ini);
}

void AgentWindow::push(const Vector& u, const Vector& y) {
  check_arg(u.size() == m_ && y.size() == p_, "AgentWindow::push: dim mismatch");
  u_hist_.col(head_) = u;
  y_hist_.col(head_) = y;
  head_ = (head_ + 1) % T_ini_;
  filled_ = std::min(filled_ + 1, T_ini_);
}

Vector AgentWindow::u_ini() const {
  check_arg(warm(), "AgentWindow: not warm yet");
  Vector out(m_ * T_ini_);
  for (int k = 0; k < T_ini_; ++k)
    out.segment(k * m_, m_) = u_hist_.col((head_ + k) % T_ini_);
  return out;
}

Vector AgentWindow::y_ini() const {
  check_arg(warm(), "AgentWindow: not warm yet");
  Vector out(p_ * T_ini_);
  for (int k = 0; k < T_ini_; ++k)
    out.segment(k * p_, p_) = y_hist_.col((head_ + k) % T_ini_);
  return out;
}

Vector ReferenceCommand::to_output() const {
  Vector y(6);
  y << z, v_x, v_y, 0.0, 0.0, omega_z;
  return y;
}

Matrix ReferenceCommand::expand(int steps) const {
  return to_output().replicate(1, steps);
}

LinearConstraints build_friction_constraints(const ContactPlan& plan, double mu,
                                             double f_min, double f_max) {
  check_arg(mu > 0.0, "build_friction_constraints: mu must be positive");
  check_arg(f_min >= 0.0 && f_max >= f_min, "build_friction_constraints: bad force bounds");
  check_arg(plan.steps() >= 1, "build_friction_constraints: empty contact plan");

  const int steps = plan.steps();
  const int m = 3 * kNumLegs;
  LinearConstraints c;
  c.A = Matrix::Zero(steps * kNumLegs * kConeRowsPerLegStep, steps * m);
  c.lb.resize(c.A.rows());
  c.ub.resize(c.A.rows());
  fill_cone_coefficients(c.A, 0, steps, mu, m, 0);
  fill_cone_bounds(plan, f_min, f_max, 0, c.lb, c.ub);
  return c;
}

bool satisfies_constraints(const LinearConstraints& c, const Vector& u, double tol) {
  check_arg(u.size() == c.A.cols(), "satisfies_constraints: dim mismatch");
  const Vector v = c.A * u;
  for (int i = 0; i < v.size(); ++i) {
    if (v(i) < c.lb(i) - tol || v(i) > c.ub(i) + tol) return false;
  }
  return true;
}

Vector nominal_input_sample(const std::array<bool, kNumLegs>& stance, double agent_mass,
                            double g0) {
  Vector u = Vector::Zero(3 * kNumLegs);
  int n_c = 0;
  for (bool s : stance) n_c += s ? 1 : 0;
  if (n_c == 0) return u;  // flight phase
  const double fz = agent_mass * g0 / n_c;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (stance[leg]) u(3 * leg + 2) = fz;
  }
  return u;
}

Matrix nominal_input(const ContactPlan& plan, double agent_mass, double g0) {
  check_arg(agent_mass > 0.0, "nominal_input: mass must be positive");
  Matrix u(3 * kNumLegs, plan.steps());
  for (int k = 0; k < plan.steps(); ++k)
    u.col(k) = nominal_input_sample(plan.stance[k], agent_mass, g0);
  return u;
}

int local_decision_count(const AgentDims& dims, int N, bool after_output_elimination) {
  return after_output_elimination ? N * dims.m : N * (dims.m + dims.p);
}

int centralized_decision_count(const std::vector<AgentDims>& dims, int N,
                               bool after_output_elimination) {
  int total = 0;
  for (const AgentDims& d : dims) total += local_decision_count(d, N, after_output_elimination);
  return total;
}

// ---------------------------------------------------------------------------
// CentralizedPlanner

CentralizedPlanner::CentralizedPlanner(const TransitionMatrix& tm,
                                       const PlannerConfig& config)
    : dims_(tm.dims), config_(config) {
  check_uniform_dims(dims_.agent_dims);
  config_.validate(dims_.agent_dims.front());
  check_arg(config_.T_ini == dims_.T_ini && config_.N == dims_.N,
            "CentralizedPlanner: config horizons do not match the model");
  const int ctx_w = (dims_.m_total + dims_.p_total) * dims_.T_ini;
  G_p_ = tm.G.leftCols(ctx_w);
  G_f_ = tm.G.rightCols(dims_.m_total * dims_.N);
  assemble_static();
}

void CentralizedPlanner::assemble_static() {
  const int n_a = static_cast<int>(dims_.agent_dims.size());
  const int N = dims_.N;
  const Matrix Qstep = tile_block_diag(config_.Q, n_a);
  const Matrix Rstep = tile_block_diag(config_.R, n_a);

  QG_f_ = apply_step_weight(Qstep, G_f_, N);
  H_ = G_f_.transpose() * QG_f_;
  for (int k = 0; k < N; ++k)
    H_.block(k * dims_.m_total, k * dims_.m_total, dims_.m_total, dims_.m_total) += Rstep;
  H_ = 0.5 * (H_ + H_.transpose());

  const TeamLayout layout(dims_.agent_dims);
  const bool cone = config_.input_set == InputSet::kFrictionCone;
  const bool box = config_.input_set == InputSet::kBox && !config_.input_box.empty();
  if (cone) {
    check_arg(dims_.agent_dims.front().m == 3 * kNumLegs,
              "CentralizedPlanner: friction cone needs 12 force channels per agent");
  }

  // Input rows: friction cones for force planning, per-channel boxes
  // otherwise.
  int input_rows = 0;
  if (cone) {
    input_rows = n_a * N * kNumLegs * kConeRowsPerLegStep;
  } else if (box) {
    for (const Box& b : config_.input_box)
      if (b.bounded()) input_rows += n_a * N;
  }

  box_channels_.clear();
  if (!config_.output_box.empty()) {
    for (int a = 0; a < n_a; ++a)
      for (int ch = 0; ch < dims_.agent_dims[a].p; ++ch)
        if (config_.output_box[ch].bounded())
          box_channels_.push_back(layout.p_offset(a) + ch);
  }
  const int output_rows = static_cast<int>(box_channels_.size()) * N;

  cone_template_.A = Matrix::Zero(input_rows + output_rows, dims_.m_total * N);
  cone_template_.lb = Vector::Constant(input_rows + output_rows, -kInf);
  cone_template_.ub = Vector::Constant(input_rows + output_rows, kInf);

  int r = 0;
  if (cone) {
    for (int a = 0; a < n_a; ++a) {
      fill_cone_coefficients(cone_template_.A, r, N, config_.mu, dims_.m_total,
                             layout.m_offset(a));
      r += N * kNumLegs * kConeRowsPerLegStep;
    }
  } else if (box) {
    for (int a = 0; a < n_a; ++a) {
      for (int ch = 0; ch < dims_.agent_dims[a].m; ++ch) {
        if (!config_.input_box[ch].bounded()) continue;
        for (int k = 0; k < N; ++k) {
          cone_template_.A(r, k * dims_.m_total + layout.m_offset(a) + ch) = 1.0;
          cone_template_.lb(r) = config_.input_box[ch].lo;
          cone_template_.ub(r) = config_.input_box[ch].hi;
          ++r;
        }
      }
    }
  }
  // Output rows: step-major per bounded channel; bounds filled per round.
  for (int k = 0; k < N; ++k) {
    for (int gch : box_channels_) {
      cone_template_.A.row(r) = G_f_.row(k * dims_.p_total + gch);
      ++r;
    }
  }

  QpProblem problem;
  problem.H = H_;
  problem.f = Vector::Zero(H_.rows());
  problem.A_eq.resize(0, H_.rows());
  problem.b_eq.resize(0);
  problem.A_in = cone_template_.A;
  problem.lb = cone_template_.lb;
  problem.ub = cone_template_.ub;
  solver_.setup(problem, config_.qp);
  solver_ready_ = true;
}

PlanSolution CentralizedPlanner::solve(const std::vector<AgentWindow>& windows,
                                       const std::vector<AgentRoundData>& round) {
  const int n_a = static_cast<int>(dims_.agent_dims.size());
  check_arg(static_cast<int>(windows.size()) == n_a, "solve: one window per agent");
  check_arg(static_cast<int>(round.size()) == n_a, "solve: round data per agent");
  const int N = dims_.N;
  const TeamLayout layout(dims_.agent_dims);

  // Interleave windows into the combined context.
  Vector w(dims_.context_dim() - dims_.m_total * N);
  for (int a = 0; a < n_a; ++a) {
    const Vector ua = windows[a].u_ini();
    const Vector ya = windows[a].y_ini();
    const AgentDims& d = dims_.agent_dims[a];
    for (int k = 0; k < dims_.T_ini; ++k) {
      w.segment(k * dims_.m_total + layout.m_offset(a), d.m) = ua.segment(k * d.m, d.m);
      w.segment(dims_.m_total * dims_.T_ini + k * dims_.p_total + layout.p_offset(a), d.p) =
          ya.segment(k * d.p, d.p);
    }
  }
  const Vector y_free = G_p_ * w;

  // Stack references and nominal inputs, agents interleaved per step.
  Vector y_des(dims_.p_total * N);
  Vector u_des = Vector::Zero(dims_.m_total * N);
  for (int a = 0; a < n_a; ++a) {
    const AgentDims& d = dims_.agent_dims[a];
    check_arg(round[a].y_des.rows() == d.p && round[a].y_des.cols() == N,
              "solve: y_des dims mismatch");
    for (int k = 0; k < N; ++k) {
      y_des.segment(k * dims_.p_total + layout.p_offset(a), d.p) = round[a].y_des.col(k);
      if (config_.harmonize_costs && round[a].u_des.size() > 0)
        u_des.segment(k * dims_.m_total + layout.m_offset(a), d.m) = round[a].u_des.col(k);
    }
  }

  Vector f = QG_f_.transpose() * (y_free - y_des);
  if (config_.harmonize_costs) {
    const Matrix Rstep = tile_block_diag(config_.R, n_a);
    f -= apply_step_weight(Rstep, u_des, N);
  }

  // Refresh bounds.
  Vector lb = cone_template_.lb;
  Vector ub = cone_template_.ub;
  if (config_.input_set == InputSet::kFrictionCone) {
    int r = 0;
    for (int a = 0; a < n_a; ++a) {
      check_arg(round[a].contacts != nullptr && round[a].contacts->steps() == N,
                "solve: contact plan missing or short");
      fill_cone_bounds(*round[a].contacts, config_.f_min, config_.f_max, r, lb, ub);
      r += N * kNumLegs * kConeRowsPerLegStep;
    }
  }
  int r = static_cast<int>(cone_template_.A.rows()) -
          static_cast<int>(box_channels_.size()) * N;
  for (int k = 0; k < N; ++k) {
    for (std::size_t b = 0; b < box_channels_.size(); ++b) {
      const int gch = box_channels_[b];
      int local_ch = gch;
      int agent = 0;
      while (local_ch >= dims_.agent_dims[agent].p) {
        local_ch -= dims_.agent_dims[agent].p;
        ++agent;
      }
      const Box& box = config_.output_box[local_ch];
      const double free_val = y_free(k * dims_.p_total + gch);
      lb(r) = box.lo - free_val;
      ub(r) = box.hi - free_val;
      ++r;
    }
  }

  solver_.update_linear_cost(f);
  solver_.update_bounds(Vector(), lb, ub);
  QpResult qp = solver_.solve();

  PlanSolution sol;
  sol.u = unflatten(qp.z, dims_.m_total, N);
  sol.y = unflatten(Vector(y_free + G_f_ * qp.z), dims_.p_total, N);
  sol.qp = std::move(qp);
  last_u_ = flatten(sol.u);
  return sol;
}

void CentralizedPlanner::shift_warm_start(int n_apply) {
  if (last_u_.size() == 0) return;
  const int N = dims_.N;
  const int m = dims_.m_total;
  Vector shifted(last_u_.size());
  for (int k = 0; k < N; ++k) {
    const int src = std::min(k + n_apply, N - 1);
    shifted.segment(k * m, m) = last_u_.segment(src * m, m);
  }
  solver_.warm_start(shifted, Vector(), Vector::Zero(cone_template_.rows()));
}

// ---------------------------------------------------------------------------
// LocalPlanner

LocalPlanner::LocalPlanner(const BlockPartition& partition, int agent,
                           const PlannerConfig& config)
    : agent_(agent), team_dims_(partition.dims), config_(config) {
  check_arg(agent >= 0 && agent < partition.num_agents(), "LocalPlanner: bad agent index");
  agent_dims_ = partition.dims.agent_dims.at(agent);
  config_.validate(agent_dims_);
  check_arg(config_.T_ini == team_dims_.T_ini && config_.N == team_dims_.N,
            "LocalPlanner: config horizons do not match the model");

  const Matrix& Gii = partition.blocks[agent][agent];
  const int ctx_w = (agent_dims_.m + agent_dims_.p) * team_dims_.T_ini;
  G_w_ = Gii.leftCols(ctx_w);
  G_f_ = Gii.rightCols(agent_dims_.m * team_dims_.N);
  assemble_static();
}

void LocalPlanner::assemble_static() {
  const int N = team_dims_.N;
  QG_f_ = apply_step_weight(config_.Q, G_f_, N);
  H_ = G_f_.transpose() * QG_f_;
  for (int k = 0; k < N; ++k)
    H_.block(k * agent_dims_.m, k * agent_dims_.m, agent_dims_.m, agent_dims_.m) +=
        config_.R;
  H_ = 0.5 * (H_ + H_.transpose());

  const bool cone = config_.input_set == InputSet::kFrictionCone;
  const bool box = config_.input_set == InputSet::kBox && !config_.input_box.empty();
  if (cone) {
    check_arg(agent_dims_.m == 3 * kNumLegs,
              "LocalPlanner: friction cone needs 12 force channels");
  }
  int input_rows = 0;
  if (cone) {
    input_rows = N * kNumLegs * kConeRowsPerLegStep;
  } else if (box) {
    for (const Box& b : config_.input_box)
      if (b.bounded()) input_rows += N;
  }
  box_channels_.clear();
  if (!config_.output_box.empty()) {
    for (int ch = 0; ch < agent_dims_.p; ++ch)
      if (config_.output_box[ch].bounded()) box_channels_.push_back(ch);
  }
  const int output_rows = static_cast<int>(box_channels_.size()) * N;

  cone_template_.A = Matrix::Zero(input_rows + output_rows, agent_dims_.m * N);
  cone_template_.lb = Vector::Constant(input_rows + output_rows, -kInf);
  cone_template_.ub = Vector::Constant(input_rows + output_rows, kInf);
  int r = 0;
  if (cone) {
    fill_cone_coefficients(cone_template_.A, 0, N, config_.mu, agent_dims_.m, 0);
    r = input_rows;
  } else if (box) {
    for (int ch = 0; ch < agent_dims_.m; ++ch) {
      if (!config_.input_box[ch].bounded()) continue;
      for (int k = 0; k < N; ++k) {
        cone_template_.A(r, k * agent_dims_.m + ch) = 1.0;
        cone_template_.lb(r) = config_.input_box[ch].lo;
        cone_template_.ub(r) = config_.input_box[ch].hi;
        ++r;
      }
    }
  }
  for (int k = 0; k < N; ++k) {
    for (int ch : box_channels_) {
      cone_template_.A.row(r) = G_f_.row(k * agent_dims_.p + ch);
      ++r;
    }
  }

  QpProblem problem;
  problem.H = H_;
  problem.f = Vector::Zero(H_.rows());
  problem.A_eq.resize(0, H_.rows());
  problem.b_eq.resize(0);
  problem.A_in = cone_template_.A;
  problem.lb = cone_template_.lb;
  problem.ub = cone_template_.ub;
  solver_.setup(problem, config_.qp);
  solver_ready_ = true;
}

PlanSolution LocalPlanner::solve(const AgentWindow& window, const AgentRoundData& round,
                                 const Vector& neighbor_term) {
  const int N = team_dims_.N;
  check_arg(neighbor_term.size() == agent_dims_.p * N,
            "LocalPlanner: neighbor term dim mismatch");
  check_arg(round.y_des.rows() == agent_dims_.p && round.y_des.cols() == N,
            "LocalPlanner: y_des dims mismatch");

  Vector w((agent_dims_.m + agent_dims_.p) * team_dims_.T_ini);
  w << window.u_ini(), window.y_ini();
  const Vector y_free = G_w_ * w + neighbor_term;

  const Vector y_des = flatten(round.y_des);
  Vector u_des = Vector::Zero(agent_dims_.m * N);
  if (round.u_des.size() > 0) {
    check_arg(round.u_des.rows() == agent_dims_.m && round.u_des.cols() == N,
              "LocalPlanner: u_des dims mismatch");
    u_des = flatten(round.u_des);
  }

  // Distributed cost penalizes the deviation from the desired input.
  Vector f = QG_f_.transpose() * (y_free - y_des);
  f -= apply_step_weight(config_.R, u_des, N);

  Vector lb = cone_template_.lb;
  Vector ub = cone_template_.ub;
  if (config_.input_set == InputSet::kFrictionCone) {
    check_arg(round.contacts != nullptr && round.contacts->steps() == N,
              "LocalPlanner: contact plan missing or short");
    fill_cone_bounds(*round.contacts, config_.f_min, config_.f_max, 0, lb, ub);
  }
  int r = static_cast<int>(cone_template_.A.rows()) -
          static_cast<int>(box_channels_.size()) * N;
  for (int k = 0; k < N; ++k) {
    for (int ch : box_channels_) {
      const Box& box = config_.output_box[ch];
      const double free_val = y_free(k * agent_dims_.p + ch);
      lb(r) = box.lo - free_val;
      ub(r) = box.hi - free_val;
      ++r;
    }
  }

  solver_.update_linear_cost(f);
  solver_.update_bounds(Vector(), lb, ub);
  QpResult qp = solver_.solve();

  PlanSolution sol;
  sol.u = unflatten(qp.z, agent_dims_.m, N);
  sol.y = unflatten(Vector(y_free + G_f_ * qp.z), agent_dims_.p, N);
  sol.qp = std::move(qp);
  last_u_ = flatten(sol.u);
  return sol;
}

void LocalPlanner::shift_warm_start(int n_apply) {
  if (last_u_.size() == 0) return;
  const int N = team_dims_.N;
  const int m = agent_dims_.m;
  Vector shifted(last_u_.size());
  for (int k = 0; k < N; ++k) {
    const int src = std::min(k + n_apply, N - 1);
    shifted.segment(k * m, m) = last_u_.segment(src * m, m);
  }
  solver_.warm_start(shifted, Vector(), Vector::Zero(cone_template_.rows()));
}

Vector build_neighbor_term(const BlockPartition& partition, int agent,
                           const std::vector<NeighborPacket>& packets) {
  const int n_a = partition.num_agents();
  check_arg(agent >= 0 && agent < n_a, "build_neighbor_term: bad agent");
  check_arg(static_cast<int>(packets.size()) == n_a - 1,
            "build_neighbor_term: need exactly one packet per peer");

  const TransitionDims& dims = partition.dims;
  const AgentDims& di = dims.agent_dims[agent];
  Vector term = Vector::Zero(di.p * dims.N);
  std::vector<bool> seen(n_a, false);
  for (const NeighborPacket& pkt : packets) {
    check_arg(pkt.agent_id >= 0 && pkt.agent_id < n_a && pkt.agent_id != agent,
              "build_neighbor_term: packet from unexpected agent");
    check_arg(!seen[pkt.agent_id], "build_neighbor_term: duplicate packet");
    seen[pkt.agent_id] = true;
    const AgentDims& dj = dims.agent_dims[pkt.agent_id];
    check_arg(pkt.u_ini.size() == dj.m * dims.T_ini &&
                  pkt.y_ini.size() == dj.p * dims.T_ini &&
                  pkt.u_opt.size() == dj.m * dims.N,
              "build_neighbor_term: packet dims mismatch");
    Vector ctx(pkt.u_ini.size() + pkt.y_ini.size() + pkt.u_opt.size());
    ctx << pkt.u_ini, pkt.y_ini, pkt.u_opt;
    term.noalias() += partition.blocks[agent][pkt.agent_id] * ctx;
  }
  return term;
}

// ---------------------------------------------------------------------------
// Full DeePC

DeepcSolution solve_deepc(const HankelBlocks& blocks, const Vector& u_ini,
                          const Vector& y_ini, const Matrix& y_des,
                          const PlannerConfig& config,
                          const std::vector<const ContactPlan*>& contacts) {
  const int m = blocks.input_dim();
  const int p = blocks.output_dim();
  const int T_ini = blocks.T_ini;
  const int N = blocks.N;
  const int n_g = blocks.num_cols();
  check_arg(u_ini.size() == m * T_ini, "solve_deepc: u_ini dim mismatch");
  check_arg(y_ini.size() == p * T_ini, "solve_deepc: y_ini dim mismatch");
  check_arg(y_des.rows() == p && y_des.cols() == N, "solve_deepc: y_des dims mismatch");
  check_arg(config.lambda_g > 0.0 && config.lambda_sigma > 0.0,
            "solve_deepc: regularization weights must be positive");

  const std::vector<AgentDims> agent_dims =
      blocks.agent_dims.empty() ? std::vector<AgentDims>{{m, p}} : blocks.agent_dims;
  check_uniform_dims(agent_dims);
  const int n_a = static_cast<int>(agent_dims.size());
  const TeamLayout layout(agent_dims);

  const int off_u = 0;
  const int off_y = m * N;
  const int off_g = off_y + p * N;
  const int off_s = off_g + n_g;
  const int n_z = off_s + p * T_ini;

  QpProblem qp;
  qp.H = Matrix::Zero(n_z, n_z);
  const Matrix Qstep = tile_block_diag(config.Q, n_a);
  const Matrix Rstep = tile_block_diag(config.R, n_a);
  check_arg(Qstep.rows() == p && Rstep.rows() == m, "solve_deepc: weight dims mismatch");
  for (int k = 0; k < N; ++k) {
    qp.H.block(off_u + k * m, off_u + k * m, m, m) = Rstep;
    qp.H.block(off_y + k * p, off_y + k * p, p, p) = Qstep;
  }
  qp.H.block(off_g, off_g, n_g, n_g) = config.lambda_g * Matrix::Identity(n_g, n_g);
  qp.H.block(off_s, off_s, p * T_ini, p * T_ini) =
      config.lambda_sigma * Matrix::Identity(p * T_ini, p * T_ini);

  qp.f = Vector::Zero(n_z);
  Vector y_des_flat = flatten(y_des);
  qp.f.segment(off_y, p * N) = -apply_step_weight(Qstep, y_des_flat, N);

  const int n_eq = m * T_ini + p * T_ini + m * N + p * N;
  qp.A_eq = Matrix::Zero(n_eq, n_z);
  qp.b_eq = Vector::Zero(n_eq);
  int r = 0;
  qp.A_eq.block(r, off_g, m * T_ini, n_g) = blocks.U_p;
  qp.b_eq.segment(r, m * T_ini) = u_ini;
  r += m * T_ini;
  qp.A_eq.block(r, off_g, p * T_ini, n_g) = blocks.Y_p;
  qp.A_eq.block(r, off_s, p * T_ini, p * T_ini) = Matrix::Identity(p * T_ini, p * T_ini);
  qp.b_eq.segment(r, p * T_ini) = y_ini;
  r += p * T_ini;
  qp.A_eq.block(r, off_g, m * N, n_g) = blocks.U_f;
  qp.A_eq.block(r, off_u, m * N, m * N) = -Matrix::Identity(m * N, m * N);
  r += m * N;
  qp.A_eq.block(r, off_g, p * N, n_g) = blocks.Y_f;
  qp.A_eq.block(r, off_y, p * N, p * N) = -Matrix::Identity(p * N, p * N);

  // Input and output set membership on the (u, y) segments.
  const bool cone = config.input_set == InputSet::kFrictionCone && !contacts.empty();
  const bool box = config.input_set == InputSet::kBox && !config.input_box.empty();
  int in_rows = 0;
  if (cone) {
    check_arg(static_cast<int>(contacts.size()) == n_a, "solve_deepc: contacts per agent");
    in_rows += n_a * N * kNumLegs * kConeRowsPerLegStep;
  } else if (box) {
    for (const Box& b : config.input_box)
      if (b.bounded()) in_rows += n_a * N;
  }
  std::vector<int> box_channels;
  if (!config.output_box.empty()) {
    for (int a = 0; a < n_a; ++a)
      for (int ch = 0; ch < agent_dims[a].p; ++ch)
        if (config.output_box[ch].bounded()) box_channels.push_back(layout.p_offset(a) + ch);
  }
  in_rows += static_cast<int>(box_channels.size()) * N;

  qp.A_in = Matrix::Zero(in_rows, n_z);
  qp.lb = Vector::Constant(in_rows, -kInf);
  qp.ub = Vector::Constant(in_rows, kInf);
  r = 0;
  if (cone) {
    for (int a = 0; a < n_a; ++a) {
      Matrix sub = Matrix::Zero(N * kNumLegs * kConeRowsPerLegStep, m * N);
      fill_cone_coefficients(sub, 0, N, config.mu, m, layout.m_offset(a));
      qp.A_in.block(r, off_u, sub.rows(), m * N) = sub;
      fill_cone_bounds(*contacts[a], config.f_min, config.f_max, r, qp.lb, qp.ub);
      r += static_cast<int>(sub.rows());
    }
  } else if (box) {
    for (int a = 0; a < n_a; ++a) {
      for (int ch = 0; ch < agent_dims[a].m; ++ch) {
        if (!config.input_box[ch].bounded()) continue;
        for (int k = 0; k < N; ++k) {
          qp.A_in(r, off_u + k * m + layout.m_offset(a) + ch) = 1.0;
          qp.lb(r) = config.input_box[ch].lo;
          qp.ub(r) = config.input_box[ch].hi;
          ++r;
        }
      }
    }
  }
  for (int k = 0; k < N; ++k) {
    for (int gch : box_channels) {
      int local_ch = gch;
      int agent = 0;
      while (local_ch >= agent_dims[agent].p) {
        local_ch -= agent_dims[agent].p;
        ++agent;
      }
      qp.A_in(r, off_y + k * p + gch) = 1.0;
      qp.lb(r) = config.output_box[local_ch].lo;
      qp.ub(r) = config.output_box[local_ch].hi;
      ++r;
    }
  }

  QpResult result = QpSolver::solve_once(qp, config.qp);

  DeepcSolution sol;
  sol.u = unflatten(Vector(result.z.segment(off_u, m * N)), m, N);
  sol.y = unflatten(Vector(result.z.segment(off_y, p * N)), p, N);
  sol.g = result.z.segment(off_g, n_g);
  sol.sigma = result.z.segment(off_s, p * T_ini);
  sol.qp = std::move(result);
  return sol;
}

PlanSolution solve_centralized(const TransitionMatrix& tm,
                               const std::vector<AgentWindow>& windows,
                               const std::vector<AgentRoundData>& round,
                               const PlannerConfig& config) {
  CentralizedPlanner planner(tm, config);
  return planner.solve(windows, round);
}

PlanSolution solve_local(const BlockPartition& partition, int agent,
                         const AgentWindow& window, const AgentRoundData& round,
                         const Vector& neighbor_term, const PlannerConfig& config) {
  LocalPlanner planner(partition, agent, config);
  return planner.solve(window, round, neighbor_term);
}

}  // namespace ddpc
