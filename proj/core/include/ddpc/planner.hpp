#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "ddpc/gait.hpp"
#include "ddpc/qp.hpp"
#include "ddpc/transition.hpp"
#include "ddpc/types.hpp"

namespace ddpc {

struct Box {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool bounded() const { return std::isfinite(lo) || std::isfinite(hi); }
};

// Shape of the feasible input set U.
enum class InputSet { kNone, kFrictionCone, kBox };

// Weights and horizons shared by every predictive-control mode. Q and R are
// per-step, per-agent weights; all agents carry the same weights.
struct PlannerConfig {
  int T_ini = 10;
  int N = 25;
  InputSet input_set = InputSet::kNone;
  Matrix Q;  // p_i x p_i, positive definite
  Matrix R;  // m_i x m_i, positive definite
  double lambda_g = 10.0;      // DeePC mode only
  double lambda_sigma = 1e5;   // DeePC mode only
  int n_apply = 4;
  double sample_rate = 100.0;
  double mu = 0.6;
  double f_min = 1.0;   // stance vertical force floor, newtons
  double f_max = 150.0;
  std::vector<Box> output_box;  // per output channel; empty = unbounded
  std::vector<Box> input_box;   // per input channel, generic plants only
  bool harmonize_costs = false;  // centralized cost also penalizes u - u_des
  QpSettings qp;

  double replan_period() const { return n_apply / sample_rate; }
  // Trot force planning weights: Q = diag(1e6,1e5,1e5,2e5,1e5,1e4) over
  // (z, vx, vy, roll, pitch, wz), R = I_4 (x) diag(0.05,0.05,0.5), output
  // box z in [0.15, 0.35] m and |roll|,|pitch| <= 0.3 rad.
  static PlannerConfig locomotion_defaults();
  void validate(const AgentDims& dims) const;
};

// Rolling (u_ini, y_ini) measurement history of one agent; the feedback
// into the behavioral model.
class AgentWindow {
 public:
  AgentWindow() = default;
  AgentWindow(int m, int p, int T_ini);

  void push(const Vector& u, const Vector& y);
  bool warm() const { return filled_ >= T_ini_; }
  int T_ini() const { return T_ini_; }
  Vector u_ini() const;  // m * T_ini, oldest sample first
  Vector y_ini() const;

 private:
  int m_ = 0, p_ = 0, T_ini_ = 0, filled_ = 0, head_ = 0;
  Matrix u_hist_, y_hist_;  // columns as ring buffer
};

// Joystick-style command, expanded with zero-order hold and level attitude.
struct ReferenceCommand {
  double v_x = 0.0, v_y = 0.0;  // m/s
  double omega_z = 0.0;         // rad/s
  double z = 0.26;              // m

  Vector to_output() const;       // col(z, vx, vy, 0, 0, wz)
  Matrix expand(int steps) const; // 6 x steps, constant
};

// Two-sided linear inequality rows lb <= A u <= ub over one stacked input
// trajectory. Swing-leg pins are rows with lb == ub.
struct LinearConstraints {
  Matrix A;
  Vector lb, ub;
  int rows() const { return static_cast<int>(A.rows()); }
};

// Linearized friction cone over the horizon: per stance leg and step,
// f_z in [f_min, f_max], |f_x| <= (mu/sqrt(2)) f_z, |f_y| <= (mu/sqrt(2)) f_z;
// swing legs are pinned to zero force. Coefficients do not depend on the
// stance pattern, only the bounds do, so a fixed QP factorization survives
// contact changes.
LinearConstraints build_friction_constraints(const ContactPlan& plan, double mu,
                                             double f_min, double f_max);
// True when the concrete force trajectory (12 x N, leg-major xyz) satisfies
// the constraint set within tol.
bool satisfies_constraints(const LinearConstraints& c, const Vector& u, double tol = 1e-9);

// Static support distribution: vertical force mass*g0/N_c on each stance
// leg, zero on swing legs. Steps with no stance legs are treated as flight
// and get all zeros.
Matrix nominal_input(const ContactPlan& plan, double agent_mass, double g0);
Vector nominal_input_sample(const std::array<bool, kNumLegs>& stance, double agent_mass,
                            double g0);

// Decision-variable accounting: one agent contributes N*(m_i + p_i)
// variables to the planning program, N*m_i once the output is eliminated
// by substituting the model equality.
int local_decision_count(const AgentDims& dims, int N, bool after_output_elimination);
int centralized_decision_count(const std::vector<AgentDims>& dims, int N,
                               bool after_output_elimination);

struct PlanSolution {
  Matrix u;  // inputs, one column per predicted step
  Matrix y;  // predicted outputs recovered from the model equality
  QpResult qp;
};

// Per-round data for one agent.
struct AgentRoundData {
  Matrix y_des;  // p_i x N
  Matrix u_des;  // m_i x N, zeros when absent
  const ContactPlan* contacts = nullptr;  // locomotion only
};

// Centralized predictive controller over the combined transition matrix:
// only u stays a decision variable, y is substituted out. The QP matrices
// are assembled once; rounds update vectors and bounds and reuse the
// factorization.
class CentralizedPlanner {
 public:
  CentralizedPlanner(const TransitionMatrix& tm, const PlannerConfig& config);

  PlanSolution solve(const std::vector<AgentWindow>& windows,
                     const std::vector<AgentRoundData>& round);
  // Shift stored warm-start state by n_apply steps before the next solve.
  void shift_warm_start(int n_apply);

  const TransitionDims& dims() const { return dims_; }

 private:
  void assemble_static();

  TransitionDims dims_;
  PlannerConfig config_;
  Matrix G_p_, G_f_, QG_f_;  // QG_f = Q_N * G_f
  Matrix H_;
  LinearConstraints cone_template_;  // input rows, coefficients fixed
  std::vector<int> box_channels_;    // bounded output channels (global index per step)
  QpSolver solver_;
  bool solver_ready_ = false;
  Vector last_u_;
};

// One agent's local program in the distributed scheme. The coupling with
// peers enters as a constant offset computed from one-round-old packets.
class LocalPlanner {
 public:
  LocalPlanner(const BlockPartition& partition, int agent, const PlannerConfig& config);

  PlanSolution solve(const AgentWindow& window, const AgentRoundData& round,
                     const Vector& neighbor_term);
  void shift_warm_start(int n_apply);

  int agent() const { return agent_; }
  const AgentDims& dims() const { return agent_dims_; }

 private:
  void assemble_static();

  int agent_ = 0;
  AgentDims agent_dims_;
  TransitionDims team_dims_;
  PlannerConfig config_;
  Matrix G_w_, G_f_, QG_f_;
  Matrix H_;
  LinearConstraints cone_template_;
  std::vector<int> box_channels_;
  QpSolver solver_;
  bool solver_ready_ = false;
  Vector last_u_;
};

// Constant coupling offset for agent i: sum over peers j of
// G_{i,j} [u_ini^j; y_ini^j; u_opt^j] from the packets of the previous
// round. Exactly one packet per peer is required.
struct NeighborPacket;  // bus.hpp
Vector build_neighbor_term(const BlockPartition& partition, int agent,
                           const std::vector<NeighborPacket>& packets);

struct DeepcSolution {
  Matrix u;
  Matrix y;
  Vector g;
  Vector sigma;
  QpResult qp;
};

// Full regularized DeePC program with decision variables (u, y, g, sigma):
// min sum_k |y_k - y_des_k|^2_Q + |u_k|^2_R + lambda_g |g|^2
//     + lambda_sigma |sigma|^2
// s.t. [U_p; Y_p; U_f; Y_f] g + [0; sigma; 0; 0] = [u_ini; y_ini; u; y]
// and per-step input/output set membership. Combined team formulation.
DeepcSolution solve_deepc(const HankelBlocks& blocks, const Vector& u_ini,
                          const Vector& y_ini, const Matrix& y_des,
                          const PlannerConfig& config,
                          const std::vector<const ContactPlan*>& contacts = {});

// One-shot wrappers around the planner classes (tests, diagnostics).
PlanSolution solve_centralized(const TransitionMatrix& tm,
                               const std::vector<AgentWindow>& windows,
                               const std::vector<AgentRoundData>& round,
                               const PlannerConfig& config);
PlanSolution solve_local(const BlockPartition& partition, int agent,
                         const AgentWindow& window, const AgentRoundData& round,
                         const Vector& neighbor_term, const PlannerConfig& config);

}  // namespace ddpc
