#pragma once

#include <cstdint>
#include <vector>

#include "ddpc/trajectory_data.hpp"
#include "ddpc/types.hpp"

namespace ddpc {

// Discrete-time state-space plant x+ = Ax + Bu, y = Cx + Du. The matrices
// are known to the plant but hidden from any planner; planners see only
// input/output samples.
struct LtiPlant {
  Matrix A, B, C, D;
  Vector x;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  int output_dim() const { return static_cast<int>(C.rows()); }

  void validate() const;
  // y = Cx + Du, then x <- Ax + Bu.
  Vector step(const Vector& u);
};

// Output response from the plant's current state under the given input
// sequence (one column per sample). Does not modify the plant.
Matrix simulate(const LtiPlant& plant, const Matrix& u_seq);

// Random stable plant with spectral radius scaled to `radius`. Generic
// draws are controllable and observable almost surely; callers that need
// a guarantee should check with is_minimal().
LtiPlant random_stable_lti(int n, int m, int p, std::uint64_t seed, double radius = 0.8);
bool is_minimal(const LtiPlant& plant, double rank_tol = 1e-9);

// i.i.d. uniform(-amplitude, amplitude) input, m x T.
Matrix random_input(int m, int T, std::uint64_t seed, double amplitude = 1.0);

// Block-diagonal team plant from per-agent blocks, with optional uniform
// state coupling `eps` between consecutive agents' A blocks.
LtiPlant coupled_team(const std::vector<LtiPlant>& agents, double eps);

// Record a data trajectory by driving the plant with random input from a
// random initial state. sample_rate is metadata only.
TrajectoryData record_lti_data(const LtiPlant& plant, const std::vector<AgentDims>& agent_dims,
                               int T, std::uint64_t seed, double amplitude = 1.0,
                               double sample_rate = 100.0, double output_noise_sigma = 0.0);

// Input u_ss that holds output y_ref in steady state, via least squares on
// (I - A, B, C, D). Returns the achieved steady-state output too.
struct SteadyState {
  Vector u;
  Vector y;
};
SteadyState steady_state_for(const LtiPlant& plant, const Vector& y_ref);

}  // namespace ddpc
