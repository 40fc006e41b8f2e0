#pragma once

#include <vector>

#include "ddpc/trajectory_data.hpp"
#include "ddpc/types.hpp"

namespace ddpc {

// Relative singular value cutoff used for numerical rank decisions.
inline constexpr double kDefaultRankTol = 1e-10;

// Hankel matrix of depth L: column c is the length-L window of the signal
// starting at sample c, stacked sample-major. signal is q x T, one column
// per sample. Result is qL x (T - L + 1).
Matrix build_hankel(const Matrix& signal, int depth);

// A signal is persistently exciting of order L when its depth-L Hankel
// matrix has full row rank. Rank counts singular values above
// rel_tol * sigma_max. Returns false immediately when the column count
// cannot support full row rank.
bool is_persistently_exciting(const Matrix& signal, int order,
                              double rel_tol = kDefaultRankTol);

// Data-length requirement for a sufficiently rich Hankel matrix:
// T >= (m + 1)(T_ini + N + n) - 1.
bool check_data_length(int m, int n, int T_ini, int N, int T);
int data_length_bound(int m, int n, int T_ini, int N);

// The four blocks cut from the depth-(T_ini+N) Hankel matrices of a
// recording: past rows estimate the initial condition, future rows are
// used for prediction.
struct HankelBlocks {
  Matrix U_p, Y_p, U_f, Y_f;
  int T_ini = 0;
  int N = 0;
  std::vector<AgentDims> agent_dims;  // carried along for block partitioning

  int depth() const { return T_ini + N; }
  int num_cols() const { return static_cast<int>(U_p.cols()); }
  int input_dim() const { return static_cast<int>(U_p.rows()) / (T_ini > 0 ? T_ini : 1); }
  int output_dim() const { return static_cast<int>(Y_p.rows()) / (T_ini > 0 ? T_ini : 1); }
};

HankelBlocks split_past_future(const TrajectoryData& data, int T_ini, int N);

// Least-squares membership test from the fundamental lemma: (u_bar, y_bar)
// of length L is accepted when the relative residual of
// [H_L(u); H_L(y)] g = [u_bar; y_bar] falls at or below residual_tol.
bool is_trajectory(const HankelBlocks& blocks, const Vector& u_bar,
                   const Vector& y_bar, double residual_tol);
// The relative residual itself, for diagnostics.
double trajectory_residual(const HankelBlocks& blocks, const Vector& u_bar,
                           const Vector& y_bar);

}  // namespace ddpc
