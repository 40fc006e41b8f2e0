#include "ddpc/hankel.hpp"

#include <Eigen/SVD>

namespace ddpc {

Matrix build_hankel(const Matrix& signal, int depth) {
  const int q = static_cast<int>(signal.rows());
  const int T = static_cast<int>(signal.cols());
  check_arg(q >= 1 && T >= 1, "build_hankel: empty signal");
  check_arg(depth >= 1, "build_hankel: depth must be positive");
  check_arg(depth <= T, "build_hankel: depth exceeds signal length");

  const int n_cols = T - depth + 1;
  Matrix H(q * depth, n_cols);
  for (int r = 0; r < depth; ++r) {
    H.middleRows(r * q, q) = signal.middleCols(r, n_cols);
  }
  return H;
}

bool is_persistently_exciting(const Matrix& signal, int order, double rel_tol) {
  const int q = static_cast<int>(signal.rows());
  const int T = static_cast<int>(signal.cols());
  check_arg(order >= 1, "is_persistently_exciting: order must be positive");
  check_arg(T >= order, "is_persistently_exciting: signal shorter than order");

  const int full_rank = q * order;
  if (T - order + 1 < full_rank) return false;  // too few columns for full row rank

  const Matrix H = build_hankel(signal, order);
  Eigen::BDCSVD<Matrix> svd(H);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return false;
  const double cutoff = rel_tol * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank == full_rank;
}

int data_length_bound(int m, int n, int T_ini, int N) {
  return (m + 1) * (T_ini + N + n) - 1;
}

bool check_data_length(int m, int n, int T_ini, int N, int T) {
  check_arg(m > 0 && n > 0 && T_ini > 0 && N > 0 && T > 0,
            "check_data_length: arguments must be positive");
  return T >= data_length_bound(m, n, T_ini, N);
}

HankelBlocks split_past_future(const TrajectoryData& data, int T_ini, int N) {
  data.validate();
  check_arg(T_ini >= 1 && N >= 1, "split_past_future: horizons must be positive");
  const int L = T_ini + N;
  check_arg(data.length() >= L, "split_past_future: data shorter than T_ini + N");

  const int m = data.m_total();
  const int p = data.p_total();
  const Matrix Hu = build_hankel(data.u, L);
  const Matrix Hy = build_hankel(data.y, L);

  HankelBlocks blocks;
  blocks.T_ini = T_ini;
  blocks.N = N;
  blocks.agent_dims = data.agent_dims;
  blocks.U_p = Hu.topRows(m * T_ini);
  blocks.U_f = Hu.bottomRows(m * N);
  blocks.Y_p = Hy.topRows(p * T_ini);
  blocks.Y_f = Hy.bottomRows(p * N);
  return blocks;
}

double trajectory_residual(const HankelBlocks& blocks, const Vector& u_bar,
                           const Vector& y_bar) {
  const int mu_rows = static_cast<int>(blocks.U_p.rows() + blocks.U_f.rows());
  const int my_rows = static_cast<int>(blocks.Y_p.rows() + blocks.Y_f.rows());
  check_arg(u_bar.size() == mu_rows, "is_trajectory: u_bar has wrong length");
  check_arg(y_bar.size() == my_rows, "is_trajectory: y_bar has wrong length");

  const int n_cols = blocks.num_cols();
  Matrix stack(mu_rows + my_rows, n_cols);
  stack.topRows(blocks.U_p.rows()) = blocks.U_p;
  stack.middleRows(blocks.U_p.rows(), blocks.U_f.rows()) = blocks.U_f;
  stack.middleRows(mu_rows, blocks.Y_p.rows()) = blocks.Y_p;
  stack.bottomRows(blocks.Y_f.rows()) = blocks.Y_f;

  Vector rhs(mu_rows + my_rows);
  rhs << u_bar, y_bar;

  const Vector g = stack.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  const double rhs_norm = rhs.norm();
  const double res = (stack * g - rhs).norm();
  return rhs_norm > 0.0 ? res / rhs_norm : res;
}

bool is_trajectory(const HankelBlocks& blocks, const Vector& u_bar,
                   const Vector& y_bar, double residual_tol) {
  return trajectory_residual(blocks, u_bar, y_bar) <= residual_tol;
}

}  // namespace ddpc
