#include "ddpc/lti.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <random>

namespace ddpc {

void LtiPlant::validate() const {
  check_arg(A.rows() == A.cols(), "LtiPlant: A must be square");
  check_arg(B.rows() == A.rows(), "LtiPlant: B row count mismatch");
  check_arg(C.cols() == A.rows(), "LtiPlant: C column count mismatch");
  check_arg(D.rows() == C.rows() && D.cols() == B.cols(), "LtiPlant: D dims mismatch");
  check_arg(x.size() == A.rows(), "LtiPlant: state length mismatch");
}

Vector LtiPlant::step(const Vector& u) {
  check_arg(u.size() == B.cols(), "LtiPlant::step: input dim mismatch");
  Vector y = C * x + D * u;
  x = A * x + B * u;
  return y;
}

Matrix simulate(const LtiPlant& plant, const Matrix& u_seq) {
  LtiPlant copy = plant;
  const int T = static_cast<int>(u_seq.cols());
  Matrix y(plant.output_dim(), T);
  for (int k = 0; k < T; ++k) y.col(k) = copy.step(u_seq.col(k));
  return y;
}

LtiPlant random_stable_lti(int n, int m, int p, std::uint64_t seed, double radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto fill = [&](Matrix& mat) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j)
      for (Eigen::Index i = 0; i < mat.rows(); ++i) mat(i, j) = unif(rng);
  };

  LtiPlant plant;
  plant.A.resize(n, n);
  plant.B.resize(n, m);
  plant.C.resize(p, n);
  plant.D.resize(p, m);
  fill(plant.A);
  fill(plant.B);
  fill(plant.C);
  fill(plant.D);
  plant.D *= 0.1;

  const double rho = plant.A.eigenvalues().cwiseAbs().maxCoeff();
  if (rho > 0.0) plant.A *= radius / rho;
  plant.x = Vector::Zero(n);
  return plant;
}

bool is_minimal(const LtiPlant& plant, double rank_tol) {
  const int n = plant.state_dim();
  Matrix ctrb(n, n * plant.input_dim());
  ctrb.leftCols(plant.input_dim()) = plant.B;
  for (int i = 1; i < n; ++i) {
    ctrb.middleCols(i * plant.input_dim(), plant.input_dim()) =
        plant.A * ctrb.middleCols((i - 1) * plant.input_dim(), plant.input_dim());
  }
  Matrix obsv(n * plant.output_dim(), n);
  obsv.topRows(plant.output_dim()) = plant.C;
  for (int i = 1; i < n; ++i) {
    obsv.middleRows(i * plant.output_dim(), plant.output_dim()) =
        obsv.middleRows((i - 1) * plant.output_dim(), plant.output_dim()) * plant.A;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr_c(ctrb);
  qr_c.setThreshold(rank_tol);
  Eigen::ColPivHouseholderQR<Matrix> qr_o(obsv);
  qr_o.setThreshold(rank_tol);
  return qr_c.rank() == n && qr_o.rank() == n;
}

Matrix random_input(int m, int T, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-amplitude, amplitude);
  Matrix u(m, T);
  for (int k = 0; k < T; ++k)
    for (int i = 0; i < m; ++i) u(i, k) = unif(rng);
  return u;
}

LtiPlant coupled_team(const std::vector<LtiPlant>& agents, double eps) {
  check_arg(!agents.empty(), "coupled_team: no agents");
  int n = 0, m = 0, p = 0;
  for (const LtiPlant& a : agents) {
    n += a.state_dim();
    m += a.input_dim();
    p += a.output_dim();
  }
  LtiPlant team;
  team.A = Matrix::Zero(n, n);
  team.B = Matrix::Zero(n, m);
  team.C = Matrix::Zero(p, n);
  team.D = Matrix::Zero(p, m);
  int no = 0, mo = 0, po = 0;
  std::vector<int> state_offsets;
  for (const LtiPlant& a : agents) {
    state_offsets.push_back(no);
    team.A.block(no, no, a.state_dim(), a.state_dim()) = a.A;
    team.B.block(no, mo, a.state_dim(), a.input_dim()) = a.B;
    team.C.block(po, no, a.output_dim(), a.state_dim()) = a.C;
    team.D.block(po, mo, a.output_dim(), a.input_dim()) = a.D;
    no += a.state_dim();
    mo += a.input_dim();
    po += a.output_dim();
  }
  if (eps != 0.0) {
    for (std::size_t i = 0; i + 1 < agents.size(); ++i) {
      const int ni = agents[i].state_dim();
      const int nj = agents[i + 1].state_dim();
      const int oi = state_offsets[i];
      const int oj = state_offsets[i + 1];
      const int d = std::min(ni, nj);
      team.A.block(oi, oj, d, d) += eps * Matrix::Identity(d, d);
      team.A.block(oj, oi, d, d) += eps * Matrix::Identity(d, d);
    }
    // Rescale if coupling pushed the spectral radius to 1 or beyond.
    const double rho = team.A.eigenvalues().cwiseAbs().maxCoeff();
    if (rho >= 0.98) team.A *= 0.95 / rho;
  }
  team.x = Vector::Zero(n);
  return team;
}

TrajectoryData record_lti_data(const LtiPlant& plant, const std::vector<AgentDims>& agent_dims,
                               int T, std::uint64_t seed, double amplitude,
                               double sample_rate, double output_noise_sigma) {
  TrajectoryData data;
  data.sample_rate = sample_rate;
  data.agent_dims = agent_dims;
  data.u = random_input(plant.input_dim(), T, seed, amplitude);

  LtiPlant copy = plant;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < copy.state_dim(); ++i) copy.x(i) = unif(rng);
  data.y = simulate(copy, data.u);
  if (output_noise_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, output_noise_sigma);
    for (int k = 0; k < T; ++k)
      for (int i = 0; i < data.p_total(); ++i) data.y(i, k) += gauss(rng);
  }
  return data;
}

SteadyState steady_state_for(const LtiPlant& plant, const Vector& y_ref) {
  check_arg(y_ref.size() == plant.output_dim(), "steady_state_for: bad reference dim");
  const int n = plant.state_dim();
  const int m = plant.input_dim();
  const int p = plant.output_dim();
  // Solve [I-A, -B; C, D] [x; u] = [0; y_ref] in the least-squares sense.
  Matrix K(n + p, n + m);
  K.topLeftCorner(n, n) = Matrix::Identity(n, n) - plant.A;
  K.topRightCorner(n, m) = -plant.B;
  K.bottomLeftCorner(p, n) = plant.C;
  K.bottomRightCorner(p, m) = plant.D;
  Vector rhs = Vector::Zero(n + p);
  rhs.tail(p) = y_ref;
  const Vector xu = K.colPivHouseholderQr().solve(rhs);
  SteadyState ss;
  ss.u = xu.tail(m);
  ss.y = plant.C * xu.head(n) + plant.D * ss.u;
  return ss;
}

}  // namespace ddpc
