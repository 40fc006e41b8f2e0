#pragma once

#include <string>
#include <vector>

#include "ddpc/types.hpp"

namespace ddpc {

// Synchronized input/output recording. Samples are column vectors, one
// column per time step; agent channels are interleaved within a sample.
struct TrajectoryData {
  Matrix u;  // m_total x T
  Matrix y;  // p_total x T
  double sample_rate = 0.0;
  std::vector<AgentDims> agent_dims;

  int length() const { return static_cast<int>(u.cols()); }
  int m_total() const { return static_cast<int>(u.rows()); }
  int p_total() const { return static_cast<int>(y.rows()); }

  // Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

// CSV of rows `k, u_1..u_m, y_1..y_p` with a JSON sidecar carrying
// {sample_rate, agent_dims, m_total, p_total, T}. Values are written with
// 17 significant digits so a round trip is bit exact.
void save_trajectory(const TrajectoryData& data, const std::string& csv_path,
                     const std::string& json_path);
TrajectoryData load_trajectory(const std::string& csv_path, const std::string& json_path);

}  // namespace ddpc
