#pragma once

#include <Eigen/Dense>

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Input/output channel counts for one agent.
struct AgentDims {
  int m = 0;
  int p = 0;
};

inline bool operator==(const AgentDims& a, const AgentDims& b) {
  return a.m == b.m && a.p == b.p;
}

// Channel bookkeeping for a team of agents whose per-sample vectors are
// stacked agent-by-agent: u_k = col(u_k^1, ..., u_k^{n_a}).
class TeamLayout {
 public:
  TeamLayout() = default;
  explicit TeamLayout(std::vector<AgentDims> dims) : dims_(std::move(dims)) {
    m_offsets_.reserve(dims_.size());
    p_offsets_.reserve(dims_.size());
    for (const AgentDims& d : dims_) {
      if (d.m < 0 || d.p < 0) throw std::invalid_argument("TeamLayout: negative channel count");
      m_offsets_.push_back(m_total_);
      p_offsets_.push_back(p_total_);
      m_total_ += d.m;
      p_total_ += d.p;
    }
  }

  int num_agents() const { return static_cast<int>(dims_.size()); }
  int m_total() const { return m_total_; }
  int p_total() const { return p_total_; }
  const std::vector<AgentDims>& dims() const { return dims_; }
  const AgentDims& agent(int i) const { return dims_.at(i); }
  // Offset of agent i's channels inside one stacked sample.
  int m_offset(int i) const { return m_offsets_.at(i); }
  int p_offset(int i) const { return p_offsets_.at(i); }

 private:
  std::vector<AgentDims> dims_;
  std::vector<int> m_offsets_, p_offsets_;
  int m_total_ = 0;
  int p_total_ = 0;
};

inline void check_arg(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace ddpc
