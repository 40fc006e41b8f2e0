#pragma once

#include <string>
#include <vector>

#include "ddpc/hankel.hpp"
#include "ddpc/types.hpp"

namespace ddpc {

struct TransitionDims {
  int m_total = 0;
  int p_total = 0;
  int T_ini = 0;
  int N = 0;
  std::vector<AgentDims> agent_dims;

  // Context layout is [u_ini; y_ini; u], each segment sample-major with
  // agent channels interleaved inside a sample.
  int context_dim() const { return m_total * T_ini + p_total * T_ini + m_total * N; }
  int output_dim() const { return p_total * N; }
};

// N-step predictor G = Y_f * pinv([U_p; Y_p; U_f]) mapping a context
// vector to the stacked predicted output.
struct TransitionMatrix {
  Matrix G;
  TransitionDims dims;
  double svd_cutoff = 1e-8;
  int stack_rank = 0;       // numerical rank of [U_p; Y_p; U_f] at the cutoff
  bool rank_warning = false;  // stack was rank deficient (degenerate data)
};

inline constexpr double kDefaultSvdCutoff = 1e-8;

// Pseudo-inverse via SVD; singular values at or below
// svd_cutoff * sigma_max are dropped.
TransitionMatrix fit_transition(const HankelBlocks& blocks,
                                double svd_cutoff = kDefaultSvdCutoff);

Vector predict(const TransitionMatrix& tm, const Vector& u_ini, const Vector& y_ini,
               const Vector& u);

// Minimum-norm g with [U_p; Y_p; U_f] g ~= [u_ini; y_ini; u]. Diagnostic
// companion to fit_transition.
Vector approximate_g(const HankelBlocks& blocks, const Vector& u_ini, const Vector& y_ini,
                     const Vector& u, double svd_cutoff = kDefaultSvdCutoff);

// Per-agent-pair view of G. blocks[i][j] maps agent j's contiguous context
// [u_ini^j; y_ini^j; u^j] to agent i's stacked predicted output. row_maps
// and col_maps are the gather indices from the interleaved global ordering,
// so scattering the blocks back through them reassembles G exactly.
struct BlockPartition {
  std::vector<std::vector<Matrix>> blocks;
  std::vector<std::vector<int>> row_maps;  // per agent i, length p_i * N
  std::vector<std::vector<int>> col_maps;  // per agent j, length (m_j + p_j) T_ini + m_j N
  TransitionDims dims;

  int num_agents() const { return static_cast<int>(blocks.size()); }
  // Extract agent j's contiguous context from a full interleaved context.
  Vector gather_context(int j, const Vector& full_context) const;
  // Scatter all blocks back into a (p_total N) x context_dim matrix.
  Matrix reassemble() const;
};

BlockPartition partition_blocks(const TransitionMatrix& tm);

// Binary serialization: single-line JSON header followed by the row-major
// little-endian float64 payload of G.
void save_transition(const TransitionMatrix& tm, const std::string& path,
                     const std::string& provenance_hash = "");
TransitionMatrix load_transition(const std::string& path);
std::string transition_provenance(const std::string& path);  // hash stored in the header

}  // namespace ddpc
