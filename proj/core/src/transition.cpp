#include "ddpc/transition.hpp"

#include <Eigen/SVD>

#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ddpc/serialization.hpp"

namespace ddpc {

using nlohmann::json;

namespace {

Matrix context_stack(const HankelBlocks& blocks) {
  const int rows = static_cast<int>(blocks.U_p.rows() + blocks.Y_p.rows() + blocks.U_f.rows());
  Matrix stack(rows, blocks.num_cols());
  stack.topRows(blocks.U_p.rows()) = blocks.U_p;
  stack.middleRows(blocks.U_p.rows(), blocks.Y_p.rows()) = blocks.Y_p;
  stack.bottomRows(blocks.U_f.rows()) = blocks.U_f;
  return stack;
}

TransitionDims dims_from_blocks(const HankelBlocks& blocks) {
  TransitionDims dims;
  dims.T_ini = blocks.T_ini;
  dims.N = blocks.N;
  dims.m_total = blocks.input_dim();
  dims.p_total = blocks.output_dim();
  dims.agent_dims = blocks.agent_dims.empty()
                        ? std::vector<AgentDims>{{dims.m_total, dims.p_total}}
                        : blocks.agent_dims;
  return dims;
}

void check_context(const TransitionDims& dims, const Vector& u_ini, const Vector& y_ini,
                   const Vector& u) {
  check_arg(u_ini.size() == dims.m_total * dims.T_ini, "context: u_ini length mismatch");
  check_arg(y_ini.size() == dims.p_total * dims.T_ini, "context: y_ini length mismatch");
  check_arg(u.size() == dims.m_total * dims.N, "context: u length mismatch");
}

}  // namespace

TransitionMatrix fit_transition(const HankelBlocks& blocks, double svd_cutoff) {
  check_arg(blocks.num_cols() >= 1, "fit_transition: empty Hankel blocks");
  check_arg(svd_cutoff >= 0.0, "fit_transition: negative svd_cutoff");
  const Matrix stack = context_stack(blocks);
  check_arg(all_finite(stack) && all_finite(blocks.Y_f), "fit_transition: non-finite data");

  TransitionMatrix tm;
  tm.dims = dims_from_blocks(blocks);
  tm.svd_cutoff = svd_cutoff;
  check_arg(stack.rows() == tm.dims.context_dim(), "fit_transition: inconsistent block dims");

  const double max_abs = stack.cwiseAbs().maxCoeff();
  if (max_abs == 0.0) {
    // pinv of the zero matrix is zero; flag as degenerate.
    tm.G = Matrix::Zero(tm.dims.output_dim(), tm.dims.context_dim());
    tm.stack_rank = 0;
    tm.rank_warning = true;
    return tm;
  }

  Eigen::BDCSVD<Matrix> svd(stack, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = svd_cutoff * sv(0);
  const int k = static_cast<int>(sv.size());
  int rank = 0;
  for (int i = 0; i < k; ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  tm.stack_rank = rank;
  tm.rank_warning = rank < std::min<Eigen::Index>(stack.rows(), stack.cols());

  // G = Y_f V diag(1/sigma) U^T over the retained spectrum.
  const Matrix yv = blocks.Y_f * svd.matrixV().leftCols(rank);
  tm.G = (yv * sv.head(rank).cwiseInverse().asDiagonal()) *
         svd.matrixU().leftCols(rank).transpose();
  return tm;
}

Vector predict(const TransitionMatrix& tm, const Vector& u_ini, const Vector& y_ini,
               const Vector& u) {
  check_context(tm.dims, u_ini, y_ini, u);
  Vector context(tm.dims.context_dim());
  context << u_ini, y_ini, u;
  return tm.G * context;
}

Vector approximate_g(const HankelBlocks& blocks, const Vector& u_ini, const Vector& y_ini,
                     const Vector& u, double svd_cutoff) {
  const TransitionDims dims = dims_from_blocks(blocks);
  check_context(dims, u_ini, y_ini, u);
  const Matrix stack = context_stack(blocks);
  Vector context(stack.rows());
  context << u_ini, y_ini, u;

  Eigen::BDCSVD<Matrix> svd(stack, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return Vector::Zero(stack.cols());
  const double cutoff = svd_cutoff * sv(0);
  Vector coeffs = svd.matrixU().transpose() * context;
  for (int i = 0; i < sv.size(); ++i) {
    coeffs(i) = sv(i) > cutoff ? coeffs(i) / sv(i) : 0.0;
  }
  return svd.matrixV() * coeffs;
}

Vector BlockPartition::gather_context(int j, const Vector& full_context) const {
  const std::vector<int>& map = col_maps.at(j);
  Vector out(map.size());
  for (std::size_t k = 0; k < map.size(); ++k) out(k) = full_context(map[k]);
  return out;
}

Matrix BlockPartition::reassemble() const {
  Matrix G = Matrix::Zero(dims.output_dim(), dims.context_dim());
  for (int i = 0; i < num_agents(); ++i) {
    for (int j = 0; j < num_agents(); ++j) {
      const Matrix& b = blocks[i][j];
      for (Eigen::Index r = 0; r < b.rows(); ++r)
        for (Eigen::Index c = 0; c < b.cols(); ++c) G(row_maps[i][r], col_maps[j][c]) = b(r, c);
    }
  }
  return G;
}

BlockPartition partition_blocks(const TransitionMatrix& tm) {
  const TransitionDims& dims = tm.dims;
  check_arg(!dims.agent_dims.empty(), "partition_blocks: agent_dims missing");
  const TeamLayout layout(dims.agent_dims);
  check_arg(layout.m_total() == dims.m_total && layout.p_total() == dims.p_total,
            "partition_blocks: agent_dims inconsistent with totals");

  const int n_a = layout.num_agents();
  BlockPartition part;
  part.dims = dims;
  part.row_maps.resize(n_a);
  part.col_maps.resize(n_a);

  for (int i = 0; i < n_a; ++i) {
    const AgentDims& d = layout.agent(i);
    std::vector<int>& rows = part.row_maps[i];
    rows.reserve(d.p * dims.N);
    for (int k = 0; k < dims.N; ++k)
      for (int c = 0; c < d.p; ++c) rows.push_back(k * dims.p_total + layout.p_offset(i) + c);

    std::vector<int>& cols = part.col_maps[i];
    cols.reserve(d.m * dims.T_ini + d.p * dims.T_ini + d.m * dims.N);
    const int y_base = dims.m_total * dims.T_ini;
    const int u_base = y_base + dims.p_total * dims.T_ini;
    for (int k = 0; k < dims.T_ini; ++k)
      for (int c = 0; c < d.m; ++c) cols.push_back(k * dims.m_total + layout.m_offset(i) + c);
    for (int k = 0; k < dims.T_ini; ++k)
      for (int c = 0; c < d.p; ++c)
        cols.push_back(y_base + k * dims.p_total + layout.p_offset(i) + c);
    for (int k = 0; k < dims.N; ++k)
      for (int c = 0; c < d.m; ++c)
        cols.push_back(u_base + k * dims.m_total + layout.m_offset(i) + c);
  }

  part.blocks.assign(n_a, std::vector<Matrix>(n_a));
  for (int i = 0; i < n_a; ++i) {
    for (int j = 0; j < n_a; ++j) {
      Matrix& b = part.blocks[i][j];
      b.resize(part.row_maps[i].size(), part.col_maps[j].size());
      for (Eigen::Index r = 0; r < b.rows(); ++r)
        for (Eigen::Index c = 0; c < b.cols(); ++c)
          b(r, c) = tm.G(part.row_maps[i][r], part.col_maps[j][c]);
    }
  }
  return part;
}

void save_transition(const TransitionMatrix& tm, const std::string& path,
                     const std::string& provenance_hash) {
  static_assert(std::endian::native == std::endian::little,
                "transition files are little-endian");
  json header;
  header["magic"] = "ddpc-transition";
  header["version"] = 1;
  header["m_total"] = tm.dims.m_total;
  header["p_total"] = tm.dims.p_total;
  header["T_ini"] = tm.dims.T_ini;
  header["N"] = tm.dims.N;
  json dims = json::array();
  for (const AgentDims& d : tm.dims.agent_dims) dims.push_back({d.m, d.p});
  header["agent_dims"] = dims;
  header["svd_cutoff"] = tm.svd_cutoff;
  header["stack_rank"] = tm.stack_rank;
  header["rank_warning"] = tm.rank_warning;
  header["rows"] = tm.G.rows();
  header["cols"] = tm.G.cols();
  header["data_hash"] = provenance_hash;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << header.dump() << "\n";
  // Row-major payload.
  for (Eigen::Index r = 0; r < tm.G.rows(); ++r) {
    for (Eigen::Index c = 0; c < tm.G.cols(); ++c) {
      const double v = tm.G(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

json read_transition_header(std::ifstream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("truncated transition file: " + path);
  json header = json::parse(line);
  if (header.at("magic") != "ddpc-transition")
    throw std::runtime_error("not a transition file: " + path);
  return header;
}

}  // namespace

TransitionMatrix load_transition(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  const json header = read_transition_header(in, path);

  TransitionMatrix tm;
  tm.dims.m_total = header.at("m_total").get<int>();
  tm.dims.p_total = header.at("p_total").get<int>();
  tm.dims.T_ini = header.at("T_ini").get<int>();
  tm.dims.N = header.at("N").get<int>();
  for (const auto& d : header.at("agent_dims"))
    tm.dims.agent_dims.push_back({d.at(0).get<int>(), d.at(1).get<int>()});
  tm.svd_cutoff = header.at("svd_cutoff").get<double>();
  tm.stack_rank = header.at("stack_rank").get<int>();
  tm.rank_warning = header.at("rank_warning").get<bool>();
  const Eigen::Index rows = header.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = header.at("cols").get<Eigen::Index>();

  tm.G.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      if (!in) throw std::runtime_error("truncated transition payload: " + path);
      tm.G(r, c) = v;
    }
  }
  check_arg(rows == tm.dims.output_dim() && cols == tm.dims.context_dim(),
            "transition file dims inconsistent");
  return tm;
}

std::string transition_provenance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  const json header = read_transition_header(in, path);
  return header.value("data_hash", "");
}

}  // namespace ddpc
