#include "ddpc/trajectory_data.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "ddpc/serialization.hpp"

namespace ddpc {

using nlohmann::json;

void TrajectoryData::validate() const {
  check_arg(u.cols() == y.cols(), "TrajectoryData: input/output length mismatch");
  check_arg(u.cols() >= 1, "TrajectoryData: empty recording");
  check_arg(sample_rate > 0.0, "TrajectoryData: sample_rate must be positive");
  check_arg(!agent_dims.empty(), "TrajectoryData: agent_dims missing");
  int m_sum = 0, p_sum = 0;
  for (const AgentDims& d : agent_dims) {
    check_arg(d.m >= 1 && d.p >= 1, "TrajectoryData: agent dims must be positive");
    m_sum += d.m;
    p_sum += d.p;
  }
  check_arg(m_sum == m_total(), "TrajectoryData: agent input dims do not sum to m_total");
  check_arg(p_sum == p_total(), "TrajectoryData: agent output dims do not sum to p_total");
  check_arg(all_finite(u) && all_finite(y), "TrajectoryData: non-finite sample");
}

void save_trajectory(const TrajectoryData& data, const std::string& csv_path,
                     const std::string& json_path) {
  data.validate();
  const int m = data.m_total(), p = data.p_total(), T = data.length();

  std::ostringstream csv;
  csv << "k";
  for (int i = 1; i <= m; ++i) csv << ",u_" << i;
  for (int i = 1; i <= p; ++i) csv << ",y_" << i;
  csv << "\n";
  for (int k = 0; k < T; ++k) {
    csv << k;
    for (int i = 0; i < m; ++i) csv << "," << format_double(data.u(i, k));
    for (int i = 0; i < p; ++i) csv << "," << format_double(data.y(i, k));
    csv << "\n";
  }
  write_text_file(csv_path, csv.str());

  json sidecar;
  sidecar["sample_rate"] = data.sample_rate;
  sidecar["m_total"] = m;
  sidecar["p_total"] = p;
  sidecar["T"] = T;
  json dims = json::array();
  for (const AgentDims& d : data.agent_dims) dims.push_back({d.m, d.p});
  sidecar["agent_dims"] = dims;
  write_text_file(json_path, sidecar.dump(2) + "\n");
}

TrajectoryData load_trajectory(const std::string& csv_path, const std::string& json_path) {
  const json sidecar = json::parse(read_text_file(json_path));
  TrajectoryData data;
  data.sample_rate = sidecar.at("sample_rate").get<double>();
  const int m = sidecar.at("m_total").get<int>();
  const int p = sidecar.at("p_total").get<int>();
  const int T = sidecar.at("T").get<int>();
  for (const auto& d : sidecar.at("agent_dims")) {
    data.agent_dims.push_back({d.at(0).get<int>(), d.at(1).get<int>()});
  }

  data.u.resize(m, T);
  data.y.resize(p, T);

  std::istringstream in(read_text_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectory csv: missing header");
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (rows >= T) throw std::runtime_error("trajectory csv: more rows than sidecar T");
    std::istringstream ls(line);
    std::string cell;
    if (!std::getline(ls, cell, ',')) throw std::runtime_error("trajectory csv: bad row");
    if (std::stoi(cell) != rows) throw std::runtime_error("trajectory csv: sample index out of order");
    for (int i = 0; i < m + p; ++i) {
      if (!std::getline(ls, cell, ','))
        throw std::runtime_error("trajectory csv: row has too few columns");
      const double v = std::stod(cell);
      if (i < m) {
        data.u(i, rows) = v;
      } else {
        data.y(i - m, rows) = v;
      }
    }
    if (std::getline(ls, cell, ','))
      throw std::runtime_error("trajectory csv: row has too many columns");
    ++rows;
  }
  if (rows != T) throw std::runtime_error("trajectory csv: fewer rows than sidecar T");
  data.validate();
  return data;
}

}  // namespace ddpc
