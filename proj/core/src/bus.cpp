#include "ddpc/bus.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ddpc/serialization.hpp"

namespace ddpc {

DelayBus::DelayBus(int num_agents, double collect_timeout_seconds)
    : num_agents_(num_agents), timeout_seconds_(collect_timeout_seconds) {
  check_arg(num_agents >= 1, "DelayBus: need at least one agent");
}

void DelayBus::publish(const NeighborPacket& packet) {
  check_arg(packet.agent_id >= 0 && packet.agent_id < num_agents_, "publish: bad agent id");
  std::string trace_line;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_pair(packet.round_index, packet.agent_id);
    if (packets_.count(key) > 0) {
      throw std::runtime_error("DelayBus: duplicate publish for agent " +
                               std::to_string(packet.agent_id) + " round " +
                               std::to_string(packet.round_index));
    }
    auto it = last_round_.find(packet.agent_id);
    if (it != last_round_.end() && packet.round_index <= it->second) {
      throw std::runtime_error("DelayBus: round index must increase per publisher");
    }
    last_round_[packet.agent_id] = packet.round_index;
    packets_[key] = packet;

    if (!trace_path_.empty()) {
      const std::size_t bytes =
          (packet.u_ini.size() + packet.y_ini.size() + packet.u_opt.size()) * sizeof(double);
      std::ostringstream payload;
      payload << packet.u_ini.transpose() << packet.y_ini.transpose()
              << packet.u_opt.transpose();
      const std::string s = payload.str();
      std::ostringstream line;
      line << "{\"round\":" << packet.round_index << ",\"agent\":" << packet.agent_id
           << ",\"bytes\":" << bytes << ",\"digest\":\""
           << fnv1a64_hex(s.data(), s.size()) << "\"}\n";
      trace_line = line.str();
    }
  }
  cv_.notify_all();
  if (!trace_line.empty()) {
    std::ofstream out(trace_path_, std::ios::app);
    out << trace_line;
  }
}

bool DelayBus::have_all_peers(int agent_id, int round) const {
  for (int j = 0; j < num_agents_; ++j) {
    if (j == agent_id) continue;
    if (packets_.count(std::make_pair(round - 1, j)) == 0) return false;
  }
  return true;
}

std::vector<NeighborPacket> DelayBus::collect(int agent_id, int round) {
  check_arg(agent_id >= 0 && agent_id < num_agents_, "collect: bad agent id");
  std::unique_lock<std::mutex> lock(mutex_);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::nanoseconds>(
                            std::chrono::duration<double>(timeout_seconds_));
  if (!cv_.wait_until(lock, deadline, [&] { return have_all_peers(agent_id, round); })) {
    for (int j = 0; j < num_agents_; ++j) {
      if (j != agent_id && packets_.count(std::make_pair(round - 1, j)) == 0) {
        throw std::runtime_error("DelayBus: protocol violation, missing packet from agent " +
                                 std::to_string(j) + " for round " + std::to_string(round));
      }
    }
  }
  std::vector<NeighborPacket> result;
  result.reserve(num_agents_ - 1);
  for (int j = 0; j < num_agents_; ++j) {
    if (j == agent_id) continue;
    const NeighborPacket& packet = packets_.at(std::make_pair(round - 1, j));
    audit_log_.push_back({agent_id, round, j, packet.round_index});
    result.push_back(packet);
  }
  return result;
}

void DelayBus::enable_trace(const std::string& path) {
  std::lock_guard<std::mutex> lock(mutex_);
  trace_path_ = path;
  std::ofstream out(trace_path_, std::ios::trunc);  // start fresh
}

}  // namespace ddpc
