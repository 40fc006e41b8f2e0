#pragma once

#include <condition_variable>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "ddpc/types.hpp"

namespace ddpc {

// What a local planner publishes after a round: its measurement windows at
// solve time and the optimal predicted input trajectory. Peers consume it
// one round later.
struct NeighborPacket {
  int agent_id = -1;
  int round_index = 0;  // -1 is reserved for the bootstrap round
  Vector u_ini;
  Vector y_ini;
  Vector u_opt;  // m_j * N
};

// One record per packet consumed; lets tests prove the delay protocol held.
struct ConsumeRecord {
  int consumer = -1;
  int round = 0;
  int peer = -1;
  int packet_round = 0;
};

// In-process message board realizing the one-step communication delay
// protocol: a packet published in round r becomes visible to collect(r+1)
// and never earlier. Missing peers are a protocol violation, not a
// fall-back to stale data.
class DelayBus {
 public:
  explicit DelayBus(int num_agents, double collect_timeout_seconds = 1.0);

  // Fails on duplicate (agent, round) or non-monotone round per publisher.
  void publish(const NeighborPacket& packet);

  // Packets from all peers of `agent_id` published at round - 1, ordered by
  // agent id. Blocks until they are present or the timeout expires, then
  // throws on missing peers.
  std::vector<NeighborPacket> collect(int agent_id, int round);

  int num_agents() const { return num_agents_; }
  const std::vector<ConsumeRecord>& audit_log() const { return audit_log_; }

  // Optional JSON-lines trace `{round, agent, bytes, digest}` per publish.
  void enable_trace(const std::string& path);

 private:
  bool have_all_peers(int agent_id, int round) const;

  int num_agents_ = 0;
  double timeout_seconds_ = 1.0;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::pair<int, int>, NeighborPacket> packets_;  // (round, agent) -> packet
  std::map<int, int> last_round_;
  std::vector<ConsumeRecord> audit_log_;
  std::string trace_path_;
};

}  // namespace ddpc
