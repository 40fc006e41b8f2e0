#pragma once

#include <array>
#include <vector>

#include "ddpc/types.hpp"

namespace ddpc {

// Leg indexing used throughout: FR=0, FL=1, RR=2, RL=3.
inline constexpr int kNumLegs = 4;
inline constexpr int kLegFR = 0;
inline constexpr int kLegFL = 1;
inline constexpr int kLegRR = 2;
inline constexpr int kLegRL = 3;

struct GaitConfig {
  double period = 0.4;     // seconds per full cycle
  double duty = 0.5;       // stance fraction per diagonal pair
  double phase_offset = 0.0;  // fraction of a cycle, per-agent stagger
};

// Trot schedule: diagonal pair {FR, RL} is in stance for the first `duty`
// fraction of the cycle, pair {FL, RR} for the half-cycle-shifted window.
// Deterministic in t.
std::array<bool, kNumLegs> gait_contacts(double t, const GaitConfig& gait);

// Anticipated stance sets over a prediction horizon for one agent.
struct ContactPlan {
  std::vector<std::array<bool, kNumLegs>> stance;  // one entry per step

  int steps() const { return static_cast<int>(stance.size()); }
  int count(int k) const;                     // N_c at step k
  bool in_stance(int k, int leg) const { return stance.at(k)[leg]; }
};

ContactPlan plan_contacts(double t0, double dt, int steps, const GaitConfig& gait);

}  // namespace ddpc
