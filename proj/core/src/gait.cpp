#include "ddpc/gait.hpp"

#include <cmath>

namespace ddpc {

std::array<bool, kNumLegs> gait_contacts(double t, const GaitConfig& gait) {
  check_arg(gait.period > 0.0, "gait_contacts: period must be positive");
  check_arg(gait.duty >= 0.0 && gait.duty <= 1.0, "gait_contacts: duty outside [0, 1]");
  double phase = std::fmod(t / gait.period + gait.phase_offset, 1.0);
  if (phase < 0.0) phase += 1.0;
  double phase_b = std::fmod(phase + 0.5, 1.0);

  const bool pair_a = phase < gait.duty || gait.duty == 1.0;
  const bool pair_b = phase_b < gait.duty || gait.duty == 1.0;

  std::array<bool, kNumLegs> stance{};
  stance[kLegFR] = pair_a;
  stance[kLegRL] = pair_a;
  stance[kLegFL] = pair_b;
  stance[kLegRR] = pair_b;
  return stance;
}

int ContactPlan::count(int k) const {
  int n = 0;
  for (bool s : stance.at(k)) n += s ? 1 : 0;
  return n;
}

ContactPlan plan_contacts(double t0, double dt, int steps, const GaitConfig& gait) {
  ContactPlan plan;
  plan.stance.reserve(steps);
  for (int k = 0; k < steps; ++k) plan.stance.push_back(gait_contacts(t0 + k * dt, gait));
  return plan;
}

}  // namespace ddpc
