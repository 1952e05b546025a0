#include "lowalt/reward.hpp"

namespace lowalt {

double proximity_penalty(double d, double weight, const SafetyRadii& r) {
  if (d >= r.d_safe) return 0.0;
  if (d <= r.d_min) return -weight;
  return -weight * (r.d_safe - d) / (r.d_safe - r.d_min);
}

RewardBreakdown compute_reward(const RewardInputs& in, const RewardWeights& w,
                               const SafetyRadii& radii, const RewardFlags& flags) {
  RewardBreakdown out;

  out.r1 = (flags.r1_as_printed ? in.td >= 0.0 : in.td > 0.0) ? w.collect : 0.0;

  out.r2 = proximity_penalty(in.d_ou, w.ou, radii);
  out.r3 = proximity_penalty(in.d_bz, w.bz, radii);
  out.r4 = proximity_penalty(in.d_nfz, w.nfz, radii);

  if (in.inside_rz && in.speed > in.v_limit && in.speed <= in.v_max)
    out.r5 = -w.rz_speed * (in.speed - in.v_limit) / (in.v_max - in.v_limit);

  out.r6 = in.exited_area ? -w.boundary
                          : proximity_penalty(in.d_area, w.boundary, radii);

  if (in.d_la > 0.0 && in.d_la < radii.d_tar_la) {
    const double shaped = w.landing * (1.0 - in.d_la / radii.d_tar_la);
    out.r7 = flags.r7_as_printed ? -shaped : shaped;
  }

  if (in.energy_remaining < in.e_min_return && in.e_min_return > 0.0)
    out.r8 = -w.energy * (in.e_min_return - in.energy_remaining) / in.e_min_return;

  out.r9 = -w.step;

  out.total = out.r1 + out.r2 + out.r3 + out.r4 + out.r5 + out.r6 + out.r7 +
              out.r8 + out.r9;
  return out;
}

}  // namespace lowalt
