#include "lowalt/comms.hpp"

#include <cmath>

#include "lowalt/errors.hpp"

namespace lowalt {

double channel_gain(double dist_m, const ChannelParams& p) {
  if (dist_m <= 0.0) throw DegenerateGeometry("channel distance must be positive");
  return p.alpha / dist_m;
}

double snr(double tp_w, double gain, double noise_w) {
  if (noise_w <= 0.0) throw ValidationError("noise power must be positive");
  return tp_w * gain / noise_w;
}

double rate_mbps(double snr_value) { return std::log2(1.0 + snr_value); }

double slant_distance(const Vec2& dcu, double altitude, const Vec2& ground) {
  const Vec2 d = dcu - ground;
  return std::sqrt(d.squaredNorm() + altitude * altitude);
}

double comm_radius(double tp_w, const ChannelParams& p) {
  return tp_w * p.alpha / (p.noise_w * p.tau);
}

std::optional<int> select_ge(const Vec2& dcu, double altitude,
                             const std::vector<GeRuntime>& ges,
                             const ChannelParams& p, Rng& rng) {
  double best = -1.0;
  std::vector<int> tied;
  for (std::size_t i = 0; i < ges.size(); ++i) {
    if (ges[i].remaining <= 0.0) continue;
    const double d = slant_distance(dcu, altitude, ges[i].spec.pos);
    const double s = snr(ges[i].spec.tp, channel_gain(d, p), p.noise_w);
    if (s < p.tau) continue;
    if (s > best) {
      best = s;
      tied.assign(1, static_cast<int>(i));
    } else if (s == best) {
      tied.push_back(static_cast<int>(i));
    }
  }
  if (tied.empty()) return std::nullopt;
  if (tied.size() == 1) return tied.front();
  return tied[rng.index(tied.size())];
}

CollectResult collect(const Vec2& dcu, double altitude, int ge_index,
                      std::vector<GeRuntime>& ges, const ChannelParams& p,
                      double hover_seconds) {
  CollectResult r;
  auto& ge = ges.at(static_cast<std::size_t>(ge_index));
  const double d = slant_distance(dcu, altitude, ge.spec.pos);
  const double s = snr(ge.spec.tp, channel_gain(d, p), p.noise_w);
  if (s < p.tau || ge.remaining <= 0.0) return r;  // nothing collectable
  r.ge = ge_index;
  r.rate = rate_mbps(s);
  r.td = std::min(r.rate * hover_seconds, ge.remaining);
  ge.remaining -= r.td;
  return r;
}

}  // namespace lowalt
