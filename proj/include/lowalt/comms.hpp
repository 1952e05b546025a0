#pragma once

#include <optional>
#include <vector>

#include "lowalt/rng.hpp"
#include "lowalt/world.hpp"

namespace lowalt {

struct ChannelParams {
  double alpha{0.018};   // reference gain at 1 m
  double noise_w{1e-6};  // receiver noise power, W
  double tau{3.6};       // SNR threshold for a usable link
};

// Air-to-ground line-of-sight gain, inverse in slant distance.
double channel_gain(double dist_m, const ChannelParams& p);

double snr(double tp_w, double gain, double noise_w);

// Shannon rate, Mbit/s over the unit bandwidth.
double rate_mbps(double snr_value);

// Slant range from the DCU (at fixed altitude) to a ground point.
double slant_distance(const Vec2& dcu, double altitude, const Vec2& ground);

// Largest slant distance at which the link still meets the SNR threshold.
double comm_radius(double tp_w, const ChannelParams& p);

struct GeRuntime {
  GeSpec spec;
  double remaining{0.0};
};

// Picks the device to serve this slot: highest SNR among those that still
// hold data and meet the threshold (inclusive). Exact SNR ties are broken
// uniformly at random. Empty result when nobody qualifies.
std::optional<int> select_ge(const Vec2& dcu, double altitude,
                             const std::vector<GeRuntime>& ges,
                             const ChannelParams& p, Rng& rng);

struct CollectResult {
  int ge{-1};
  double rate{0.0};
  double td{0.0};  // data moved this slot, Mbit
};

// Transfers up to one hover phase worth of data from the selected device,
// capped by what it has left. Decrements the device's remaining volume.
CollectResult collect(const Vec2& dcu, double altitude, int ge_index,
                      std::vector<GeRuntime>& ges, const ChannelParams& p,
                      double hover_seconds);

}  // namespace lowalt
