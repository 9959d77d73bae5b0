#pragma once

#include <cstdint>

#include "edcasim/phy_channel.hpp"

namespace edcasim::oracle {

/// Saturation model of n homogeneous DCF stations (basic access, unbounded
/// retries).
struct SaturationModelParams {
  std::uint32_t n = 1;
  std::uint32_t w = 32;  // cw_min + 1
  std::uint32_t m = 5;   // backoff stages: w * 2^m = cw_max + 1
  std::uint32_t payload_bytes = 800;
  RadioParams radio;

  void validate() const;
};

struct TauSolution {
  double tau = 0.0;  // per-slot transmission probability
  double p = 0.0;    // conditional collision probability
  double residual = 0.0;
};

/// Transmission probability implied by a collision probability p:
/// 2(1-2p) / [(1-2p)(W+1) + pW(1-(2p)^m)], evaluated in a form that stays
/// finite at p = 1/2.
double tau_given_p(double p, std::uint32_t w, std::uint32_t m);

/// Collision probability seen by one of n stations when all send with tau.
double collision_probability(double tau, std::uint32_t n);

/// Fixed point tau = tau_given_p(p(tau)) by bisection on (0, 1).
TauSolution solve_tau(const SaturationModelParams& params);

struct SlotDurations {
  double empty_us;
  double success_us;    // airtime + SIFS + ACK + DIFS
  double collision_us;  // airtime + DIFS
};

SlotDurations slot_durations(const SaturationModelParams& params);

/// Aggregate saturation throughput in payload bits per second.
double saturation_throughput_bps(const SaturationModelParams& params);
double saturation_throughput_bps(const SaturationModelParams& params, double tau);

}  // namespace edcasim::oracle
