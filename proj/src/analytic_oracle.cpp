#include "edcasim/analytic_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace edcasim::oracle {

void SaturationModelParams::validate() const {
  if (n < 1) throw std::invalid_argument("saturation model: n must be >= 1");
  if (w < 1) throw std::invalid_argument("saturation model: w must be >= 1");
  if (payload_bytes < 1 || payload_bytes > kMaxMsduBytes) {
    throw std::invalid_argument("saturation model: payload outside [1, 2304]");
  }
  radio.validate();
}

double tau_given_p(double p, std::uint32_t w, std::uint32_t m) {
  // (1 - (2p)^m) / (1 - 2p) == sum_{i<m} (2p)^i
  double geometric = 0.0;
  double term = 1.0;
  for (std::uint32_t i = 0; i < m; ++i) {
    geometric += term;
    term *= 2.0 * p;
  }
  const double wd = static_cast<double>(w);
  return 2.0 / (1.0 + wd + p * wd * geometric);
}

double collision_probability(double tau, std::uint32_t n) {
  return 1.0 - std::pow(1.0 - tau, static_cast<double>(n) - 1.0);
}

TauSolution solve_tau(const SaturationModelParams& params) {
  params.validate();
  auto residual = [&](double tau) {
    return tau - tau_given_p(collision_probability(tau, params.n), params.w, params.m);
  };
  // residual is increasing in tau: negative at 0, non-negative at 1.
  double lo = 0.0;
  double hi = 1.0;
  constexpr int kMaxIterations = 200;
  int it = 0;
  for (; it < kMaxIterations && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double tau = 0.5 * (lo + hi);
  const double r = residual(tau);
  if (it == kMaxIterations || std::abs(r) >= 1e-12) {
    throw std::runtime_error("solve_tau: bisection did not converge");
  }
  return {tau, collision_probability(tau, params.n), r};
}

SlotDurations slot_durations(const SaturationModelParams& params) {
  const RadioParams& r = params.radio;
  const double airtime = static_cast<double>(frame_airtime(params.payload_bytes, r).us());
  const double ack = static_cast<double>(ack_airtime(r).us());
  return {static_cast<double>(r.slot_us),
          airtime + static_cast<double>(r.sifs_us) + ack + static_cast<double>(r.difs_us),
          airtime + static_cast<double>(r.difs_us)};
}

double saturation_throughput_bps(const SaturationModelParams& params, double tau) {
  if (tau <= 0.0) return 0.0;
  const double n = static_cast<double>(params.n);
  const double p_tr = 1.0 - std::pow(1.0 - tau, n);
  const double p_s = n * tau * std::pow(1.0 - tau, n - 1.0) / p_tr;
  const SlotDurations d = slot_durations(params);
  const double mean_slot_us =
      (1.0 - p_tr) * d.empty_us + p_tr * p_s * d.success_us + p_tr * (1.0 - p_s) * d.collision_us;
  const double payload_bits = 8.0 * params.payload_bytes;
  return p_s * p_tr * payload_bits / (mean_slot_us * 1e-6);
}

double saturation_throughput_bps(const SaturationModelParams& params) {
  return saturation_throughput_bps(params, solve_tau(params).tau);
}

}  // namespace edcasim::oracle
