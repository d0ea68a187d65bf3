#pragma once

#include "spsim/counting.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace spsim {

// Leading-order two-photon error rate and pulse-wise g2[0] of a resonantly
// driven two-level system under a short square pi pulse of length T:
// P2 ~ gamma T / 8, g2 ~ gamma T / 4.
double p2_short_two_level(double gamma, double t_pulse);
double g2_short_two_level(double gamma, double t_pulse);

// The cascade analogue for emission on the upper ("2X") transition:
// P2 ~ gamma_2x gamma_x T^2 (pi^2 - 8) / (8 pi^2) and g2 = 2 P2 to this order.
double p2_short_cascade(double gamma_x, double gamma_2x, double t_pulse);
double g2_short_cascade(double gamma_x, double gamma_2x, double t_pulse);
double cascade_p2_coefficient();  // (pi^2 - 8) / (8 pi^2)

// Small-gamma*T validity domain of the expressions above.
bool short_pulse_domain(double gamma_t);

/*
 Approximate two-photon emission density of the cascade on the upper
 transition under a square pulse: first emission at t1 (upper transition),
 intermediate emission at t1p (lower transition), second upper emission at t2.
 With `simplified` set, the intermediate-decay factor exp(-gamma_x (t1p - t1))
 is dropped; integrating the simplified density over 0 < t1 < t1p and
 t2 > t1p reproduces the closed form p2_short_cascade for an area-pi pulse.
*/
struct CascadeDensityParams {
  double gamma_x = 1.0;
  double gamma_2x = 2.0;
  double area = 0.0;
  double t_pulse = 0.0;
  bool simplified = false;
};
double two_photon_density_cascade(double t1, double t1p, double t2,
                                  const CascadeDensityParams& params);

/*
 Pulsed intensity-correlation histogram. Lag bins are uniform with width
 bin_width; counts[center_index] holds zero lag. Coincidence peaks repeat at
 multiples of `period`; the center peak integrates to N0, the n_side nearest
 side peaks average to N1, and g2[0] = N0 / N1.
*/
struct HbtHistogram {
  double bin_width = 0;
  double period = 0;
  std::int64_t center_index = 0;
  std::vector<std::uint64_t> counts;
};

struct HbtOptions {
  double window = 2.6;        // integration window per peak, time units of the file
  int n_side = 16;            // side peaks averaged into N1
  // Fixed background rate per bin; unset = estimate from between-peak bins.
  std::optional<double> background;
};

struct HbtEstimate {
  double n0 = 0;              // center-peak counts
  double n1 = 0;              // average side-peak counts
  double n0_err = 0;          // sqrt(N0)
  double n1_err = 0;          // sqrt(N1 / n_side)
  double background_per_bin = 0;
  double g2 = 0;              // N0 / N1, uncorrected
  double g2_err = 0;
  double g2_corrected = 0;    // background-subtracted ratio
  double g2_corrected_err = 0;  // still propagated from the uncorrected counts
  int window_bins = 0;
};

// Peak-integration estimator with optional background correction. Throws on
// histograms too short for the requested peaks/window and when the corrected
// side-peak area N1 - N_bg is not positive.
HbtEstimate hbt_g2(const HbtHistogram& histogram, const HbtOptions& options = {});

struct SynthOptions {
  double lifetime = 1.0;  // emission-time jitter scale (exponential)
  int n_side = 16;        // side peaks the produced histogram must cover
};

/*
 Synthesizes an HBT histogram by sampling per-pulse photon numbers from a
 photocount distribution, jittering emission times exponentially with the
 given lifetime, splitting photons between two detector arms, and correlating
 within a train of `pulses` excitation pulses. dark_rate is the dark-count
 probability per detector per bin.
*/
HbtHistogram synth_histogram(const PhotocountDistribution& dist,
                             std::uint64_t pulses, double dark_rate,
                             double bin_width, double period, std::uint64_t seed,
                             const SynthOptions& options = {});

}  // namespace spsim
