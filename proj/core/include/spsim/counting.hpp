#pragma once

#include "spsim/propagate.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spsim {

/*
 Photocount distribution of one emission channel: probs[n] is the probability
 of exactly n detections over the whole decay, residual the probability mass
 beyond the truncation n_max (and any trace defect of the integration).
*/
struct PhotocountDistribution {
  std::string channel;
  std::vector<double> probs;  // P_0 .. P_{n_max}
  double residual = 0.0;

  int n_max() const { return static_cast<int>(probs.size()) - 1; }
  double mean() const;              // sum n P_n
  double factorial_moment2() const; // sum n(n-1) P_n
};

/*
 Number-resolved decomposition: blocks rho^(n) evolve under the no-jump
 generator and are fed by the recycling term applied to the previous block,
   d/dt rho^(n) = (L - J) rho^(n) + J rho^(n-1),
 so that P_n = tr rho^(n) at the decay horizon. One extra column carries the
 unconditional state for the conservation and horizon guards.

 Throws std::runtime_error when the residual exceeds residual_tol (raise n_max)
 or when excited population survives at the horizon (raise horizon_factor).
*/
PhotocountDistribution photocount_distribution(const SystemModel& model,
                                               const PulseEnvelope& pulse,
                                               int channel, int n_max = 6,
                                               const IntegrationOptions& opts = {},
                                               double residual_tol = 1e-9);

// Raw number-resolved blocks rho^(0..n_max) plus the unconditional state, all
// taken at the decay horizon; photocount_distribution is their trace summary.
struct NumberResolvedTerminal {
  std::vector<Eigen::MatrixXcd> blocks;
  Eigen::MatrixXcd unconditional;
};
NumberResolvedTerminal photocount_blocks(const SystemModel& model,
                                         const PulseEnvelope& pulse, int channel,
                                         int n_max = 6,
                                         const IntegrationOptions& opts = {});

// First factorial moments <n> and <n(n-1)> of a distribution (truncated sums).
struct FactorialMoments {
  double mean = 0;
  double second = 0;  // <n(n-1)>
};
FactorialMoments factorial_moments(const PhotocountDistribution& dist);

// Pulse-wise second-order correlation g2[0] = <n(n-1)> / <n>^2 from a counting
// distribution. Throws std::domain_error when <n> is zero.
double g2_from_counts(const PhotocountDistribution& dist);

// Two-photon approximation 2 P2 / (P1 + 2 P2)^2, the few-photon diagnostic
// form; valid while P_{n>=3} is negligible.
double g2_two_photon_approx(const PhotocountDistribution& dist);

/*
 Exact factorial moments from the correlation-function route, without number
 truncation: alongside rho the integrator carries
   sigma(t)   = int_0^t ds U(t,s) J U(s,0) rho_0,
   <n>        = int dt tr[J rho(t)],
   <n(n-1)>   = 2 int dt tr[J sigma(t)],
 which reproduces the nested two-time emission integral of the channel.
*/
FactorialMoments correlator_moments(const SystemModel& model,
                                    const PulseEnvelope& pulse, int channel,
                                    const IntegrationOptions& opts = {});
double g2_via_correlator(const SystemModel& model, const PulseEnvelope& pulse,
                         int channel, const IntegrationOptions& opts = {});

// Per-channel emission times of simulated trajectories, flattened per channel
// with CSR-style offsets (offsets[k][i] .. offsets[k][i+1] index trajectory i).
struct JumpRecords {
  std::uint64_t n_trajectories = 0;
  std::vector<std::vector<double>> times;          // [channel][flat]
  std::vector<std::vector<std::uint64_t>> offsets; // [channel][n_trajectories + 1]

  std::span<const double> trajectory(int channel, std::uint64_t i) const;
};

struct McOptions {
  int threads = 0;             // 0 = hardware concurrency
  int n_max = 8;               // histogram truncation of the returned distribution
  std::uint64_t record_cap = UINT64_MAX;  // trajectories whose jump times are kept
};

struct McResult {
  PhotocountDistribution dist;      // requested channel, frequencies
  std::vector<double> std_error;    // binomial standard error per P_n
  // Count histograms per channel, bucket n_max+1 collects n > n_max.
  std::vector<std::vector<std::uint64_t>> channel_counts;
  JumpRecords records;
  std::uint64_t n_trajectories = 0;
};

/*
 Monte-Carlo unraveling on the integration grid. Each step propagates the
 (normalized) conditional wavefunction with the no-jump step map; the squared
 norm of the result is the step survival probability, accumulated into a
 waiting-time product that is compared against a single uniform draw. When a
 jump fires, the emitting channel is chosen proportionally to its flux and the
 state collapses onto the channel's target level. Deterministic for a fixed
 (seed, n_trajectories) pair regardless of thread count.
*/
McResult mc_trajectories(const SystemModel& model, const PulseEnvelope& pulse,
                         int channel, std::uint64_t n_trajectories,
                         std::uint64_t seed, const IntegrationOptions& opts = {},
                         const McOptions& mc_opts = {});

}  // namespace spsim
