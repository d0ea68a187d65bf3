#pragma once

#include "spsim/stepper.hpp"

#include <optional>

namespace spsim {

// Full dissipative evolution of a normalized state over [t0, t1].
// Throws std::runtime_error when the integrated trace drifts beyond 1e-8.
DensityMatrix evolve(const SystemModel& model, const PulseEnvelope& pulse,
                     const DensityMatrix& rho0, double t0, double t1,
                     const IntegrationOptions& opts = {});

// Evolution with the recycling term of `channel` removed. The trace of the
// result is the probability that the channel has not emitted during [t0, t1];
// it is non-increasing in t1.
DensityMatrix evolve_nojump(const SystemModel& model, const PulseEnvelope& pulse,
                            int channel, const DensityMatrix& rho0,
                            double t0, double t1,
                            const IntegrationOptions& opts = {});

// Matrix of the propagation map over [t0, t1] on vectorized states; with
// nojump_channel set, the map of the corresponding no-emission evolution.
SuperOperator propagator(const SystemModel& model, const PulseEnvelope& pulse,
                         std::optional<int> nojump_channel, double t0, double t1,
                         const IntegrationOptions& opts = {});

// End time standing in for t -> infinity: pulse support plus a decay tail of
// horizon_factor / gamma_min. Asymptotic quantities (photocount distributions,
// pulse-wise correlations) require horizon_factor >= 15, enforced here.
double decay_horizon(const SystemModel& model, const PulseEnvelope& pulse,
                     const IntegrationOptions& opts = {});

}  // namespace spsim
