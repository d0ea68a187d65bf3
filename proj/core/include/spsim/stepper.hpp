#pragma once

#include "spsim/models.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace spsim {

struct IntegrationOptions {
  // Fixed step size; 0 selects the automatic per-segment bound
  // min(T/200, 0.01/gamma_max) inside the pulse, 0.01/gamma_max outside.
  double dt = 0.0;
  // Length of the decay tail appended after the pulse, in units of 1/gamma_min.
  double horizon_factor = 15.0;
};

// One uniformly stepped span between grid breakpoints.
struct TimeSegment {
  double begin = 0;
  double end = 0;
  std::int64_t steps = 0;
  bool driven = false;  // overlaps the pulse support
  double dt() const { return (end - begin) / static_cast<double>(steps); }
};

/*
 Fixed-step grid over one evolution interval. Breakpoints are inserted at the
 pulse-support edges so a discontinuous envelope never straddles a step, and
 Runge-Kutta stages that land exactly on the right edge of a driven segment
 are evaluated one-sidedly (from inside the segment). The step bound resolves
 the envelope (duration/200) inside the pulse and the fastest decay
 (0.01/gamma_max) everywhere.
*/
class TimeGrid {
 public:
  static TimeGrid build(const SystemModel& model, const PulseEnvelope& pulse,
                        double t0, double t1, const IntegrationOptions& opts = {});

  std::span<const TimeSegment> segments() const { return segments_; }
  double t_begin() const { return t0_; }
  double t_end() const { return t1_; }
  std::int64_t total_steps() const;
  const PulseEnvelope& pulse() const { return pulse_; }

  // Envelope value for a Runge-Kutta stage at time t within segment s.
  double stage_rate(const TimeSegment& s, double t) const;

 private:
  TimeGrid(PulseEnvelope pulse, double t0, double t1, std::vector<TimeSegment> segs)
      : pulse_(pulse), t0_(t0), t1_(t1), segments_(std::move(segs)) {}

  PulseEnvelope pulse_;
  double t0_, t1_;
  std::vector<TimeSegment> segments_;
};

/*
 Vectorized generator split into time-independent parts:
   M(t) = static_part + Omega(t) * drive_part,
 where static_part holds every dissipator (the full generator at Omega = 0)
 and drive_part is the superoperator of the unit-amplitude Hamiltonian C/2.
 jump_parts[k] is the recycling superoperator of channel k, for the no-jump
 and counting variants.
*/
struct GeneratorParts {
  Eigen::MatrixXcd static_part;
  Eigen::MatrixXcd drive_part;
  std::vector<Eigen::MatrixXcd> jump_parts;

  static GeneratorParts build(const SystemModel& model);
};

// Classic fixed-step RK4 for dy/dt = rhs(t, Omega(t), y) over the grid.
// rhs fills its first argument; observe(t, y) runs after every accepted step.
template <class State, class Rhs, class Observer>
void rk4_integrate(const TimeGrid& grid, State& y, Rhs&& rhs, Observer&& observe) {
  State k1 = y, k2 = y, k3 = y, k4 = y, tmp = y;
  for (const TimeSegment& seg : grid.segments()) {
    const double h = seg.dt();
    for (std::int64_t i = 0; i < seg.steps; ++i) {
      const double t = seg.begin + h * static_cast<double>(i);
      const double th = t + 0.5 * h;
      const double te = t + h;
      rhs(k1, y, t, grid.stage_rate(seg, t));
      tmp = y + (0.5 * h) * k1;
      rhs(k2, tmp, th, grid.stage_rate(seg, th));
      tmp = y + (0.5 * h) * k2;
      rhs(k3, tmp, th, grid.stage_rate(seg, th));
      tmp = y + h * k3;
      rhs(k4, tmp, te, grid.stage_rate(seg, te));
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      observe(te, y);
    }
  }
}

template <class State, class Rhs>
void rk4_integrate(const TimeGrid& grid, State& y, Rhs&& rhs) {
  rk4_integrate(grid, y, rhs, [](double, const State&) {});
}

}  // namespace spsim
