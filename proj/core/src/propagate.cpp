#include "spsim/propagate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spsim {

namespace {

constexpr double ktrace_drift_tol = 1e-8;

void check_channel(const SystemModel& model, int channel) {
  if (channel < 0 || channel >= static_cast<int>(model.channels().size()))
    throw std::invalid_argument("channel index out of range");
}

Eigen::MatrixXcd integrate_state(const SystemModel& model, const PulseEnvelope& pulse,
                                 const DensityMatrix& rho0, double t0, double t1,
                                 const IntegrationOptions& opts,
                                 std::optional<int> nojump_channel) {
  const TimeGrid grid = TimeGrid::build(model, pulse, t0, t1, opts);
  GeneratorParts gen = GeneratorParts::build(model);
  if (nojump_channel) gen.static_part -= gen.jump_parts[*nojump_channel];

  Eigen::VectorXcd y = vectorize(rho0.matrix());
  rk4_integrate(grid, y,
                [&gen](Eigen::VectorXcd& dydt, const Eigen::VectorXcd& v, double,
                       double omega) {
                  dydt.noalias() = gen.static_part * v;
                  if (omega != 0.0) dydt.noalias() += omega * (gen.drive_part * v);
                });
  return devectorize(y);
}

}  // namespace

DensityMatrix evolve(const SystemModel& model, const PulseEnvelope& pulse,
                     const DensityMatrix& rho0, double t0, double t1,
                     const IntegrationOptions& opts) {
  if (rho0.kind() != StateKind::Normalized)
    throw std::invalid_argument("evolve: initial state must be normalized");
  if (rho0.dim() != model.dim())
    throw std::invalid_argument("evolve: state dimension does not match the model");
  Eigen::MatrixXcd m = integrate_state(model, pulse, rho0, t0, t1, opts, std::nullopt);
  const double drift = std::abs(m.trace().real() - 1.0);
  if (drift > ktrace_drift_tol) {
    std::ostringstream msg;
    msg << "evolve: trace drifted by " << drift << " (allowed " << ktrace_drift_tol << ")";
    throw std::runtime_error(msg.str());
  }
  return DensityMatrix::normalized(m, ktrace_drift_tol,
                                   tol::evolved_eigenvalue_floor);
}

DensityMatrix evolve_nojump(const SystemModel& model, const PulseEnvelope& pulse,
                            int channel, const DensityMatrix& rho0,
                            double t0, double t1, const IntegrationOptions& opts) {
  check_channel(model, channel);
  if (rho0.dim() != model.dim())
    throw std::invalid_argument("evolve_nojump: state dimension does not match the model");
  Eigen::MatrixXcd m = integrate_state(model, pulse, rho0, t0, t1, opts, channel);
  return DensityMatrix::conditional(m, tol::evolved_eigenvalue_floor);
}

SuperOperator propagator(const SystemModel& model, const PulseEnvelope& pulse,
                         std::optional<int> nojump_channel, double t0, double t1,
                         const IntegrationOptions& opts) {
  if (nojump_channel) check_channel(model, *nojump_channel);
  const TimeGrid grid = TimeGrid::build(model, pulse, t0, t1, opts);
  GeneratorParts gen = GeneratorParts::build(model);
  if (nojump_channel) gen.static_part -= gen.jump_parts[*nojump_channel];

  const Eigen::Index d2 = model.dim() * model.dim();
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d2, d2);
  rk4_integrate(grid, u,
                [&gen](Eigen::MatrixXcd& dudt, const Eigen::MatrixXcd& m, double,
                       double omega) {
                  dudt.noalias() = gen.static_part * m;
                  if (omega != 0.0) dudt.noalias() += omega * (gen.drive_part * m);
                });
  return SuperOperator(std::move(u));
}

double decay_horizon(const SystemModel& model, const PulseEnvelope& pulse,
                     const IntegrationOptions& opts) {
  if (opts.horizon_factor < 15.0) {
    std::ostringstream msg;
    msg << "decay_horizon: horizon_factor " << opts.horizon_factor
        << " is below the minimum 15 required for asymptotic quantities";
    throw std::invalid_argument(msg.str());
  }
  return pulse.support_end() + opts.horizon_factor / model.gamma_min();
}

}  // namespace spsim
