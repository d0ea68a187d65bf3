#include "spsim/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spsim {

TimeGrid TimeGrid::build(const SystemModel& model, const PulseEnvelope& pulse,
                         double t0, double t1, const IntegrationOptions& opts) {
  if (!(t1 >= t0) || !std::isfinite(t0) || !std::isfinite(t1))
    throw std::invalid_argument("TimeGrid: need finite t1 >= t0");
  if (opts.dt < 0 || !std::isfinite(opts.dt))
    throw std::invalid_argument("TimeGrid: dt must be nonnegative and finite");

  const double support = pulse.support_end();
  std::vector<double> cuts = {t0, t1};
  for (double edge : {0.0, support})
    if (edge > t0 && edge < t1) cuts.push_back(edge);
  std::sort(cuts.begin(), cuts.end());

  const double span = t1 - t0;
  const double pulse_bound = std::min(pulse.duration() / 200.0, 0.01 / model.gamma_max());
  const double tail_bound = 0.01 / model.gamma_max();

  std::vector<TimeSegment> segs;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a <= span * 1e-15) continue;  // degenerate slice from coincident cuts
    TimeSegment seg;
    seg.begin = a;
    seg.end = b;
    seg.driven = a < support && b > 0;
    double bound = seg.driven ? pulse_bound : tail_bound;
    if (opts.dt > 0) {
      if (opts.dt > bound * (1.0 + 1e-9)) {
        std::ostringstream msg;
        msg << "TimeGrid: dt = " << opts.dt << " exceeds the stability bound "
            << bound << " for segment [" << a << ", " << b << "]";
        throw std::invalid_argument(msg.str());
      }
      bound = opts.dt;
    }
    seg.steps = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil((b - a) / bound - 1e-9)));
    segs.push_back(seg);
  }
  return TimeGrid(pulse, t0, t1, std::move(segs));
}

std::int64_t TimeGrid::total_steps() const {
  std::int64_t n = 0;
  for (const auto& s : segments_) n += s.steps;
  return n;
}

double TimeGrid::stage_rate(const TimeSegment& s, double t) const {
  if (!s.driven) return 0.0;
  // Keep the stage strictly inside the half-open support so the right-edge
  // stage of the last in-pulse step sees the one-sided (inside) limit.
  const double support = pulse_.support_end();
  if (t >= support) t = support - 1e-6 * s.dt();
  return pulse_.rate(t);
}

GeneratorParts GeneratorParts::build(const SystemModel& model) {
  GeneratorParts parts;
  const Eigen::Index d = model.dim();
  std::vector<Eigen::MatrixXcd> loss_ops;
  loss_ops.reserve(model.channels().size());
  for (std::size_t k = 0; k < model.channels().size(); ++k)
    loss_ops.push_back(model.loss_operator(static_cast<int>(k)));

  parts.static_part =
      liouvillian(Eigen::MatrixXcd::Zero(d, d), loss_ops).matrix();
  parts.drive_part = hamiltonian_superop(0.5 * model.drive_coupling()).matrix();
  parts.jump_parts.reserve(loss_ops.size());
  for (const auto& l : loss_ops) parts.jump_parts.push_back(jump_superop(l).matrix());
  return parts;
}

}  // namespace spsim
