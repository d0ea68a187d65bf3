#include "spsim/models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace spsim {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << what << " must be positive and finite, got " << v;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

PulseEnvelope PulseEnvelope::square(double area, double duration) {
  require_positive(duration, "pulse duration");
  if (area < 0 || !std::isfinite(area))
    throw std::invalid_argument("pulse area must be nonnegative and finite");
  PulseEnvelope p;
  p.shape_ = PulseShape::Square;
  p.area_ = area;
  p.duration_ = duration;
  p.support_ = duration;
  p.peak_ = area / duration;
  return p;
}

PulseEnvelope PulseEnvelope::gaussian(double area, double fwhm) {
  require_positive(fwhm, "pulse fwhm");
  if (area < 0 || !std::isfinite(area))
    throw std::invalid_argument("pulse area must be nonnegative and finite");
  PulseEnvelope p;
  p.shape_ = PulseShape::Gaussian;
  p.area_ = area;
  p.duration_ = fwhm;
  p.sigma_ = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  p.center_ = 4.0 * p.sigma_;
  p.support_ = 8.0 * p.sigma_;
  // Truncation at +-4 sigma removes erfc mass; rescale so the area stays A.
  const double truncated_mass = std::erf(4.0 / std::numbers::sqrt2);
  p.peak_ = area / (p.sigma_ * std::sqrt(2.0 * std::numbers::pi) * truncated_mass);
  return p;
}

double PulseEnvelope::rate(double t) const {
  if (t < 0 || t >= support_) return 0.0;
  if (shape_ == PulseShape::Square) return peak_;
  const double u = (t - center_) / sigma_;
  return peak_ * std::exp(-0.5 * u * u);
}

SystemModel SystemModel::two_level(double gamma) {
  require_positive(gamma, "gamma");
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, 2);
  c(0, 1) = c(1, 0) = 1.0;  // |g><e| + |e><g|
  std::vector<LossChannel> channels = {{"main", gamma, 1, 0}};
  return SystemModel(SystemKind::TwoLevel, std::move(c), std::move(channels));
}

SystemModel SystemModel::three_level_cascade(double gamma_x, double gamma_2x) {
  require_positive(gamma_x, "gamma_x");
  require_positive(gamma_2x, "gamma_2x");
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(3, 3);
  c(0, 2) = c(2, 0) = 1.0;  // |0><2X| + |2X><0|
  std::vector<LossChannel> channels = {{"2X", gamma_2x, 2, 1}, {"X", gamma_x, 1, 0}};
  return SystemModel(SystemKind::ThreeLevelCascade, std::move(c), std::move(channels));
}

SystemModel SystemModel::standard_cascade(double gamma) {
  return three_level_cascade(gamma, 2.0 * gamma);
}

int SystemModel::channel_index(std::string_view name) const {
  if (name == "default") return 0;
  for (std::size_t k = 0; k < channels_.size(); ++k)
    if (channels_[k].name == name) return static_cast<int>(k);
  std::ostringstream msg;
  msg << "unknown channel '" << name << "'; valid names: default";
  for (const auto& ch : channels_) msg << ", " << ch.name;
  throw std::invalid_argument(msg.str());
}

Eigen::MatrixXcd SystemModel::loss_operator(int channel) const {
  if (channel < 0 || channel >= static_cast<int>(channels_.size()))
    throw std::invalid_argument("loss_operator: channel index out of range");
  const LossChannel& ch = channels_[channel];
  Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(dim(), dim());
  l(ch.target, ch.source) = std::sqrt(ch.rate);
  return l;
}

Eigen::MatrixXcd SystemModel::hamiltonian(const PulseEnvelope& pulse, double t) const {
  return (0.5 * pulse.rate(t)) * coupling_;
}

double SystemModel::gamma_max() const {
  double g = channels_.front().rate;
  for (const auto& ch : channels_) g = std::max(g, ch.rate);
  return g;
}

double SystemModel::gamma_min() const {
  double g = channels_.front().rate;
  for (const auto& ch : channels_) g = std::min(g, ch.rate);
  return g;
}

Eigen::VectorXcd SystemModel::ground_ket() const {
  Eigen::VectorXcd k = Eigen::VectorXcd::Zero(dim());
  k(0) = 1.0;
  return k;
}

}  // namespace spsim
