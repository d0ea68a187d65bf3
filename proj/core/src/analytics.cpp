#include "spsim/analytics.hpp"

#include "spsim/rng.hpp"

#include <algorithm>
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

double u01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// Side-peak lags in periods, nearest first: +1, -1, +2, -2, ...
std::vector<std::int64_t> side_lags(int n_side) {
  std::vector<std::int64_t> out;
  for (std::int64_t s = 1; static_cast<int>(out.size()) < n_side; ++s) {
    out.push_back(s);
    if (static_cast<int>(out.size()) < n_side) out.push_back(-s);
  }
  return out;
}

}  // namespace

double p2_short_two_level(double gamma, double t_pulse) {
  require_positive(gamma, "gamma");
  require_positive(t_pulse, "pulse length");
  return gamma * t_pulse / 8.0;
}

double g2_short_two_level(double gamma, double t_pulse) {
  return 2.0 * p2_short_two_level(gamma, t_pulse);
}

double cascade_p2_coefficient() {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return (pi2 - 8.0) / (8.0 * pi2);
}

double p2_short_cascade(double gamma_x, double gamma_2x, double t_pulse) {
  require_positive(gamma_x, "gamma_x");
  require_positive(gamma_2x, "gamma_2x");
  require_positive(t_pulse, "pulse length");
  return gamma_x * gamma_2x * t_pulse * t_pulse * cascade_p2_coefficient();
}

double g2_short_cascade(double gamma_x, double gamma_2x, double t_pulse) {
  return 2.0 * p2_short_cascade(gamma_x, gamma_2x, t_pulse);
}

bool short_pulse_domain(double gamma_t) { return gamma_t < 0.1; }

double two_photon_density_cascade(double t1, double t1p, double t2,
                                  const CascadeDensityParams& params) {
  require_positive(params.gamma_x, "gamma_x");
  require_positive(params.gamma_2x, "gamma_2x");
  require_positive(params.t_pulse, "pulse length");
  if (params.area < 0 || !std::isfinite(params.area))
    throw std::invalid_argument("pulse area must be nonnegative and finite");

  const double tp = params.t_pulse;
  if (!(0 < t1 && t1 < t1p && t1p < t2) || t1p >= tp) return 0.0;

  const auto envelope = [&](double t) {
    const double s = std::sin(params.area * t / (2.0 * tp));
    return s * s;
  };
  double density = params.gamma_2x * envelope(t1) * params.gamma_x;
  if (!params.simplified) density *= std::exp(-params.gamma_x * (t1p - t1));
  if (t2 < tp) {
    density *= params.gamma_2x * envelope(t2 - t1p);
  } else {
    density *= params.gamma_2x * envelope(tp - t1p) *
               std::exp(-params.gamma_2x * (t2 - tp));
  }
  return density;
}

HbtEstimate hbt_g2(const HbtHistogram& histogram, const HbtOptions& options) {
  require_positive(histogram.bin_width, "bin width");
  require_positive(histogram.period, "period");
  if (histogram.counts.empty())
    throw std::invalid_argument("hbt_g2: histogram has no bins");
  const auto nbins = static_cast<std::int64_t>(histogram.counts.size());
  if (histogram.center_index < 0 || histogram.center_index >= nbins)
    throw std::invalid_argument("hbt_g2: center index out of range");
  if (options.n_side < 1) throw std::invalid_argument("hbt_g2: n_side must be >= 1");
  if (options.window < histogram.bin_width)
    throw std::invalid_argument("hbt_g2: window narrower than one bin");
  if (options.window > histogram.period)
    throw std::invalid_argument("hbt_g2: window wider than the pulse period");

  const std::int64_t half =
      static_cast<std::int64_t>(std::floor(options.window / (2.0 * histogram.bin_width)));
  const std::int64_t window_bins = 2 * half + 1;

  const auto peak_center = [&](std::int64_t lag) {
    return histogram.center_index +
           static_cast<std::int64_t>(std::llround(
               static_cast<double>(lag) * histogram.period / histogram.bin_width));
  };
  const auto peak_area = [&](std::int64_t lag) {
    const std::int64_t c = peak_center(lag);
    if (c - half < 0 || c + half >= nbins) {
      std::ostringstream msg;
      msg << "hbt_g2: histogram does not contain the full peak at lag " << lag;
      throw std::invalid_argument(msg.str());
    }
    double area = 0;
    for (std::int64_t i = c - half; i <= c + half; ++i)
      area += static_cast<double>(histogram.counts[static_cast<std::size_t>(i)]);
    return area;
  };

  HbtEstimate est;
  est.window_bins = static_cast<int>(window_bins);
  est.n0 = peak_area(0);

  const std::vector<std::int64_t> lags = side_lags(options.n_side);
  double side_sum = 0;
  for (std::int64_t lag : lags) side_sum += peak_area(lag);
  est.n1 = side_sum / static_cast<double>(options.n_side);

  est.n0_err = std::sqrt(est.n0);
  est.n1_err = std::sqrt(est.n1 / static_cast<double>(options.n_side));

  if (options.background) {
    est.background_per_bin = *options.background;
    if (est.background_per_bin < 0)
      throw std::invalid_argument("hbt_g2: background must be nonnegative");
  } else {
    // Average the bins at least a full window away from every peak center.
    const double period_bins = histogram.period / histogram.bin_width;
    double bg_sum = 0;
    std::int64_t bg_n = 0;
    for (std::int64_t i = 0; i < nbins; ++i) {
      const double lag_bins = static_cast<double>(i - histogram.center_index);
      const double nearest = std::abs(
          lag_bins - std::round(lag_bins / period_bins) * period_bins);
      if (nearest > static_cast<double>(window_bins)) {
        bg_sum += static_cast<double>(histogram.counts[static_cast<std::size_t>(i)]);
        ++bg_n;
      }
    }
    if (bg_n == 0)
      throw std::invalid_argument(
          "hbt_g2: no between-peak bins available to estimate the background; "
          "pass a background rate explicitly");
    est.background_per_bin = bg_sum / static_cast<double>(bg_n);
  }

  if (est.n1 <= 0)
    throw std::domain_error("hbt_g2: side-peak area is zero, g2 undefined");
  est.g2 = est.n0 / est.n1;
  est.g2_err = std::sqrt(
      est.n0_err * est.n0_err / (est.n1 * est.n1) +
      est.n0 * est.n0 * est.n1_err * est.n1_err / std::pow(est.n1, 4));

  const double bg_area = est.background_per_bin * static_cast<double>(window_bins);
  const double n0c = est.n0 - bg_area;
  const double n1c = est.n1 - bg_area;
  if (n1c <= 0)
    throw std::domain_error(
        "hbt_g2: background-corrected side-peak area is not positive");
  est.g2_corrected = n0c / n1c;
  // Errors deliberately stay those of the uncorrected counts.
  est.g2_corrected_err = std::sqrt(
      est.n0_err * est.n0_err / (n1c * n1c) +
      n0c * n0c * est.n1_err * est.n1_err / std::pow(n1c, 4));
  return est;
}

HbtHistogram synth_histogram(const PhotocountDistribution& dist,
                             std::uint64_t pulses, double dark_rate,
                             double bin_width, double period, std::uint64_t seed,
                             const SynthOptions& options) {
  require_positive(bin_width, "bin width");
  require_positive(period, "period");
  require_positive(options.lifetime, "lifetime");
  if (options.n_side < 1) throw std::invalid_argument("synth_histogram: n_side must be >= 1");
  if (dark_rate < 0 || dark_rate >= 1)
    throw std::invalid_argument("synth_histogram: dark rate must be in [0, 1)");
  if (period < 8.0 * options.lifetime)
    throw std::invalid_argument(
        "synth_histogram: period must be at least 8 lifetimes to keep peaks separate");
  const std::int64_t max_lag_periods = (options.n_side + 1) / 2 + 1;
  if (pulses < static_cast<std::uint64_t>(4 * max_lag_periods))
    throw std::invalid_argument("synth_histogram: too few pulses for the requested peaks");
  if (dist.probs.empty()) throw std::invalid_argument("synth_histogram: empty distribution");

  std::vector<double> cumulative(dist.probs.size());
  double acc = 0;
  for (std::size_t n = 0; n < dist.probs.size(); ++n) {
    acc += dist.probs[n];
    cumulative[n] = acc;
  }

  std::mt19937_64 rng = make_rng(seed, 0);
  std::vector<double> arm_a, arm_b;
  for (std::uint64_t p = 0; p < pulses; ++p) {
    const double u = u01(rng) * acc;
    std::size_t n = 0;
    while (n + 1 < cumulative.size() && u >= cumulative[n]) ++n;
    const double pulse_time = static_cast<double>(p) * period;
    for (std::size_t j = 0; j < n; ++j) {
      const double t = pulse_time - options.lifetime * std::log1p(-u01(rng));
      (u01(rng) < 0.5 ? arm_a : arm_b).push_back(t);
    }
  }

  // Dark counts: Poisson over the whole train, uniform in time, per arm.
  const double total_time = static_cast<double>(pulses) * period;
  const double dark_mean = dark_rate * total_time / bin_width;
  if (dark_mean > 0) {
    std::poisson_distribution<std::uint64_t> poisson(dark_mean);
    for (auto* arm : {&arm_a, &arm_b}) {
      const std::uint64_t ndark = poisson(rng);
      for (std::uint64_t i = 0; i < ndark; ++i) arm->push_back(u01(rng) * total_time);
    }
  }
  std::sort(arm_a.begin(), arm_a.end());
  std::sort(arm_b.begin(), arm_b.end());

  HbtHistogram h;
  h.bin_width = bin_width;
  h.period = period;
  const double half_span = (static_cast<double>(max_lag_periods) + 0.5) * period;
  const std::int64_t half_bins = static_cast<std::int64_t>(std::llround(half_span / bin_width));
  h.center_index = half_bins;
  h.counts.assign(static_cast<std::size_t>(2 * half_bins + 1), 0);

  // All ordered pairs (a, b) with |t_b - t_a| inside the histogram span.
  const double max_lag = (static_cast<double>(half_bins) + 0.5) * bin_width;
  std::size_t lo = 0;
  for (const double ta : arm_a) {
    while (lo < arm_b.size() && arm_b[lo] < ta - max_lag) ++lo;
    for (std::size_t j = lo; j < arm_b.size() && arm_b[j] <= ta + max_lag; ++j) {
      const std::int64_t idx =
          h.center_index + static_cast<std::int64_t>(std::llround((arm_b[j] - ta) / bin_width));
      if (idx >= 0 && idx < static_cast<std::int64_t>(h.counts.size()))
        ++h.counts[static_cast<std::size_t>(idx)];
    }
  }
  return h;
}

}  // namespace spsim
