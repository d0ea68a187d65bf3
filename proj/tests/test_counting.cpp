#include "spsim/counting.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace spsim;

namespace {

PulseEnvelope pi_pulse(double duration) {
  return PulseEnvelope::square(std::numbers::pi, duration);
}

PhotocountDistribution poisson_distribution(double lambda, int n_max) {
  PhotocountDistribution dist;
  dist.channel = "synthetic";
  dist.probs.resize(n_max + 1);
  double p = std::exp(-lambda);
  for (int n = 0; n <= n_max; ++n) {
    dist.probs[n] = p;
    p *= lambda / (n + 1);
  }
  return dist;
}

}  // namespace

TEST_SUITE("counting") {

TEST_CASE("photocount probabilities and residual sum to one") {
  for (double gamma_t : {0.01, 0.1, 0.5}) {
    const PhotocountDistribution dist = photocount_distribution(
        SystemModel::two_level(1.0), pi_pulse(gamma_t), 0, 8);
    double sum = dist.residual;
    for (double p : dist.probs) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("vacuum probability equals the no jump survival") {
  const SystemModel model = SystemModel::standard_cascade(1.0);
  const PulseEnvelope pulse = pi_pulse(0.2);
  const IntegrationOptions opts;
  const double horizon = decay_horizon(model, pulse, opts);
  for (int channel : {0, 1}) {
    const PhotocountDistribution dist =
        photocount_distribution(model, pulse, channel, 8, opts);
    const DensityMatrix survived =
        evolve_nojump(model, pulse, channel, model.ground_state(), 0.0, horizon, opts);
    CHECK(std::abs(dist.probs[0] - survived.trace()) < 1e-10);
  }
}

TEST_CASE("number resolved blocks resum to the unconditional state") {
  const SystemModel model = SystemModel::two_level(1.0);
  const PulseEnvelope pulse = pi_pulse(0.3);
  const IntegrationOptions opts;
  const NumberResolvedTerminal terminal = photocount_blocks(model, pulse, 0, 8, opts);
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(2, 2);
  for (const Eigen::MatrixXcd& block : terminal.blocks) total += block;
  CHECK((total - terminal.unconditional).cwiseAbs().maxCoeff() < 1e-8);

  const double horizon = decay_horizon(model, pulse, opts);
  const DensityMatrix direct = evolve(model, pulse, model.ground_state(), 0.0, horizon, opts);
  CHECK((terminal.unconditional - direct.matrix()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("correlator route agrees with the number resolved moments") {
  const SystemModel model = SystemModel::two_level(1.0);
  const PulseEnvelope pulse = pi_pulse(0.3);
  const PhotocountDistribution dist = photocount_distribution(model, pulse, 0, 10);
  const FactorialMoments truncated = factorial_moments(dist);
  const FactorialMoments exact = correlator_moments(model, pulse, 0);
  CHECK(truncated.mean == doctest::Approx(dist.mean()));
  CHECK(truncated.second == doctest::Approx(dist.factorial_moment2()));
  CHECK(exact.mean == doctest::Approx(truncated.mean).epsilon(1e-7));
  CHECK(exact.second == doctest::Approx(truncated.second).epsilon(1e-6));
  CHECK(g2_via_correlator(model, pulse, 0) ==
        doctest::Approx(g2_from_counts(dist)).epsilon(1e-6));
}

TEST_CASE("cascade emits the same photon statistics on both channels") {
  const SystemModel model = SystemModel::standard_cascade(1.0);
  const PulseEnvelope pulse = pi_pulse(0.3);
  const PhotocountDistribution upper = photocount_distribution(model, pulse, 0, 8);
  const PhotocountDistribution lower = photocount_distribution(model, pulse, 1, 8);
  CHECK(std::abs(upper.mean() - lower.mean()) < 1e-6);
  for (int n = 0; n <= 8; ++n)
    CHECK(std::abs(upper.probs[n] - lower.probs[n]) < 1e-5);
}

TEST_CASE("g2 reduces to one on a poissonian reference") {
  const PhotocountDistribution dist = poisson_distribution(0.1, 24);
  CHECK(dist.mean() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(dist.factorial_moment2() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(g2_from_counts(dist) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("two photon approximation matches the moment form at low area") {
  const PhotocountDistribution dist =
      photocount_distribution(SystemModel::two_level(1.0), pi_pulse(0.01), 0, 6);
  REQUIRE(dist.probs[3] < 1e-3 * dist.probs[2]);
  CHECK(g2_two_photon_approx(dist) ==
        doctest::Approx(g2_from_counts(dist)).epsilon(0.01));
}

TEST_CASE("g2 from counts rejects an empty distribution") {
  PhotocountDistribution empty;
  empty.probs = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(g2_from_counts(empty), std::domain_error);
}

TEST_CASE("residual guard fires when the truncation is too low") {
  CHECK_THROWS_AS(photocount_distribution(SystemModel::two_level(1.0),
                                          pi_pulse(10.0), 0, 2),
                  std::runtime_error);
  // Same configuration passes once the truncation is raised.
  CHECK_NOTHROW(photocount_distribution(SystemModel::two_level(1.0),
                                        pi_pulse(10.0), 0, 16));
}

TEST_CASE("monte carlo runs are reproducible and thread invariant") {
  const SystemModel model = SystemModel::two_level(1.0);
  const PulseEnvelope pulse = pi_pulse(0.1);
  McOptions serial;
  serial.threads = 1;
  McOptions dual = serial;
  dual.threads = 2;
  const McResult a = mc_trajectories(model, pulse, 0, 5000, 42, {}, serial);
  const McResult b = mc_trajectories(model, pulse, 0, 5000, 42, {}, dual);
  const McResult c = mc_trajectories(model, pulse, 0, 5000, 43, {}, serial);

  REQUIRE(a.dist.probs.size() == b.dist.probs.size());
  for (std::size_t n = 0; n < a.dist.probs.size(); ++n)
    CHECK(a.dist.probs[n] == b.dist.probs[n]);
  REQUIRE(a.records.times.size() == b.records.times.size());
  for (std::size_t k = 0; k < a.records.times.size(); ++k) {
    CHECK(a.records.times[k] == b.records.times[k]);
    CHECK(a.records.offsets[k] == b.records.offsets[k]);
  }
  // A different seed must not reproduce the run bit for bit.
  CHECK(a.records.times[0] != c.records.times[0]);
}

TEST_CASE("monte carlo frequencies track the deterministic distribution") {
  const SystemModel model = SystemModel::two_level(1.0);
  const PulseEnvelope pulse = pi_pulse(0.1);
  const std::uint64_t n = 20000;
  const McResult mc = mc_trajectories(model, pulse, 0, n, 20260822);
  const PhotocountDistribution det = photocount_distribution(model, pulse, 0, 8);
  for (int k = 0; k <= 2; ++k) {
    const double p = det.probs[k];
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(mc.dist.probs[k] - p) <= 4.0 * se + 1e-9);
  }
}

TEST_CASE("jump records stay consistent with the count histograms") {
  const SystemModel model = SystemModel::standard_cascade(1.0);
  const PulseEnvelope pulse = pi_pulse(0.2);
  const std::uint64_t n = 3000;
  const McResult mc = mc_trajectories(model, pulse, 1, n, 7);

  CHECK(mc.n_trajectories == n);
  REQUIRE(mc.records.times.size() == model.channels().size());
  const double horizon = decay_horizon(model, pulse, {});
  for (std::size_t k = 0; k < model.channels().size(); ++k) {
    REQUIRE(mc.records.offsets[k].size() == n + 1);
    CHECK(mc.records.offsets[k].front() == 0);
    CHECK(mc.records.offsets[k].back() == mc.records.times[k].size());
    std::uint64_t bucket_sum = 0;
    std::uint64_t weighted = 0;
    for (std::size_t b = 0; b < mc.channel_counts[k].size(); ++b) {
      bucket_sum += mc.channel_counts[k][b];
      weighted += b * mc.channel_counts[k][b];
    }
    CHECK(bucket_sum == n);
    CHECK(weighted == mc.records.times[k].size());
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::span<const double> traj = mc.records.trajectory(static_cast<int>(k), i);
      for (std::size_t j = 0; j + 1 < traj.size(); ++j) CHECK(traj[j] <= traj[j + 1]);
      for (double t : traj) {
        CHECK(t >= 0.0);
        CHECK(t <= horizon);
      }
    }
  }

  // Cascade ordering: within a trajectory the upper photon precedes the lower.
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::span<const double> upper = mc.records.trajectory(0, i);
    const std::span<const double> lower = mc.records.trajectory(1, i);
    if (!upper.empty() && !lower.empty()) CHECK(upper.front() <= lower.front());
    CHECK(upper.size() == lower.size());  // every cascade completes by the horizon
  }

  // First emission on the lower channel happens about one lifetime after the pulse.
  double sum = 0.0;
  std::uint64_t fired = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::span<const double> traj = mc.records.trajectory(1, i);
    if (!traj.empty()) {
      sum += traj.front();
      ++fired;
    }
  }
  REQUIRE(fired > n / 2);
  const double mean_first = sum / static_cast<double>(fired);
  CHECK(mean_first > 0.8);
  CHECK(mean_first < 2.2);
}

TEST_CASE("record cap suppresses jump time storage") {
  const McResult mc = mc_trajectories(SystemModel::two_level(1.0), pi_pulse(0.1), 0,
                                      500, 9, {}, {.threads = 1, .record_cap = 0});
  CHECK(mc.records.times[0].empty());
  CHECK(mc.n_trajectories == 500);
  CHECK(mc.dist.probs[1] > 0.5);  // statistics still accumulated
}

}  // TEST_SUITE
