#include "spsim/models.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace spsim;

namespace {

// Composite Simpson quadrature; the pulse rate is smooth inside its support.
double integrate_rate(const PulseEnvelope& pulse, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = pulse.rate(a) + pulse.rate(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * pulse.rate(a + i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("square pulse is flat on a half open support") {
  const PulseEnvelope pulse = PulseEnvelope::square(std::numbers::pi, 0.5);
  CHECK(pulse.support_end() == doctest::Approx(0.5));
  CHECK(pulse.rate(0.0) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(pulse.rate(0.25) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(pulse.rate(0.5) == 0.0);   // right edge excluded
  CHECK(pulse.rate(-1e-9) == 0.0);
  CHECK(pulse.rate(1.0) == 0.0);
  CHECK(integrate_rate(pulse, 0.0, 0.5 - 1e-12, 2000) ==
        doctest::Approx(std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("gaussian pulse area and support follow from the width") {
  const double area = 1.75;
  const double fwhm = 0.3;
  const PulseEnvelope pulse = PulseEnvelope::gaussian(area, fwhm);
  const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  CHECK(pulse.support_end() == doctest::Approx(8.0 * sigma));

  // Peak sits at the support midpoint and is scaled so the truncated area is exact.
  const double expected_peak =
      area / (sigma * std::sqrt(2.0 * std::numbers::pi) * std::erf(4.0 / std::numbers::sqrt2));
  CHECK(pulse.rate(4.0 * sigma) == doctest::Approx(expected_peak).epsilon(1e-12));
  CHECK(integrate_rate(pulse, 0.0, pulse.support_end() - 1e-12, 4000) ==
        doctest::Approx(area).epsilon(1e-9));
  CHECK(pulse.rate(pulse.support_end()) == 0.0);
  CHECK(pulse.rate(-1e-12) == 0.0);
}

TEST_CASE("pulse factories reject non positive parameters") {
  CHECK_THROWS_AS(PulseEnvelope::square(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(PulseEnvelope::square(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PulseEnvelope::gaussian(1.0, -0.5), std::invalid_argument);
}

TEST_CASE("two level model exposes one decay channel") {
  const SystemModel model = SystemModel::two_level(2.5);
  CHECK(model.dim() == 2);
  REQUIRE(model.channels().size() == 1);
  CHECK(model.channels()[0].name == "main");
  CHECK(model.channels()[0].rate == doctest::Approx(2.5));
  CHECK(model.channels()[0].source == 1);
  CHECK(model.channels()[0].target == 0);

  const Eigen::MatrixXcd l = model.loss_operator(0);
  CHECK(std::abs(l(0, 1) - std::sqrt(2.5)) < 1e-15);
  CHECK(l.cwiseAbs().sum() == doctest::Approx(std::sqrt(2.5)));

  CHECK(model.gamma_max() == doctest::Approx(2.5));
  CHECK(model.gamma_min() == doctest::Approx(2.5));
}

TEST_CASE("cascade model orders the biexciton channel first") {
  const SystemModel model = SystemModel::three_level_cascade(1.0, 2.0);
  CHECK(model.dim() == 3);
  REQUIRE(model.channels().size() == 2);
  CHECK(model.channels()[0].name == "2X");
  CHECK(model.channels()[0].rate == doctest::Approx(2.0));
  CHECK(model.channels()[0].source == 2);
  CHECK(model.channels()[0].target == 1);
  CHECK(model.channels()[1].name == "X");
  CHECK(model.channels()[1].rate == doctest::Approx(1.0));
  CHECK(model.channels()[1].source == 1);
  CHECK(model.channels()[1].target == 0);
  CHECK(model.gamma_max() == doctest::Approx(2.0));
  CHECK(model.gamma_min() == doctest::Approx(1.0));

  const SystemModel standard = SystemModel::standard_cascade(0.5);
  CHECK(standard.channels()[0].rate == doctest::Approx(1.0));
  CHECK(standard.channels()[1].rate == doctest::Approx(0.5));
}

TEST_CASE("channel lookup accepts default and explicit names") {
  const SystemModel two = SystemModel::two_level(1.0);
  CHECK(two.channel_index("default") == 0);
  CHECK(two.channel_index("main") == 0);
  CHECK_THROWS_AS(two.channel_index("X"), std::invalid_argument);

  const SystemModel three = SystemModel::standard_cascade(1.0);
  CHECK(three.channel_index("default") == 0);
  CHECK(three.channel_index("2X") == 0);
  CHECK(three.channel_index("X") == 1);
  CHECK_THROWS_AS(three.channel_index("main"), std::invalid_argument);
}

TEST_CASE("drive couples ground to the topmost excited state") {
  const SystemModel two = SystemModel::two_level(1.0);
  const Eigen::MatrixXcd c2 = two.drive_coupling();
  CHECK(std::abs(c2(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(c2(1, 0) - 1.0) < 1e-15);
  CHECK(c2.cwiseAbs().sum() == doctest::Approx(2.0));

  const SystemModel three = SystemModel::standard_cascade(1.0);
  const Eigen::MatrixXcd c3 = three.drive_coupling();
  CHECK(std::abs(c3(0, 2) - 1.0) < 1e-15);
  CHECK(std::abs(c3(2, 0) - 1.0) < 1e-15);
  CHECK(std::abs(c3(0, 1)) == 0.0);
  CHECK(std::abs(c3(1, 2)) == 0.0);
  CHECK(c3.cwiseAbs().sum() == doctest::Approx(2.0));
}

TEST_CASE("hamiltonian is half the instantaneous rate times the coupling") {
  const SystemModel model = SystemModel::two_level(1.0);
  const PulseEnvelope pulse = PulseEnvelope::square(1.5, 0.5);  // rate 3 inside
  const Eigen::MatrixXcd h = model.hamiltonian(pulse, 0.25);
  CHECK(std::abs(h(0, 1) - 1.5) < 1e-15);
  CHECK(std::abs(h(1, 0) - 1.5) < 1e-15);
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.hamiltonian(pulse, 0.75).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("model factories reject non positive rates") {
  CHECK_THROWS_AS(SystemModel::two_level(0.0), std::invalid_argument);
  CHECK_THROWS_AS(SystemModel::three_level_cascade(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SystemModel::three_level_cascade(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("ground state helpers agree") {
  const SystemModel model = SystemModel::standard_cascade(1.0);
  CHECK(model.ground_state().population(0) == 1.0);
  CHECK(std::abs(model.ground_ket()(0) - 1.0) == 0.0);
  CHECK(model.ground_ket().norm() == doctest::Approx(1.0));
}

}  // TEST_SUITE
