#pragma once

#include "spsim/operators.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace spsim {

enum class PulseShape { Square, Gaussian };

/*
 Drive envelope Omega(t) >= 0 with pulse area A = integral of Omega.
 Square: constant A/T on the half-open interval [0, T).
 Gaussian: duration is the FWHM; the profile is truncated at +-4 sigma and
 shifted so its support is [0, 8 sigma), with the peak rescaled so the
 truncated area is still exactly A.
*/
class PulseEnvelope {
 public:
  static PulseEnvelope square(double area, double duration);
  static PulseEnvelope gaussian(double area, double fwhm);

  PulseShape shape() const { return shape_; }
  double area() const { return area_; }
  double duration() const { return duration_; }  // T: length (square) or FWHM (gaussian)
  double support_end() const { return support_; }
  double peak_rate() const { return peak_; }
  double rate(double t) const;  // Omega(t); zero outside [0, support_end)

 private:
  PulseEnvelope() = default;

  PulseShape shape_ = PulseShape::Square;
  double area_ = 0, duration_ = 0, support_ = 0, peak_ = 0;
  double sigma_ = 0, center_ = 0;  // gaussian only
};

enum class SystemKind { TwoLevel, ThreeLevelCascade };

// Radiative decay channel sqrt(rate) |target><source|.
struct LossChannel {
  std::string name;
  double rate = 0;
  int source = 0;
  int target = 0;
};

/*
 Driven emitter models behind one interface.

 Two-level system: basis {|g>=0, |e>=1}, drive couples g <-> e, one loss
 channel "main" at rate gamma.

 Three-level cascade: basis {|0>=0, |X'>=1, |2X>=2}. The drive couples the
 ground state directly to the upper level (|0> <-> |2X>, two-photon pumping
 of the biexciton); the intermediate level is not driven. Decay cascades
 2X -> X' -> 0 through channels "2X" (rate gamma_2x) and "X" (rate gamma_x).

 H(t) = Omega(t)/2 * C with C the static coupling matrix, so the pulse area
 A = integral Omega equals the Rabi rotation angle of the driven transition.
*/
class SystemModel {
 public:
  static SystemModel two_level(double gamma);
  static SystemModel three_level_cascade(double gamma_x, double gamma_2x);
  // gamma_x = gamma, gamma_2x = 2 gamma: the usual radiative cascade ratio.
  static SystemModel standard_cascade(double gamma);

  SystemKind kind() const { return kind_; }
  Eigen::Index dim() const { return coupling_.rows(); }
  const std::vector<LossChannel>& channels() const { return channels_; }
  // Resolves a channel name; "default" means the emission channel of interest
  // ("main" for the two-level system, "2X" for the cascade).
  int channel_index(std::string_view name) const;
  Eigen::MatrixXcd loss_operator(int channel) const;
  const Eigen::MatrixXcd& drive_coupling() const { return coupling_; }
  Eigen::MatrixXcd hamiltonian(const PulseEnvelope& pulse, double t) const;
  double gamma_max() const;
  double gamma_min() const;
  DensityMatrix ground_state() const { return DensityMatrix::ground(dim()); }
  Eigen::VectorXcd ground_ket() const;

 private:
  SystemModel(SystemKind kind, Eigen::MatrixXcd coupling,
              std::vector<LossChannel> channels)
      : kind_(kind), coupling_(std::move(coupling)), channels_(std::move(channels)) {}

  SystemKind kind_;
  Eigen::MatrixXcd coupling_;
  std::vector<LossChannel> channels_;
};

}  // namespace spsim
