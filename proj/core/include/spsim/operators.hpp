#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace spsim {

using complexd = std::complex<double>;

// Shared numerical tolerances.
namespace tol {
inline constexpr double hermiticity = 1e-12;        // max |M - M^dag| element for states
inline constexpr double hamiltonian_hermiticity = 1e-10;
inline constexpr double unit_trace = 1e-10;         // |tr(rho) - 1| for normalized states
inline constexpr double trace_slack = 1e-10;        // how far outside [0,1] a conditional trace may sit
inline constexpr double eigenvalue_floor = -1e-10;  // smallest admissible state eigenvalue
// Evolved states carry fixed-step truncation error; their positivity check is
// aligned with the integrator's documented accuracy, not the construction floor.
inline constexpr double evolved_eigenvalue_floor = -1e-8;
}  // namespace tol

// Kronecker product. Used to turn operator sandwiches into matrices acting on
// column-stacked density matrices: vec(A rho B) = (B^T (x) A) vec(rho).
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Column-stacking isomorphism between d x d matrices and length d^2 vectors.
Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd devectorize(const Eigen::VectorXcd& v);

enum class StateKind {
  Normalized,   // unit trace
  Conditional,  // trace in [0, 1]: no-jump / number-resolved blocks
};

// Density matrix with validated physicality: Hermitian, eigenvalues >= 0 (up
// to tolerance), and trace either == 1 (Normalized) or in [0, 1] (Conditional).
// Factories throw std::invalid_argument when the input fails validation.
class DensityMatrix {
 public:
  // trace_tol and eigen_floor widen the checks for integrator outputs whose
  // documented drift allowance is looser than the construction defaults.
  static DensityMatrix normalized(const Eigen::MatrixXcd& m,
                                  double trace_tol = tol::unit_trace,
                                  double eigen_floor = tol::eigenvalue_floor);
  static DensityMatrix conditional(const Eigen::MatrixXcd& m,
                                   double eigen_floor = tol::eigenvalue_floor);
  static DensityMatrix ground(Eigen::Index dim);
  static DensityMatrix pure(const Eigen::VectorXcd& ket);

  Eigen::Index dim() const { return mat_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return mat_; }
  StateKind kind() const { return kind_; }
  double trace() const { return mat_.trace().real(); }
  double population(Eigen::Index level) const;

 private:
  DensityMatrix(Eigen::MatrixXcd m, StateKind kind)
      : mat_(std::move(m)), kind_(kind) {}

  Eigen::MatrixXcd mat_;
  StateKind kind_;
};

// Linear map on vectorized density matrices, stored as a dense d^2 x d^2 matrix.
class SuperOperator {
 public:
  explicit SuperOperator(Eigen::MatrixXcd m);  // must be (d^2) x (d^2)
  static SuperOperator identity(Eigen::Index dim);

  Eigen::Index dim() const { return dim_; }
  const Eigen::MatrixXcd& matrix() const { return mat_; }
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;

  SuperOperator& operator+=(const SuperOperator& rhs);
  SuperOperator& operator-=(const SuperOperator& rhs);
  SuperOperator& operator*=(complexd scale);
  friend SuperOperator operator+(SuperOperator lhs, const SuperOperator& rhs) { return lhs += rhs; }
  friend SuperOperator operator-(SuperOperator lhs, const SuperOperator& rhs) { return lhs -= rhs; }
  friend SuperOperator operator*(complexd scale, SuperOperator rhs) { return rhs *= scale; }
  // Composition: (a * b) rho = a(b(rho)).
  friend SuperOperator operator*(const SuperOperator& a, const SuperOperator& b);

 private:
  Eigen::Index dim_;
  Eigen::MatrixXcd mat_;
};

// J[L] rho = L rho L^dag  (recycling part of one emission channel).
SuperOperator jump_superop(const Eigen::MatrixXcd& l);

// {M, .} as a superoperator.
SuperOperator anticommutator_superop(const Eigen::MatrixXcd& m);

// D[L] rho = L rho L^dag - 1/2 {L^dag L, rho}.
SuperOperator dissipator(const Eigen::MatrixXcd& l);

// -i[H, .] for Hermitian H (rejects |H - H^dag| beyond tolerance).
SuperOperator hamiltonian_superop(const Eigen::MatrixXcd& h);

// Full generator: -i[H, rho] + sum_k D[L_k] rho.
SuperOperator liouvillian(const Eigen::MatrixXcd& h,
                          const std::vector<Eigen::MatrixXcd>& loss_ops);

}  // namespace spsim
