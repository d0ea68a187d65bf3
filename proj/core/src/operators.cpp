#include "spsim/operators.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spsim {

namespace {

void require_square(const Eigen::MatrixXcd& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << what << ": expected a nonempty square matrix, got " << m.rows()
        << "x" << m.cols();
    throw std::invalid_argument(msg.str());
  }
}

double hermiticity_defect(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Eigen::MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian,
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& m) {
  require_square(m, "vectorize");
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

Eigen::MatrixXcd devectorize(const Eigen::VectorXcd& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size())
    throw std::invalid_argument("devectorize: length is not a perfect square");
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
}

DensityMatrix DensityMatrix::normalized(const Eigen::MatrixXcd& m,
                                        double trace_tol, double eigen_floor) {
  require_square(m, "DensityMatrix::normalized");
  if (hermiticity_defect(m) > tol::hermiticity)
    throw std::invalid_argument("DensityMatrix::normalized: matrix is not Hermitian");
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());  // project away sub-tolerance noise
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > trace_tol) {
    std::ostringstream msg;
    msg << "DensityMatrix::normalized: trace " << tr << " deviates from 1 by more than " << trace_tol;
    throw std::invalid_argument(msg.str());
  }
  if (min_eigenvalue(h) < eigen_floor)
    throw std::invalid_argument("DensityMatrix::normalized: negative eigenvalue beyond tolerance");
  return DensityMatrix(std::move(h), StateKind::Normalized);
}

DensityMatrix DensityMatrix::conditional(const Eigen::MatrixXcd& m,
                                         double eigen_floor) {
  require_square(m, "DensityMatrix::conditional");
  if (hermiticity_defect(m) > tol::hermiticity)
    throw std::invalid_argument("DensityMatrix::conditional: matrix is not Hermitian");
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  const double tr = h.trace().real();
  if (tr < -tol::trace_slack || tr > 1.0 + tol::trace_slack) {
    std::ostringstream msg;
    msg << "DensityMatrix::conditional: trace " << tr << " outside [0, 1]";
    throw std::invalid_argument(msg.str());
  }
  if (min_eigenvalue(h) < eigen_floor)
    throw std::invalid_argument("DensityMatrix::conditional: negative eigenvalue beyond tolerance");
  return DensityMatrix(std::move(h), StateKind::Conditional);
}

DensityMatrix DensityMatrix::ground(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("DensityMatrix::ground: dim must be >= 1");
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  m(0, 0) = 1.0;
  return DensityMatrix(std::move(m), StateKind::Normalized);
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& ket) {
  if (ket.size() == 0) throw std::invalid_argument("DensityMatrix::pure: empty ket");
  const double n2 = ket.squaredNorm();
  if (std::abs(n2 - 1.0) > tol::unit_trace)
    throw std::invalid_argument("DensityMatrix::pure: ket is not normalized");
  return DensityMatrix(ket * ket.adjoint(), StateKind::Normalized);
}

double DensityMatrix::population(Eigen::Index level) const {
  if (level < 0 || level >= dim())
    throw std::invalid_argument("DensityMatrix::population: level out of range");
  return mat_(level, level).real();
}

SuperOperator::SuperOperator(Eigen::MatrixXcd m) : dim_(0), mat_(std::move(m)) {
  require_square(mat_, "SuperOperator");
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(mat_.rows()))));
  if (d * d != mat_.rows())
    throw std::invalid_argument("SuperOperator: side length is not a perfect square");
  dim_ = d;
}

SuperOperator SuperOperator::identity(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("SuperOperator::identity: dim must be >= 1");
  return SuperOperator(Eigen::MatrixXcd::Identity(dim * dim, dim * dim));
}

Eigen::MatrixXcd SuperOperator::apply(const Eigen::MatrixXcd& rho) const {
  require_square(rho, "SuperOperator::apply");
  if (rho.rows() != dim_)
    throw std::invalid_argument("SuperOperator::apply: dimension mismatch");
  return devectorize(mat_ * vectorize(rho));
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& rhs) {
  if (rhs.dim_ != dim_) throw std::invalid_argument("SuperOperator: dimension mismatch");
  mat_ += rhs.mat_;
  return *this;
}

SuperOperator& SuperOperator::operator-=(const SuperOperator& rhs) {
  if (rhs.dim_ != dim_) throw std::invalid_argument("SuperOperator: dimension mismatch");
  mat_ -= rhs.mat_;
  return *this;
}

SuperOperator& SuperOperator::operator*=(complexd scale) {
  mat_ *= scale;
  return *this;
}

SuperOperator operator*(const SuperOperator& a, const SuperOperator& b) {
  if (a.dim_ != b.dim_) throw std::invalid_argument("SuperOperator: dimension mismatch");
  return SuperOperator(a.mat_ * b.mat_);
}

SuperOperator jump_superop(const Eigen::MatrixXcd& l) {
  require_square(l, "jump_superop");
  // vec(L rho L^dag) = (conj(L) (x) L) vec(rho)
  return SuperOperator(kron(l.conjugate(), l));
}

SuperOperator anticommutator_superop(const Eigen::MatrixXcd& m) {
  require_square(m, "anticommutator_superop");
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  return SuperOperator(kron(id, m) + kron(m.transpose(), id));
}

SuperOperator dissipator(const Eigen::MatrixXcd& l) {
  require_square(l, "dissipator");
  const Eigen::MatrixXcd ldl = l.adjoint() * l;
  SuperOperator out = jump_superop(l);
  out -= complexd(0.5) * anticommutator_superop(ldl);
  return out;
}

SuperOperator hamiltonian_superop(const Eigen::MatrixXcd& h) {
  require_square(h, "hamiltonian_superop");
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tol::hamiltonian_hermiticity)
    throw std::invalid_argument("hamiltonian_superop: H is not Hermitian");
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(h.rows(), h.cols());
  return SuperOperator(complexd(0, -1) * (kron(id, h) - kron(h.transpose(), id)));
}

SuperOperator liouvillian(const Eigen::MatrixXcd& h,
                          const std::vector<Eigen::MatrixXcd>& loss_ops) {
  SuperOperator out = hamiltonian_superop(h);
  for (const auto& l : loss_ops) {
    if (l.rows() != h.rows() || l.cols() != h.cols())
      throw std::invalid_argument("liouvillian: loss operator dimension mismatch");
    out += dissipator(l);
  }
  return out;
}

}  // namespace spsim
