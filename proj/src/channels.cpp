#include "nvdiss/channels.hpp"

#include <cmath>
#include <string>

namespace nvdiss {

IncompleteChannelError::IncompleteChannelError(double residual)
    : std::invalid_argument("Kraus operators are not complete (residual " + std::to_string(residual) + ")"),
      residual_(residual) {}

double completeness_residual(const std::vector<ComplexMatrix>& ops) {
  if (ops.empty()) return 1.0;
  const auto d = ops.front().rows();
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  for (const auto& e : ops) s += e.adjoint() * e;
  return max_abs(s - ComplexMatrix::Identity(d, d));
}

KrausChannel::KrausChannel(std::vector<ComplexMatrix> ops) : dim_(0), ops_(std::move(ops)) {
  if (ops_.empty()) throw std::invalid_argument("KrausChannel: no operators");
  dim_ = static_cast<std::size_t>(ops_.front().rows());
  for (const auto& e : ops_) {
    if (e.rows() != e.cols() || static_cast<std::size_t>(e.rows()) != dim_) {
      throw std::invalid_argument("KrausChannel: operators must be square with a common dimension");
    }
    if (!is_finite(e)) throw std::invalid_argument("KrausChannel: non-finite operator");
  }
  const double r = nvdiss::completeness_residual(ops_);
  if (r > kCompletenessTol) throw IncompleteChannelError(r);
}

KrausChannel KrausChannel::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return KrausChannel({ComplexMatrix::Identity(d, d)});
}

double KrausChannel::completeness_residual() const { return nvdiss::completeness_residual(ops_); }

std::pair<ComplexMatrix, ComplexMatrix> build_F_operators() {
  const ComplexMatrix id = ComplexMatrix::Identity(4, 4);
  const ComplexMatrix xx = pauli_string({Pauli::X, Pauli::X});
  const ComplexMatrix z1 = pauli_string({Pauli::Z, Pauli::I});
  return {0.5 * (id + xx), 0.5 * z1 * (id - xx)};
}

KrausChannel build_Ex() {
  const auto [f0, f1] = build_F_operators();
  const double s = 1.0 / std::sqrt(2.0);
  return KrausChannel({s * (f0 + f1), s * (f0 - f1)});
}

KrausChannel build_Ez() {
  const ComplexMatrix hh = kron(ComplexMatrix(hadamard()), ComplexMatrix(hadamard()));
  const auto ex = build_Ex();
  return KrausChannel({hh * ex.ops()[0], hh * ex.ops()[1]});
}

DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho) {
  if (ch.dim() != rho.dim()) throw std::invalid_argument("apply_channel: dimension mismatch");
  const double r = ch.completeness_residual();
  if (r > kCompletenessTol) throw IncompleteChannelError(r);
  const auto d = static_cast<Eigen::Index>(rho.dim());
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (const auto& e : ch.ops()) out += e * rho.matrix() * e.adjoint();
  return DensityMatrix::from_numerical(out);
}

std::vector<DensityMatrix> apply_channel_batch_serial(const KrausChannel& ch,
                                                      const std::vector<DensityMatrix>& states) {
  std::vector<DensityMatrix> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(apply_channel(ch, s));
  return out;
}

std::vector<DensityMatrix> apply_channel_batch(const KrausChannel& ch, const std::vector<DensityMatrix>& states) {
  // DensityMatrix has no default state, so results land in a staging buffer first.
  std::vector<ComplexMatrix> staged(states.size());
  const auto n = static_cast<std::ptrdiff_t>(states.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    staged[k] = apply_channel(ch, states[k]).matrix();
  }
  std::vector<DensityMatrix> out;
  out.reserve(states.size());
  for (auto& m : staged) out.emplace_back(std::move(m));
  return out;
}

KrausChannel channel_from_circuit(const ComplexMatrix& u, std::size_t ancilla_dim, const StateVector& ancilla_init) {
  if (ancilla_dim == 0 || u.rows() != u.cols() || u.rows() % static_cast<Eigen::Index>(ancilla_dim) != 0) {
    throw std::invalid_argument("channel_from_circuit: unitary does not factor as ancilla (x) system");
  }
  if (!is_unitary(u, 1e-10)) throw std::invalid_argument("channel_from_circuit: circuit is not unitary");
  if (ancilla_init.size() != static_cast<Eigen::Index>(ancilla_dim) || std::abs(ancilla_init.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("channel_from_circuit: ancilla state must be normalized with matching dimension");
  }
  const auto ds = u.rows() / static_cast<Eigen::Index>(ancilla_dim);
  const auto da = static_cast<Eigen::Index>(ancilla_dim);
  std::vector<ComplexMatrix> ops;
  for (Eigen::Index k = 0; k < da; ++k) {
    ComplexMatrix e = ComplexMatrix::Zero(ds, ds);
    for (Eigen::Index j = 0; j < da; ++j) {
      if (ancilla_init(j) != cplx(0.0)) e += ancilla_init(j) * u.block(k * ds, j * ds, ds, ds);
    }
    if (e.norm() >= kPruneNorm) ops.push_back(std::move(e));
  }
  return KrausChannel(std::move(ops));
}

KrausChannel compose(const KrausChannel& a, const KrausChannel& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("compose: dimension mismatch");
  std::vector<ComplexMatrix> ops;
  ops.reserve(a.size() * b.size());
  for (const auto& ea : a.ops())
    for (const auto& eb : b.ops()) ops.push_back(eb * ea);
  return KrausChannel(std::move(ops));
}

namespace {

std::vector<ComplexMatrix> hermitian_basis(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<ComplexMatrix> basis;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      ComplexMatrix m = ComplexMatrix::Zero(d, d);
      if (i == j) {
        m(i, i) = 1.0;
        basis.push_back(m);
        continue;
      }
      m(i, j) = m(j, i) = 1.0;
      basis.push_back(m);
      m(i, j) = cplx(0.0, -1.0);
      m(j, i) = cplx(0.0, 1.0);
      basis.push_back(m);
    }
  }
  return basis;
}

ComplexMatrix act(const KrausChannel& ch, const ComplexMatrix& x) {
  ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
  for (const auto& e : ch.ops()) out += e * x * e.adjoint();
  return out;
}

}  // namespace

double channel_distance(const KrausChannel& a, const KrausChannel& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("channel_distance: dimension mismatch");
  double worst = 0.0;
  for (const auto& p : hermitian_basis(a.dim())) worst = std::max(worst, max_abs(act(a, p) - act(b, p)));
  return worst;
}

ComplexMatrix superoperator(const KrausChannel& ch) {
  // row-major vec: vec(A X B) = (A (x) B^T) vec(X)
  const auto d = static_cast<Eigen::Index>(ch.dim());
  ComplexMatrix s = ComplexMatrix::Zero(d * d, d * d);
  for (const auto& e : ch.ops()) s += kron(e, e.conjugate());
  return s;
}

}  // namespace nvdiss
