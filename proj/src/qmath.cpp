#include "nvdiss/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nvdiss {

char pauli_symbol(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

Pauli pauli_from_symbol(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw std::invalid_argument(std::string("unknown Pauli symbol '") + c + "'");
  }
}

Matrix2c pauli2(Pauli p) {
  const cplx i(0.0, 1.0);
  Matrix2c m;
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -i, i, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

ComplexMatrix pauli(Pauli p) { return pauli2(p); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix kron_all(std::span<const ComplexMatrix> factors) {
  if (factors.empty()) throw std::invalid_argument("kron_all: no factors");
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, std::size_t qubit, std::size_t n_qubits) {
  if (qubit >= n_qubits) throw std::invalid_argument("embed: qubit index out of range");
  const auto left = Eigen::Index{1} << qubit;
  const auto right = Eigen::Index{1} << (n_qubits - qubit - 1);
  return kron(kron(ComplexMatrix::Identity(left, left), op),
              ComplexMatrix::Identity(right, right));
}

ComplexMatrix pauli_string(std::span<const Pauli> labels) {
  std::vector<ComplexMatrix> f;
  f.reserve(labels.size());
  for (Pauli p : labels) f.push_back(pauli(p));
  return kron_all(f);
}

ComplexMatrix pauli_string(std::initializer_list<Pauli> labels) {
  return pauli_string(std::span<const Pauli>(labels.begin(), labels.size()));
}

double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_finite(const ComplexMatrix& m) { return m.allFinite(); }

bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

bool is_unitary(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m * m.adjoint() - ComplexMatrix::Identity(m.rows(), m.cols())) <= tol;
}

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double min_eig(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
  }
  if (!is_power_of_two(static_cast<std::size_t>(m_.rows()))) {
    throw std::invalid_argument("DensityMatrix: dimension must be a power of two");
  }
  if (!is_finite(m_)) throw std::invalid_argument("DensityMatrix: non-finite entries");
  if (!is_hermitian(m_, kHermitianTol)) {
    throw std::invalid_argument("DensityMatrix: not Hermitian (residual " +
                                std::to_string(max_abs(m_ - m_.adjoint())) + ")");
  }
  const double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) + " != 1");
  }
  const double lo = min_eig(m_);
  if (lo < -kPsdTol) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(lo));
  }
}

DensityMatrix DensityMatrix::from_numerical(const ComplexMatrix& m) {
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  h /= h.trace().real();
  return DensityMatrix(std::move(h));
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  const double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-10) throw std::invalid_argument("DensityMatrix::pure: unnormalized state");
  return from_numerical(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(dim));
}

double DensityMatrix::min_eigenvalue() const { return min_eig(m_); }

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep,
                            std::span<const std::size_t> dims) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  const std::size_t total =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  if (dims.empty() || total != rho.dim()) {
    throw std::invalid_argument("partial_trace: subsystem dims do not match the state");
  }
  std::vector<std::size_t> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end() || kept.back() >= dims.size()) {
    throw std::invalid_argument("partial_trace: invalid keep set");
  }
  std::vector<std::size_t> traced;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (!std::binary_search(kept.begin(), kept.end(), s)) traced.push_back(s);
  }

  // stride of each subsystem in the full index (last subsystem fastest)
  std::vector<std::size_t> stride(dims.size());
  std::size_t acc = 1;
  for (std::size_t s = dims.size(); s-- > 0;) {
    stride[s] = acc;
    acc *= dims[s];
  }
  auto offsets = [&](const std::vector<std::size_t>& subs) {
    std::size_t n = 1;
    for (auto s : subs) n *= dims[s];
    std::vector<std::size_t> off(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t rem = k;
      for (std::size_t j = subs.size(); j-- > 0;) {
        off[k] += (rem % dims[subs[j]]) * stride[subs[j]];
        rem /= dims[subs[j]];
      }
    }
    return off;
  };
  const auto keep_off = offsets(kept);
  const auto trace_off = offsets(traced);

  const auto dk = static_cast<Eigen::Index>(keep_off.size());
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  const ComplexMatrix& m = rho.matrix();
  for (Eigen::Index a = 0; a < dk; ++a) {
    for (Eigen::Index b = 0; b < dk; ++b) {
      cplx s = 0.0;
      for (auto t : trace_off) {
        s += m(static_cast<Eigen::Index>(keep_off[a] + t), static_cast<Eigen::Index>(keep_off[b] + t));
      }
      out(a, b) = s;
    }
  }
  return DensityMatrix::from_numerical(out);
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::size_t> keep,
                            std::initializer_list<std::size_t> dims) {
  return partial_trace(rho, std::span<const std::size_t>(keep.begin(), keep.size()),
                       std::span<const std::size_t>(dims.begin(), dims.size()));
}

double expectation(const DensityMatrix& rho, const ComplexMatrix& obs) {
  if (obs.rows() != static_cast<Eigen::Index>(rho.dim()) || obs.cols() != obs.rows()) {
    throw std::invalid_argument("expectation: observable dimension mismatch");
  }
  if (!is_hermitian(obs, 1e-12)) throw std::invalid_argument("expectation: observable is not Hermitian");
  // trace(rho * obs) without forming the product
  return (rho.matrix().transpose().cwiseProduct(obs)).sum().real();
}

double fidelity_with_pure(const DensityMatrix& rho, const StateVector& psi) {
  if (psi.size() != static_cast<Eigen::Index>(rho.dim())) {
    throw std::invalid_argument("fidelity_with_pure: dimension mismatch");
  }
  if (std::abs(psi.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("fidelity_with_pure: state is not normalized");
  }
  const double f = psi.dot(rho.matrix() * psi).real();
  return std::clamp(f, 0.0, 1.0);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
  ComplexMatrix d = a.matrix() - b.matrix();
  d = 0.5 * (d + d.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

StateVector basis_state(std::size_t dim, std::size_t index) {
  if (index >= dim) throw std::invalid_argument("basis_state: index out of range");
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

StateVector ghz2() {
  StateVector v = StateVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

ComplexMatrix permute_qubits(const ComplexMatrix& m, std::span<const std::size_t> order) {
  const std::size_t n = order.size();
  if (m.rows() != m.cols() || m.rows() != (Eigen::Index{1} << n)) {
    throw std::invalid_argument("permute_qubits: operator size does not match the qubit count");
  }
  std::vector<std::size_t> seen(order.begin(), order.end());
  std::sort(seen.begin(), seen.end());
  for (std::size_t k = 0; k < n; ++k) {
    if (seen[k] != k) throw std::invalid_argument("permute_qubits: order is not a permutation");
  }
  // bit (n-1-k) of a new index is bit (n-1-order[k]) of the old index
  const auto dim = static_cast<std::size_t>(m.rows());
  std::vector<Eigen::Index> old_of(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    std::size_t old = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if ((idx >> (n - 1 - k)) & 1U) old |= std::size_t{1} << (n - 1 - order[k]);
    }
    old_of[idx] = static_cast<Eigen::Index>(old);
  }
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m(old_of[a], old_of[b]);
  return out;
}

DensityMatrix evolve(const DensityMatrix& rho, const ComplexMatrix& u) {
  if (u.rows() != static_cast<Eigen::Index>(rho.dim()) || u.cols() != u.rows()) {
    throw std::invalid_argument("evolve: unitary dimension mismatch");
  }
  return DensityMatrix::from_numerical(u * rho.matrix() * u.adjoint());
}

StateVector random_state(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  StateVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(g(rng), g(rng));
  return v.normalized();
}

DensityMatrix random_density_matrix(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  return DensityMatrix::from_numerical(a * a.adjoint());
}

Matrix2c su2_rotation(double ax, double ay, double az) {
  // exp(-i (a . sigma) / 2)
  const double angle = std::sqrt(ax * ax + ay * ay + az * az);
  const cplx i(0.0, 1.0);
  Matrix2c m = Matrix2c::Identity();
  if (angle == 0.0) return m;
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0) / angle;
  m(0, 0) = c - i * s * az;
  m(1, 1) = c + i * s * az;
  m(0, 1) = -i * s * ax - s * ay;
  m(1, 0) = -i * s * ax + s * ay;
  return m;
}

Matrix2c rx(double theta) { return su2_rotation(theta, 0.0, 0.0); }
Matrix2c ry(double theta) { return su2_rotation(0.0, theta, 0.0); }
Matrix2c rz(double theta) { return su2_rotation(0.0, 0.0, theta); }

Matrix2c hadamard() {
  Matrix2c h;
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

}  // namespace nvdiss
