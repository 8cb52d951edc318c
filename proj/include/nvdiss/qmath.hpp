#pragma once

// Dense complex linear algebra for the electron + nuclear-spin register.
//
// Qubit ordering: subsystem 0 is the electron, followed by the nuclei in
// register order. kron(a, b) puts `a` on the more significant index, so the
// basis state |e n1 n2> has index 4*e + 2*n1 + n2.

#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nvdiss {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using Matrix2c = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

enum class Pauli { I, X, Y, Z };

char pauli_symbol(Pauli p);
Pauli pauli_from_symbol(char c);

ComplexMatrix pauli(Pauli p);
Matrix2c pauli2(Pauli p);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_all(std::span<const ComplexMatrix> factors);

/// Embed a single-qubit operator acting on `qubit` of an `n_qubits` register.
ComplexMatrix embed(const ComplexMatrix& op, std::size_t qubit, std::size_t n_qubits);

/// Tensor product of Paulis, e.g. pauli_string({Pauli::I, Pauli::Z, Pauli::Z}).
ComplexMatrix pauli_string(std::span<const Pauli> labels);
ComplexMatrix pauli_string(std::initializer_list<Pauli> labels);

double max_abs(const ComplexMatrix& m);
bool is_finite(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol);
bool is_unitary(const ComplexMatrix& m, double tol = 1e-10);

/// Hermitian, unit-trace, positive semidefinite matrix. Construction validates.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);

  /// Hermitize and renormalize the trace before validating; for outputs of
  /// long products where rounding has drifted past the strict tolerances.
  static DensityMatrix from_numerical(const ComplexMatrix& m);
  static DensityMatrix pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  double min_eigenvalue() const;

 private:
  ComplexMatrix m_;
};

/// Trace out every subsystem not listed in `keep`. `dims` gives the dimension
/// of each subsystem in register order; `keep` must be non-empty.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep,
                            std::span<const std::size_t> dims);
DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::size_t> keep,
                            std::initializer_list<std::size_t> dims);

double expectation(const DensityMatrix& rho, const ComplexMatrix& obs);
double fidelity_with_pure(const DensityMatrix& rho, const StateVector& psi);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

StateVector basis_state(std::size_t dim, std::size_t index);
/// (|00> + |11>)/sqrt(2)
StateVector ghz2();

/// Reorder the qubits of a 2^n x 2^n operator: new qubit k is old qubit order[k].
ComplexMatrix permute_qubits(const ComplexMatrix& m, std::span<const std::size_t> order);

/// Unitary evolution rho -> U rho U^dagger.
DensityMatrix evolve(const DensityMatrix& rho, const ComplexMatrix& u);

/// Ginibre-distributed random density matrix of full rank.
DensityMatrix random_density_matrix(std::size_t dim, std::mt19937_64& rng);
StateVector random_state(std::size_t dim, std::mt19937_64& rng);

/// Single-qubit rotations exp(-i theta P / 2).
Matrix2c rx(double theta);
Matrix2c ry(double theta);
Matrix2c rz(double theta);
Matrix2c hadamard();

/// exp(-i H t) for a 2x2 traceless Hermitian H = (hx X + hy Y + hz Z)/2,
/// given as the rotation vector (hx, hy, hz) times t.
Matrix2c su2_rotation(double ax, double ay, double az);

}  // namespace nvdiss
