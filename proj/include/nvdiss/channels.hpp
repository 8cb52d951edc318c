#pragma once

// Kraus channels on the two-nuclei system and their extraction from
// ancilla circuits.

#include <stdexcept>
#include <utility>
#include <vector>

#include "nvdiss/qmath.hpp"

namespace nvdiss {

inline constexpr double kCompletenessTol = 1e-12;
inline constexpr double kPruneNorm = 1e-14;

class IncompleteChannelError : public std::invalid_argument {
 public:
  explicit IncompleteChannelError(double residual);
  double residual() const { return residual_; }

 private:
  double residual_;
};

class KrausChannel {
 public:
  /// Throws IncompleteChannelError when ||sum E^dag E - I||_max > 1e-12.
  explicit KrausChannel(std::vector<ComplexMatrix> ops);

  static KrausChannel identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  const std::vector<ComplexMatrix>& ops() const { return ops_; }
  std::size_t size() const { return ops_.size(); }

  /// ||sum_k E_k^dag E_k - I||_max
  double completeness_residual() const;

 private:
  std::size_t dim_;
  std::vector<ComplexMatrix> ops_;
};

double completeness_residual(const std::vector<ComplexMatrix>& ops);

/// F0 = (I + XX)/2, F1 = Z1 (I - XX)/2 on the two nuclei.
std::pair<ComplexMatrix, ComplexMatrix> build_F_operators();

/// Pumps into the +1 eigenspace of X(x)X.
KrausChannel build_Ex();
/// Pumps into the +1 eigenspace of Z(x)Z.
KrausChannel build_Ez();

DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho);

/// Batch application; the OpenMP and serial versions return identical results.
std::vector<DensityMatrix> apply_channel_batch(const KrausChannel& ch, const std::vector<DensityMatrix>& states);
std::vector<DensityMatrix> apply_channel_batch_serial(const KrausChannel& ch,
                                                      const std::vector<DensityMatrix>& states);

/// Kraus operators E_k = (<k| (x) I) U (|init> (x) I) for U acting on
/// ancilla (x) system, ancilla first. Operators with norm below 1e-14 are
/// dropped.
KrausChannel channel_from_circuit(const ComplexMatrix& u, std::size_t ancilla_dim, const StateVector& ancilla_init);

/// a first, then b: operators B_j A_i.
KrausChannel compose(const KrausChannel& a, const KrausChannel& b);

/// max over a Hermitian operator basis of ||a(P) - b(P)||_max.
double channel_distance(const KrausChannel& a, const KrausChannel& b);

/// Matrix of the map on row-major vectorized operators, vec(E rho E^dag).
ComplexMatrix superoperator(const KrausChannel& ch);

}  // namespace nvdiss
