#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rdslack/case_io.hpp"

namespace rdslack {

struct WeightedEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;
};

/// Symmetric zero-row-sum matrix. Off-diagonals are minus the edge weights.
struct WeightedLaplacian {
  Eigen::MatrixXd matrix;

  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
  /// Largest |row sum| relative to the largest entry magnitude.
  double row_sum_defect() const;
  double asymmetry() const;
};

/// Laplacian of an arbitrary weighted graph; parallel edges add.
WeightedLaplacian laplacian_from_edges(std::size_t n, std::span<const WeightedEdge> edges);

/// Operating-point Laplacian with weights b_ij V_i V_j cos(theta_i - theta_j).
WeightedLaplacian build_laplacian(const Network& net, const Eigen::VectorXd& theta0);

/// Edge weights b_ij V_i V_j cos(theta_i - theta_j), in `net.edges` order.
Eigen::VectorXd operating_weights(const Network& net, const Eigen::VectorXd& theta0);

/// Eigendecomposition of a connected graph's Laplacian with the zero mode pinned
/// to the exact constant vector. Immutable; all queries are const and
/// thread-safe.
class Spectrum {
 public:
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  /// Columns are the orthonormal eigenvectors, ascending eigenvalue order.
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
  /// Moore-Penrose pseudoinverse T diag(0, 1/lambda_2, ...) T^T.
  const Eigen::MatrixXd& pseudoinverse() const noexcept { return pseudoinverse_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues_.size()); }

  /// Applies the pseudoinverse to a vector (projects out the constant mode).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return pseudoinverse_ * rhs; }
  /// Coordinates u^(l)^T x for every mode l.
  Eigen::VectorXd project(const Eigen::VectorXd& x) const {
    return eigenvectors_.transpose() * x;
  }

 private:
  friend Spectrum decompose(const WeightedLaplacian& laplacian);

  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::MatrixXd pseudoinverse_;
};

/// Throws NotConnected when lambda_2 <= 1e-9 * lambda_N.
Spectrum decompose(const WeightedLaplacian& laplacian);

struct ResistanceVector {
  std::size_t anchor = 0;
  Eigen::VectorXd values;
};

/// sum_{l>=2} (u_i^(l) - u_j^(l))^2 / lambda_l
double resistance_distance(const Spectrum& spectrum, std::size_t i, std::size_t j);

/// Omega_g via the pseudoinverse diagonal: L+_gg + L+_ii - 2 L+_gi.
ResistanceVector resistance_vector(const Spectrum& spectrum, std::size_t anchor);

/// max_ij |inverse(L + J/N^2)_ij - 1 - L+_ij|, inverse taken by dense LU (J = all ones).
double gamma_inverse_identity_check(const Spectrum& spectrum, const WeightedLaplacian& laplacian);

/// Diagnostics for the Spectrum invariants.
struct SpectrumDiagnostics {
  double reconstruction = 0.0;   // ||T diag(l) T^T - L||_max / max|L_ij|
  double orthonormality = 0.0;   // ||T^T T - I||_max
};
SpectrumDiagnostics spectrum_diagnostics(const Spectrum& spectrum,
                                         const WeightedLaplacian& laplacian);

}  // namespace rdslack
