#include "rdslack/graph_metrics.hpp"

#include <cmath>
#include <string>

#include "rdslack/errors.hpp"

namespace rdslack {

using Eigen::Index;

double WeightedLaplacian::row_sum_defect() const {
  const double scale = matrix.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return matrix.rowwise().sum().cwiseAbs().maxCoeff() / scale;
}

double WeightedLaplacian::asymmetry() const {
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
}

WeightedLaplacian laplacian_from_edges(std::size_t n, std::span<const WeightedEdge> edges) {
  WeightedLaplacian lap;
  lap.matrix = Eigen::MatrixXd::Zero(static_cast<Index>(n), static_cast<Index>(n));
  for (const auto& e : edges) {
    if (e.from >= n || e.to >= n || e.from == e.to) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range or self-loop");
    }
    const auto i = static_cast<Index>(e.from);
    const auto j = static_cast<Index>(e.to);
    lap.matrix(i, j) -= e.weight;
    lap.matrix(j, i) -= e.weight;
    lap.matrix(i, i) += e.weight;
    lap.matrix(j, j) += e.weight;
  }
  return lap;
}

Eigen::VectorXd operating_weights(const Network& net, const Eigen::VectorXd& theta0) {
  if (static_cast<std::size_t>(theta0.size()) != net.size()) {
    throw Error(ErrorCode::InvalidArgument, "phase vector length does not match network");
  }
  Eigen::VectorXd w(static_cast<Index>(net.edges.size()));
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    const auto& e = net.edges[k];
    const auto i = static_cast<Index>(e.from);
    const auto j = static_cast<Index>(e.to);
    w[static_cast<Index>(k)] =
        e.susceptance * net.voltage[i] * net.voltage[j] * std::cos(theta0[i] - theta0[j]);
  }
  return w;
}

WeightedLaplacian build_laplacian(const Network& net, const Eigen::VectorXd& theta0) {
  const Eigen::VectorXd w = operating_weights(net, theta0);
  std::vector<WeightedEdge> edges;
  edges.reserve(net.edges.size());
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    edges.push_back({net.edges[k].from, net.edges[k].to, w[static_cast<Index>(k)]});
  }
  return laplacian_from_edges(net.size(), edges);
}

Spectrum decompose(const WeightedLaplacian& laplacian) {
  const Index n = laplacian.matrix.rows();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two nodes");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian.matrix);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "eigendecomposition failed");
  }

  Spectrum s;
  s.eigenvalues_ = solver.eigenvalues();
  s.eigenvectors_ = solver.eigenvectors();

  // Pin the zero mode, then strip its residue from the other modes.
  s.eigenvalues_[0] = 0.0;
  const Eigen::VectorXd constant =
      Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  s.eigenvectors_.col(0) = constant;
  for (Index l = 1; l < n; ++l) {
    auto col = s.eigenvectors_.col(l);
    col -= constant.dot(col) * constant;
    col.normalize();
  }

  const double lambda2 = s.eigenvalues_[1];
  const double lambda_max = s.eigenvalues_[n - 1];
  if (!(lambda2 > 1e-9 * lambda_max)) {
    throw Error(ErrorCode::NotConnected, "graph is numerically disconnected: lambda_2 = " +
                                             std::to_string(lambda2) + ", lambda_N = " +
                                             std::to_string(lambda_max));
  }

  const auto modes = s.eigenvectors_.rightCols(n - 1);
  const Eigen::VectorXd inv = s.eigenvalues_.tail(n - 1).cwiseInverse();
  s.pseudoinverse_ = modes * inv.asDiagonal() * modes.transpose();
  s.pseudoinverse_ = 0.5 * (s.pseudoinverse_ + s.pseudoinverse_.transpose()).eval();
  return s;
}

double resistance_distance(const Spectrum& spectrum, std::size_t i, std::size_t j) {
  if (i >= spectrum.size() || j >= spectrum.size()) {
    throw Error(ErrorCode::InvalidArgument, "bus index out of range");
  }
  if (i == j) return 0.0;
  const auto& t = spectrum.eigenvectors();
  const auto& lambda = spectrum.eigenvalues();
  double sum = 0.0;
  for (Index l = 1; l < lambda.size(); ++l) {
    const double d = t(static_cast<Index>(i), l) - t(static_cast<Index>(j), l);
    sum += d * d / lambda[l];
  }
  return sum;
}

ResistanceVector resistance_vector(const Spectrum& spectrum, std::size_t anchor) {
  if (anchor >= spectrum.size()) throw Error(ErrorCode::InvalidArgument, "bus index out of range");
  const auto& pinv = spectrum.pseudoinverse();
  const auto g = static_cast<Index>(anchor);
  ResistanceVector out{anchor, pinv.diagonal().array() + pinv(g, g) - 2.0 * pinv.col(g).array()};
  out.values[g] = 0.0;
  // clip round-off below zero; distances are nonnegative
  out.values = out.values.cwiseMax(0.0);
  return out;
}

double gamma_inverse_identity_check(const Spectrum& spectrum, const WeightedLaplacian& laplacian) {
  const Index n = laplacian.matrix.rows();
  const double nd = static_cast<double>(n);
  // Gamma = L + (1/N) u1 u1^T with u1 = ones/sqrt(N), i.e. L + J/N^2.
  const Eigen::MatrixXd gamma =
      laplacian.matrix + Eigen::MatrixXd::Constant(n, n, 1.0 / (nd * nd));
  const Eigen::MatrixXd gamma_inv = gamma.partialPivLu().inverse();
  const Eigen::MatrixXd expected =
      Eigen::MatrixXd::Ones(n, n) + spectrum.pseudoinverse();
  return (gamma_inv - expected).cwiseAbs().maxCoeff();
}

SpectrumDiagnostics spectrum_diagnostics(const Spectrum& spectrum,
                                         const WeightedLaplacian& laplacian) {
  const auto& t = spectrum.eigenvectors();
  const Index n = t.rows();
  SpectrumDiagnostics d;
  const Eigen::MatrixXd rebuilt = t * spectrum.eigenvalues().asDiagonal() * t.transpose();
  const double scale = laplacian.matrix.cwiseAbs().maxCoeff();
  d.reconstruction = (rebuilt - laplacian.matrix).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
  d.orthonormality =
      (t.transpose() * t - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  return d;
}

}  // namespace rdslack
