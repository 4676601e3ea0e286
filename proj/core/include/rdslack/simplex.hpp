#pragma once

#include <Eigen/Dense>

namespace rdslack {

/// Euclidean projection onto {x >= 0, sum x = total}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& y, double total = 1.0);

struct SimplexQpOptions {
  double kkt_tolerance = 1e-8;
  int max_iterations = 100000;
};

struct SimplexQpResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // 0.5 x^T H x + c^T x
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes 0.5 x^T H x + c^T x over the unit simplex by projected gradient
/// with fixed step 1/lambda_max(H). H must be symmetric positive semidefinite.
/// The KKT residual is ||x - P(x - grad / lambda_max)||_inf.
SimplexQpResult minimize_on_simplex(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& linear,
                                    const Eigen::VectorXd& start,
                                    const SimplexQpOptions& options = {});

}  // namespace rdslack
