#include "rdslack/simplex.hpp"

#include <algorithm>
#include <functional>
#include <vector>

#include "rdslack/errors.hpp"

namespace rdslack {

using Eigen::Index;

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& y, double total) {
  const Index n = y.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "cannot project an empty vector");
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "simplex total must be positive");

  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double t = (cumulative - total) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - t > 0.0) threshold = t;
  }
  return (y.array() - threshold).cwiseMax(0.0);
}

SimplexQpResult minimize_on_simplex(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& linear,
                                    const Eigen::VectorXd& start,
                                    const SimplexQpOptions& options) {
  const Index n = linear.size();
  if (hessian.rows() != n || hessian.cols() != n || start.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "QP dimensions do not agree");
  }

  SimplexQpResult out;
  const auto objective = [&](const Eigen::VectorXd& x) {
    return 0.5 * x.dot(hessian * x) + linear.dot(x);
  };

  const double lipschitz =
      n > 0 ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hessian, Eigen::EigenvaluesOnly)
                  .eigenvalues()
                  .maxCoeff()
            : 0.0;
  if (!(lipschitz > 0.0)) {
    // linear objective: best vertex
    Index best = 0;
    linear.minCoeff(&best);
    out.x = Eigen::VectorXd::Zero(n);
    out.x[best] = 1.0;
    out.objective = objective(out.x);
    out.converged = true;
    return out;
  }

  const double step = 1.0 / lipschitz;
  Eigen::VectorXd x = project_to_simplex(start);
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd next = project_to_simplex(x - step * (hessian * x + linear));
    out.kkt_residual = (next - x).cwiseAbs().maxCoeff();
    out.iterations = iter;
    if (out.kkt_residual < options.kkt_tolerance) {
      out.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;
    x = next;
  }
  out.x = x;
  out.objective = objective(x);
  return out;
}

}  // namespace rdslack
