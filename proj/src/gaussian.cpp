/*
 Copyright 2026 The skilltx Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "skilltx/gaussian.hpp"

#include <stdexcept>

namespace skilltx {

double standard_normal(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(rng);
}

Eigen::VectorXd standard_normal_vector(int dim, Rng& rng) {
  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) {
    z(i) = standard_normal(rng);
  }
  return z;
}

Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& covariance, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("sample_gaussian: covariance factorization failed");
  }
  const Eigen::VectorXd z = standard_normal_vector(static_cast<int>(mean.size()), rng);
  return mean + llt.matrixL() * z;
}

double gaussian_kl(const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0,
                   const Eigen::VectorXd& mean1, const Eigen::MatrixXd& cov1) {
  const auto d = static_cast<double>(mean0.size());
  Eigen::LLT<Eigen::MatrixXd> llt0(cov0);
  Eigen::LLT<Eigen::MatrixXd> llt1(cov1);
  if (llt0.info() != Eigen::Success || llt1.info() != Eigen::Success) {
    throw std::runtime_error("gaussian_kl: covariance factorization failed");
  }
  const double logdet0 =
      2.0 * llt0.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet1 =
      2.0 * llt1.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double trace_term = llt1.solve(cov0).trace();
  const Eigen::VectorXd diff = mean1 - mean0;
  const double maha = diff.dot(llt1.solve(diff));
  return 0.5 * (trace_term + maha - d + logdet1 - logdet0);
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  return solver.eigenvalues().minCoeff();
}

}  // namespace skilltx
