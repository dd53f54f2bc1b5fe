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

#include "skilltx/promp.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace skilltx {

BasisSet BasisSet::linear(int num_basis, int num_steps, double width) {
  BasisSet basis;
  basis.num_basis = num_basis;
  basis.num_steps = num_steps;
  basis.width = width > 0.0 ? width : 1.0 / (num_basis - 1);
  basis.centers = Eigen::VectorXd::LinSpaced(num_basis, 0.0, 1.0);
  basis.validate();
  return basis;
}

void BasisSet::validate() const {
  if (num_basis < 2) throw std::invalid_argument("BasisSet: num_basis must be >= 2");
  if (num_steps < 2) throw std::invalid_argument("BasisSet: num_steps must be >= 2");
  if (!(width > 0.0)) throw std::invalid_argument("BasisSet: width must be > 0");
  if (centers.size() != num_basis)
    throw std::invalid_argument("BasisSet: centers size mismatch");
  for (int i = 1; i < num_basis; ++i) {
    if (!(centers(i) > centers(i - 1)))
      throw std::invalid_argument("BasisSet: centers must be strictly increasing");
  }
}

void ProMP::validate() const {
  basis.validate();
  if (num_dims < 1) throw std::invalid_argument("ProMP: num_dims must be >= 1");
  if (mean.size() != dim()) throw std::invalid_argument("ProMP: mean dimension mismatch");
  if (covariance.rows() != dim() || covariance.cols() != dim())
    throw std::invalid_argument("ProMP: covariance shape mismatch");
  if (system_noise < 0.0)
    throw std::invalid_argument("ProMP: system_noise must be >= 0");
}

Eigen::VectorXd flatten_weights(const WeightVector& w) {
  return Eigen::Map<const Eigen::VectorXd>(w.weights.data(), w.weights.size());
}

WeightVector unflatten_weights(const Eigen::VectorXd& flat, int num_basis,
                               int num_dims) {
  if (flat.size() != static_cast<Eigen::Index>(num_basis) * num_dims)
    throw std::invalid_argument("unflatten_weights: size mismatch");
  WeightVector w;
  w.weights = Eigen::Map<const Eigen::MatrixXd>(flat.data(), num_basis, num_dims);
  return w;
}

Eigen::MatrixXd basis_matrix(const BasisSet& basis) {
  basis.validate();
  Eigen::MatrixXd phi(basis.num_steps, basis.num_basis);
  const double denom = 2.0 * basis.width * basis.width;
  for (int t = 0; t < basis.num_steps; ++t) {
    const double z = static_cast<double>(t) / (basis.num_steps - 1);
    for (int i = 0; i < basis.num_basis; ++i) {
      const double d = z - basis.centers(i);
      phi(t, i) = std::exp(-d * d / denom);
    }
    phi.row(t) /= phi.row(t).sum();
  }
  return phi;
}

WeightVector fit_weights(const Trajectory& demo, const BasisSet& basis,
                         double ridge) {
  if (demo.num_steps() != basis.num_steps)
    throw std::invalid_argument("fit_weights: demo/basis num_steps mismatch");
  if (ridge < 0.0) throw std::invalid_argument("fit_weights: ridge must be >= 0");
  const Eigen::MatrixXd phi = basis_matrix(basis);
  Eigen::MatrixXd gram = phi.transpose() * phi;
  gram.diagonal().array() += ridge;
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  WeightVector w;
  w.weights = solver.solve(phi.transpose() * demo.values);
  return w;
}

ProMP fit_promp(const std::vector<Trajectory>& demos, const BasisSet& basis,
                double ridge, double cov_reg, double system_noise) {
  if (demos.size() < 2)
    throw std::invalid_argument("fit_promp: need at least 2 demonstrations");
  if (!(cov_reg > 0.0)) throw std::invalid_argument("fit_promp: cov_reg must be > 0");
  const int num_dims = demos.front().num_dims();
  for (const auto& demo : demos) {
    if (demo.num_steps() != basis.num_steps || demo.num_dims() != num_dims)
      throw std::invalid_argument("fit_promp: inconsistent demo shapes");
  }

  const auto n = static_cast<Eigen::Index>(demos.size());
  const Eigen::Index d = static_cast<Eigen::Index>(basis.num_basis) * num_dims;
  Eigen::MatrixXd stacked(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    stacked.col(i) = flatten_weights(fit_weights(demos[i], basis, ridge));
  }

  ProMP promp;
  promp.basis = basis;
  promp.num_dims = num_dims;
  promp.mean = stacked.rowwise().mean();
  const Eigen::MatrixXd centered = stacked.colwise() - promp.mean;
  promp.covariance = (centered * centered.transpose()) / static_cast<double>(n);
  promp.covariance.diagonal().array() += cov_reg;
  promp.system_noise = system_noise;
  promp.validate();
  return promp;
}

Trajectory render_trajectory(const BasisSet& basis, const WeightVector& weights,
                             double dt) {
  if (weights.num_basis() != basis.num_basis)
    throw std::invalid_argument("render_trajectory: weight/basis size mismatch");
  Trajectory traj;
  traj.values = basis_matrix(basis) * weights.weights;
  traj.dt = dt;
  return traj;
}

WeightVector sample_weights(const ProMP& promp, Rng& rng) {
  promp.validate();
  const Eigen::VectorXd flat = sample_gaussian(promp.mean, promp.covariance, rng);
  return unflatten_weights(flat, promp.basis.num_basis, promp.num_dims);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> step_marginal(const ProMP& promp,
                                                          int t) {
  if (t < 0 || t >= promp.basis.num_steps)
    throw std::out_of_range("step_marginal: step index out of range");
  const Eigen::MatrixXd phi = basis_matrix(promp.basis);
  const Eigen::VectorXd phi_t = phi.row(t).transpose();
  const int nb = promp.basis.num_basis;
  Eigen::VectorXd mean(promp.num_dims);
  Eigen::VectorXd variance(promp.num_dims);
  for (int d = 0; d < promp.num_dims; ++d) {
    const auto mu_d = promp.mean.segment(d * nb, nb);
    const auto cov_dd = promp.covariance.block(d * nb, d * nb, nb, nb);
    mean(d) = phi_t.dot(mu_d);
    variance(d) = phi_t.dot(cov_dd * phi_t) + promp.system_noise;
  }
  return {mean, variance};
}

nlohmann::json promp_to_json(const ProMP& promp) {
  nlohmann::json j;
  j["num_basis"] = promp.basis.num_basis;
  j["num_dims"] = promp.num_dims;
  j["num_steps"] = promp.basis.num_steps;
  j["width"] = promp.basis.width;
  j["system_noise"] = promp.system_noise;
  j["mean"] = std::vector<double>(promp.mean.data(), promp.mean.data() + promp.mean.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < promp.covariance.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < promp.covariance.cols(); ++c) {
      row.push_back(promp.covariance(r, c));
    }
    rows.push_back(std::move(row));
  }
  j["covariance"] = std::move(rows);
  return j;
}

ProMP promp_from_json(const nlohmann::json& j) {
  ProMP promp;
  promp.basis = BasisSet::linear(j.at("num_basis").get<int>(),
                                 j.at("num_steps").get<int>(),
                                 j.at("width").get<double>());
  promp.num_dims = j.at("num_dims").get<int>();
  promp.system_noise = j.at("system_noise").get<double>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  promp.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(),
                                                 static_cast<Eigen::Index>(mean.size()));
  const auto& cov = j.at("covariance");
  const Eigen::Index d = promp.dim();
  if (promp.mean.size() != d || static_cast<Eigen::Index>(cov.size()) != d)
    throw std::invalid_argument("promp_from_json: dimension mismatch");
  promp.covariance.resize(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto row = cov.at(r).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != d)
      throw std::invalid_argument("promp_from_json: covariance row size mismatch");
    for (Eigen::Index c = 0; c < d; ++c) promp.covariance(r, c) = row[c];
  }
  promp.validate();
  return promp;
}

}  // namespace skilltx
