/*
 * Copyright 2026 The gpslc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace gpslc {

using Rng = std::mt19937_64;

// Lower Cholesky factor of (cov + jitter * I).
struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;

  Eigen::Index dim() const { return lower.rows(); }
  double log_det() const;
  // Solves (L L^T) x = b.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  // Solves L x = b.
  Eigen::MatrixXd solve_lower(const Eigen::MatrixXd& b) const;
};

// Factorizes a symmetric matrix, escalating diagonal jitter along the ladder
// 0, 1e-10*mean(diag), ..., 1e-4*mean(diag). The input is symmetrized first.
// Throws NotSymmetric or NotPositiveDefinite.
CholeskyFactor cholesky(const Eigen::MatrixXd& cov);

// Same as cholesky() but reports failure through the return value instead of
// throwing NotPositiveDefinite. Used on hot sampler paths.
bool try_cholesky(const Eigen::MatrixXd& cov, CholeskyFactor& out);

// Skips the symmetry check and symmetrization; for matrices that are
// symmetric by construction.
bool try_cholesky_symmetric(const Eigen::MatrixXd& sym, CholeskyFactor& out);

// Symmetric covariance with its factorization computed at construction.
class CovMatrix {
 public:
  explicit CovMatrix(Eigen::MatrixXd entries);

  Eigen::Index dim() const { return entries_.rows(); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const CholeskyFactor& factor() const { return factor_; }
  double jitter_applied() const { return factor_.jitter; }

 private:
  Eigen::MatrixXd entries_;
  CholeskyFactor factor_;
};

struct GaussianDist {
  Eigen::VectorXd mean;
  CovMatrix cov;

  GaussianDist(Eigen::VectorXd mean, CovMatrix cov);
  GaussianDist(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  Eigen::Index dim() const { return mean.size(); }
};

double mvn_logpdf(const Eigen::VectorXd& x, const GaussianDist& dist);
double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const CholeskyFactor& factor);
double mvn_logpdf_zero_mean(const Eigen::VectorXd& x, const CholeskyFactor& factor);

// Conditions the joint over (A, B), where A is the leading size_a coordinates,
// on B = observed_b and returns the distribution over A.
GaussianDist condition(const GaussianDist& joint, Eigen::Index size_a, const Eigen::VectorXd& observed_b);

// Distribution of A - B for a joint over two equal-size blocks (A, B).
GaussianDist subtract_blocks(const GaussianDist& joint);

// mean + L z with z standard normal.
Eigen::VectorXd mvn_sample(const GaussianDist& dist, Rng& rng);
Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const CholeskyFactor& factor, Rng& rng);
Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng);

// Zero-mean log density with covariance noise*I + Z A Z^T, where Z maps each
// coordinate to its group (group[i] in [0, A.rows())). Exact; cost is cubic in
// the number of groups instead of the number of coordinates. Every group must
// own at least one coordinate. Returns false if the group-level system is not
// positive definite.
bool grouped_logpdf(const Eigen::VectorXd& x, std::span<const int> group, const Eigen::MatrixXd& group_cov,
                    double noise, double& out);

// Zero-mean log density with covariance noise*I + F diag(weights) F^T.
bool lowrank_logpdf(const Eigen::VectorXd& x, const Eigen::MatrixXd& features, const Eigen::VectorXd& weights,
                    double noise, double& out);

}  // namespace gpslc
