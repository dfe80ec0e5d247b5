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

#include <optional>
#include <span>

#include <Eigen/Dense>

namespace gpslc {

enum class KernelFamily { ArdRbf, Linear };

// Kernel over rows [confounder, covariates, treatment]. A component is part of
// the kernel's signature when its lengthscale vector is non-empty (or, for the
// treatment, when treatment_lengthscale is set).
//
// ArdRbf: scale_sq * exp(-sum_d (a_d - b_d)^2 / len_d)
// Linear: scale_sq * sum_d a_d b_d / len_d
struct Kernel {
  KernelFamily family = KernelFamily::ArdRbf;
  double scale_sq = 1.0;
  double noise_sq = 1.0;
  Eigen::VectorXd confounder_lengthscales;
  Eigen::VectorXd covariate_lengthscales;
  std::optional<double> treatment_lengthscale;

  // Throws NonPositiveInput if any parameter is not strictly positive.
  void validate() const;
};

struct InputRow {
  std::optional<double> treatment;
  std::optional<Eigen::VectorXd> covariates;
  Eigen::VectorXd confounder;
};

double k_noise_free(const Kernel& kernel, const InputRow& a, const InputRow& b);
double k_full(const Kernel& kernel, const InputRow& a, const InputRow& b, bool same_instance);

// Entry (i, j) = k(rows_a[i], rows_b[j]). diagonal_noise adds noise_sq at
// i == j and requires rows_a and rows_b to be the same sequence.
Eigen::MatrixXd kernel_matrix(const Kernel& kernel, std::span<const InputRow> rows_a,
                              std::span<const InputRow> rows_b, bool diagonal_noise);

double linear_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Matrix of (a_i - b_j)^2 for scalar inputs.
Eigen::MatrixXd squared_differences(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Sum over columns d of (A_id - B_jd)^2 / len_d.
Eigen::MatrixXd scaled_sq_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                   const Eigen::VectorXd& lengthscales);

// Sum over columns d of A_id B_jd / len_d.
Eigen::MatrixXd scaled_inner_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     const Eigen::VectorXd& lengthscales);

}  // namespace gpslc
