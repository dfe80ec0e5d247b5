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

#include "gpslc/kernels.hpp"

#include <cmath>
#include <string>

#include "gpslc/error.hpp"

namespace gpslc {

namespace {

bool all_positive(const Eigen::VectorXd& v) {
  return (v.array() > 0.0).all() && v.allFinite();
}

void check_row(const Kernel& kernel, const InputRow& row) {
  if (row.confounder.size() != kernel.confounder_lengthscales.size()) {
    throw Error(ErrorCode::MissingField, "row confounder has " + std::to_string(row.confounder.size()) +
                                             " dims, kernel expects " +
                                             std::to_string(kernel.confounder_lengthscales.size()));
  }
  if (kernel.covariate_lengthscales.size() > 0) {
    if (!row.covariates || row.covariates->size() != kernel.covariate_lengthscales.size()) {
      throw Error(ErrorCode::MissingField, "row lacks the covariates required by the kernel");
    }
  }
  if (kernel.treatment_lengthscale && !row.treatment) {
    throw Error(ErrorCode::MissingField, "row lacks the treatment required by the kernel");
  }
}

}  // namespace

void Kernel::validate() const {
  const bool ok = scale_sq > 0.0 && noise_sq > 0.0 && std::isfinite(scale_sq) && std::isfinite(noise_sq) &&
                  all_positive(confounder_lengthscales) && all_positive(covariate_lengthscales) &&
                  (!treatment_lengthscale || (*treatment_lengthscale > 0.0 && std::isfinite(*treatment_lengthscale)));
  if (!ok) throw Error(ErrorCode::NonPositiveInput, "kernel parameters must be strictly positive");
}

double k_noise_free(const Kernel& kernel, const InputRow& a, const InputRow& b) {
  check_row(kernel, a);
  check_row(kernel, b);
  if (kernel.family == KernelFamily::Linear) {
    double acc = linear_kernel(a.confounder.cwiseQuotient(kernel.confounder_lengthscales), b.confounder);
    if (kernel.covariate_lengthscales.size() > 0) {
      acc += linear_kernel(a.covariates->cwiseQuotient(kernel.covariate_lengthscales), *b.covariates);
    }
    if (kernel.treatment_lengthscale) acc += *a.treatment * *b.treatment / *kernel.treatment_lengthscale;
    return kernel.scale_sq * acc;
  }
  double exponent = (a.confounder - b.confounder).array().square().cwiseQuotient(
                        kernel.confounder_lengthscales.array()).sum();
  if (kernel.covariate_lengthscales.size() > 0) {
    exponent += (*a.covariates - *b.covariates).array().square().cwiseQuotient(
                    kernel.covariate_lengthscales.array()).sum();
  }
  if (kernel.treatment_lengthscale) {
    const double d = *a.treatment - *b.treatment;
    exponent += d * d / *kernel.treatment_lengthscale;
  }
  return kernel.scale_sq * std::exp(-exponent);
}

double k_full(const Kernel& kernel, const InputRow& a, const InputRow& b, bool same_instance) {
  const double base = k_noise_free(kernel, a, b);
  return same_instance ? base + kernel.noise_sq : base;
}

Eigen::MatrixXd kernel_matrix(const Kernel& kernel, std::span<const InputRow> rows_a,
                              std::span<const InputRow> rows_b, bool diagonal_noise) {
  const bool same = rows_a.data() == rows_b.data() && rows_a.size() == rows_b.size();
  if (diagonal_noise && !same) {
    throw Error(ErrorCode::NoiseOnRectangular, "diagonal noise requested for distinct row sets");
  }
  const auto n = static_cast<Eigen::Index>(rows_a.size());
  const auto m = static_cast<Eigen::Index>(rows_b.size());
  Eigen::MatrixXd k(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      k(i, j) = k_full(kernel, rows_a[i], rows_b[j], diagonal_noise && i == j);
    }
  }
  return k;
}

double linear_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "linear_kernel: length mismatch");
  return a.dot(b);
}

Eigen::MatrixXd squared_differences(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::MatrixXd out(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    out.col(j) = (a.array() - b[j]).square();
  }
  return out;
}

Eigen::MatrixXd scaled_sq_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                   const Eigen::VectorXd& lengthscales) {
  if (a.cols() != lengthscales.size() || b.cols() != lengthscales.size()) {
    throw Error(ErrorCode::ShapeMismatch, "scaled_sq_distance: column count differs from lengthscales");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows(), b.rows());
  for (Eigen::Index d = 0; d < lengthscales.size(); ++d) {
    const double inv = 1.0 / lengthscales[d];
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      out.col(j).array() += (a.col(d).array() - b(j, d)).square() * inv;
    }
  }
  return out;
}

Eigen::MatrixXd scaled_inner_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     const Eigen::VectorXd& lengthscales) {
  if (a.cols() != lengthscales.size() || b.cols() != lengthscales.size()) {
    throw Error(ErrorCode::ShapeMismatch, "scaled_inner_product: column count differs from lengthscales");
  }
  return a * lengthscales.cwiseInverse().asDiagonal() * b.transpose();
}

}  // namespace gpslc
