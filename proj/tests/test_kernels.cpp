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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "gpslc/error.hpp"
#include "gpslc/kernels.hpp"
#include "oracle.hpp"

using namespace gpslc;

namespace {

InputRow make_row(std::vector<double> u, std::vector<double> x = {}, std::optional<double> t = std::nullopt) {
  InputRow r;
  r.confounder = Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  if (!x.empty()) r.covariates = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  r.treatment = t;
  return r;
}

Kernel rbf_1d(double scale, double len, double noise = 1.0) {
  return Kernel{KernelFamily::ArdRbf, scale, noise, Eigen::VectorXd::Constant(1, len), Eigen::VectorXd(), std::nullopt};
}

Kernel full_kernel() {
  Kernel k;
  k.scale_sq = 1.7;
  k.noise_sq = 0.3;
  k.confounder_lengthscales = Eigen::Vector3d(0.5, 1.5, 3.0);
  k.covariate_lengthscales = Eigen::Vector2d(0.8, 2.2);
  k.treatment_lengthscale = 1.1;
  return k;
}

std::vector<InputRow> random_rows(int n, std::uint64_t seed) {
  const Eigen::MatrixXd m = oracle::random_matrix(n, 6, seed);
  std::vector<InputRow> rows;
  for (int i = 0; i < n; ++i) {
    rows.push_back(make_row({m(i, 0), m(i, 1), m(i, 2)}, {m(i, 3), m(i, 4)}, m(i, 5)));
  }
  return rows;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("k_noise_free at zero distance equals the scale") {
  const Kernel k = rbf_1d(2.5, 0.7);
  const InputRow a = make_row({0.3});
  CHECK(k_noise_free(k, a, a) == doctest::Approx(2.5));
}

TEST_CASE("k_noise_free unit case has no factor of two") {
  CHECK(k_noise_free(rbf_1d(1.0, 1.0), make_row({0.0}), make_row({1.0})) == doctest::Approx(0.3678794).epsilon(1e-7));
}

TEST_CASE("k_noise_free is a product of per-dimension exponentials") {
  const Kernel k = full_kernel();
  const InputRow a = make_row({0.1, -0.4, 1.2}, {0.5, 0.9}, 2.0);
  const InputRow b = make_row({-0.3, 0.2, 0.7}, {1.5, -0.1}, 1.4);
  const double expected = oracle::rbf(1.7, {0.1, -0.4, 1.2, 0.5, 0.9, 2.0}, {-0.3, 0.2, 0.7, 1.5, -0.1, 1.4},
                                      {0.5, 1.5, 3.0, 0.8, 2.2, 1.1});
  CHECK(k_noise_free(k, a, b) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("k_full adds noise only for the same instance") {
  const Kernel k = rbf_1d(1.0, 1.0, 0.25);
  const InputRow a = make_row({0.4});
  const InputRow b = make_row({-0.4});
  CHECK(k_full(k, a, a, true) == doctest::Approx(1.25));
  CHECK(k_full(k, a, a, false) == doctest::Approx(1.0));
  CHECK(k_full(k, a, b, false) == k_noise_free(k, a, b));
}

TEST_CASE("missing fields are reported") {
  const Kernel k = full_kernel();
  try {
    k_noise_free(k, make_row({0, 0, 0}, {1, 1}), make_row({0, 0, 0}, {1, 1}));
    FAIL("expected MissingField");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingField);
  }
  try {
    k_noise_free(k, make_row({0, 0, 0}, {}, 1.0), make_row({0, 0, 0}, {}, 1.0));
    FAIL("expected MissingField");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingField);
  }
}

TEST_CASE("kernel_matrix shapes and noise placement") {
  const Kernel k = rbf_1d(1.0, 1.0, 0.5);
  const std::vector<InputRow> one{make_row({0.2})};
  const Eigen::MatrixXd m = kernel_matrix(k, one, one, true);
  REQUIRE(m.rows() == 1);
  CHECK(m(0, 0) == doctest::Approx(1.5));

  const std::vector<InputRow> other{make_row({0.2})};
  CHECK_THROWS_AS(kernel_matrix(k, one, other, true), Error);
}

TEST_CASE("kernel_matrix is symmetric PSD and consistent with W_* = W") {
  const Kernel k = full_kernel();
  const std::vector<InputRow> rows = random_rows(5, 3);
  const std::vector<InputRow> copy = rows;
  const Eigen::MatrixXd noisy = kernel_matrix(k, rows, rows, true);
  const Eigen::MatrixXd cross = kernel_matrix(k, rows, copy, false);
  CHECK((noisy - noisy.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(noisy);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  CHECK(cross.isApprox(noisy - k.noise_sq * Eigen::MatrixXd::Identity(5, 5)));
}

TEST_CASE("linear_kernel examples") {
  CHECK(linear_kernel(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0)) == 1.0);
  CHECK(linear_kernel(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
  CHECK(linear_kernel(Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)) == 11.0);
  CHECK_THROWS_AS(linear_kernel(Eigen::Vector2d(1, 2), Eigen::Vector3d(3, 4, 5)), Error);
}

TEST_CASE("linear family is a weighted dot product") {
  Kernel k = full_kernel();
  k.family = KernelFamily::Linear;
  const InputRow a = make_row({0.1, -0.4, 1.2}, {0.5, 0.9}, 2.0);
  const InputRow b = make_row({-0.3, 0.2, 0.7}, {1.5, -0.1}, 1.4);
  const double expected = oracle::weighted_dot(1.7, {0.1, -0.4, 1.2, 0.5, 0.9, 2.0}, {-0.3, 0.2, 0.7, 1.5, -0.1, 1.4},
                                               {0.5, 1.5, 3.0, 0.8, 2.2, 1.1});
  CHECK(k_noise_free(k, a, b) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("validate rejects non-positive parameters") {
  Kernel k = full_kernel();
  k.confounder_lengthscales[1] = 0.0;
  CHECK_THROWS_AS(k.validate(), Error);
  k = full_kernel();
  k.noise_sq = -1.0;
  CHECK_THROWS_AS(k.validate(), Error);
  CHECK_NOTHROW(full_kernel().validate());
}

TEST_CASE("property: symmetry and RBF bounds") {
  const Kernel k = full_kernel();
  const std::vector<InputRow> rows = random_rows(30, 17);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const double kij = k_noise_free(k, rows[i], rows[j]);
      CHECK(kij == k_noise_free(k, rows[j], rows[i]));
      CHECK(kij > 0.0);
      if (i == j) {
        CHECK(kij == doctest::Approx(k.scale_sq));
      } else {
        CHECK(kij < k.scale_sq);
      }
    }
  }
}

TEST_CASE("property: minimum eigenvalue is at least the noise") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Kernel k = full_kernel();
    const std::vector<InputRow> rows = random_rows(25, 100 + seed);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kernel_matrix(k, rows, rows, true));
    CHECK(eig.eigenvalues().minCoeff() >= k.noise_sq - 1e-10);
  }
}

TEST_CASE("property: shrinking a lengthscale decreases differing entries") {
  const Kernel k = full_kernel();
  const std::vector<InputRow> rows = random_rows(12, 29);
  for (int d = 0; d < 3; ++d) {
    Kernel shrunk = k;
    shrunk.confounder_lengthscales[d] *= 0.5;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[i].confounder[d] == rows[j].confounder[d]) continue;
        CHECK(k_noise_free(shrunk, rows[i], rows[j]) < k_noise_free(k, rows[i], rows[j]));
      }
    }
  }
  Kernel shrunk = k;
  *shrunk.treatment_lengthscale *= 0.5;
  CHECK(k_noise_free(shrunk, rows[0], rows[1]) < k_noise_free(k, rows[0], rows[1]));
}

TEST_CASE("distance helpers match loops") {
  const Eigen::MatrixXd a = oracle::random_matrix(4, 3, 81);
  const Eigen::MatrixXd b = oracle::random_matrix(5, 3, 82);
  const Eigen::Vector3d len(0.5, 1.0, 2.0);
  const Eigen::MatrixXd d = scaled_sq_distance(a, b, len);
  const Eigen::MatrixXd ip = scaled_inner_product(a, b, len);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 5; ++j) {
      double acc = 0.0;
      double dot = 0.0;
      for (int c = 0; c < 3; ++c) {
        acc += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c)) / len[c];
        dot += a(i, c) * b(j, c) / len[c];
      }
      CHECK(d(i, j) == doctest::Approx(acc).epsilon(1e-13));
      CHECK(ip(i, j) == doctest::Approx(dot).epsilon(1e-13));
    }
  }
  const Eigen::MatrixXd sq = squared_differences(a.col(0), b.col(1));
  CHECK(sq(2, 3) == doctest::Approx((a(2, 0) - b(3, 1)) * (a(2, 0) - b(3, 1))));
}

}  // TEST_SUITE
