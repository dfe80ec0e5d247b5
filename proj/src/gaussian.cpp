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

#include "gpslc/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "gpslc/error.hpp"

namespace gpslc {

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

bool is_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return true;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTolerance * scale;
}

bool factor_symmetric(const Eigen::MatrixXd& sym, CholeskyFactor& out) {
  const Eigen::Index n = sym.rows();
  out.jitter = 0.0;
  if (n == 0) {
    out.lower.resize(0, 0);
    return true;
  }
  if (!sym.allFinite()) return false;
  if (sym.isZero(0.0)) {
    // L = 0 reproduces the zero matrix exactly.
    out.lower = Eigen::MatrixXd::Zero(n, n);
    return true;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) {
    out.lower = llt.matrixL();
    return true;
  }
  const double mean_diag = sym.diagonal().mean();
  if (!(mean_diag > 0.0)) return false;
  Eigen::MatrixXd work(n, n);
  for (int exponent = -10; exponent <= -4; ++exponent) {
    const double jitter = std::pow(10.0, exponent) * mean_diag;
    work = sym;
    work.diagonal().array() += jitter;
    llt.compute(work);
    if (llt.info() == Eigen::Success) {
      out.lower = llt.matrixL();
      out.jitter = jitter;
      return true;
    }
  }
  return false;
}

}  // namespace

double CholeskyFactor::log_det() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd CholeskyFactor::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd CholeskyFactor::solve_lower(const Eigen::MatrixXd& b) const {
  return lower.triangularView<Eigen::Lower>().solve(b);
}

CholeskyFactor cholesky(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "cholesky input is not square");
  }
  if (!is_symmetric(cov)) {
    throw Error(ErrorCode::NotSymmetric, "cholesky input is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  CholeskyFactor out;
  if (!factor_symmetric(sym, out)) {
    throw Error(ErrorCode::NotPositiveDefinite, "factorization failed at the largest jitter");
  }
  return out;
}

bool try_cholesky(const Eigen::MatrixXd& cov, CholeskyFactor& out) {
  if (cov.rows() != cov.cols() || !is_symmetric(cov)) return false;
  return factor_symmetric(0.5 * (cov + cov.transpose()), out);
}

bool try_cholesky_symmetric(const Eigen::MatrixXd& sym, CholeskyFactor& out) {
  if (sym.rows() != sym.cols()) return false;
  return factor_symmetric(sym, out);
}

CovMatrix::CovMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  factor_ = cholesky(entries_);
  entries_ = 0.5 * (entries_ + entries_.transpose()).eval();
}

GaussianDist::GaussianDist(Eigen::VectorXd mean_in, CovMatrix cov_in) : mean(std::move(mean_in)), cov(std::move(cov_in)) {
  if (mean.size() != cov.dim()) {
    throw Error(ErrorCode::ShapeMismatch, "mean length differs from covariance dimension");
  }
}

GaussianDist::GaussianDist(Eigen::VectorXd mean_in, Eigen::MatrixXd cov_in)
    : GaussianDist(std::move(mean_in), CovMatrix(std::move(cov_in))) {}

double mvn_logpdf_zero_mean(const Eigen::VectorXd& x, const CholeskyFactor& factor) {
  if (x.size() != factor.dim()) {
    throw Error(ErrorCode::ShapeMismatch, "mvn_logpdf: point length differs from dimension");
  }
  const Eigen::VectorXd z = factor.lower.triangularView<Eigen::Lower>().solve(x);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + factor.log_det() + z.squaredNorm());
}

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const CholeskyFactor& factor) {
  if (x.size() != mean.size()) {
    throw Error(ErrorCode::ShapeMismatch, "mvn_logpdf: point length differs from mean length");
  }
  return mvn_logpdf_zero_mean(x - mean, factor);
}

double mvn_logpdf(const Eigen::VectorXd& x, const GaussianDist& dist) {
  return mvn_logpdf(x, dist.mean, dist.cov.factor());
}

GaussianDist condition(const GaussianDist& joint, Eigen::Index size_a, const Eigen::VectorXd& observed_b) {
  const Eigen::Index n = joint.dim();
  const Eigen::Index size_b = n - size_a;
  if (size_a < 0 || size_b < 0 || observed_b.size() != size_b) {
    throw Error(ErrorCode::ShapeMismatch, "condition: block sizes inconsistent with joint dimension");
  }
  const Eigen::MatrixXd& s = joint.cov.entries();
  const CholeskyFactor bb = cholesky(s.bottomRightCorner(size_b, size_b));
  const Eigen::MatrixXd ab = s.topRightCorner(size_a, size_b);
  // Gain G = S_ab S_bb^{-1}, applied through the factor of S_bb.
  const Eigen::MatrixXd gain_t = bb.solve(Eigen::MatrixXd(ab.transpose()));
  Eigen::VectorXd mean = joint.mean.head(size_a) + gain_t.transpose() * (observed_b - joint.mean.tail(size_b));
  Eigen::MatrixXd cov = s.topLeftCorner(size_a, size_a) - ab * gain_t;
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianDist(std::move(mean), std::move(cov));
}

GaussianDist subtract_blocks(const GaussianDist& joint) {
  const Eigen::Index n = joint.dim();
  if (n % 2 != 0) {
    throw Error(ErrorCode::ShapeMismatch, "subtract_blocks: blocks must have equal length");
  }
  const Eigen::Index m = n / 2;
  const Eigen::MatrixXd& s = joint.cov.entries();
  Eigen::VectorXd mean = joint.mean.head(m) - joint.mean.tail(m);
  Eigen::MatrixXd cov = s.topLeftCorner(m, m) - s.topRightCorner(m, m) - s.bottomLeftCorner(m, m) +
                        s.bottomRightCorner(m, m);
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianDist(std::move(mean), std::move(cov));
}

Eigen::VectorXd standard_normal_vector(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  return z;
}

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const CholeskyFactor& factor, Rng& rng) {
  if (mean.size() != factor.dim()) {
    throw Error(ErrorCode::ShapeMismatch, "mvn_sample: mean length differs from dimension");
  }
  const Eigen::VectorXd z = standard_normal_vector(mean.size(), rng);
  return mean + factor.lower.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd mvn_sample(const GaussianDist& dist, Rng& rng) {
  return mvn_sample(dist.mean, dist.cov.factor(), rng);
}

bool grouped_logpdf(const Eigen::VectorXd& x, std::span<const int> group, const Eigen::MatrixXd& group_cov,
                    double noise, double& out) {
  const Eigen::Index n = x.size();
  const Eigen::Index p = group_cov.rows();
  if (static_cast<Eigen::Index>(group.size()) != n || group_cov.cols() != p) {
    throw Error(ErrorCode::ShapeMismatch, "grouped_logpdf: group map inconsistent with data");
  }
  if (!(noise > 0.0)) return false;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    counts[group[i]] += 1.0;
    sums[group[i]] += x[i];
  }
  // With Q = Z diag(counts)^{-1/2} (orthonormal columns), the covariance is
  // noise*(I - QQ^T) + Q(noise*I + S A S)Q^T, S = diag(counts)^{1/2}.
  const Eigen::VectorXd root = counts.cwiseSqrt();
  const Eigen::VectorXd c = sums.cwiseQuotient(root);
  Eigen::MatrixXd inner = root.asDiagonal() * group_cov * root.asDiagonal();
  inner.diagonal().array() += noise;
  CholeskyFactor f;
  if (!try_cholesky(inner, f)) return false;
  const Eigen::VectorXd z = f.lower.triangularView<Eigen::Lower>().solve(c);
  const double log_det = static_cast<double>(n - p) * std::log(noise) + f.log_det();
  const double quad = (x.squaredNorm() - c.squaredNorm()) / noise + z.squaredNorm();
  out = -0.5 * (static_cast<double>(n) * kLog2Pi + log_det + quad);
  return std::isfinite(out);
}

bool lowrank_logpdf(const Eigen::VectorXd& x, const Eigen::MatrixXd& features, const Eigen::VectorXd& weights,
                    double noise, double& out) {
  const Eigen::Index n = x.size();
  const Eigen::Index p = features.cols();
  if (features.rows() != n || weights.size() != p) {
    throw Error(ErrorCode::ShapeMismatch, "lowrank_logpdf: feature shape inconsistent with data");
  }
  if (!(noise > 0.0)) return false;
  const Eigen::MatrixXd scaled = features * weights.cwiseSqrt().asDiagonal();
  Eigen::MatrixXd inner = (scaled.transpose() * scaled) / noise;
  inner.diagonal().array() += 1.0;
  CholeskyFactor f;
  if (!try_cholesky(inner, f)) return false;
  const Eigen::VectorXd g = scaled.transpose() * x;
  const Eigen::VectorXd z = f.lower.triangularView<Eigen::Lower>().solve(g);
  const double log_det = static_cast<double>(n) * std::log(noise) + f.log_det();
  const double quad = x.squaredNorm() / noise - z.squaredNorm() / (noise * noise);
  out = -0.5 * (static_cast<double>(n) * kLog2Pi + log_det + quad);
  return std::isfinite(out);
}

}  // namespace gpslc
