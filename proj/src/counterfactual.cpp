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

#include "gpslc/counterfactual.hpp"

#include <algorithm>
#include <cmath>

#include "gpslc/error.hpp"
#include "gpslc/kernels.hpp"

namespace gpslc {

namespace {

constexpr double kGridTolerance = 1e-9;

// Shared pieces of the outcome kernel for one (U, Theta): the rows W and W_*
// differ only in the treatment coordinate.
class IteSolver {
 public:
  IteSolver(const Dataset& data, const Confounders& u, const HyperParams& theta, KernelFamily family)
      : family_(family), t_(data.t) {
    const ComponentParams& p = theta.y;
    if (u.rows() != data.n_objects() || u.cols() != p.confounder_len.size() ||
        data.n_covariates() != p.covariate_len.size()) {
      throw Error(ErrorCode::ShapeMismatch, "ite: confounders or hyperparameters do not match the dataset");
    }
    scale_ = p.scale_sq;
    len_t_ = p.treatment_len;
    Eigen::MatrixXd rows(data.n_instances(), u.cols() + data.n_covariates());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      rows.row(i).head(u.cols()) = u.row(data.parent[static_cast<std::size_t>(i)]);
      rows.row(i).tail(data.n_covariates()) = data.x.row(i);
    }
    Eigen::VectorXd lens(rows.cols());
    lens << p.confounder_len, p.covariate_len;
    base_ = family_ == KernelFamily::Linear ? scaled_inner_product(rows, rows, lens)
                                            : scaled_sq_distance(rows, rows, lens);
    base_ = 0.5 * (base_ + base_.transpose()).eval();
    kww_ = cross(t_, t_);
    Eigen::MatrixXd k = kww_;
    k.diagonal().array() += p.noise_sq;
    factor_ = cholesky(k);
    alpha_ = factor_.solve(Eigen::VectorXd(data.y));
  }

  GaussianDist at(const Eigen::VectorXd& t_star) const {
    if (t_star.size() != t_.size()) throw Error(ErrorCode::ShapeMismatch, "ite: one intervention per instance");
    const Eigen::MatrixXd kws = cross(t_, t_star);
    const Eigen::MatrixXd kss = cross(t_star, t_star);
    const Eigen::MatrixXd diff = kww_ - kws;
    const Eigen::MatrixXd c = factor_.solve_lower(diff);
    // Sigma_11 - Sigma_12 - Sigma_21 + Sigma_22 collapses to D - C^T C.
    Eigen::MatrixXd cov = kww_ - kws - kws.transpose() + kss;
    cov.noalias() -= c.transpose() * c;
    cov = 0.5 * (cov + cov.transpose()).eval();
    Eigen::VectorXd mean = -(diff.transpose() * alpha_);
    return GaussianDist(std::move(mean), std::move(cov));
  }

 private:
  // K'(W_a, W_b) where rows share U and X by index and carry treatments ta, tb.
  Eigen::MatrixXd cross(const Eigen::VectorXd& ta, const Eigen::VectorXd& tb) const {
    const Eigen::Index n = ta.size();
    Eigen::MatrixXd out(n, n);
    if (family_ == KernelFamily::Linear) {
      for (Eigen::Index j = 0; j < n; ++j) {
        out.col(j) = scale_ * (base_.col(j).array() + ta.array() * tb[j] / len_t_);
      }
    } else {
      for (Eigen::Index j = 0; j < n; ++j) {
        out.col(j) = scale_ * (-(base_.col(j).array() + (ta.array() - tb[j]).square() / len_t_)).exp();
      }
    }
    return out;
  }

  KernelFamily family_;
  Eigen::VectorXd t_;
  double scale_ = 1.0;
  double len_t_ = 1.0;
  Eigen::MatrixXd base_;
  Eigen::MatrixXd kww_;
  CholeskyFactor factor_;
  Eigen::VectorXd alpha_;
};

void check_grid(const std::vector<double>& estimate, const std::vector<double>& truth) {
  if (estimate.size() != truth.size()) throw Error(ErrorCode::GridMismatch, "grids differ in length");
  for (std::size_t g = 0; g < estimate.size(); ++g) {
    if (std::abs(estimate[g] - truth[g]) > kGridTolerance * std::max(1.0, std::abs(truth[g]))) {
      throw Error(ErrorCode::GridMismatch, "grid value " + std::to_string(g) + " differs");
    }
  }
}

}  // namespace

void InterventionGrid::validate() const {
  if (values.empty()) throw Error(ErrorCode::InvalidConfig, "intervention grid is empty");
  for (const double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "intervention grid has non-finite values");
  }
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::ShapeMismatch, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

InterventionGrid intervention_grid_default(const Dataset& data, GridKind kind) {
  InterventionGrid grid;
  switch (kind) {
    case GridKind::Binary:
      grid.values = {0.0, 1.0};
      break;
    case GridKind::Neec:
      for (int k = 0; k <= 400; ++k) grid.values.push_back(30.0 + 0.1 * k);
      break;
    case GridKind::Percentile: {
      const std::vector<double> t(data.t.begin(), data.t.end());
      const double lo = empirical_quantile(t, 0.05);
      const double hi = empirical_quantile(t, 0.95);
      for (int k = 0; k < 100; ++k) grid.values.push_back(lo + (hi - lo) * k / 99.0);
      break;
    }
  }
  return grid;
}

Eigen::VectorXd EffectEstimate::posterior_mean_ite(std::size_t g) const {
  return draws.at(g).colwise().mean().transpose();
}

Eigen::VectorXd EffectEstimate::sate_samples(std::size_t g) const {
  return draws.at(g).rowwise().mean();
}

double EffectEstimate::sate_mean(std::size_t g) const { return sate_samples(g).mean(); }

std::pair<double, double> EffectEstimate::credible_interval(std::size_t g, double level) const {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidConfig, "credible level must lie in (0, 1)");
  const Eigen::VectorXd s = sate_samples(g);
  const std::vector<double> v(s.begin(), s.end());
  const double tail = 0.5 * (1.0 - level);
  return {empirical_quantile(v, tail), empirical_quantile(v, 1.0 - tail)};
}

void EffectEstimate::validate() const {
  if (grid.size() != draws.size()) throw Error(ErrorCode::ShapeMismatch, "one draw matrix per grid point");
  for (const auto& d : draws) {
    if (d.rows() != n_samples() || d.cols() != n_instances()) {
      throw Error(ErrorCode::ShapeMismatch, "draw matrices differ in shape");
    }
  }
}

GaussianDist ite_conditional(const Dataset& data, const Confounders& u, const HyperParams& theta,
                             const Eigen::VectorXd& t_star, KernelFamily family) {
  return IteSolver(data, u, theta, family).at(t_star);
}

GaussianDist ite_conditional(const Dataset& data, const Confounders& u, const HyperParams& theta, double t_star,
                             KernelFamily family) {
  return ite_conditional(data, u, theta, Eigen::VectorXd::Constant(data.n_instances(), t_star), family);
}

EffectEstimate estimate_effects(const Dataset& data, std::span<const PosteriorSample> samples,
                                const InterventionGrid& grid, KernelFamily family, Rng& rng) {
  if (samples.empty()) throw Error(ErrorCode::InvalidConfig, "no posterior samples");
  grid.validate();
  const Eigen::Index n = data.n_instances();
  EffectEstimate out;
  out.grid = grid.values;
  out.draws.assign(grid.size(), Eigen::MatrixXd(static_cast<Eigen::Index>(samples.size()), n));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const IteSolver solver(data, samples[s].u, samples[s].theta, family);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const GaussianDist dist = solver.at(Eigen::VectorXd::Constant(n, grid.values[g]));
      out.draws[g].row(static_cast<Eigen::Index>(s)) = mvn_sample(dist, rng).transpose();
    }
  }
  return out;
}

GroundTruth with_sate(GroundTruth truth) {
  if (truth.sate.size() == 0 && truth.ite.size() > 0) truth.sate = truth.ite.rowwise().mean();
  return truth;
}

double pehe(const EffectEstimate& estimate, const GroundTruth& truth) {
  check_grid(estimate.grid, truth.grid);
  if (truth.ite.rows() != static_cast<Eigen::Index>(truth.grid.size()) ||
      truth.ite.cols() != estimate.n_instances()) {
    throw Error(ErrorCode::GridMismatch, "truth does not hold one ITE per (grid point, instance)");
  }
  double acc = 0.0;
  for (std::size_t g = 0; g < estimate.grid.size(); ++g) {
    const Eigen::VectorXd err = estimate.posterior_mean_ite(g) - truth.ite.row(static_cast<Eigen::Index>(g)).transpose();
    acc += err.squaredNorm() / static_cast<double>(err.size());
  }
  return std::sqrt(acc / static_cast<double>(estimate.grid.size()));
}

double sate_mse(const EffectEstimate& estimate, const GroundTruth& truth_in) {
  const GroundTruth truth = with_sate(truth_in);
  check_grid(estimate.grid, truth.grid);
  if (truth.sate.size() != static_cast<Eigen::Index>(truth.grid.size())) {
    throw Error(ErrorCode::GridMismatch, "truth does not hold one SATE per grid point");
  }
  double acc = 0.0;
  for (std::size_t g = 0; g < estimate.grid.size(); ++g) {
    const double err = estimate.sate_mean(g) - truth.sate[static_cast<Eigen::Index>(g)];
    acc += err * err;
  }
  return std::sqrt(acc / static_cast<double>(estimate.grid.size()));
}

std::vector<double> sate_mse_by_object(const EffectEstimate& estimate, const GroundTruth& truth,
                                       const std::vector<int>& parent, int n_objects) {
  check_grid(estimate.grid, truth.grid);
  if (truth.ite.rows() != static_cast<Eigen::Index>(truth.grid.size()) ||
      truth.ite.cols() != estimate.n_instances() ||
      static_cast<Eigen::Index>(parent.size()) != estimate.n_instances()) {
    throw Error(ErrorCode::GridMismatch, "per-object error needs instance-level truth");
  }
  std::vector<double> acc(static_cast<std::size_t>(n_objects), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(n_objects), 0);
  for (const int p : parent) ++counts.at(static_cast<std::size_t>(p));
  for (std::size_t g = 0; g < estimate.grid.size(); ++g) {
    const Eigen::VectorXd est = estimate.posterior_mean_ite(g);
    std::vector<double> diff(acc.size(), 0.0);
    for (std::size_t i = 0; i < parent.size(); ++i) {
      diff[static_cast<std::size_t>(parent[i])] +=
          est[static_cast<Eigen::Index>(i)] - truth.ite(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(i));
    }
    for (std::size_t o = 0; o < acc.size(); ++o) {
      if (counts[o] > 0) {
        const double e = diff[o] / counts[o];
        acc[o] += e * e;
      }
    }
  }
  for (double& v : acc) v = std::sqrt(v / static_cast<double>(estimate.grid.size()));
  return acc;
}

}  // namespace gpslc
