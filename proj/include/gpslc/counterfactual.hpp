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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpslc/gaussian.hpp"
#include "gpslc/inference.hpp"
#include "gpslc/model.hpp"

namespace gpslc {

struct InterventionGrid {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  // Throws InvalidConfig if empty or non-finite.
  void validate() const;
};

enum class GridKind { Percentile, Neec, Binary };

// Percentile: 100 points between the 5th and 95th percentile of T.
// Neec: 30, 30.1, ..., 70. Binary: {0, 1}.
InterventionGrid intervention_grid_default(const Dataset& data, GridKind kind);

struct EffectEstimate {
  std::vector<double> grid;
  std::vector<Eigen::MatrixXd> draws;  // per grid point, n_samples x N_I

  Eigen::Index n_samples() const { return draws.empty() ? 0 : draws.front().rows(); }
  Eigen::Index n_instances() const { return draws.empty() ? 0 : draws.front().cols(); }

  Eigen::VectorXd posterior_mean_ite(std::size_t g) const;
  Eigen::VectorXd sate_samples(std::size_t g) const;
  double sate_mean(std::size_t g) const;
  // Equal-tailed interval from empirical quantiles of the SATE draws.
  std::pair<double, double> credible_interval(std::size_t g, double level = 0.9) const;
  void validate() const;
};

// Linear-interpolated empirical quantile, q in [0, 1].
double empirical_quantile(std::vector<double> values, double q);

// Posterior over Y'_* - Y' given Y at a fixed (U, Theta).
GaussianDist ite_conditional(const Dataset& data, const Confounders& u, const HyperParams& theta, double t_star,
                             KernelFamily family = KernelFamily::ArdRbf);
// Per-instance intervention values.
GaussianDist ite_conditional(const Dataset& data, const Confounders& u, const HyperParams& theta,
                             const Eigen::VectorXd& t_star, KernelFamily family = KernelFamily::ArdRbf);

// One ITE draw per (sample, grid point), drawn sample-major.
EffectEstimate estimate_effects(const Dataset& data, std::span<const PosteriorSample> samples,
                                const InterventionGrid& grid, KernelFamily family, Rng& rng);

struct GroundTruth {
  std::vector<double> grid;
  Eigen::MatrixXd ite;   // n_grid x N_I; may be empty
  Eigen::VectorXd sate;  // n_grid
  std::string provenance = "generator";
};

// Fills sate from ite when only the latter is present.
GroundTruth with_sate(GroundTruth truth);

// Both return the square root of the metric. Throw GridMismatch.
double pehe(const EffectEstimate& estimate, const GroundTruth& truth);
double sate_mse(const EffectEstimate& estimate, const GroundTruth& truth);
// Square-root SATE error restricted to each object's instances.
std::vector<double> sate_mse_by_object(const EffectEstimate& estimate, const GroundTruth& truth,
                                       const std::vector<int>& parent, int n_objects);

}  // namespace gpslc
