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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpslc/counterfactual.hpp"
#include "gpslc/inference.hpp"
#include "gpslc/model.hpp"

namespace gpslc {

enum class SyntheticForm { Additive, Multiplicative, Linear };

struct LinearParams {
  double alpha = 1.0;
  double beta = 1.5;
  double tau = 1.0;
  double var_u = 1.0;
  double var_t = 1.0;
  double var_y = 1.0;

  void validate() const;
};

struct SyntheticSpec {
  int n_objects = 20;
  int instances_per_object = 10;
  int n_u = 3;
  int n_x = 3;
  SyntheticForm form = SyntheticForm::Additive;
  double confounder_var = 0.5;
  double covariate_noise = 0.5;
  double treatment_noise = 0.5;
  double outcome_noise = 0.5;
  LinearParams linear;
  std::uint64_t seed = 0;

  // Throws InvalidConfig.
  void validate() const;
};

struct SyntheticOutput {
  Dataset data;
  GroundTruth truth;
  Confounders latent;
};

// Noise-free structural functions of the nonlinear forms.
double synthetic_treatment_mean(SyntheticForm form, const Eigen::VectorXd& x, const Eigen::VectorXd& u);
double synthetic_outcome_mean(SyntheticForm form, double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

// Grid defaults to the percentile grid of the generated treatments.
SyntheticOutput generate_synthetic(const SyntheticSpec& spec, const std::optional<InterventionGrid>& grid = {});
// Recomputes the exact ITE truth of a nonlinear-form dataset from its latents.
GroundTruth synthetic_truth(SyntheticForm form, const Dataset& data, const Confounders& latent,
                            const InterventionGrid& grid);

SyntheticOutput generate_linear(const SyntheticSpec& spec, const std::optional<InterventionGrid>& grid = {});

struct LinearMoments {
  double var_t = 0.0;
  double cov_ty = 0.0;
  double var_y = 0.0;
};

LinearMoments linear_moments(const LinearParams& p);
// Sum of bivariate normal log densities of (T_i, Y_i) with one object per instance.
double linear_propositional_log_density(const LinearParams& p, const Eigen::VectorXd& t, const Eigen::VectorXd& y);
// Parameters with treatment effect beta_prime and the same (T, Y) moments.
// Throws NoSolution.
LinearParams ignorance_pair(const LinearParams& p, double beta_prime);

struct ResampleSpec {
  std::vector<double> shifts;  // one per object
  double bias = 0.0;
  double target_center = 45.0;
  double target_sd = 15.0;
  int samples_per_object = 25;
  bool with_replacement = false;
  std::uint64_t seed = 0;
};

struct ResampleOutput {
  Dataset data;
  std::vector<int> source;  // pool row of each resampled instance
};

// Importance weights of one object's pool, normalized to sum to one.
Eigen::VectorXd resample_weights(const Eigen::VectorXd& pool_t, double target_mean, double target_sd);
// Throws DegenerateWeights, InvalidConfig.
ResampleOutput biased_resample(const Dataset& pools, const ResampleSpec& spec);

struct NeecSpec {
  int pool_size = 365;
  std::vector<std::string> object_ids{"CT", "MA", "ME", "NH", "RI", "VT"};
  std::vector<double> shifts{3.0, 2.0, 1.0, -1.0, -2.0, -3.0};
  double outcome_noise = 0.5;
  std::uint64_t seed = 0;
};

// Daily consumption response of an object with shift s at temperature t.
double neec_response(double shift, double t);
// Seasonal temperature pools with a quadratic per-object response.
Dataset generate_neec_pools(const NeecSpec& spec);
// Exact ITE truth f_o(t_*) - f_o(T_i) for a resampled dataset.
GroundTruth neec_truth(const Dataset& data, const std::vector<double>& shifts, const InterventionGrid& grid);

struct DuplicateOutput {
  Dataset data;
  Eigen::MatrixXd hidden;   // hidden columns per output row
  std::vector<int> source;  // input row of each output row
  std::vector<bool> duplicated;  // member of a duplicated pair
};

// Throws NonBinaryTreatment.
DuplicateOutput duplicate_confound(const Dataset& data, const std::vector<int>& hidden_columns, double fraction,
                                   double noise_frac, Rng& rng);

struct BinarySpec {
  int n_instances = 200;
  int n_continuous = 6;
  int n_hidden = 5;
  double fraction = 0.3;
  double noise_frac = 0.05;
  double outcome_noise = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

double binary_outcome_mean(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& hidden);
// Binary-treatment benchmark with duplicated, treatment-flipped instances.
SyntheticOutput generate_binary(const BinarySpec& spec);

// Per-object GP regression of Y on T over the full pools; ITE truth for the
// resampled instances is the posterior-mean shift f_o(t_*) - f_o(T_i).
GroundTruth fit_ground_truth_per_object(const Dataset& pools, const Dataset& resampled, const InterventionGrid& grid,
                                        const PriorSpec& priors, const InferenceConfig& cfg);

}  // namespace gpslc
