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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpslc/counterfactual.hpp"
#include "gpslc/inference.hpp"
#include "gpslc/model.hpp"

namespace gpslc {

enum class BaselineKind { GpNoConf, GpNoObj, GpPerObj, Mlm1, Mlm2 };

std::string to_string(BaselineKind kind);

struct GpRunResult {
  EffectEstimate estimate;
  std::vector<PosteriorSample> samples;   // merged in chain order; empty for GpPerObj
  std::vector<AcceptanceStats> acceptance;  // one per chain
};

struct RunHooks {
  Chain::Progress progress;
  int progress_every = 0;
};

// Runs n_chains chains seeded seed, seed + 1, ... and estimates effects on the
// merged samples.
GpRunResult gp_run(const Dataset& data, const PriorSpec& priors, const ModelSpec& spec,
                   const InferenceConfig& cfg, const InterventionGrid& grid, int n_chains = 1,
                   const RunHooks& hooks = {});

// One object per instance.
Dataset split_objects(const Dataset& data);
Dataset object_subset(const Dataset& data, int object);

// base.n_confounders is used by GpNoObj only. Throws ObjectTooSmall (GpPerObj).
GpRunResult gp_ablation_run(BaselineKind kind, const Dataset& data, const PriorSpec& priors,
                            const ModelSpec& base, const InferenceConfig& cfg, const InterventionGrid& grid,
                            int n_chains = 1, const RunHooks& hooks = {});

struct MlmState {
  Eigen::VectorXd alpha;  // N_X
  Eigen::VectorXd beta;   // N_O (Mlm1) or 1 (Mlm2)
  Eigen::VectorXd eta;    // N_O
  double noise_var = 1.0;
};

struct MlmPriors {
  double alpha_var = 3.0;
  double beta_var = 1.0;
  double eta_var = 10.0;
  InvGamma noise;
};

double mlm_log_density(BaselineKind kind, const Dataset& data, const MlmState& state, const MlmPriors& priors = {});

// Gaussian random-walk proposal scale; adapted per coordinate during burn-in.
inline constexpr double kMlmInitialStep = 0.1;

std::vector<MlmState> mlm_sample(BaselineKind kind, const Dataset& data, const InferenceConfig& cfg,
                                 const MlmPriors& priors = {});

EffectEstimate mlm_effects(BaselineKind kind, const Dataset& data, const std::vector<MlmState>& samples,
                           const InterventionGrid& grid);

EffectEstimate mlm_run(BaselineKind kind, const Dataset& data, const InferenceConfig& cfg,
                       const InterventionGrid& grid, const MlmPriors& priors = {});

}  // namespace gpslc
