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

#include "gpslc/baselines.hpp"
#include "gpslc/counterfactual.hpp"
#include "gpslc/inference.hpp"
#include "gpslc/model.hpp"

namespace gpslc {

enum class ModelKind { GpSlc, GpNoConf, GpNoObj, GpPerObj, Mlm1, Mlm2 };

// Accepts gpslc, gp-noconf, gp-noobj, gp-perobj, mlm1, mlm2.
ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

// Per-column centering and scaling; constant columns keep unit scale.
struct Standardizer {
  double t_mean = 0.0;
  double t_scale = 1.0;
  double y_mean = 0.0;
  double y_scale = 1.0;
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_scale;

  // Binary treatments are left untouched.
  static Standardizer fit(const Dataset& data, bool scale_treatment);
  static Standardizer identity(const Dataset& data);
  Dataset apply(const Dataset& data) const;
  InterventionGrid apply(const InterventionGrid& grid) const;
};

struct FitOptions {
  ModelKind kind = ModelKind::GpSlc;
  ModelSpec spec;
  PriorSpec priors;
  InferenceConfig cfg;
  MlmPriors mlm_priors;
  int chains = 1;
  bool standardize = true;
  RunHooks hooks;
};

struct FitResult {
  EffectEstimate estimate;  // original units
  std::vector<AcceptanceStats> acceptance;
};

FitResult fit_and_estimate(const Dataset& data, const InterventionGrid& grid, const FitOptions& options);

}  // namespace gpslc
