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

#include "gpslc/pipeline.hpp"

#include <cmath>

#include "gpslc/error.hpp"

namespace gpslc {

namespace {

std::pair<double, double> center_scale(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().mean());
  return {mean, sd > 0.0 ? sd : 1.0};
}

}  // namespace

ModelKind parse_model_kind(const std::string& name) {
  for (const ModelKind k : {ModelKind::GpSlc, ModelKind::GpNoConf, ModelKind::GpNoObj, ModelKind::GpPerObj,
                            ModelKind::Mlm1, ModelKind::Mlm2}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown model '" + name + "'");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::GpSlc: return "gpslc";
    case ModelKind::GpNoConf: return "gp-noconf";
    case ModelKind::GpNoObj: return "gp-noobj";
    case ModelKind::GpPerObj: return "gp-perobj";
    case ModelKind::Mlm1: return "mlm1";
    case ModelKind::Mlm2: return "mlm2";
  }
  return "unknown";
}

Standardizer Standardizer::identity(const Dataset& data) {
  Standardizer s;
  s.x_mean = Eigen::VectorXd::Zero(data.n_covariates());
  s.x_scale = Eigen::VectorXd::Ones(data.n_covariates());
  return s;
}

Standardizer Standardizer::fit(const Dataset& data, bool scale_treatment) {
  Standardizer s = identity(data);
  if (scale_treatment) std::tie(s.t_mean, s.t_scale) = center_scale(data.t);
  std::tie(s.y_mean, s.y_scale) = center_scale(data.y);
  for (Eigen::Index k = 0; k < data.n_covariates(); ++k) {
    std::tie(s.x_mean[k], s.x_scale[k]) = center_scale(data.x.col(k));
  }
  return s;
}

Dataset Standardizer::apply(const Dataset& data) const {
  Dataset out = data;
  out.t = (data.t.array() - t_mean) / t_scale;
  out.y = (data.y.array() - y_mean) / y_scale;
  for (Eigen::Index k = 0; k < data.n_covariates(); ++k) {
    out.x.col(k) = (data.x.col(k).array() - x_mean[k]) / x_scale[k];
  }
  return out;
}

InterventionGrid Standardizer::apply(const InterventionGrid& grid) const {
  InterventionGrid out = grid;
  for (double& v : out.values) v = (v - t_mean) / t_scale;
  return out;
}

FitResult fit_and_estimate(const Dataset& data, const InterventionGrid& grid, const FitOptions& options) {
  data.validate();
  grid.validate();
  const bool binary = options.spec.mode == TreatmentMode::Binary;
  if (binary && !data.has_binary_treatment()) {
    throw Error(ErrorCode::NonBinaryTreatment, "binary mode requires treatments in {0, 1}");
  }
  const Standardizer scaler = options.standardize ? Standardizer::fit(data, !binary) : Standardizer::identity(data);
  const Dataset model_data = scaler.apply(data);
  const InterventionGrid model_grid = scaler.apply(grid);

  FitResult out;
  switch (options.kind) {
    case ModelKind::GpSlc: {
      GpRunResult r = gp_run(model_data, options.priors, options.spec, options.cfg, model_grid, options.chains,
                             options.hooks);
      out.estimate = std::move(r.estimate);
      out.acceptance = std::move(r.acceptance);
      break;
    }
    case ModelKind::GpNoConf:
    case ModelKind::GpNoObj:
    case ModelKind::GpPerObj: {
      const BaselineKind kind = options.kind == ModelKind::GpNoConf  ? BaselineKind::GpNoConf
                                : options.kind == ModelKind::GpNoObj ? BaselineKind::GpNoObj
                                                                     : BaselineKind::GpPerObj;
      GpRunResult r = gp_ablation_run(kind, model_data, options.priors, options.spec, options.cfg, model_grid,
                                      options.chains, options.hooks);
      out.estimate = std::move(r.estimate);
      out.acceptance = std::move(r.acceptance);
      break;
    }
    case ModelKind::Mlm1:
    case ModelKind::Mlm2: {
      const BaselineKind kind = options.kind == ModelKind::Mlm1 ? BaselineKind::Mlm1 : BaselineKind::Mlm2;
      std::vector<MlmState> samples;
      for (int c = 0; c < options.chains; ++c) {
        InferenceConfig cfg = options.cfg;
        cfg.seed = options.cfg.seed + static_cast<std::uint64_t>(c);
        std::vector<MlmState> part = mlm_sample(kind, model_data, cfg, options.mlm_priors);
        samples.insert(samples.end(), part.begin(), part.end());
      }
      out.estimate = mlm_effects(kind, model_data, samples, model_grid);
      break;
    }
  }
  out.estimate.grid = grid.values;
  for (Eigen::MatrixXd& d : out.estimate.draws) d *= scaler.y_scale;
  return out;
}

}  // namespace gpslc
