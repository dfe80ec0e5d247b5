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

#include "gpslc/baselines.hpp"

#include <cmath>

#include "gpslc/error.hpp"

namespace gpslc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr std::uint64_t kEffectSeedMix = 0x9E3779B97F4A7C15ULL;
constexpr int kAdaptWindow = 50;
constexpr double kTargetAcceptance = 0.44;

double normal_logpdf(double x, double var) { return -0.5 * (kLog2Pi + std::log(var) + x * x / var); }

double gaussian_loglik(double ss, double var, Eigen::Index n) {
  return -0.5 * (static_cast<double>(n) * (kLog2Pi + std::log(var)) + ss / var);
}

bool is_mlm(BaselineKind kind) { return kind == BaselineKind::Mlm1 || kind == BaselineKind::Mlm2; }

void check_mlm_shapes(BaselineKind kind, const Dataset& data, const MlmState& s) {
  const Eigen::Index n_beta = kind == BaselineKind::Mlm1 ? data.n_objects() : 1;
  if (!is_mlm(kind) || s.alpha.size() != data.n_covariates() || s.beta.size() != n_beta ||
      s.eta.size() != data.n_objects()) {
    throw Error(ErrorCode::ShapeMismatch, "multilevel state does not match the dataset");
  }
}

Eigen::VectorXd residuals(BaselineKind kind, const Dataset& data, const MlmState& s) {
  Eigen::VectorXd r = data.y - data.x * s.alpha;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const int o = data.parent[static_cast<std::size_t>(i)];
    const double b = kind == BaselineKind::Mlm1 ? s.beta[o] : s.beta[0];
    r[i] -= b * data.t[i] + s.eta[o];
  }
  return r;
}

}  // namespace

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::GpNoConf: return "gp-noconf";
    case BaselineKind::GpNoObj: return "gp-noobj";
    case BaselineKind::GpPerObj: return "gp-perobj";
    case BaselineKind::Mlm1: return "mlm1";
    case BaselineKind::Mlm2: return "mlm2";
  }
  return "unknown";
}

GpRunResult gp_run(const Dataset& data, const PriorSpec& priors, const ModelSpec& spec,
                   const InferenceConfig& cfg, const InterventionGrid& grid, int n_chains, const RunHooks& hooks) {
  if (n_chains < 1) throw Error(ErrorCode::InvalidConfig, "need at least one chain");
  GpRunResult out;
  for (int c = 0; c < n_chains; ++c) {
    InferenceConfig chain_cfg = cfg;
    chain_cfg.seed = cfg.seed + static_cast<std::uint64_t>(c);
    Chain chain(data, priors, spec, chain_cfg);
    std::vector<PosteriorSample> samples = chain.run(hooks.progress, hooks.progress_every);
    out.samples.insert(out.samples.end(), samples.begin(), samples.end());
    out.acceptance.push_back(chain.acceptance());
  }
  Rng rng(cfg.seed ^ kEffectSeedMix);
  out.estimate = estimate_effects(data, out.samples, grid, spec.family, rng);
  return out;
}

Dataset split_objects(const Dataset& data) {
  Dataset out = data;
  out.object_ids.clear();
  for (Eigen::Index i = 0; i < data.n_instances(); ++i) {
    out.parent[static_cast<std::size_t>(i)] = static_cast<int>(i);
    out.object_ids.push_back("i" + std::to_string(i));
  }
  return out;
}

Dataset object_subset(const Dataset& data, int object) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < data.parent.size(); ++i) {
    if (data.parent[i] == object) rows.push_back(static_cast<Eigen::Index>(i));
  }
  if (rows.empty()) throw Error(ErrorCode::ShapeMismatch, "object has no instances");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Dataset out;
  out.x.resize(n, data.n_covariates());
  out.t.resize(n);
  out.y.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.x.row(k) = data.x.row(rows[static_cast<std::size_t>(k)]);
    out.t[k] = data.t[rows[static_cast<std::size_t>(k)]];
    out.y[k] = data.y[rows[static_cast<std::size_t>(k)]];
  }
  out.parent.assign(rows.size(), 0);
  out.object_ids = {data.object_ids.at(static_cast<std::size_t>(object))};
  return out;
}

GpRunResult gp_ablation_run(BaselineKind kind, const Dataset& data, const PriorSpec& priors,
                            const ModelSpec& base, const InferenceConfig& cfg, const InterventionGrid& grid,
                            int n_chains, const RunHooks& hooks) {
  ModelSpec no_u = base;
  no_u.n_confounders = 0;
  switch (kind) {
    case BaselineKind::GpNoConf:
      return gp_run(data, priors, no_u, cfg, grid, n_chains, hooks);
    case BaselineKind::GpNoObj:
      return gp_run(split_objects(data), priors, base, cfg, grid, n_chains, hooks);
    case BaselineKind::GpPerObj:
      break;
    default:
      throw Error(ErrorCode::InvalidConfig, to_string(kind) + " is not a GP ablation");
  }
  const std::vector<int> sizes = data.object_sizes();
  for (std::size_t o = 0; o < sizes.size(); ++o) {
    if (sizes[o] < 2) throw Error(ErrorCode::ObjectTooSmall, "object '" + data.object_ids[o] + "' has < 2 instances");
  }
  GpRunResult out;
  out.estimate.grid = grid.values;
  for (int o = 0; o < static_cast<int>(sizes.size()); ++o) {
    InferenceConfig object_cfg = cfg;
    object_cfg.seed = cfg.seed + static_cast<std::uint64_t>(o) * static_cast<std::uint64_t>(n_chains);
    const GpRunResult part = gp_run(object_subset(data, o), priors, no_u, object_cfg, grid, n_chains, hooks);
    if (out.estimate.draws.empty()) {
      out.estimate.draws.assign(grid.size(), Eigen::MatrixXd::Zero(part.estimate.n_samples(), data.n_instances()));
    }
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < data.parent.size(); ++i) {
      if (data.parent[i] != o) continue;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        out.estimate.draws[g].col(static_cast<Eigen::Index>(i)) = part.estimate.draws[g].col(k);
      }
      ++k;
    }
    out.acceptance.insert(out.acceptance.end(), part.acceptance.begin(), part.acceptance.end());
  }
  return out;
}

double mlm_log_density(BaselineKind kind, const Dataset& data, const MlmState& state, const MlmPriors& priors) {
  check_mlm_shapes(kind, data, state);
  if (!(state.noise_var > 0.0)) throw Error(ErrorCode::NonPositiveInput, "noise variance must be positive");
  double acc = gaussian_loglik(residuals(kind, data, state).squaredNorm(), state.noise_var, data.n_instances());
  for (const double a : state.alpha) acc += normal_logpdf(a, priors.alpha_var);
  for (const double b : state.beta) acc += normal_logpdf(b, priors.beta_var);
  for (const double e : state.eta) acc += normal_logpdf(e, priors.eta_var);
  return acc + inv_gamma_logpdf(state.noise_var, priors.noise.shape, priors.noise.rate);
}

std::vector<MlmState> mlm_sample(BaselineKind kind, const Dataset& data, const InferenceConfig& cfg,
                                 const MlmPriors& priors) {
  cfg.validate();
  data.validate();
  const Eigen::Index n = data.n_instances();
  const Eigen::Index n_obj = data.n_objects();
  const Eigen::Index n_x = data.n_covariates();
  const bool per_object = kind == BaselineKind::Mlm1;
  MlmState s;
  s.alpha = Eigen::VectorXd::Zero(n_x);
  s.beta = Eigen::VectorXd::Zero(per_object ? n_obj : 1);
  s.eta = Eigen::VectorXd::Zero(n_obj);
  s.noise_var = 1.0;
  check_mlm_shapes(kind, data, s);

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(n_obj));
  for (Eigen::Index i = 0; i < n; ++i) members[static_cast<std::size_t>(data.parent[static_cast<std::size_t>(i)])].push_back(i);
  const Eigen::VectorXd x_sq = data.x.colwise().squaredNorm().transpose();

  // Coordinates: alpha (n_x), beta, eta (n_obj).
  const Eigen::Index n_coord = n_x + s.beta.size() + n_obj;
  std::vector<double> step(static_cast<std::size_t>(n_coord), kMlmInitialStep);
  std::vector<int> window_accepts(static_cast<std::size_t>(n_coord), 0);

  Rng rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const int burn_in = cfg.effective_burn_in();
  std::vector<MlmState> retained;

  // Accepts a shift delta of one coordinate given the change in the residual
  // sum of squares it causes.
  auto try_shift = [&](double& value, double prior_var, std::size_t coord, double cross, double sq, double& ss) {
    const double delta = step[coord] * normal(rng);
    const double ss_new = ss - 2.0 * delta * cross + delta * delta * sq;
    const double log_a = -(ss_new - ss) / (2.0 * s.noise_var) + normal_logpdf(value + delta, prior_var) -
                         normal_logpdf(value, prior_var);
    if (std::log(uniform(rng)) < log_a) {
      value += delta;
      ss = ss_new;
      ++window_accepts[coord];
      return delta;
    }
    return 0.0;
  };

  for (int iteration = 1; iteration <= cfg.n_outer; ++iteration) {
    Eigen::VectorXd r = residuals(kind, data, s);
    double ss = r.squaredNorm();
    for (Eigen::Index k = 0; k < n_x; ++k) {
      const double d = try_shift(s.alpha[k], priors.alpha_var, static_cast<std::size_t>(k), r.dot(data.x.col(k)),
                                 x_sq[k], ss);
      if (d != 0.0) r -= d * data.x.col(k);
    }
    for (Eigen::Index b = 0; b < s.beta.size(); ++b) {
      double cross = 0.0;
      double sq = 0.0;
      if (per_object) {
        for (const Eigen::Index i : members[static_cast<std::size_t>(b)]) {
          cross += r[i] * data.t[i];
          sq += data.t[i] * data.t[i];
        }
      } else {
        cross = r.dot(data.t);
        sq = data.t.squaredNorm();
      }
      const double d = try_shift(s.beta[b], priors.beta_var, static_cast<std::size_t>(n_x + b), cross, sq, ss);
      if (d == 0.0) continue;
      if (per_object) {
        for (const Eigen::Index i : members[static_cast<std::size_t>(b)]) r[i] -= d * data.t[i];
      } else {
        r -= d * data.t;
      }
    }
    for (Eigen::Index o = 0; o < n_obj; ++o) {
      const auto& m = members[static_cast<std::size_t>(o)];
      double cross = 0.0;
      for (const Eigen::Index i : m) cross += r[i];
      const double d = try_shift(s.eta[o], priors.eta_var, static_cast<std::size_t>(n_x + s.beta.size() + o),
                                 cross, static_cast<double>(m.size()), ss);
      if (d != 0.0) {
        for (const Eigen::Index i : m) r[i] -= d;
      }
    }
    auto log_target = [&](double var) {
      return gaussian_loglik(ss, var, n) + inv_gamma_logpdf(var, priors.noise.shape, priors.noise.rate);
    };
    s.noise_var = mh_step(s.noise_var, log_target(s.noise_var), cfg.drift, log_target, rng).value;

    if (iteration <= burn_in && iteration % kAdaptWindow == 0) {
      for (std::size_t c = 0; c < step.size(); ++c) {
        const double rate = static_cast<double>(window_accepts[c]) / kAdaptWindow;
        step[c] *= rate > kTargetAcceptance ? 1.25 : 0.8;
        window_accepts[c] = 0;
      }
    }
    if (iteration > burn_in && (iteration - burn_in) % cfg.thin == 0) retained.push_back(s);
  }
  return retained;
}

EffectEstimate mlm_effects(BaselineKind kind, const Dataset& data, const std::vector<MlmState>& samples,
                           const InterventionGrid& grid) {
  if (samples.empty()) throw Error(ErrorCode::InvalidConfig, "no posterior samples");
  grid.validate();
  const Eigen::Index n = data.n_instances();
  EffectEstimate out;
  out.grid = grid.values;
  out.draws.assign(grid.size(), Eigen::MatrixXd(static_cast<Eigen::Index>(samples.size()), n));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    check_mlm_shapes(kind, data, samples[s]);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double b = kind == BaselineKind::Mlm1 ? samples[s].beta[data.parent[static_cast<std::size_t>(i)]]
                                                  : samples[s].beta[0];
      for (std::size_t g = 0; g < grid.size(); ++g) {
        out.draws[g](static_cast<Eigen::Index>(s), i) = b * (grid.values[g] - data.t[i]);
      }
    }
  }
  return out;
}

EffectEstimate mlm_run(BaselineKind kind, const Dataset& data, const InferenceConfig& cfg,
                       const InterventionGrid& grid, const MlmPriors& priors) {
  return mlm_effects(kind, data, mlm_sample(kind, data, cfg, priors), grid);
}

}  // namespace gpslc
