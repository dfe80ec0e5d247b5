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

#include "gpslc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gpslc/baselines.hpp"
#include "gpslc/error.hpp"

namespace gpslc {

namespace {

constexpr double kMomentTolerance = 1e-10;

double sum_x_sin_x(const Eigen::VectorXd& v) { return (v.array() * v.array().sin()).sum(); }

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

double population_variance(const Eigen::VectorXd& v) {
  if (v.size() == 0) return 0.0;
  return (v.array() - v.mean()).square().mean();
}

std::vector<std::string> numbered_ids(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> ids;
  for (Eigen::Index k = 0; k < n; ++k) ids.push_back(prefix + std::to_string(k));
  return ids;
}

InterventionGrid grid_or_default(const Dataset& data, const std::optional<InterventionGrid>& grid) {
  if (grid) {
    grid->validate();
    return *grid;
  }
  return intervention_grid_default(data, GridKind::Percentile);
}

bool moments_match(const LinearMoments& a, const LinearMoments& b) {
  auto close = [](double x, double y) { return std::abs(x - y) <= kMomentTolerance * std::max(1.0, std::abs(x)); };
  return close(a.var_t, b.var_t) && close(a.cov_ty, b.cov_ty) && close(a.var_y, b.var_y);
}

}  // namespace

void LinearParams::validate() const {
  if (!(var_u > 0.0 && var_t > 0.0 && var_y > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "linear variances must be positive");
  }
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(tau)) {
    throw Error(ErrorCode::InvalidConfig, "linear coefficients must be finite");
  }
}

void SyntheticSpec::validate() const {
  if (n_objects < 1 || instances_per_object < 1) {
    throw Error(ErrorCode::InvalidConfig, "objects and instances per object must be positive");
  }
  if (form != SyntheticForm::Linear && (n_u < 1 || n_x < 0)) {
    throw Error(ErrorCode::InvalidConfig, "need n_u >= 1 and n_x >= 0");
  }
  if (!(confounder_var > 0.0 && covariate_noise > 0.0 && treatment_noise > 0.0 && outcome_noise > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "noise variances must be positive");
  }
  if (form == SyntheticForm::Linear) linear.validate();
}

double synthetic_treatment_mean(SyntheticForm form, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  if (form == SyntheticForm::Multiplicative) return 0.1 * sum_x_sin_x(x) * sum_x_sin_x(u);
  return sum_x_sin_x(x) - sum_x_sin_x(u);
}

double synthetic_outcome_mean(SyntheticForm form, double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  const double treat = t * std::sin(2.0 * t);
  if (form == SyntheticForm::Multiplicative) return 0.1 * treat * sum_x_sin_x(x) * sum_x_sin_x(u);
  return treat + sum_x_sin_x(x) + 3.0 * sum_x_sin_x(u);
}

SyntheticOutput generate_synthetic(const SyntheticSpec& spec, const std::optional<InterventionGrid>& grid) {
  spec.validate();
  if (spec.form == SyntheticForm::Linear) return generate_linear(spec, grid);
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w(spec.n_x, spec.n_u);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = normal(rng);
  }
  Confounders u(spec.n_objects, spec.n_u);
  const double sd_u = std::sqrt(spec.confounder_var);
  for (Eigen::Index o = 0; o < u.rows(); ++o) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) u(o, j) = sd_u * normal(rng);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(spec.n_objects) * spec.instances_per_object;
  SyntheticOutput out;
  Dataset& d = out.data;
  d.x.resize(n, spec.n_x);
  d.t.resize(n);
  d.y.resize(n);
  d.object_ids = numbered_ids("o", spec.n_objects);
  const double sd_x = std::sqrt(spec.covariate_noise);
  const double sd_t = std::sqrt(spec.treatment_noise);
  const double sd_y = std::sqrt(spec.outcome_noise);
  Eigen::Index i = 0;
  for (int o = 0; o < spec.n_objects; ++o) {
    const Eigen::VectorXd uo = u.row(o).transpose();
    for (int k = 0; k < spec.instances_per_object; ++k, ++i) {
      Eigen::VectorXd x = w * uo;
      for (Eigen::Index j = 0; j < x.size(); ++j) x[j] += sd_x * normal(rng);
      const double t = synthetic_treatment_mean(spec.form, x, uo) + sd_t * normal(rng);
      d.x.row(i) = x.transpose();
      d.t[i] = t;
      d.y[i] = synthetic_outcome_mean(spec.form, t, x, uo) + sd_y * normal(rng);
      d.parent.push_back(o);
    }
  }
  out.latent = u;
  out.truth = synthetic_truth(spec.form, d, u, grid_or_default(d, grid));
  return out;
}

GroundTruth synthetic_truth(SyntheticForm form, const Dataset& data, const Confounders& latent,
                            const InterventionGrid& grid) {
  grid.validate();
  GroundTruth truth;
  truth.grid = grid.values;
  truth.ite.resize(static_cast<Eigen::Index>(grid.size()), data.n_instances());
  for (Eigen::Index i = 0; i < data.n_instances(); ++i) {
    const Eigen::VectorXd x = data.x.row(i).transpose();
    const Eigen::VectorXd uo = latent.row(data.parent[static_cast<std::size_t>(i)]).transpose();
    const double factual = synthetic_outcome_mean(form, data.t[i], x, uo);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      truth.ite(static_cast<Eigen::Index>(g), i) = synthetic_outcome_mean(form, grid.values[g], x, uo) - factual;
    }
  }
  truth.sate = truth.ite.rowwise().mean();
  return truth;
}

SyntheticOutput generate_linear(const SyntheticSpec& spec, const std::optional<InterventionGrid>& grid) {
  SyntheticSpec s = spec;
  s.form = SyntheticForm::Linear;
  s.validate();
  const LinearParams& p = s.linear;
  Rng rng(s.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Confounders u(s.n_objects, 1);
  for (Eigen::Index o = 0; o < u.rows(); ++o) u(o, 0) = std::sqrt(p.var_u) * normal(rng);
  const Eigen::Index n = static_cast<Eigen::Index>(s.n_objects) * s.instances_per_object;
  SyntheticOutput out;
  Dataset& d = out.data;
  d.x.resize(n, 0);
  d.t.resize(n);
  d.y.resize(n);
  d.object_ids = numbered_ids("o", s.n_objects);
  Eigen::Index i = 0;
  for (int o = 0; o < s.n_objects; ++o) {
    for (int k = 0; k < s.instances_per_object; ++k, ++i) {
      d.t[i] = p.alpha * u(o, 0) + std::sqrt(p.var_t) * normal(rng);
      d.y[i] = p.beta * d.t[i] + p.tau * u(o, 0) + std::sqrt(p.var_y) * normal(rng);
      d.parent.push_back(o);
    }
  }
  const InterventionGrid g = grid_or_default(d, grid);
  GroundTruth& truth = out.truth;
  truth.grid = g.values;
  truth.ite.resize(static_cast<Eigen::Index>(g.size()), n);
  for (std::size_t k = 0; k < g.size(); ++k) {
    truth.ite.row(static_cast<Eigen::Index>(k)) = (p.beta * (g.values[k] - d.t.array())).matrix().transpose();
  }
  truth.sate = truth.ite.rowwise().mean();
  out.latent = u;
  return out;
}

LinearMoments linear_moments(const LinearParams& p) {
  LinearMoments m;
  m.var_t = p.alpha * p.alpha * p.var_u + p.var_t;
  m.cov_ty = p.beta * m.var_t + p.tau * p.alpha * p.var_u;
  m.var_y = p.beta * p.beta * m.var_t + 2.0 * p.beta * p.tau * p.alpha * p.var_u + p.tau * p.tau * p.var_u + p.var_y;
  return m;
}

double linear_propositional_log_density(const LinearParams& p, const Eigen::VectorXd& t, const Eigen::VectorXd& y) {
  if (t.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "treatment and outcome lengths differ");
  const LinearMoments m = linear_moments(p);
  const double det = m.var_t * m.var_y - m.cov_ty * m.cov_ty;
  if (!(det > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "(T, Y) covariance is singular");
  const double quad =
      (m.var_y * t.squaredNorm() - 2.0 * m.cov_ty * t.dot(y) + m.var_t * y.squaredNorm()) / det;
  const double n = static_cast<double>(t.size());
  return -n * std::log(2.0 * std::numbers::pi) - 0.5 * n * std::log(det) - 0.5 * quad;
}

LinearParams ignorance_pair(const LinearParams& p, double beta_prime) {
  p.validate();
  if (beta_prime == p.beta) return p;
  if (p.tau == 0.0 || p.alpha == 0.0) {
    throw Error(ErrorCode::NoSolution, "no confounding path: the treatment effect is identified");
  }
  const LinearMoments target = linear_moments(p);
  const double sd_u = std::sqrt(p.var_u);
  const double a_sq = p.alpha * p.alpha * p.var_u;
  const double sign = p.alpha > 0.0 ? 1.0 : -1.0;
  // The outcome noise left over grows with the confounded share of Var(T), so
  // walk a'^2 from its current value toward Var(T).
  for (int k = 0; k <= 60; ++k) {
    const double a2 = target.var_t - (target.var_t - a_sq) * std::pow(0.5, k);
    const double var_t = target.var_t - a2;
    if (!(a2 > 0.0) || !(var_t > 0.0)) continue;
    const double a = sign * std::sqrt(a2);
    const double c = (target.cov_ty - beta_prime * target.var_t) / a;
    const double var_y = target.var_y - beta_prime * beta_prime * target.var_t - 2.0 * beta_prime * c * a - c * c;
    if (!(var_y > 0.0)) continue;
    LinearParams q;
    q.alpha = a / sd_u;
    q.beta = beta_prime;
    q.tau = c / sd_u;
    q.var_u = p.var_u;
    q.var_t = var_t;
    q.var_y = var_y;
    if (moments_match(target, linear_moments(q))) return q;
  }
  throw Error(ErrorCode::NoSolution, "no positive variances reproduce the moments for this beta");
}

Eigen::VectorXd resample_weights(const Eigen::VectorXd& pool_t, double target_mean, double target_sd) {
  const Eigen::Index n = pool_t.size();
  if (n == 0) throw Error(ErrorCode::ShapeMismatch, "empty resampling pool");
  if (!(target_sd > 0.0)) throw Error(ErrorCode::InvalidConfig, "target sd must be positive");
  // Gaussian KDE with Silverman's bandwidth as the empirical treatment density.
  std::vector<double> sorted(pool_t.begin(), pool_t.end());
  const double sd = std::sqrt(population_variance(pool_t));
  const double iqr = empirical_quantile(sorted, 0.75) - empirical_quantile(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double density = ((pool_t.array() - pool_t[i]) / h).square().unaryExpr([](double z) {
      return std::exp(-0.5 * z);
    }).sum() * inv_sqrt_2pi / (static_cast<double>(n) * h);
    const double z = (pool_t[i] - target_mean) / target_sd;
    w[i] = inv_sqrt_2pi / target_sd * std::exp(-0.5 * z * z) / density;
  }
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::DegenerateWeights, "all importance weights vanished");
  }
  return w / total;
}

ResampleOutput biased_resample(const Dataset& pools, const ResampleSpec& spec) {
  pools.validate();
  if (static_cast<Eigen::Index>(spec.shifts.size()) != pools.n_objects()) {
    throw Error(ErrorCode::InvalidConfig, "one shift per object required");
  }
  if (spec.samples_per_object < 1) throw Error(ErrorCode::InvalidConfig, "samples per object must be positive");
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<int> chosen;
  std::vector<int> parent;
  for (int o = 0; o < static_cast<int>(pools.n_objects()); ++o) {
    std::vector<int> rows;
    for (std::size_t i = 0; i < pools.parent.size(); ++i) {
      if (pools.parent[i] == o) rows.push_back(static_cast<int>(i));
    }
    Eigen::VectorXd pool_t(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) pool_t[static_cast<Eigen::Index>(k)] = pools.t[rows[k]];
    const Eigen::VectorXd w =
        resample_weights(pool_t, spec.target_center + spec.bias * spec.shifts[static_cast<std::size_t>(o)],
                         spec.target_sd);
    const auto want = static_cast<std::size_t>(spec.samples_per_object);
    std::vector<int> picked;
    if (spec.with_replacement) {
      std::discrete_distribution<int> draw(w.begin(), w.end());
      for (std::size_t k = 0; k < want; ++k) picked.push_back(rows[static_cast<std::size_t>(draw(rng))]);
    } else {
      if (want > rows.size()) {
        throw Error(ErrorCode::InvalidConfig, "object '" + pools.object_ids[static_cast<std::size_t>(o)] +
                                                  "' has fewer pool rows than requested samples");
      }
      // Weighted sampling without replacement: keep the largest log(u) / w keys.
      std::vector<std::pair<double, int>> keys;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const double wk = w[static_cast<Eigen::Index>(k)];
        const double key = wk > 0.0 ? std::log(uniform(rng)) / wk : -std::numeric_limits<double>::infinity();
        keys.emplace_back(key, rows[k]);
      }
      std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(want), keys.end(),
                        [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t k = 0; k < want; ++k) picked.push_back(keys[k].second);
      std::sort(picked.begin(), picked.end());
    }
    chosen.insert(chosen.end(), picked.begin(), picked.end());
    parent.insert(parent.end(), picked.size(), o);
  }
  ResampleOutput out;
  const auto n = static_cast<Eigen::Index>(chosen.size());
  out.data.x.resize(n, pools.n_covariates());
  out.data.t.resize(n);
  out.data.y.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int src = chosen[static_cast<std::size_t>(k)];
    out.data.x.row(k) = pools.x.row(src);
    out.data.t[k] = pools.t[src];
    out.data.y[k] = pools.y[src];
  }
  out.data.parent = parent;
  out.data.object_ids = pools.object_ids;
  out.source = chosen;
  return out;
}

double neec_response(double shift, double t) {
  const double z = (t - 60.0) / 10.0;
  return (20.0 + 5.0 * shift) + (1.0 + 0.1 * shift) * z * z;
}

Dataset generate_neec_pools(const NeecSpec& spec) {
  if (spec.pool_size < 1 || spec.object_ids.empty() || spec.object_ids.size() != spec.shifts.size()) {
    throw Error(ErrorCode::InvalidConfig, "need a positive pool size and one shift per object");
  }
  if (!(spec.outcome_noise >= 0.0)) throw Error(ErrorCode::InvalidConfig, "outcome noise must be >= 0");
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n_obj = static_cast<Eigen::Index>(spec.object_ids.size());
  const Eigen::Index n = n_obj * spec.pool_size;
  Dataset d;
  d.x.resize(n, 0);
  d.t.resize(n);
  d.y.resize(n);
  d.object_ids = spec.object_ids;
  Eigen::Index i = 0;
  for (Eigen::Index o = 0; o < n_obj; ++o) {
    for (int day = 0; day < spec.pool_size; ++day, ++i) {
      const double season = std::sin(2.0 * std::numbers::pi * (day - 109.0) / 365.0);
      d.t[i] = 50.0 + 25.0 * season + 6.0 * normal(rng);
      d.y[i] = neec_response(spec.shifts[static_cast<std::size_t>(o)], d.t[i]) + spec.outcome_noise * normal(rng);
      d.parent.push_back(static_cast<int>(o));
    }
  }
  return d;
}

GroundTruth neec_truth(const Dataset& data, const std::vector<double>& shifts, const InterventionGrid& grid) {
  grid.validate();
  if (static_cast<Eigen::Index>(shifts.size()) != data.n_objects()) {
    throw Error(ErrorCode::InvalidConfig, "one shift per object required");
  }
  GroundTruth truth;
  truth.grid = grid.values;
  truth.ite.resize(static_cast<Eigen::Index>(grid.size()), data.n_instances());
  for (Eigen::Index i = 0; i < data.n_instances(); ++i) {
    const double s = shifts[static_cast<std::size_t>(data.parent[static_cast<std::size_t>(i)])];
    const double factual = neec_response(s, data.t[i]);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      truth.ite(static_cast<Eigen::Index>(g), i) = neec_response(s, grid.values[g]) - factual;
    }
  }
  truth.sate = truth.ite.rowwise().mean();
  return truth;
}

DuplicateOutput duplicate_confound(const Dataset& data, const std::vector<int>& hidden_columns, double fraction,
                                   double noise_frac, Rng& rng) {
  data.validate();
  if (!data.has_binary_treatment()) throw Error(ErrorCode::NonBinaryTreatment, "treatments must be 0 or 1");
  if (!(fraction >= 0.0 && fraction <= 1.0) || !(noise_frac >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "fraction must lie in [0, 1] and noise_frac must be >= 0");
  }
  const Eigen::Index n = data.n_instances();
  std::vector<bool> is_hidden(static_cast<std::size_t>(data.n_covariates()), false);
  for (const int c : hidden_columns) {
    if (c < 0 || c >= data.n_covariates()) throw Error(ErrorCode::InvalidConfig, "hidden column out of range");
    is_hidden[static_cast<std::size_t>(c)] = true;
  }
  std::vector<Eigen::Index> visible;
  std::vector<Eigen::Index> hidden;
  for (Eigen::Index c = 0; c < data.n_covariates(); ++c) {
    (is_hidden[static_cast<std::size_t>(c)] ? hidden : visible).push_back(c);
  }

  const auto m = static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (Eigen::Index k = 0; k < m; ++k) {
    std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<int> picked(order.begin(), order.begin() + m);
  std::sort(picked.begin(), picked.end());

  DuplicateOutput out;
  out.source.resize(static_cast<std::size_t>(n));
  std::iota(out.source.begin(), out.source.end(), 0);
  out.source.insert(out.source.end(), picked.begin(), picked.end());
  const Eigen::Index total = n + m;
  out.duplicated.assign(static_cast<std::size_t>(total), false);
  for (const int i : picked) out.duplicated[static_cast<std::size_t>(i)] = true;
  for (Eigen::Index k = n; k < total; ++k) out.duplicated[static_cast<std::size_t>(k)] = true;

  Dataset& d = out.data;
  d.x.resize(total, static_cast<Eigen::Index>(visible.size()));
  d.t.resize(total);
  d.y.resize(total);
  out.hidden.resize(total, static_cast<Eigen::Index>(hidden.size()));
  for (Eigen::Index k = 0; k < total; ++k) {
    const int src = out.source[static_cast<std::size_t>(k)];
    for (std::size_t c = 0; c < visible.size(); ++c) d.x(k, static_cast<Eigen::Index>(c)) = data.x(src, visible[c]);
    for (std::size_t c = 0; c < hidden.size(); ++c) out.hidden(k, static_cast<Eigen::Index>(c)) = data.x(src, hidden[c]);
    d.t[k] = k < n ? data.t[src] : 1.0 - data.t[src];
    d.y[k] = data.y[src];
  }
  std::vector<double> noise_sd(visible.size());
  for (std::size_t c = 0; c < visible.size(); ++c) {
    noise_sd[c] = std::sqrt(noise_frac * population_variance(data.x.col(visible[c])));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index k = 0; k < total; ++k) {
    if (!out.duplicated[static_cast<std::size_t>(k)]) continue;
    for (std::size_t c = 0; c < visible.size(); ++c) d.x(k, static_cast<Eigen::Index>(c)) += noise_sd[c] * normal(rng);
  }

  bool propositional = data.n_objects() == n;
  for (Eigen::Index i = 0; propositional && i < n; ++i) propositional = data.parent[static_cast<std::size_t>(i)] == i;
  d.object_ids = propositional ? data.object_ids : numbered_ids("i", n);
  d.parent = out.source;
  return out;
}

void BinarySpec::validate() const {
  if (n_instances < 2 || n_continuous < 1 || n_hidden < 1) {
    throw Error(ErrorCode::InvalidConfig, "need >= 2 instances and >= 1 continuous and hidden covariate");
  }
  if (!(outcome_noise > 0.0)) throw Error(ErrorCode::InvalidConfig, "outcome noise must be positive");
}

double binary_outcome_mean(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& hidden) {
  const double confounding = 1.5 * (2.0 * hidden.array() - 1.0).sum();
  return x.array().sin().sum() + 0.5 * x.sum() + confounding + t * (4.0 + 0.5 * x[0]);
}

SyntheticOutput generate_binary(const BinarySpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Eigen::Index n = spec.n_instances;
  const int nc = spec.n_continuous;
  const int nh = spec.n_hidden;
  Dataset base;
  base.x.resize(n, nc + nh);
  base.t.resize(n);
  base.y = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < nh; ++j) base.x(i, nc + j) = uniform(rng) < 0.5 ? 1.0 : 0.0;
    for (int j = 0; j < nc; ++j) base.x(i, j) = 0.8 * (2.0 * base.x(i, nc + j % nh) - 1.0) + normal(rng);
    const double score = 0.5 * base.x.row(i).head(nc).sum() / std::sqrt(static_cast<double>(nc)) +
                         (2.0 * base.x.row(i).tail(nh).array() - 1.0).sum() / std::sqrt(static_cast<double>(nh));
    base.t[i] = uniform(rng) < sigmoid(score) ? 1.0 : 0.0;
    base.parent.push_back(static_cast<int>(i));
  }
  base.object_ids = numbered_ids("i", n);
  std::vector<int> hidden_cols(static_cast<std::size_t>(nh));
  std::iota(hidden_cols.begin(), hidden_cols.end(), nc);
  DuplicateOutput dup = duplicate_confound(base, hidden_cols, spec.fraction, spec.noise_frac, rng);

  SyntheticOutput out;
  out.data = std::move(dup.data);
  Dataset& d = out.data;
  const double sd_y = std::sqrt(spec.outcome_noise);
  const InterventionGrid grid = intervention_grid_default(d, GridKind::Binary);
  out.truth.grid = grid.values;
  out.truth.ite.resize(2, d.n_instances());
  for (Eigen::Index k = 0; k < d.n_instances(); ++k) {
    const Eigen::VectorXd x = d.x.row(k).transpose();
    const Eigen::VectorXd h = dup.hidden.row(k).transpose();
    const double factual = binary_outcome_mean(d.t[k], x, h);
    d.y[k] = factual + sd_y * normal(rng);
    for (Eigen::Index g = 0; g < 2; ++g) out.truth.ite(g, k) = binary_outcome_mean(grid.values[static_cast<std::size_t>(g)], x, h) - factual;
  }
  out.truth.sate = out.truth.ite.rowwise().mean();
  out.latent.resize(d.n_objects(), nh);
  for (Eigen::Index k = 0; k < d.n_instances(); ++k) out.latent.row(d.parent[static_cast<std::size_t>(k)]) = dup.hidden.row(k);
  return out;
}

GroundTruth fit_ground_truth_per_object(const Dataset& pools, const Dataset& resampled, const InterventionGrid& grid,
                                        const PriorSpec& priors, const InferenceConfig& cfg) {
  grid.validate();
  pools.validate();
  resampled.validate();
  if (pools.object_ids != resampled.object_ids) {
    throw Error(ErrorCode::ShapeMismatch, "resampled objects differ from the pools");
  }
  GroundTruth truth;
  truth.grid = grid.values;
  truth.provenance = "per-object-fit";
  truth.ite = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.size()), resampled.n_instances());
  const ModelSpec spec{0, KernelFamily::ArdRbf, TreatmentMode::Continuous};
  for (int o = 0; o < static_cast<int>(pools.n_objects()); ++o) {
    Dataset pool = object_subset(pools, o);
    pool.x.resize(pool.n_instances(), 0);
    if (pool.n_instances() < 2) throw Error(ErrorCode::ObjectTooSmall, "pool needs >= 2 rows per object");
    const double mt = pool.t.mean();
    const double st = std::sqrt(population_variance(pool.t));
    const double my = pool.y.mean();
    const double sy = std::sqrt(population_variance(pool.y));
    const double scale_t = st > 0.0 ? st : 1.0;
    const double scale_y = sy > 0.0 ? sy : 1.0;
    pool.t = (pool.t.array() - mt) / scale_t;
    pool.y = (pool.y.array() - my) / scale_y;
    InferenceConfig object_cfg = cfg;
    object_cfg.seed = cfg.seed + static_cast<std::uint64_t>(o);
    const std::vector<PosteriorSample> samples = run_chain(pool, priors, spec, object_cfg);
    if (samples.empty()) throw Error(ErrorCode::InvalidConfig, "per-object fit retained no samples");

    std::vector<Eigen::Index> members;
    for (std::size_t i = 0; i < resampled.parent.size(); ++i) {
      if (resampled.parent[i] == o) members.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::VectorXd query(static_cast<Eigen::Index>(grid.size() + members.size()));
    for (std::size_t g = 0; g < grid.size(); ++g) query[static_cast<Eigen::Index>(g)] = (grid.values[g] - mt) / scale_t;
    for (std::size_t k = 0; k < members.size(); ++k) {
      query[static_cast<Eigen::Index>(grid.size() + k)] = (resampled.t[members[k]] - mt) / scale_t;
    }
    Eigen::VectorXd mean_f = Eigen::VectorXd::Zero(query.size());
    for (const PosteriorSample& s : samples) {
      const ComponentParams& p = s.theta.y;
      Eigen::MatrixXd k = p.scale_sq * (-squared_differences(pool.t, pool.t).array() / p.treatment_len).exp();
      k.diagonal().array() += p.noise_sq;
      const Eigen::VectorXd alpha = cholesky(k).solve(Eigen::VectorXd(pool.y));
      const Eigen::MatrixXd cross =
          p.scale_sq * (-squared_differences(query, pool.t).array() / p.treatment_len).exp();
      mean_f += cross * alpha;
    }
    mean_f *= scale_y / static_cast<double>(samples.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double factual = mean_f[static_cast<Eigen::Index>(grid.size() + k)];
      for (std::size_t g = 0; g < grid.size(); ++g) {
        truth.ite(static_cast<Eigen::Index>(g), members[k]) = mean_f[static_cast<Eigen::Index>(g)] - factual;
      }
    }
  }
  truth.sate = truth.ite.rowwise().mean();
  return truth;
}

}  // namespace gpslc
