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

#include "gpslc/model.hpp"

#include <cmath>
#include <numbers>

#include "gpslc/error.hpp"

namespace gpslc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }

Eigen::VectorXd inverse_scaled(double scale, const Eigen::VectorXd& len) {
  return scale * len.cwiseInverse();
}

}  // namespace

void Dataset::validate() const {
  const Eigen::Index n = t.size();
  if (n < 1) throw Error(ErrorCode::ShapeMismatch, "dataset has no instances");
  if (y.size() != n || x.rows() != n || static_cast<Eigen::Index>(parent.size()) != n) {
    throw Error(ErrorCode::ShapeMismatch, "instance-level arrays differ in length");
  }
  const auto n_obj = static_cast<int>(object_ids.size());
  if (n_obj < 1 || n_obj > n) throw Error(ErrorCode::ShapeMismatch, "need 1 <= N_O <= N_I");
  std::vector<bool> used(n_obj, false);
  for (const int p : parent) {
    if (p < 0 || p >= n_obj) throw Error(ErrorCode::ShapeMismatch, "instance references a missing object");
    used[p] = true;
  }
  for (int o = 0; o < n_obj; ++o) {
    if (!used[o]) throw Error(ErrorCode::ShapeMismatch, "object '" + object_ids[o] + "' has no instances");
  }
  if (!x.allFinite() || !t.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::ShapeMismatch, "dataset contains non-finite values");
  }
}

bool Dataset::has_binary_treatment() const {
  return ((t.array() == 0.0) || (t.array() == 1.0)).all();
}

std::vector<int> Dataset::object_sizes() const {
  std::vector<int> sizes(object_ids.size(), 0);
  for (const int p : parent) ++sizes[p];
  return sizes;
}

HyperParams HyperParams::constant(int n_confounders, int n_covariates, double value) {
  ComponentParams base;
  base.scale_sq = value;
  base.noise_sq = value;
  base.confounder_len = Eigen::VectorXd::Constant(n_confounders, value);
  HyperParams theta;
  theta.x.assign(n_covariates, base);
  theta.t = base;
  theta.t.covariate_len = Eigen::VectorXd::Constant(n_covariates, value);
  theta.y = theta.t;
  theta.y.treatment_len = value;
  return theta;
}

void HyperParams::validate(int n_confounders, int n_covariates) const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  auto check = [&](const ComponentParams& p, bool with_cov) {
    if (!positive(p.scale_sq) || !positive(p.noise_sq) || !positive(p.treatment_len)) return false;
    if (p.confounder_len.size() != n_confounders) return false;
    if (with_cov && p.covariate_len.size() != n_covariates) return false;
    for (const double v : p.confounder_len) if (!positive(v)) return false;
    for (const double v : p.covariate_len) if (!positive(v)) return false;
    return true;
  };
  if (static_cast<int>(x.size()) != n_covariates) {
    throw Error(ErrorCode::ShapeMismatch, "one covariate component required per covariate dimension");
  }
  bool ok = check(t, true) && check(y, true) && positive(confounder_var);
  for (const auto& p : x) ok = ok && check(p, false);
  if (!ok) throw Error(ErrorCode::NonPositiveInput, "hyperparameters must be positive with matching lengths");
}

Kernel covariate_kernel(const HyperParams& theta, int dim, KernelFamily family) {
  const auto& p = theta.x.at(dim);
  return Kernel{family, p.scale_sq, p.noise_sq, p.confounder_len, Eigen::VectorXd(), std::nullopt};
}

Kernel treatment_kernel(const HyperParams& theta, KernelFamily family) {
  const auto& p = theta.t;
  return Kernel{family, p.scale_sq, p.noise_sq, p.confounder_len, p.covariate_len, std::nullopt};
}

Kernel outcome_kernel(const HyperParams& theta, KernelFamily family) {
  const auto& p = theta.y;
  return Kernel{family, p.scale_sq, p.noise_sq, p.confounder_len, p.covariate_len, p.treatment_len};
}

std::vector<ParamSlot> parameter_slots(int n_confounders, int n_covariates) {
  std::vector<ParamSlot> slots;
  auto add_component = [&](Component c, int x_dim, bool with_cov, bool with_treatment) {
    slots.push_back({c, x_dim, ParamField::Scale, 0});
    slots.push_back({c, x_dim, ParamField::Noise, 0});
    for (int j = 0; j < n_confounders; ++j) slots.push_back({c, x_dim, ParamField::ConfounderLen, j});
    if (with_cov) {
      for (int k = 0; k < n_covariates; ++k) slots.push_back({c, x_dim, ParamField::CovariateLen, k});
    }
    if (with_treatment) slots.push_back({c, x_dim, ParamField::TreatmentLen, 0});
  };
  for (int k = 0; k < n_covariates; ++k) add_component(Component::X, k, false, false);
  add_component(Component::T, 0, true, false);
  add_component(Component::Y, 0, true, true);
  return slots;
}

double& param_ref(HyperParams& theta, const ParamSlot& slot) {
  ComponentParams& p = slot.component == Component::X ? theta.x.at(slot.x_dim)
                       : slot.component == Component::T ? theta.t
                                                        : theta.y;
  switch (slot.field) {
    case ParamField::Scale: return p.scale_sq;
    case ParamField::Noise: return p.noise_sq;
    case ParamField::ConfounderLen: return p.confounder_len[slot.index];
    case ParamField::CovariateLen: return p.covariate_len[slot.index];
    case ParamField::TreatmentLen: return p.treatment_len;
  }
  throw Error(ErrorCode::ShapeMismatch, "unknown parameter slot");
}

double param_value(const HyperParams& theta, const ParamSlot& slot) {
  return param_ref(const_cast<HyperParams&>(theta), slot);
}

std::string slot_name(const ParamSlot& slot) {
  std::string name = slot.component == Component::X ? "x" + std::to_string(slot.x_dim)
                     : slot.component == Component::T ? "t"
                                                      : "y";
  switch (slot.field) {
    case ParamField::Scale: return name + ".scale_sq";
    case ParamField::Noise: return name + ".noise_sq";
    case ParamField::ConfounderLen: return name + ".len_u" + std::to_string(slot.index);
    case ParamField::CovariateLen: return name + ".len_x" + std::to_string(slot.index);
    case ParamField::TreatmentLen: return name + ".len_t";
  }
  return name;
}

const InvGamma& PriorSpec::for_slot(const ParamSlot& slot) const {
  const auto it = overrides.find(slot_name(slot));
  return it == overrides.end() ? fallback : it->second;
}

void PriorSpec::validate() const {
  auto ok = [](const InvGamma& g) { return g.shape > 0.0 && g.rate > 0.0; };
  bool valid = ok(fallback);
  for (const auto& [name, g] : overrides) valid = valid && ok(g);
  if (!valid) throw Error(ErrorCode::NonPositiveInput, "inverse-gamma shape and rate must be positive");
}

double inv_gamma_logpdf(double x, double alpha, double beta) {
  if (!(x > 0.0)) throw Error(ErrorCode::NonPositiveInput, "inverse-gamma density needs x > 0");
  return alpha * std::log(beta) - std::lgamma(alpha) - (alpha + 1.0) * std::log(x) - beta / x;
}

double sample_inv_gamma(double alpha, double beta, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  return beta / gamma(rng);
}

std::pair<HyperParams, Confounders> prior_sample(const PriorSpec& priors, int n_objects, int n_confounders,
                                                 int n_covariates, Rng& rng, double confounder_var) {
  HyperParams theta = HyperParams::constant(n_confounders, n_covariates, 1.0);
  theta.confounder_var = confounder_var;
  for (const auto& slot : parameter_slots(n_confounders, n_covariates)) {
    const InvGamma& g = priors.for_slot(slot);
    param_ref(theta, slot) = sample_inv_gamma(g.shape, g.rate, rng);
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(confounder_var));
  Confounders u(n_objects, n_confounders);
  for (int o = 0; o < n_objects; ++o) {
    for (int j = 0; j < n_confounders; ++j) u(o, j) = normal(rng);
  }
  return {std::move(theta), std::move(u)};
}

double bernoulli_logit_loglik(const Eigen::VectorXd& t, const Eigen::VectorXd& logits) {
  if (t.size() != logits.size()) throw Error(ErrorCode::ShapeMismatch, "treatment and logit lengths differ");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    acc -= t[i] * softplus(-logits[i]) + (1.0 - t[i]) * softplus(logits[i]);
  }
  return acc;
}

ModelEvaluator::ModelEvaluator(const Dataset& data, KernelFamily family) : data_(&data), family_(family) {
  data.validate();
  if (family_ == KernelFamily::ArdRbf) {
    for (Eigen::Index k = 0; k < data.n_covariates(); ++k) {
      covariate_sqdist_.push_back(squared_differences(data.x.col(k), data.x.col(k)));
    }
    treatment_sqdist_ = squared_differences(data.t, data.t);
  }
}

Eigen::MatrixXd ModelEvaluator::gathered(const Eigen::MatrixXd& object_level) const {
  const Eigen::Index n = data_->n_instances();
  const auto& pa = data_->parent;
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = object_level(pa[i], pa[j]);
  }
  return out;
}

Eigen::MatrixXd ModelEvaluator::confounder_rows(const Confounders& u) const {
  Eigen::MatrixXd rows(data_->n_instances(), u.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) rows.row(i) = u.row(data_->parent[i]);
  return rows;
}

Eigen::MatrixXd ModelEvaluator::confounder_sqdist(const Eigen::VectorXd& column) const {
  if (column.size() != data_->n_objects()) throw Error(ErrorCode::ShapeMismatch, "confounder column length differs from N_O");
  return gathered(squared_differences(column, column));
}

Eigen::MatrixXd ModelEvaluator::exponent(const ComponentParams& p, const Confounders& u, bool with_treatment) const {
  const Eigen::Index n = data_->n_instances();
  Eigen::MatrixXd e = u.cols() > 0 ? gathered(scaled_sq_distance(u, u, p.confounder_len))
                                   : Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < covariate_sqdist_.size(); ++k) {
    e.noalias() += covariate_sqdist_[k] * (1.0 / p.covariate_len[static_cast<Eigen::Index>(k)]);
  }
  if (with_treatment) e.noalias() += treatment_sqdist_ * (1.0 / p.treatment_len);
  return e;
}

bool ModelEvaluator::unit_logpdf(const Eigen::VectorXd& x, const Eigen::MatrixXd& unit, double scale, double noise,
                                 double& out) {
  Eigen::MatrixXd cov = scale * unit;
  cov.diagonal().array() += noise;
  CholeskyFactor f;
  if (!try_cholesky_symmetric(cov, f)) return false;
  out = mvn_logpdf_zero_mean(x, f);
  return std::isfinite(out);
}

bool ModelEvaluator::x_term_dim(const HyperParams& theta, const Confounders& u, int dim, double& out) const {
  const Dataset& d = *data_;
  const ComponentParams& p = theta.x.at(static_cast<std::size_t>(dim));
  if (family_ == KernelFamily::Linear) {
    return lowrank_logpdf(d.x.col(dim), confounder_rows(u), inverse_scaled(p.scale_sq, p.confounder_len),
                          p.noise_sq, out);
  }
  Eigen::MatrixXd object_cov = u.cols() > 0 ? scaled_sq_distance(u, u, p.confounder_len)
                                            : Eigen::MatrixXd::Zero(d.n_objects(), d.n_objects());
  object_cov = p.scale_sq * (-object_cov.array()).exp();
  return grouped_logpdf(d.x.col(dim), d.parent, object_cov, p.noise_sq, out);
}

bool ModelEvaluator::x_term(const HyperParams& theta, const Confounders& u, double& out) const {
  out = 0.0;
  for (Eigen::Index k = 0; k < data_->n_covariates(); ++k) {
    double value = 0.0;
    if (!x_term_dim(theta, u, static_cast<int>(k), value)) return false;
    out += value;
  }
  return true;
}

bool ModelEvaluator::t_term(const HyperParams& theta, const Confounders& u, const Eigen::VectorXd& t_values,
                            double& out) const {
  const ComponentParams& p = theta.t;
  if (family_ == KernelFamily::Linear) {
    Eigen::MatrixXd features(data_->n_instances(), u.cols() + data_->n_covariates());
    features << confounder_rows(u), data_->x;
    Eigen::VectorXd w(features.cols());
    w << inverse_scaled(p.scale_sq, p.confounder_len), inverse_scaled(p.scale_sq, p.covariate_len);
    return lowrank_logpdf(t_values, features, w, p.noise_sq, out);
  }
  return unit_logpdf(t_values, (-exponent(p, u, false).array()).exp().matrix(), p.scale_sq, p.noise_sq, out);
}

bool ModelEvaluator::y_term(const HyperParams& theta, const Confounders& u, double& out) const {
  const ComponentParams& p = theta.y;
  if (family_ == KernelFamily::Linear) {
    Eigen::MatrixXd features(data_->n_instances(), u.cols() + data_->n_covariates() + 1);
    features << confounder_rows(u), data_->x, data_->t;
    Eigen::VectorXd w(features.cols());
    w << inverse_scaled(p.scale_sq, p.confounder_len), inverse_scaled(p.scale_sq, p.covariate_len),
        p.scale_sq / p.treatment_len;
    return lowrank_logpdf(data_->y, features, w, p.noise_sq, out);
  }
  return unit_logpdf(data_->y, (-exponent(p, u, true).array()).exp().matrix(), p.scale_sq, p.noise_sq, out);
}

Eigen::MatrixXd ModelEvaluator::treatment_covariance(const HyperParams& theta, const Confounders& u) const {
  const ComponentParams& p = theta.t;
  Eigen::MatrixXd cov;
  if (family_ == KernelFamily::Linear) {
    const Eigen::MatrixXd rows = confounder_rows(u);
    cov = p.scale_sq * (scaled_inner_product(rows, rows, p.confounder_len) +
                        scaled_inner_product(data_->x, data_->x, p.covariate_len));
  } else {
    cov = p.scale_sq * (-exponent(p, u, false).array()).exp();
  }
  cov.diagonal().array() += p.noise_sq;
  return cov;
}

double ModelEvaluator::confounder_prior(const Confounders& u, double var) const {
  const double n = static_cast<double>(u.size());
  return -0.5 * (n * (kLog2Pi + std::log(var)) + u.squaredNorm() / var);
}

double ModelEvaluator::theta_prior(const HyperParams& theta, const PriorSpec& priors) const {
  double acc = 0.0;
  for (const auto& slot : parameter_slots(theta.n_confounders(), theta.n_covariates())) {
    const InvGamma& g = priors.for_slot(slot);
    acc += inv_gamma_logpdf(param_value(theta, slot), g.shape, g.rate);
  }
  return acc;
}

DensityTerms ModelEvaluator::terms(const HyperParams& theta, const Confounders& u, const PriorSpec& priors,
                                   const Eigen::VectorXd* t_hat) const {
  const Dataset& d = *data_;
  if (u.rows() != d.n_objects()) throw Error(ErrorCode::ShapeMismatch, "confounder rows differ from N_O");
  theta.validate(static_cast<int>(u.cols()), static_cast<int>(d.n_covariates()));
  DensityTerms out;
  const Eigen::VectorXd& t_values = t_hat ? *t_hat : d.t;
  if (t_values.size() != d.n_instances()) throw Error(ErrorCode::ShapeMismatch, "logit length differs from N_I");
  if (!x_term(theta, u, out.x) || !t_term(theta, u, t_values, out.t) || !y_term(theta, u, out.y)) {
    throw Error(ErrorCode::NotPositiveDefinite, "kernel matrix could not be factorized");
  }
  if (t_hat) out.bernoulli = bernoulli_logit_loglik(d.t, *t_hat);
  out.confounder_prior = confounder_prior(u, theta.confounder_var);
  out.theta_prior = theta_prior(theta, priors);
  return out;
}

double joint_log_density(const Dataset& data, const Confounders& u, const HyperParams& theta,
                         const PriorSpec& priors, KernelFamily family) {
  return ModelEvaluator(data, family).terms(theta, u, priors).total();
}

double joint_log_density_binary(const Dataset& data, const Confounders& u, const Eigen::VectorXd& t_hat,
                                const HyperParams& theta, const PriorSpec& priors, KernelFamily family) {
  if (!data.has_binary_treatment()) throw Error(ErrorCode::NonBinaryTreatment, "treatments must be 0 or 1");
  return ModelEvaluator(data, family).terms(theta, u, priors, &t_hat).total();
}

}  // namespace gpslc
