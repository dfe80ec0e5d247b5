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

#include "gpslc/inference.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace gpslc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double InferenceConfig::drift_for(const ParamSlot& slot) const {
  const auto it = drift_overrides.find(slot_name(slot));
  return it == drift_overrides.end() ? drift : it->second;
}

void InferenceConfig::validate() const {
  if (n_outer < 1 || n_mh < 1 || n_es < 1 || thin < 1) {
    throw Error(ErrorCode::InvalidConfig, "n_outer, n_mh, n_es and thin must be positive");
  }
  if (!(drift > 0.0)) throw Error(ErrorCode::InvalidConfig, "drift must be positive");
  for (const auto& [name, d] : drift_overrides) {
    if (!(d > 0.0)) throw Error(ErrorCode::InvalidConfig, "drift for " + name + " must be positive");
  }
  if (effective_burn_in() >= n_outer) throw Error(ErrorCode::InvalidConfig, "burn_in must be < n_outer");
}

IgProposal mh_propose_params(double theta, double drift, bool allow_fallback) {
  if (!(theta > 0.0) || !(drift > 0.0)) {
    throw Error(ErrorCode::NonPositiveInput, "proposal needs theta > 0 and drift > 0");
  }
  IgProposal p;
  p.shape = theta * theta / drift;
  if (!(p.shape > 1.0)) {
    if (!allow_fallback) throw Error(ErrorCode::ShapeTooSmall, "theta^2/drift <= 1 leaves the proposal mean undefined");
    // drift * theta^2 / (2 drift) = theta^2 / 2, giving shape 2.
    p.shape = 2.0;
    p.fallback = true;
  }
  p.rate = theta * (p.shape - 1.0);
  return p;
}

double mh_log_acceptance(double current, double proposed, double drift, double log_target_current,
                         double log_target_proposed) {
  const IgProposal forward = mh_propose_params(current, drift);
  const IgProposal reverse = mh_propose_params(proposed, drift);
  return (log_target_proposed - log_target_current) + inv_gamma_logpdf(current, reverse.shape, reverse.rate) -
         inv_gamma_logpdf(proposed, forward.shape, forward.rate);
}

MhOutcome mh_step(double current, double log_target_current, double drift,
                  const std::function<double(double)>& log_target, Rng& rng) {
  const IgProposal forward = mh_propose_params(current, drift);
  const double proposed = sample_inv_gamma(forward.shape, forward.rate, rng);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double log_eta = std::log(uniform(rng));
  if (!(proposed > 0.0) || !std::isfinite(proposed)) return {current, log_target_current, false};
  const double target = log_target(proposed);
  if (!std::isfinite(target)) return {current, log_target_current, false};
  const double log_a = mh_log_acceptance(current, proposed, drift, log_target_current, target);
  if (log_eta < log_a) return {proposed, target, true};
  return {current, log_target_current, false};
}

Eigen::VectorXd ellipse_point(const Eigen::VectorXd& current, const Eigen::VectorXd& nu, double phi) {
  return current * std::cos(phi) + nu * std::sin(phi);
}

EssOutcome ess_step(const Eigen::VectorXd& current, double log_lik_current, const Eigen::VectorXd& nu,
                    const std::function<double(const Eigen::VectorXd&)>& log_lik, Rng& rng, int cap) {
  if (nu.size() != current.size()) throw Error(ErrorCode::ShapeMismatch, "ess: auxiliary draw has wrong length");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double log_height = log_lik_current + std::log(uniform(rng));
  double phi = uniform(rng) * 2.0 * std::numbers::pi;
  double lo = phi - 2.0 * std::numbers::pi;
  double hi = phi;
  for (int shrinks = 0;; ++shrinks) {
    Eigen::VectorXd proposal = ellipse_point(current, nu, phi);
    const double ll = log_lik(proposal);
    if (ll > log_height) return {std::move(proposal), ll, shrinks};
    if (shrinks + 1 >= cap) throw Error(ErrorCode::IterationCap, "elliptical slice sampler exceeded shrink cap");
    if (phi < 0.0) {
      lo = phi;
    } else {
      hi = phi;
    }
    phi = lo + (hi - lo) * uniform(rng);
  }
}

std::string describe_state(const ChainState& state) {
  std::ostringstream out;
  out.precision(17);
  const HyperParams& theta = state.theta;
  for (const auto& slot : parameter_slots(theta.n_confounders(), theta.n_covariates())) {
    out << slot_name(slot) << " = " << param_value(theta, slot) << "\n";
  }
  out << "confounder_var = " << theta.confounder_var << "\n";
  for (Eigen::Index o = 0; o < state.u.rows(); ++o) {
    out << "u[" << o << "] =";
    for (Eigen::Index j = 0; j < state.u.cols(); ++j) out << " " << state.u(o, j);
    out << "\n";
  }
  if (state.t_hat.size() > 0) {
    out << "t_hat =";
    for (const double v : state.t_hat) out << " " << v;
    out << "\n";
  }
  return out.str();
}

Chain::Chain(const Dataset& data, const PriorSpec& priors, const ModelSpec& spec, const InferenceConfig& cfg)
    : data_(&data), priors_(priors), spec_(spec), cfg_(cfg), evaluator_(data, spec.family), rng_(cfg.seed) {
  cfg_.validate();
  priors_.validate();
  if (spec_.n_confounders < 0) throw Error(ErrorCode::InvalidConfig, "n_confounders must be >= 0");
  auto [theta, u] = prior_sample(priors_, static_cast<int>(data.n_objects()), spec_.n_confounders,
                                 static_cast<int>(data.n_covariates()), rng_);
  state_.theta = std::move(theta);
  state_.u = std::move(u);
  if (spec_.mode == TreatmentMode::Binary) state_.t_hat = Eigen::VectorXd::Zero(data.n_instances());
  init_terms();
}

Chain::Chain(const Dataset& data, const PriorSpec& priors, const ModelSpec& spec, const InferenceConfig& cfg,
             ChainState initial)
    : data_(&data), priors_(priors), spec_(spec), cfg_(cfg), evaluator_(data, spec.family), rng_(cfg.seed),
      state_(std::move(initial)) {
  cfg_.validate();
  priors_.validate();
  if (state_.u.cols() != spec_.n_confounders) {
    throw Error(ErrorCode::ShapeMismatch, "initial confounders have the wrong width");
  }
  if (spec_.mode == TreatmentMode::Binary && state_.t_hat.size() != data.n_instances()) {
    state_.t_hat = Eigen::VectorXd::Zero(data.n_instances());
  }
  init_terms();
}

void Chain::init_terms() {
  if (spec_.mode == TreatmentMode::Binary && !data_->has_binary_treatment()) {
    throw Error(ErrorCode::NonBinaryTreatment, "binary mode requires treatments in {0, 1}");
  }
  slots_ = parameter_slots(spec_.n_confounders, static_cast<int>(data_->n_covariates()));
  acceptance_.names.clear();
  for (const auto& slot : slots_) acceptance_.names.push_back(slot_name(slot));
  acceptance_.accepted.assign(slots_.size(), 0);
  acceptance_.proposed.assign(slots_.size(), 0);
  refresh();
}

double Chain::x_total() const {
  double acc = 0.0;
  for (const double v : x_terms_) acc += v;
  return acc;
}

void Chain::DenseCache::set(Eigen::MatrixXd e) {
  exponent = std::move(e);
  unit = (-exponent.array()).exp();
}

const Eigen::VectorXd& Chain::treatment_values() const {
  return spec_.mode == TreatmentMode::Binary ? state_.t_hat : data_->t;
}

const Eigen::MatrixXd* Chain::slot_distance(const ParamSlot& slot) const {
  switch (slot.field) {
    case ParamField::ConfounderLen: return &u_sqdist_[static_cast<std::size_t>(slot.index)];
    case ParamField::CovariateLen: return &evaluator_.covariate_sqdist(slot.index);
    case ParamField::TreatmentLen: return &evaluator_.treatment_sqdist();
    default: return nullptr;
  }
}

void Chain::rebuild_cache() {
  if (!dense()) return;
  u_sqdist_.clear();
  for (Eigen::Index j = 0; j < state_.u.cols(); ++j) {
    u_sqdist_.push_back(evaluator_.confounder_sqdist(state_.u.col(j)));
  }
  t_cache_.set(evaluator_.exponent(state_.theta.t, state_.u, false));
  y_cache_.set(evaluator_.exponent(state_.theta.y, state_.u, true));
}

void Chain::refresh() {
  const bool binary = spec_.mode == TreatmentMode::Binary;
  terms_ = evaluator_.terms(state_.theta, state_.u, priors_, binary ? &state_.t_hat : nullptr);
  x_terms_.assign(static_cast<std::size_t>(data_->n_covariates()), 0.0);
  for (std::size_t k = 0; k < x_terms_.size(); ++k) {
    evaluator_.x_term_dim(state_.theta, state_.u, static_cast<int>(k), x_terms_[k]);
  }
  terms_.x = x_total();
  rebuild_cache();
}

void Chain::mh_update() {
  HyperParams& theta = state_.theta;
  const Eigen::VectorXd& t_values = treatment_values();
  DenseCache trial;
  for (int round = 0; round < cfg_.n_mh; ++round) {
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      const ParamSlot& slot = slots_[s];
      const InvGamma& prior = priors_.for_slot(slot);
      double& component = slot.component == Component::X   ? x_terms_[static_cast<std::size_t>(slot.x_dim)]
                          : slot.component == Component::T ? terms_.t
                                                           : terms_.y;
      double& value = param_ref(theta, slot);
      const double current = value;
      const double current_prior = inv_gamma_logpdf(current, prior.shape, prior.rate);
      const bool cached = dense() && slot.component != Component::X;
      DenseCache* cache = slot.component == Component::T ? &t_cache_ : &y_cache_;
      const Eigen::MatrixXd* distance = cached ? slot_distance(slot) : nullptr;
      double proposed_component = 0.0;
      auto log_target = [&](double candidate) {
        value = candidate;
        bool ok = false;
        if (cached) {
          const ComponentParams& p = slot.component == Component::T ? theta.t : theta.y;
          const Eigen::VectorXd& values = slot.component == Component::T ? t_values : data_->y;
          const Eigen::MatrixXd* unit = &cache->unit;
          if (distance) {
            trial.set(cache->exponent + (1.0 / candidate - 1.0 / current) * *distance);
            unit = &trial.unit;
          }
          ok = ModelEvaluator::unit_logpdf(values, *unit, p.scale_sq, p.noise_sq, proposed_component);
        } else {
          switch (slot.component) {
            case Component::X: ok = evaluator_.x_term_dim(theta, state_.u, slot.x_dim, proposed_component); break;
            case Component::T: ok = evaluator_.t_term(theta, state_.u, t_values, proposed_component); break;
            case Component::Y: ok = evaluator_.y_term(theta, state_.u, proposed_component); break;
          }
        }
        value = current;
        if (!ok) return kNegInf;
        return proposed_component + inv_gamma_logpdf(candidate, prior.shape, prior.rate);
      };
      const MhOutcome outcome =
          mh_step(current, component + current_prior, cfg_.drift_for(slot), log_target, rng_);
      ++acceptance_.proposed[s];
      if (outcome.accepted) {
        ++acceptance_.accepted[s];
        value = outcome.value;
        component = proposed_component;
        terms_.theta_prior += inv_gamma_logpdf(outcome.value, prior.shape, prior.rate) - current_prior;
        if (distance) std::swap(*cache, trial);
      }
    }
  }
  terms_.x = x_total();
}

void Chain::ess_update() {
  const Eigen::Index n_u = state_.u.cols();
  if (n_u == 0) return;
  const HyperParams& theta = state_.theta;
  const Eigen::VectorXd& t_values = treatment_values();
  const double prior_sd = std::sqrt(theta.confounder_var);
  std::vector<double> x_terms(x_terms_.size());
  double t_term = 0.0;
  double y_term = 0.0;
  Eigen::MatrixXd sqdist;
  DenseCache t_trial;
  DenseCache y_trial;
  for (int sweep = 0; sweep < cfg_.n_es; ++sweep) {
    for (Eigen::Index k = 0; k < n_u; ++k) {
      const auto col = static_cast<std::size_t>(k);
      const Eigen::VectorXd current = state_.u.col(k);
      const Eigen::VectorXd nu = prior_sd * standard_normal_vector(current.size(), rng_);
      Confounders trial = state_.u;
      auto log_lik = [&](const Eigen::VectorXd& column) {
        trial.col(k) = column;
        double total = 0.0;
        for (std::size_t d = 0; d < x_terms.size(); ++d) {
          if (!evaluator_.x_term_dim(theta, trial, static_cast<int>(d), x_terms[d])) return kNegInf;
          total += x_terms[d];
        }
        if (dense()) {
          sqdist = evaluator_.confounder_sqdist(column);
          const Eigen::MatrixXd delta = sqdist - u_sqdist_[col];
          t_trial.set(t_cache_.exponent + (1.0 / theta.t.confounder_len[k]) * delta);
          if (!ModelEvaluator::unit_logpdf(t_values, t_trial.unit, theta.t.scale_sq, theta.t.noise_sq, t_term)) {
            return kNegInf;
          }
          y_trial.set(y_cache_.exponent + (1.0 / theta.y.confounder_len[k]) * delta);
          if (!ModelEvaluator::unit_logpdf(data_->y, y_trial.unit, theta.y.scale_sq, theta.y.noise_sq, y_term)) {
            return kNegInf;
          }
        } else {
          if (!evaluator_.t_term(theta, trial, t_values, t_term)) return kNegInf;
          if (!evaluator_.y_term(theta, trial, y_term)) return kNegInf;
        }
        return total + t_term + y_term;
      };
      const double current_lik = x_total() + terms_.t + terms_.y;
      const EssOutcome outcome = ess_step(current, current_lik, nu, log_lik, rng_);
      state_.u.col(k) = outcome.value;
      x_terms_ = x_terms;
      terms_.t = t_term;
      terms_.y = y_term;
      if (dense()) {
        std::swap(u_sqdist_[col], sqdist);
        std::swap(t_cache_, t_trial);
        std::swap(y_cache_, y_trial);
      }
    }
  }
  terms_.x = x_total();
  terms_.confounder_prior = evaluator_.confounder_prior(state_.u, theta.confounder_var);
}

void Chain::logit_update() {
  if (spec_.mode != TreatmentMode::Binary) return;
  Eigen::MatrixXd cov;
  if (dense()) {
    cov = state_.theta.t.scale_sq * t_cache_.unit;
    cov.diagonal().array() += state_.theta.t.noise_sq;
  } else {
    cov = evaluator_.treatment_covariance(state_.theta, state_.u);
  }
  CholeskyFactor factor;
  if (!try_cholesky_symmetric(cov, factor)) {
    throw Error(ErrorCode::NotPositiveDefinite, "treatment kernel could not be factorized");
  }
  const Eigen::VectorXd nu = factor.lower.triangularView<Eigen::Lower>() *
                             standard_normal_vector(data_->n_instances(), rng_);
  auto log_lik = [&](const Eigen::VectorXd& logits) { return bernoulli_logit_loglik(data_->t, logits); };
  const EssOutcome outcome = ess_step(state_.t_hat, terms_.bernoulli, nu, log_lik, rng_);
  state_.t_hat = outcome.value;
  terms_.bernoulli = outcome.log_lik;
  terms_.t = mvn_logpdf_zero_mean(state_.t_hat, factor);
}

void Chain::sweep() {
  rebuild_cache();
  mh_update();
  ess_update();
  logit_update();
}

std::vector<PosteriorSample> Chain::run(const Progress& progress, int progress_every) {
  std::vector<PosteriorSample> retained;
  const int burn_in = cfg_.effective_burn_in();
  for (int iteration = 1; iteration <= cfg_.n_outer; ++iteration) {
    try {
      sweep();
    } catch (const Error& e) {
      throw SamplerError(e, state_, iteration);
    }
    if (iteration > burn_in && (iteration - burn_in) % cfg_.thin == 0) retained.push_back(state_);
    if (progress && progress_every > 0 && iteration % progress_every == 0) progress(iteration, *this);
  }
  return retained;
}

std::vector<PosteriorSample> run_chain(const Dataset& data, const PriorSpec& priors, const ModelSpec& spec,
                                       const InferenceConfig& cfg) {
  Chain chain(data, priors, spec, cfg);
  return chain.run();
}

}  // namespace gpslc
