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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpslc/error.hpp"
#include "gpslc/model.hpp"

namespace gpslc {

struct InferenceConfig {
  int n_outer = 5000;
  int n_mh = 3;
  int n_es = 5;
  double drift = 0.5;
  std::map<std::string, double> drift_overrides;  // keyed by slot_name()
  int burn_in = -1;                               // negative selects n_outer / 2
  int thin = 10;
  std::uint64_t seed = 0;

  int effective_burn_in() const { return burn_in < 0 ? n_outer / 2 : burn_in; }
  double drift_for(const ParamSlot& slot) const;
  // Throws InvalidConfig.
  void validate() const;
};

// Inverse-gamma random-walk proposal centred on the current value: shape
// theta^2/drift, rate theta*(shape - 1), so the proposal mean is theta.
struct IgProposal {
  double shape = 0.0;
  double rate = 0.0;
  bool fallback = false;  // drift was widened so that shape == 2
};

// Throws ShapeTooSmall when theta^2/drift <= 1 and allow_fallback is false.
IgProposal mh_propose_params(double theta, double drift, bool allow_fallback = true);

// log of the MH ratio including the Hastings correction
// IG(current; reverse proposal) / IG(proposed; forward proposal).
double mh_log_acceptance(double current, double proposed, double drift, double log_target_current,
                         double log_target_proposed);

struct MhOutcome {
  double value = 0.0;
  double log_target = 0.0;
  bool accepted = false;
};

// One scalar MH step. log_target may return -infinity to force rejection.
MhOutcome mh_step(double current, double log_target_current, double drift,
                  const std::function<double(double)>& log_target, Rng& rng);

Eigen::VectorXd ellipse_point(const Eigen::VectorXd& current, const Eigen::VectorXd& nu, double phi);

struct EssOutcome {
  Eigen::VectorXd value;
  double log_lik = 0.0;
  int shrinks = 0;
};

inline constexpr int kEssShrinkCap = 1000;

// Elliptical slice sampling step for a Gaussian-prior latent vector. nu is a
// draw from that prior; log_lik excludes the prior. Throws IterationCap.
EssOutcome ess_step(const Eigen::VectorXd& current, double log_lik_current, const Eigen::VectorXd& nu,
                    const std::function<double(const Eigen::VectorXd&)>& log_lik, Rng& rng,
                    int cap = kEssShrinkCap);

struct ChainState {
  HyperParams theta;
  Confounders u;
  Eigen::VectorXd t_hat;  // binary mode only
};

using PosteriorSample = ChainState;

std::string describe_state(const ChainState& state);

// Raised when a chain stops on a numerical failure; carries the last state.
class SamplerError : public Error {
 public:
  SamplerError(const Error& cause, ChainState state, int iteration)
      : Error(cause.code(), "iteration " + std::to_string(iteration) + ": " + cause.what()),
        state_(std::move(state)),
        iteration_(iteration) {}

  const ChainState& state() const { return state_; }
  int iteration() const { return iteration_; }

 private:
  ChainState state_;
  int iteration_;
};

struct AcceptanceStats {
  std::vector<std::string> names;
  std::vector<long> accepted;
  std::vector<long> proposed;

  double rate(std::size_t i) const {
    return proposed[i] == 0 ? 0.0 : static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]);
  }
};

// Single MCMC chain over (Theta, U[, T_hat]). Not thread-safe; independent
// chains may share the same Dataset, which must outlive the chain.
class Chain {
 public:
  using Progress = std::function<void(int iteration, const Chain& chain)>;

  Chain(const Dataset& data, const PriorSpec& priors, const ModelSpec& spec, const InferenceConfig& cfg);
  Chain(const Dataset& data, const PriorSpec& priors, const ModelSpec& spec, const InferenceConfig& cfg,
        ChainState initial);

  // Random-walk MH over every hyperparameter, n_mh rounds.
  void mh_update();
  // n_es sweeps of column-wise elliptical slice sampling over U.
  void ess_update();
  // Elliptical slice update of the treatment logits (binary mode).
  void logit_update();
  void sweep();

  // Runs n_outer sweeps and returns the retained post-burn-in states.
  std::vector<PosteriorSample> run(const Progress& progress = {}, int progress_every = 0);

  const ChainState& state() const { return state_; }
  const DensityTerms& terms() const { return terms_; }
  // Recomputes cached kernel pieces and density terms from the current state.
  void refresh();
  const AcceptanceStats& acceptance() const { return acceptance_; }
  double log_density() const { return terms_.total(); }

 private:
  void init_terms();
  double x_total() const;
  // RBF treatment/outcome kernels are kept as exponent matrices and updated
  // incrementally between full rebuilds.
  struct DenseCache {
    Eigen::MatrixXd exponent;
    Eigen::MatrixXd unit;  // exp(-exponent)
    void set(Eigen::MatrixXd e);
  };
  bool dense() const { return evaluator_.family() == KernelFamily::ArdRbf; }
  const Eigen::VectorXd& treatment_values() const;
  const Eigen::MatrixXd* slot_distance(const ParamSlot& slot) const;
  void rebuild_cache();

  const Dataset* data_;
  PriorSpec priors_;
  ModelSpec spec_;
  InferenceConfig cfg_;
  ModelEvaluator evaluator_;
  Rng rng_;
  ChainState state_;
  std::vector<ParamSlot> slots_;
  std::vector<double> x_terms_;
  std::vector<Eigen::MatrixXd> u_sqdist_;
  DenseCache t_cache_;
  DenseCache y_cache_;
  DensityTerms terms_;
  AcceptanceStats acceptance_;
};

std::vector<PosteriorSample> run_chain(const Dataset& data, const PriorSpec& priors, const ModelSpec& spec,
                                       const InferenceConfig& cfg);

}  // namespace gpslc
