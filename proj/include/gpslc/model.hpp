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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpslc/gaussian.hpp"
#include "gpslc/kernels.hpp"

namespace gpslc {

enum class TreatmentMode { Continuous, Binary };

struct ModelSpec {
  int n_confounders = 3;
  KernelFamily family = KernelFamily::ArdRbf;
  TreatmentMode mode = TreatmentMode::Continuous;
};

// Instance-level observations grouped under objects.
struct Dataset {
  Eigen::MatrixXd x;  // N_I x N_X
  Eigen::VectorXd t;
  Eigen::VectorXd y;
  std::vector<int> parent;  // object index of each instance
  std::vector<std::string> object_ids;

  Eigen::Index n_instances() const { return t.size(); }
  Eigen::Index n_objects() const { return static_cast<Eigen::Index>(object_ids.size()); }
  Eigen::Index n_covariates() const { return x.cols(); }

  // Throws ShapeMismatch on inconsistent sizes, dangling or unused objects, or
  // non-finite values.
  void validate() const;
  bool has_binary_treatment() const;
  std::vector<int> object_sizes() const;
};

// N_O x N_U latent confounders, one row per object.
using Confounders = Eigen::MatrixXd;

struct ComponentParams {
  double scale_sq = 1.0;
  double noise_sq = 1.0;
  Eigen::VectorXd confounder_len;
  Eigen::VectorXd covariate_len;
  double treatment_len = 1.0;  // only read by the outcome component
};

// Kernel hyperparameters of every likelihood component. confounder_var is the
// prior variance of U and is held fixed during inference.
struct HyperParams {
  std::vector<ComponentParams> x;  // one per covariate dimension
  ComponentParams t;
  ComponentParams y;
  double confounder_var = 1.0;

  static HyperParams constant(int n_confounders, int n_covariates, double value);
  int n_confounders() const { return static_cast<int>(t.confounder_len.size()); }
  int n_covariates() const { return static_cast<int>(x.size()); }
  void validate(int n_confounders, int n_covariates) const;
};

Kernel covariate_kernel(const HyperParams& theta, int dim, KernelFamily family);
Kernel treatment_kernel(const HyperParams& theta, KernelFamily family);
Kernel outcome_kernel(const HyperParams& theta, KernelFamily family);

enum class Component { X, T, Y };
enum class ParamField { Scale, Noise, ConfounderLen, CovariateLen, TreatmentLen };

// Addresses one scalar hyperparameter.
struct ParamSlot {
  Component component = Component::Y;
  int x_dim = 0;
  ParamField field = ParamField::Scale;
  int index = 0;
};

// Fixed update order: covariate components, then treatment, then outcome.
std::vector<ParamSlot> parameter_slots(int n_confounders, int n_covariates);
double& param_ref(HyperParams& theta, const ParamSlot& slot);
double param_value(const HyperParams& theta, const ParamSlot& slot);
std::string slot_name(const ParamSlot& slot);

struct InvGamma {
  double shape = 4.0;
  double rate = 4.0;
};

struct PriorSpec {
  InvGamma fallback;
  std::map<std::string, InvGamma> overrides;  // keyed by slot_name()

  const InvGamma& for_slot(const ParamSlot& slot) const;
  void validate() const;
};

double inv_gamma_logpdf(double x, double alpha, double beta);
double sample_inv_gamma(double alpha, double beta, Rng& rng);

std::pair<HyperParams, Confounders> prior_sample(const PriorSpec& priors, int n_objects, int n_confounders,
                                                 int n_covariates, Rng& rng, double confounder_var = 1.0);

double bernoulli_logit_loglik(const Eigen::VectorXd& t, const Eigen::VectorXd& logits);

struct DensityTerms {
  double x = 0.0;
  double t = 0.0;
  double y = 0.0;
  double bernoulli = 0.0;
  double confounder_prior = 0.0;
  double theta_prior = 0.0;

  // Terms that depend on U other than its own prior.
  double confounder_likelihood() const { return x + t + y; }
  double total() const { return x + t + y + bernoulli + confounder_prior + theta_prior; }
};

// Evaluates the per-component log likelihoods for one dataset. Pairwise
// distance matrices of the observed inputs are computed once at construction.
// Component evaluators return false when a kernel matrix cannot be factorized.
class ModelEvaluator {
 public:
  ModelEvaluator(const Dataset& data, KernelFamily family);

  const Dataset& data() const { return *data_; }
  KernelFamily family() const { return family_; }

  bool x_term(const HyperParams& theta, const Confounders& u, double& out) const;
  bool x_term_dim(const HyperParams& theta, const Confounders& u, int dim, double& out) const;
  bool t_term(const HyperParams& theta, const Confounders& u, const Eigen::VectorXd& t_values, double& out) const;
  bool y_term(const HyperParams& theta, const Confounders& u, double& out) const;
  double confounder_prior(const Confounders& u, double var) const;
  double theta_prior(const HyperParams& theta, const PriorSpec& priors) const;

  // K_t including the noise diagonal.
  Eigen::MatrixXd treatment_covariance(const HyperParams& theta, const Confounders& u) const;

  // Pieces of the RBF treatment and outcome kernels, exposed for incremental
  // updates: K = scale * exp(-exponent) + noise * I.
  Eigen::MatrixXd confounder_sqdist(const Eigen::VectorXd& column) const;
  Eigen::MatrixXd exponent(const ComponentParams& p, const Confounders& u, bool with_treatment) const;
  const Eigen::MatrixXd& covariate_sqdist(int dim) const { return covariate_sqdist_.at(static_cast<std::size_t>(dim)); }
  const Eigen::MatrixXd& treatment_sqdist() const { return treatment_sqdist_; }
  static bool unit_logpdf(const Eigen::VectorXd& x, const Eigen::MatrixXd& unit, double scale, double noise,
                          double& out);

  // Throws NotPositiveDefinite if a component cannot be evaluated.
  DensityTerms terms(const HyperParams& theta, const Confounders& u, const PriorSpec& priors,
                     const Eigen::VectorXd* t_hat = nullptr) const;

 private:
  Eigen::MatrixXd gathered(const Eigen::MatrixXd& object_level) const;
  Eigen::MatrixXd confounder_rows(const Confounders& u) const;

  const Dataset* data_;
  KernelFamily family_;
  std::vector<Eigen::MatrixXd> covariate_sqdist_;
  Eigen::MatrixXd treatment_sqdist_;
};

double joint_log_density(const Dataset& data, const Confounders& u, const HyperParams& theta,
                         const PriorSpec& priors, KernelFamily family = KernelFamily::ArdRbf);

// Binary treatments: the treatment component scores the latent logits t_hat
// under K_t and adds the Bernoulli(expit(t_hat)) likelihood of the observed T.
double joint_log_density_binary(const Dataset& data, const Confounders& u, const Eigen::VectorXd& t_hat,
                                const HyperParams& theta, const PriorSpec& priors,
                                KernelFamily family = KernelFamily::ArdRbf);

}  // namespace gpslc
