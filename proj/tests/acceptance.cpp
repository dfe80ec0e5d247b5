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

// Acceptance harness: prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gpslc/bench.hpp"
#include "gpslc/counterfactual.hpp"
#include "gpslc/gaussian.hpp"
#include "gpslc/inference.hpp"
#include "gpslc/kernels.hpp"
#include "gpslc/model.hpp"
#include "gpslc/pipeline.hpp"
#include "ite_oracle.hpp"
#include "oracle.hpp"
#include "sampler_checks.hpp"

using namespace gpslc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Closed-form ITE: zero at W_* = W, and agreement with the joint-conditioning path.
Outcome closed_form() {
  double worst_zero = 0.0;
  double worst_path = 0.0;
  double worst_direct = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto family = s % 2 == 0 ? KernelFamily::ArdRbf : KernelFamily::Linear;
    const int objects = 2 + static_cast<int>(s % 4);
    const int per = 1 + static_cast<int>(s % 3);
    const int n_x = static_cast<int>(s % 3);
    const int n_u = 1 + static_cast<int>((s / 2) % 3);
    const Dataset d = oracle::random_dataset(objects, per, n_x, 1000 + s);
    const Confounders u = oracle::random_matrix(objects, n_u, 2000 + s);
    const HyperParams theta = oracle::random_theta(n_u, n_x, 3000 + s);
    const GaussianDist zero = ite_conditional(d, u, theta, d.t, family);
    worst_zero = std::max({worst_zero, max_abs(zero.mean), max_abs(zero.cov.entries())});
    const Eigen::VectorXd t_star = oracle::random_matrix(d.n_instances(), 1, 4000 + s);
    const GaussianDist got = ite_conditional(d, u, theta, t_star, family);
    const GaussianDist path = oracle::two_path_ite(d, u, theta, t_star, family);
    const GaussianDist direct = oracle::direct_ite(d, u, theta, t_star, family);
    worst_path = std::max({worst_path, max_abs(got.mean - path.mean), max_abs(got.cov.entries() - path.cov.entries())});
    worst_direct =
        std::max({worst_direct, max_abs(got.mean - direct.mean), max_abs(got.cov.entries() - direct.cov.entries())});
  }
  return {worst_zero <= 1e-8 && worst_path <= 1e-8 && worst_direct <= 1e-8,
          "zero " + fmt("%.2e", worst_zero) + ", two-path " + fmt("%.2e", worst_path) + ", dense " +
              fmt("%.2e", worst_direct)};
}

Outcome sampler_validity() {
  std::ostringstream detail;
  const std::vector<double> xs = checks::mh_inverse_gamma(4.0, 4.0, 100000, 0.5, 1);
  const checks::MomentResult m = checks::moments(xs);
  const bool mh_ok = std::abs(m.mean - 4.0 / 3.0) < 3.0 * m.mean_se && std::abs(m.var - 16.0 / 18.0) < 3.0 * m.var_se;
  detail << "mh mean " << fmt("%.4f", m.mean) << " var " << fmt("%.4f", m.var);

  const double sd = std::sqrt(0.5);
  const double p = oracle::ks_normal_pvalue(checks::ess_prior(4, sd, 10000, 5, 2), sd);
  const bool ks_ok = p > 0.01;
  detail << ", ks p " << fmt("%.3f", p);

  const checks::ConjugateProblem prob = checks::conjugate_problem(3);
  const std::vector<Eigen::VectorXd> draws = checks::ess_conjugate(prob, 100000, 4);
  const Eigen::VectorXd mean = prob.posterior_mean();
  const Eigen::VectorXd var = prob.posterior_var();
  bool conj_ok = true;
  double worst = 0.0;
  for (int o = 0; o < prob.n_objects; ++o) {
    std::vector<double> col;
    col.reserve(draws.size());
    for (const auto& dr : draws) col.push_back(dr[o]);
    const checks::MomentResult c = checks::moments(col);
    const double zm = std::abs(c.mean - mean[o]) / c.mean_se;
    const double zv = std::abs(c.var - var[o]) / c.var_se;
    worst = std::max({worst, zm, zv});
    conj_ok = conj_ok && zm < 3.0 && zv < 3.0;
  }
  detail << ", conjugate max z " << fmt("%.2f", worst);
  return {mh_ok && ks_ok && conj_ok, detail.str()};
}

// Posterior of the treatment slope implied by a linear-kernel fit.
std::pair<double, double> implied_slope(const Dataset& d, const std::vector<PosteriorSample>& samples) {
  const Eigen::VectorXd shifted = (d.t.array() + 1.0).matrix();
  std::vector<double> means;
  double within = 0.0;
  for (const auto& s : samples) {
    const GaussianDist ite = ite_conditional(d, s.u, s.theta, shifted, KernelFamily::Linear);
    means.push_back(ite.mean.mean());
    within += ite.cov.entries()(0, 0);
  }
  const double n = static_cast<double>(means.size());
  const double mu = std::accumulate(means.begin(), means.end(), 0.0) / n;
  double between = 0.0;
  for (const double v : means) between += (v - mu) * (v - mu);
  return {mu, std::sqrt(within / n + between / n)};
}

Outcome concentration() {
  std::ostringstream detail;
  bool all = true;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::vector<double> sds;
    double last_mean = 0.0;
    for (const int n : {10, 50, 250}) {
      SyntheticSpec spec;
      spec.form = SyntheticForm::Linear;
      spec.n_objects = n;
      spec.instances_per_object = 2;
      spec.linear.beta = 1.5;
      spec.seed = 100 * seed + static_cast<std::uint64_t>(n);
      const Dataset d = generate_linear(spec).data;
      ModelSpec model;
      model.n_confounders = 1;
      model.family = KernelFamily::Linear;
      InferenceConfig cfg;
      cfg.n_outer = 1000;
      cfg.thin = 10;
      cfg.seed = seed;
      const auto samples = run_chain(d, PriorSpec{}, model, cfg);
      const auto [mu, sd] = implied_slope(d, samples);
      sds.push_back(sd);
      last_mean = mu;
      detail << (detail.tellp() > 0 ? " " : "") << "s" << seed << "n" << n << "=" << fmt("%.3f", mu) << "+-"
             << fmt("%.3f", sd);
    }
    const bool ok = sds[0] > sds[1] && sds[1] > sds[2] && std::abs(last_mean - 1.5) <= 3.0 * sds[2];
    all = all && ok;
  }
  return {all, detail.str()};
}

Outcome ignorance() {
  SyntheticSpec spec;
  spec.form = SyntheticForm::Linear;
  spec.n_objects = 200;
  spec.instances_per_object = 1;
  spec.seed = 5;
  const Dataset d = generate_linear(spec).data;
  const LinearParams q = ignorance_pair(spec.linear, spec.linear.beta + 0.5);
  const double a = linear_propositional_log_density(spec.linear, d.t, d.y);
  const double b = linear_propositional_log_density(q, d.t, d.y);
  const double gap = std::abs(a - b);
  return {gap <= 1e-8 && std::abs(q.beta - spec.linear.beta - 0.5) < 1e-12,
          "beta " + fmt("%.2f", spec.linear.beta) + " -> " + fmt("%.2f", q.beta) + ", |dlogp| " + fmt("%.2e", gap)};
}

// Runs seeds until k of n have passed or can no longer pass.
Outcome k_of_n(int k, int n, const std::function<bool(int, std::string&)>& trial) {
  int passed = 0;
  int failed = 0;
  std::ostringstream detail;
  for (int s = 0; s < n && passed < k && failed <= n - k; ++s) {
    std::string line;
    const bool ok = trial(s, line);
    (ok ? passed : failed) += 1;
    detail << (s > 0 ? "; " : "") << "seed " << s << (ok ? " ok " : " no ") << line;
    std::cerr << "  seed " << s << (ok ? " ok " : " no ") << line << std::endl;
  }
  return {passed >= k, std::to_string(passed) + " passed: " + detail.str()};
}

EffectEstimate fit(ModelKind kind, const Dataset& d, const InterventionGrid& grid, int n_outer, std::uint64_t seed) {
  FitOptions opt;
  opt.kind = kind;
  opt.cfg.n_outer = n_outer;
  opt.cfg.seed = seed;
  return fit_and_estimate(d, grid, opt).estimate;
}

Outcome table_ordering() {
  return k_of_n(4, 5, [](int s, std::string& line) {
    SyntheticSpec spec;
    spec.seed = 50 + static_cast<std::uint64_t>(s);
    const SyntheticOutput gen = generate_synthetic(spec);
    const InterventionGrid grid{gen.truth.grid};
    const auto seed = static_cast<std::uint64_t>(s);
    const double slc = pehe(fit(ModelKind::GpSlc, gen.data, grid, 1000, seed), gen.truth);
    const double noconf = pehe(fit(ModelKind::GpNoConf, gen.data, grid, 1000, seed), gen.truth);
    const double noobj = pehe(fit(ModelKind::GpNoObj, gen.data, grid, 1000, seed), gen.truth);
    const double mlm1 = pehe(fit(ModelKind::Mlm1, gen.data, grid, 1000, seed), gen.truth);
    const double perobj = pehe(fit(ModelKind::GpPerObj, gen.data, grid, 1000, seed), gen.truth);
    line = "slc " + fmt("%.3f", slc) + " noconf " + fmt("%.3f", noconf) + " noobj " + fmt("%.3f", noobj) + " mlm1 " +
           fmt("%.3f", mlm1) + " perobj " + fmt("%.3f", perobj);
    return 2.0 * slc <= noconf && 2.0 * slc <= noobj && slc <= 2.0 * std::min(mlm1, perobj);
  });
}

Outcome resampling_robustness() {
  return k_of_n(4, 5, [](int s, std::string& line) {
    NeecSpec pools_spec;
    pools_spec.seed = 70 + static_cast<std::uint64_t>(s);
    const Dataset pools = generate_neec_pools(pools_spec);
    const auto seed = static_cast<std::uint64_t>(s);
    double slc[2];
    double noconf[2];
    const double biases[2] = {0.0, 9.0};
    for (int b = 0; b < 2; ++b) {
      ResampleSpec rs;
      rs.shifts = pools_spec.shifts;
      rs.bias = biases[b];
      rs.seed = 80 + seed;
      const Dataset d = biased_resample(pools, rs).data;
      const InterventionGrid grid = intervention_grid_default(d, GridKind::Neec);
      const GroundTruth truth = with_sate(neec_truth(d, pools_spec.shifts, grid));
      slc[b] = sate_mse(fit(ModelKind::GpSlc, d, grid, 600, seed), truth);
      noconf[b] = sate_mse(fit(ModelKind::GpNoConf, d, grid, 600, seed), truth);
    }
    line = "slc " + fmt("%.3f", slc[0]) + "->" + fmt("%.3f", slc[1]) + " noconf " + fmt("%.3f", noconf[0]) + "->" +
           fmt("%.3f", noconf[1]);
    return slc[1] < 1.5 * slc[0] && noconf[1] >= 3.0 * noconf[0];
  });
}

Dataset permuted(const Dataset& d, const std::vector<int>& perm) {
  Dataset out = d;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(perm[i]);
    const auto dst = static_cast<Eigen::Index>(i);
    out.x.row(dst) = d.x.row(src);
    out.t[dst] = d.t[src];
    out.y[dst] = d.y[src];
    out.parent[i] = d.parent[static_cast<std::size_t>(perm[i])];
  }
  return out;
}

double normalization_1d() {
  const GaussianDist dist(Eigen::VectorXd::Constant(1, -0.4), Eigen::MatrixXd::Constant(1, 1, 1.3));
  const int n = 4001;
  const double lo = -12.0;
  const double h = 24.0 / (n - 1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += ((i == 0 || i == n - 1) ? 0.5 : 1.0) * std::exp(mvn_logpdf(Eigen::VectorXd::Constant(1, lo + i * h), dist));
  }
  return acc * h;
}

double normalization_2d() {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, -0.5, -0.5, 1.5;
  const GaussianDist dist(Eigen::Vector2d(0.2, -0.1), cov);
  const int n = 401;
  const double lo = -9.0;
  const double h = 18.0 / (n - 1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = ((i == 0 || i == n - 1) ? 0.5 : 1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
      acc += w * std::exp(mvn_logpdf(Eigen::Vector2d(lo + i * h, lo + j * h), dist));
    }
  }
  return acc * h * h;
}

Outcome invariants() {
  double worst_rec = 0.0;
  double worst_eig = 0.0;  // most negative margin below the noise floor
  double worst_oracle = 0.0;
  double worst_perm = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto family = s % 2 == 0 ? KernelFamily::ArdRbf : KernelFamily::Linear;
    const int n_x = static_cast<int>(s % 3);
    const int n_u = 1 + static_cast<int>(s % 2);
    const int objects = 2 + static_cast<int>(s % 4);
    const int per = 10 / objects;
    const Dataset d = oracle::random_dataset(objects, per, n_x, 5000 + s);
    const Confounders u = oracle::random_matrix(objects, n_u, 6000 + s);
    const HyperParams theta = oracle::random_theta(n_u, n_x, 7000 + s);

    std::vector<Kernel> kernels;
    for (int k = 0; k < n_x; ++k) kernels.push_back(covariate_kernel(theta, k, family));
    kernels.push_back(treatment_kernel(theta, family));
    kernels.push_back(outcome_kernel(theta, family));
    for (const Kernel& kernel : kernels) {
      std::vector<InputRow> rows;
      for (Eigen::Index i = 0; i < d.n_instances(); ++i) {
        InputRow r;
        r.confounder = u.row(d.parent[static_cast<std::size_t>(i)]).transpose();
        if (kernel.covariate_lengthscales.size() > 0 || kernel.treatment_lengthscale) {
          r.covariates = Eigen::VectorXd(d.x.row(i).transpose());
        }
        if (kernel.treatment_lengthscale) r.treatment = d.t[i];
        rows.push_back(r);
      }
      const Eigen::MatrixXd km = kernel_matrix(kernel, rows, rows, true);
      const CholeskyFactor f = cholesky(km);
      const Eigen::MatrixXd target = km + f.jitter * Eigen::MatrixXd::Identity(km.rows(), km.cols());
      worst_rec = std::max(worst_rec, (f.lower * f.lower.transpose() - target).norm() / target.norm());
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(km);
      worst_eig = std::min(worst_eig, eig.eigenvalues().minCoeff() - kernel.noise_sq);
    }

    const double got = joint_log_density(d, u, theta, PriorSpec{}, family);
    const double want = oracle::joint_log_density(d, u, theta, 4.0, 4.0, family);
    worst_oracle = std::max(worst_oracle, std::abs(got - want));

    std::vector<int> perm(static_cast<std::size_t>(d.n_instances()));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(8000 + s);
    std::shuffle(perm.begin(), perm.end(), rng);
    worst_perm = std::max(worst_perm, std::abs(joint_log_density(permuted(d, perm), u, theta, PriorSpec{}, family) - got));
    std::vector<int> relabel(static_cast<std::size_t>(objects));
    std::iota(relabel.begin(), relabel.end(), 0);
    std::shuffle(relabel.begin(), relabel.end(), rng);
    Dataset r = d;
    Confounders ru(objects, n_u);
    for (int o = 0; o < objects; ++o) {
      const auto to = static_cast<std::size_t>(relabel[static_cast<std::size_t>(o)]);
      ru.row(static_cast<Eigen::Index>(to)) = u.row(o);
      r.object_ids[to] = d.object_ids[static_cast<std::size_t>(o)];
    }
    for (auto& p : r.parent) p = relabel[static_cast<std::size_t>(p)];
    worst_perm = std::max(worst_perm, std::abs(joint_log_density(r, ru, theta, PriorSpec{}, family) - got));
  }
  const double n1 = normalization_1d();
  const double n2 = normalization_2d();
  const bool ok = worst_rec < 1e-8 && worst_eig >= -1e-10 && worst_oracle <= 1e-8 && worst_perm <= 1e-9 &&
                  std::abs(n1 - 1.0) <= 1e-3 && std::abs(n2 - 1.0) <= 1e-3;
  return {ok, "chol " + fmt("%.1e", worst_rec) + ", eig margin " + fmt("%.1e", worst_eig) + ", oracle " +
                  fmt("%.1e", worst_oracle) + ", perm " + fmt("%.1e", worst_perm) + ", norm " + fmt("%.5f", n1) +
                  "/" + fmt("%.5f", n2)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

// Runs generate, fit and evaluate twice in separate directories.
Outcome determinism(const std::string& gpslc, const fs::path& workdir) {
  if (gpslc.empty()) return {false, "no --gpslc binary given"};
  const std::vector<std::string> files{"data.csv", "truth.csv", "estimates.csv", "summary.csv", "eval.txt"};
  for (const char* run : {"a", "b"}) {
    const fs::path dir = workdir / run;
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string exe = shell_quote(gpslc);
    const std::vector<std::string> cmds{
        exe + " generate --objects 5 --per-object 4 --seed 11 --out-data " + shell_quote(dir / "data.csv") +
            " --out-truth " + shell_quote(dir / "truth.csv") + " --grid -1:1:5 > /dev/null",
        exe + " fit --data " + shell_quote(dir / "data.csv") + " --n-outer 40 --seed 12 --grid -1:1:5 --out-estimates " +
            shell_quote(dir / "estimates.csv") + " --out-summary " + shell_quote(dir / "summary.csv") + " > /dev/null 2>&1",
        exe + " evaluate --estimates " + shell_quote(dir / "estimates.csv") + " --truth " + shell_quote(dir / "truth.csv") +
            " > " + shell_quote(dir / "eval.txt")};
    for (const auto& c : cmds) {
      if (std::system(c.c_str()) != 0) return {false, "command failed: " + c};
    }
  }
  for (const auto& f : files) {
    const std::string a = slurp(workdir / "a" / f);
    if (a.empty() || a != slurp(workdir / "b" / f)) return {false, f + " differs between runs"};
  }
  return {true, std::to_string(files.size()) + " files byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance checks");
  std::string gpslc;
  std::string workdir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--gpslc", gpslc, "path to the gpslc executable");
  app.add_option("--workdir", workdir);
  app.add_option("criteria", only, "criteria to run (default: all)");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, closed_form},
      {2, sampler_validity},
      {3, concentration},
      {4, ignorance},
      {5, table_ordering},
      {6, resampling_robustness},
      {7, invariants},
      {8, [&] { return determinism(gpslc, workdir); }},
  };
  bool all = true;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  (" << fmt("%.1f", secs) << " s) "
              << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
