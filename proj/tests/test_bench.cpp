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

#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "gpslc/baselines.hpp"
#include "gpslc/bench.hpp"
#include "gpslc/error.hpp"
#include "oracle.hpp"

using namespace gpslc;

namespace {

Dataset uniform_pools(int n_obj, int per_obj, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Dataset d;
  const int n = n_obj * per_obj;
  d.x.resize(n, 0);
  d.t.resize(n);
  d.y.resize(n);
  for (int o = 0; o < n_obj; ++o) d.object_ids.push_back("p" + std::to_string(o));
  for (int i = 0; i < n; ++i) {
    d.parent.push_back(i / per_obj);
    d.t[i] = u(rng);
    d.y[i] = 2.0 * d.t[i];
  }
  return d;
}

Dataset propositional_binary(int n, int n_x, std::uint64_t seed) {
  Dataset d = oracle::random_dataset(n, 1, n_x, seed, true);
  return d;
}

double slope(const Eigen::VectorXd& t, const Eigen::VectorXd& y) {
  const Eigen::VectorXd tc = t.array() - t.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  return tc.dot(yc) / tc.dot(tc);
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("additive structural functions") {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK(synthetic_outcome_mean(SyntheticForm::Additive, 0.0, zero, zero) == 0.0);
  const Eigen::Vector3d x(std::numbers::pi / 2.0, 0.0, 0.0);
  CHECK(synthetic_treatment_mean(SyntheticForm::Additive, x, zero) == doctest::Approx(std::numbers::pi / 2.0));
  const Eigen::Vector3d xr(0.3, -1.2, 0.8);
  const Eigen::Vector3d ur(0.5, 0.1, -0.7);
  const double ite = synthetic_outcome_mean(SyntheticForm::Additive, 1.0, xr, ur) -
                     synthetic_outcome_mean(SyntheticForm::Additive, 0.0, xr, ur);
  CHECK(ite == doctest::Approx(std::sin(2.0)).epsilon(1e-12));
  CHECK(std::sin(2.0) == doctest::Approx(0.9093).epsilon(1e-4));
}

TEST_CASE("generate_synthetic shape, reproducibility and truth") {
  SyntheticSpec spec;
  spec.seed = 7;
  const SyntheticOutput a = generate_synthetic(spec);
  const SyntheticOutput b = generate_synthetic(spec);
  CHECK(a.data.n_instances() == 200);
  CHECK(a.data.n_objects() == 20);
  CHECK(a.latent.rows() == 20);
  CHECK(a.latent.cols() == 3);
  CHECK(a.data.y == b.data.y);
  CHECK(a.data.x == b.data.x);
  CHECK(a.truth.ite == b.truth.ite);
  const InterventionGrid grid{a.truth.grid};
  const GroundTruth again = synthetic_truth(spec.form, a.data, a.latent, grid);
  CHECK(again.ite == a.truth.ite);
  CHECK(a.truth.grid.size() == 100);
  // ITE at t* = T_i vanishes.
  const InterventionGrid factual{{a.data.t[0]}};
  CHECK(synthetic_truth(spec.form, a.data, a.latent, factual).ite(0, 0) == doctest::Approx(0.0).epsilon(1e-12));

  SyntheticSpec multi = spec;
  multi.form = SyntheticForm::Multiplicative;
  CHECK(generate_synthetic(multi).data.y != a.data.y);
  SyntheticSpec bad = spec;
  bad.n_objects = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("generate_linear truth and structure") {
  SyntheticSpec spec;
  spec.form = SyntheticForm::Linear;
  spec.n_objects = 50;
  spec.instances_per_object = 2;
  spec.linear.beta = 0.0;
  spec.seed = 3;
  const SyntheticOutput zero = generate_linear(spec, InterventionGrid{{-1.0, 1.0}});
  CHECK(zero.truth.ite.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.data.n_covariates() == 0);
  CHECK(zero.latent.cols() == 1);

  spec.linear.beta = 1.5;
  const SyntheticOutput lin = generate_linear(spec, InterventionGrid{{0.5}});
  for (Eigen::Index i = 0; i < lin.data.n_instances(); ++i) {
    CHECK(lin.truth.ite(0, i) == doctest::Approx(1.5 * (0.5 - lin.data.t[i])));
  }
}

TEST_CASE("unconfounded treatment: within and across slopes agree") {
  SyntheticSpec spec;
  spec.form = SyntheticForm::Linear;
  spec.n_objects = 2000;
  spec.instances_per_object = 2;
  spec.linear.alpha = 0.0;
  spec.seed = 4;
  const Dataset d = generate_linear(spec).data;
  const double across = slope(d.t, d.y);
  Eigen::VectorXd tw(d.n_instances());
  Eigen::VectorXd yw(d.n_instances());
  for (Eigen::Index i = 0; i < d.n_instances(); i += 2) {
    const double mt = 0.5 * (d.t[i] + d.t[i + 1]);
    const double my = 0.5 * (d.y[i] + d.y[i + 1]);
    tw[i] = d.t[i] - mt;
    tw[i + 1] = d.t[i + 1] - mt;
    yw[i] = d.y[i] - my;
    yw[i + 1] = d.y[i + 1] - my;
  }
  CHECK(std::abs(across - slope(tw, yw)) < 0.1);
}

TEST_CASE("within-object centered slope is consistent") {
  SyntheticSpec spec;
  spec.form = SyntheticForm::Linear;
  spec.n_objects = 10000;
  spec.instances_per_object = 2;
  spec.seed = 5;
  const Dataset d = generate_linear(spec).data;
  double cov = 0.0;
  double var = 0.0;
  for (Eigen::Index i = 0; i < d.n_instances(); i += 2) {
    const double dt = d.t[i] - d.t[i + 1];
    const double dy = d.y[i] - d.y[i + 1];
    cov += dt * dy;
    var += dt * dt;
  }
  CHECK(std::abs(cov / var - 1.5) < 0.02);
  // The pooled slope is biased by confounding.
  CHECK(std::abs(slope(d.t, d.y) - 1.5) > 0.1);
}

TEST_CASE("ignorance_pair") {
  LinearParams unconfounded;
  unconfounded.tau = 0.0;
  try {
    ignorance_pair(unconfounded, 2.0);
    FAIL("expected NoSolution");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSolution);
  }

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    LinearParams p{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const LinearParams q = ignorance_pair(p, p.beta + 0.5);
    CHECK(q.beta == doctest::Approx(p.beta + 0.5));
    const LinearMoments a = linear_moments(p);
    const LinearMoments b = linear_moments(q);
    CHECK(std::abs(a.var_t - b.var_t) < 1e-10);
    CHECK(std::abs(a.cov_ty - b.cov_ty) < 1e-10);
    CHECK(std::abs(a.var_y - b.var_y) < 1e-10);
    CHECK_NOTHROW(q.validate());
  }
}

TEST_CASE("ignorance_pair preserves the propositional density") {
  SyntheticSpec spec;
  spec.form = SyntheticForm::Linear;
  spec.n_objects = 200;
  spec.instances_per_object = 1;
  spec.seed = 6;
  const Dataset d = generate_linear(spec).data;
  const LinearParams q = ignorance_pair(spec.linear, spec.linear.beta + 0.5);
  CHECK(std::abs(linear_propositional_log_density(spec.linear, d.t, d.y) -
                 linear_propositional_log_density(q, d.t, d.y)) < 1e-8);
}

TEST_CASE("linear_propositional_log_density matches the bivariate oracle") {
  const LinearParams p{0.7, 1.2, -0.4, 1.3, 0.6, 0.9};
  const LinearMoments m = linear_moments(p);
  CHECK(m.var_t == doctest::Approx(0.49 * 1.3 + 0.6));
  Eigen::Matrix2d cov;
  cov << m.var_t, m.cov_ty, m.cov_ty, m.var_y;
  const Eigen::Vector2d t(0.3, -1.0);
  const Eigen::Vector2d y(0.8, 0.1);
  double want = 0.0;
  for (int i = 0; i < 2; ++i) want += oracle::mvn_logpdf(Eigen::Vector2d(t[i], y[i]), Eigen::Vector2d::Zero(), cov);
  CHECK(linear_propositional_log_density(p, t, y) == doctest::Approx(want).epsilon(1e-12));
  // Var(Y) from the structural equations.
  const double var_y = p.beta * p.beta * m.var_t + 2.0 * p.beta * p.alpha * p.tau * p.var_u + p.tau * p.tau * p.var_u + p.var_y;
  CHECK(m.var_y == doctest::Approx(var_y));
}

TEST_CASE("resample weights peak at the target in a uniform pool") {
  Eigen::VectorXd pool(101);
  for (int i = 0; i <= 100; ++i) pool[i] = i;
  const Eigen::VectorXd w = resample_weights(pool, 45.0, 15.0);
  CHECK(w.sum() == doctest::Approx(1.0));
  Eigen::Index best = 0;
  w.maxCoeff(&best);
  CHECK(std::abs(best - 45) <= 1);
  CHECK(w[45] >= w[0]);
  CHECK(w[45] >= w[100]);
  CHECK_THROWS_AS(resample_weights(Eigen::VectorXd::Constant(5, 1e6), 0.0, 1.0), Error);
}

TEST_CASE("biased_resample is unbiased at bias 0 and shifts at bias 9") {
  const Dataset pools = uniform_pools(6, 365, 0.0, 100.0, 8);
  ResampleSpec spec;
  spec.shifts = {3, 2, 1, -1, -2, -3};
  spec.samples_per_object = 100;
  spec.seed = 9;
  const ResampleOutput flat = biased_resample(pools, spec);
  std::vector<double> means(6, 0.0);
  for (std::size_t i = 0; i < flat.data.parent.size(); ++i) means[static_cast<std::size_t>(flat.data.parent[i])] += flat.data.t[static_cast<Eigen::Index>(i)];
  for (auto& m : means) m /= 100.0;
  const double pooled_sd = std::sqrt((flat.data.t.array() - flat.data.t.mean()).square().mean());
  const double se = pooled_sd / std::sqrt(100.0);
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  CHECK(*hi - *lo < 2.0 * std::sqrt(2.0) * se * 2.0);

  spec.bias = 9.0;
  spec.samples_per_object = 30;
  const ResampleOutput biased = biased_resample(pools, spec);
  double ct = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < biased.data.parent.size(); ++i) {
    if (biased.data.parent[i] == 0) {
      ct += biased.data.t[static_cast<Eigen::Index>(i)];
      ++count;
    }
  }
  CHECK(std::abs(ct / count - 72.0) < 3.0);
}

TEST_CASE("biased_resample draws a sub-multiset of the pool") {
  const Dataset pools = uniform_pools(3, 40, 0.0, 100.0, 10);
  ResampleSpec spec;
  spec.shifts = {1, 0, -1};
  spec.bias = 5.0;
  spec.samples_per_object = 20;
  spec.seed = 11;
  for (const bool replace : {false, true}) {
    spec.with_replacement = replace;
    const ResampleOutput r = biased_resample(pools, spec);
    std::set<int> seen;
    for (std::size_t k = 0; k < r.source.size(); ++k) {
      const int src = r.source[k];
      CHECK(r.data.t[static_cast<Eigen::Index>(k)] == pools.t[src]);
      CHECK(r.data.parent[k] == pools.parent[static_cast<std::size_t>(src)]);
      if (!replace) CHECK(seen.insert(src).second);
    }
  }
  spec.with_replacement = false;
  spec.samples_per_object = 41;
  CHECK_THROWS_AS(biased_resample(pools, spec), Error);
}

TEST_CASE("duplicate_confound structure") {
  const Dataset d = propositional_binary(20, 4, 12);
  Rng rng(13);
  const DuplicateOutput none = duplicate_confound(d, {3}, 0.0, 0.05, rng);
  CHECK(none.data.n_instances() == 20);
  CHECK(none.data.x == d.x.leftCols(3));
  CHECK(none.data.t == d.t);
  CHECK(none.data.parent == d.parent);

  const DuplicateOutput dup = duplicate_confound(d, {3}, 0.3, 0.05, rng);
  const int m = static_cast<int>(std::ceil(0.3 * 20));
  CHECK(dup.data.n_instances() == 20 + m);
  CHECK(dup.data.n_covariates() == 3);
  CHECK(dup.hidden.cols() == 1);
  for (Eigen::Index k = 20; k < dup.data.n_instances(); ++k) {
    const int src = dup.source[static_cast<std::size_t>(k)];
    CHECK(dup.data.t[k] == 1.0 - d.t[src]);
    CHECK(dup.data.parent[static_cast<std::size_t>(k)] == src);
  }
  const std::vector<int> sizes = dup.data.object_sizes();
  int pairs = 0;
  for (std::size_t o = 0; o < sizes.size(); ++o) {
    CHECK((sizes[o] == 1 || sizes[o] == 2));
    if (sizes[o] == 2) ++pairs;
    CHECK((sizes[o] == 2) == static_cast<bool>(dup.duplicated[o]));
  }
  CHECK(pairs == m);

  const Dataset cont = oracle::random_dataset(5, 1, 2, 14);
  CHECK_THROWS_AS(duplicate_confound(cont, {}, 0.3, 0.05, rng), Error);
}

TEST_CASE("binary benchmark") {
  BinarySpec spec;
  spec.n_instances = 40;
  spec.seed = 15;
  const SyntheticOutput out = generate_binary(spec);
  CHECK(out.data.has_binary_treatment());
  CHECK(out.data.n_instances() == 40 + 12);
  CHECK(out.truth.grid == std::vector<double>{0.0, 1.0});
  CHECK(out.data.n_covariates() == spec.n_continuous);
  const SyntheticOutput again = generate_binary(spec);
  CHECK(again.data.y == out.data.y);
}

TEST_CASE("NEEC pools and truth") {
  CHECK(neec_response(0.0, 60.0) == 20.0);
  CHECK(neec_response(2.0, 70.0) == doctest::Approx(30.0 + 1.2));
  NeecSpec spec;
  spec.seed = 16;
  const Dataset pools = generate_neec_pools(spec);
  CHECK(pools.n_instances() == 6 * 365);
  CHECK(pools.object_ids.front() == "CT");
  const InterventionGrid grid{{40.0, 60.0}};
  const GroundTruth truth = neec_truth(pools, spec.shifts, grid);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double s = spec.shifts[static_cast<std::size_t>(pools.parent[static_cast<std::size_t>(i)])];
    CHECK(truth.ite(1, i) == doctest::Approx(neec_response(s, 60.0) - neec_response(s, pools.t[i])));
  }
}

TEST_CASE("per-object ground-truth fit on a linear pool") {
  const Dataset pools = uniform_pools(2, 150, 0.0, 10.0, 17);
  ResampleSpec rs;
  rs.shifts = {1, -1};
  rs.samples_per_object = 10;
  rs.seed = 18;
  const Dataset sub = biased_resample(pools, rs).data;
  InferenceConfig cfg;
  cfg.n_outer = 200;
  cfg.seed = 19;
  const double mean_t = pools.t.mean();
  const InterventionGrid grid{{3.0, 6.0, mean_t}};
  const GroundTruth a = fit_ground_truth_per_object(pools, sub, grid, PriorSpec{}, cfg);
  CHECK(a.provenance == "per-object-fit");
  CHECK(std::abs((a.sate[1] - a.sate[0]) - 6.0) < 0.05);
  CHECK(std::isfinite(a.sate[2]));
  const GroundTruth b = fit_ground_truth_per_object(pools, sub, grid, PriorSpec{}, cfg);
  CHECK(a.ite == b.ite);
}

}  // TEST_SUITE
