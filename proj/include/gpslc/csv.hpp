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

#include <iosfwd>
#include <string>
#include <vector>

#include "gpslc/counterfactual.hpp"
#include "gpslc/model.hpp"

namespace gpslc {

// Shortest representation that parses back to the same double.
std::string format_double(double v);

// Columns: object_id, t, y, x_0 .. x_{k-1}. Objects are numbered in order of
// first appearance. Throws SchemaError or NonRectangular.
Dataset parse_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

// Columns: t_star, sample_index, instance_index, ite; sample-major rows.
EffectEstimate parse_estimates_csv(std::istream& in);
EffectEstimate read_estimates_csv(const std::string& path);
void write_estimates_csv(std::ostream& out, const EffectEstimate& estimate);
void write_estimates_csv(const std::string& path, const EffectEstimate& estimate);

// Columns: t_star, sate_mean, sate_q05, sate_q95.
void write_summary_csv(std::ostream& out, const EffectEstimate& estimate);
void write_summary_csv(const std::string& path, const EffectEstimate& estimate);

// Columns: t_star, instance_index, ite.
GroundTruth parse_truth_csv(std::istream& in);
GroundTruth read_truth_csv(const std::string& path);
void write_truth_csv(std::ostream& out, const GroundTruth& truth);
void write_truth_csv(const std::string& path, const GroundTruth& truth);

// Columns: object_id, u_0 .. u_{k-1}.
void write_latent_csv(std::ostream& out, const Confounders& u, const std::vector<std::string>& object_ids);
void write_latent_csv(const std::string& path, const Confounders& u, const std::vector<std::string>& object_ids);

}  // namespace gpslc
