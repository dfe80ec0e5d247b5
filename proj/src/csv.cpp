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

#include "gpslc/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "gpslc/error.hpp"

namespace gpslc {

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[r] is file line r + 2
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Table read_table(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaError, "missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split(line);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::NonRectangular, "row " + std::to_string(line_no) + " has " +
                                                 std::to_string(cells.size()) + " cells, header has " +
                                                 std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::string where(std::size_t r, const Table& t, std::size_t c) {
  return "row " + std::to_string(r + 2) + ", column '" + t.header[c] + "'";
}

double number(const Table& t, std::size_t r, std::size_t c) {
  const std::string& s = t.rows[r][c];
  if (s.empty()) throw Error(ErrorCode::SchemaError, "missing value at " + where(r, t, c));
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::SchemaError, "not a finite number at " + where(r, t, c) + ": '" + s + "'");
  }
  return v;
}

long index(const Table& t, std::size_t r, std::size_t c) {
  const double v = number(t, r, c);
  if (v < 0.0 || v != std::floor(v)) throw Error(ErrorCode::SchemaError, "bad index at " + where(r, t, c));
  return static_cast<long>(v);
}

void expect_header(const Table& t, const std::vector<std::string>& expected) {
  if (t.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw Error(ErrorCode::SchemaError, "header must be '" + want + "'");
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "' for reading");
  return in;
}

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

// Values in order of first appearance.
std::vector<double> ordered_grid(const Table& t, std::size_t col, std::map<double, std::size_t>& position) {
  std::vector<double> grid;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double v = number(t, r, col);
    if (position.emplace(v, grid.size()).second) grid.push_back(v);
  }
  return grid;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Dataset parse_dataset_csv(std::istream& in) {
  const Table t = read_table(in);
  if (t.header.size() < 3 || t.header[0] != "object_id" || t.header[1] != "t" || t.header[2] != "y") {
    throw Error(ErrorCode::SchemaError, "header must start with 'object_id,t,y'");
  }
  const std::size_t n_x = t.header.size() - 3;
  for (std::size_t k = 0; k < n_x; ++k) {
    if (t.header[3 + k] != "x_" + std::to_string(k)) {
      throw Error(ErrorCode::SchemaError, "column " + std::to_string(4 + k) + " must be 'x_" + std::to_string(k) + "'");
    }
  }
  if (t.rows.empty()) throw Error(ErrorCode::SchemaError, "dataset has no rows");
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  Dataset d;
  d.x.resize(n, static_cast<Eigen::Index>(n_x));
  d.t.resize(n);
  d.y.resize(n);
  std::unordered_map<std::string, int> ids;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& id = t.rows[r][0];
    if (id.empty()) throw Error(ErrorCode::SchemaError, "missing value at " + where(r, t, 0));
    const auto [it, inserted] = ids.emplace(id, static_cast<int>(d.object_ids.size()));
    if (inserted) d.object_ids.push_back(id);
    d.parent.push_back(it->second);
    const auto i = static_cast<Eigen::Index>(r);
    d.t[i] = number(t, r, 1);
    d.y[i] = number(t, r, 2);
    for (std::size_t k = 0; k < n_x; ++k) d.x(i, static_cast<Eigen::Index>(k)) = number(t, r, 3 + k);
  }
  return d;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  return parse_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  data.validate();
  out << "object_id,t,y";
  for (Eigen::Index k = 0; k < data.n_covariates(); ++k) out << ",x_" << k;
  out << "\n";
  for (Eigen::Index i = 0; i < data.n_instances(); ++i) {
    out << data.object_ids[static_cast<std::size_t>(data.parent[static_cast<std::size_t>(i)])] << ","
        << format_double(data.t[i]) << "," << format_double(data.y[i]);
    for (Eigen::Index k = 0; k < data.n_covariates(); ++k) out << "," << format_double(data.x(i, k));
    out << "\n";
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  write_file(path, [&](std::ostream& out) { write_dataset_csv(out, data); });
}

EffectEstimate parse_estimates_csv(std::istream& in) {
  const Table t = read_table(in);
  expect_header(t, {"t_star", "sample_index", "instance_index", "ite"});
  if (t.rows.empty()) throw Error(ErrorCode::SchemaError, "estimates have no rows");
  std::map<double, std::size_t> position;
  EffectEstimate e;
  e.grid = ordered_grid(t, 0, position);
  long n_samples = 0;
  long n_instances = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    n_samples = std::max(n_samples, index(t, r, 1) + 1);
    n_instances = std::max(n_instances, index(t, r, 2) + 1);
  }
  const std::size_t expected = e.grid.size() * static_cast<std::size_t>(n_samples * n_instances);
  if (t.rows.size() != expected) {
    throw Error(ErrorCode::SchemaError, "estimates must hold one row per (t_star, sample, instance)");
  }
  e.draws.assign(e.grid.size(), Eigen::MatrixXd::Constant(n_samples, n_instances, std::nan("")));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    double& cell = e.draws[position.at(number(t, r, 0))](index(t, r, 1), index(t, r, 2));
    if (!std::isnan(cell)) throw Error(ErrorCode::SchemaError, "duplicate entry at row " + std::to_string(r + 2));
    cell = number(t, r, 3);
  }
  return e;
}

EffectEstimate read_estimates_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  return parse_estimates_csv(in);
}

void write_estimates_csv(std::ostream& out, const EffectEstimate& e) {
  e.validate();
  out << "t_star,sample_index,instance_index,ite\n";
  for (Eigen::Index s = 0; s < e.n_samples(); ++s) {
    for (std::size_t g = 0; g < e.grid.size(); ++g) {
      const std::string t_star = format_double(e.grid[g]);
      for (Eigen::Index i = 0; i < e.n_instances(); ++i) {
        out << t_star << "," << s << "," << i << "," << format_double(e.draws[g](s, i)) << "\n";
      }
    }
  }
}

void write_estimates_csv(const std::string& path, const EffectEstimate& e) {
  write_file(path, [&](std::ostream& out) { write_estimates_csv(out, e); });
}

void write_summary_csv(std::ostream& out, const EffectEstimate& e) {
  e.validate();
  out << "t_star,sate_mean,sate_q05,sate_q95\n";
  for (std::size_t g = 0; g < e.grid.size(); ++g) {
    const auto [lo, hi] = e.credible_interval(g, 0.9);
    out << format_double(e.grid[g]) << "," << format_double(e.sate_mean(g)) << "," << format_double(lo) << ","
        << format_double(hi) << "\n";
  }
}

void write_summary_csv(const std::string& path, const EffectEstimate& e) {
  write_file(path, [&](std::ostream& out) { write_summary_csv(out, e); });
}

GroundTruth parse_truth_csv(std::istream& in) {
  const Table t = read_table(in);
  expect_header(t, {"t_star", "instance_index", "ite"});
  if (t.rows.empty()) throw Error(ErrorCode::SchemaError, "truth has no rows");
  std::map<double, std::size_t> position;
  GroundTruth truth;
  truth.grid = ordered_grid(t, 0, position);
  long n_instances = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) n_instances = std::max(n_instances, index(t, r, 1) + 1);
  if (t.rows.size() != truth.grid.size() * static_cast<std::size_t>(n_instances)) {
    throw Error(ErrorCode::SchemaError, "truth must hold one row per (t_star, instance)");
  }
  truth.ite = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(truth.grid.size()), n_instances, std::nan(""));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    double& cell = truth.ite(static_cast<Eigen::Index>(position.at(number(t, r, 0))), index(t, r, 1));
    if (!std::isnan(cell)) throw Error(ErrorCode::SchemaError, "duplicate entry at row " + std::to_string(r + 2));
    cell = number(t, r, 2);
  }
  truth.sate = truth.ite.rowwise().mean();
  return truth;
}

GroundTruth read_truth_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  return parse_truth_csv(in);
}

void write_truth_csv(std::ostream& out, const GroundTruth& truth) {
  if (truth.ite.rows() != static_cast<Eigen::Index>(truth.grid.size())) {
    throw Error(ErrorCode::ShapeMismatch, "truth needs one ITE row per grid point");
  }
  out << "t_star,instance_index,ite\n";
  for (std::size_t g = 0; g < truth.grid.size(); ++g) {
    const std::string t_star = format_double(truth.grid[g]);
    for (Eigen::Index i = 0; i < truth.ite.cols(); ++i) {
      out << t_star << "," << i << "," << format_double(truth.ite(static_cast<Eigen::Index>(g), i)) << "\n";
    }
  }
}

void write_truth_csv(const std::string& path, const GroundTruth& truth) {
  write_file(path, [&](std::ostream& out) { write_truth_csv(out, truth); });
}

void write_latent_csv(std::ostream& out, const Confounders& u, const std::vector<std::string>& object_ids) {
  if (u.rows() != static_cast<Eigen::Index>(object_ids.size())) {
    throw Error(ErrorCode::ShapeMismatch, "one latent row per object required");
  }
  out << "object_id";
  for (Eigen::Index j = 0; j < u.cols(); ++j) out << ",u_" << j;
  out << "\n";
  for (Eigen::Index o = 0; o < u.rows(); ++o) {
    out << object_ids[static_cast<std::size_t>(o)];
    for (Eigen::Index j = 0; j < u.cols(); ++j) out << "," << format_double(u(o, j));
    out << "\n";
  }
}

void write_latent_csv(const std::string& path, const Confounders& u, const std::vector<std::string>& object_ids) {
  write_file(path, [&](std::ostream& out) { write_latent_csv(out, u, object_ids); });
}

}  // namespace gpslc
