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

#include "gpslc/cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gpslc/bench.hpp"
#include "gpslc/csv.hpp"
#include "gpslc/error.hpp"
#include "gpslc/pipeline.hpp"

namespace gpslc {

namespace {

using Manifest = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

// Config values become leading --key=value arguments unless the same key was
// given on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.size() < 2) return args;
  std::string config_path;
  std::set<std::string> given;
  for (std::size_t k = 2; k < args.size(); ++k) {
    const std::string& a = args[k];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key == "config") {
      if (eq != std::string::npos) {
        config_path = a.substr(eq + 1);
      } else if (k + 1 < args.size()) {
        config_path = args[k + 1];
      }
    }
  }
  if (config_path.empty()) return args;
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  for (const auto& [key, value] : read_key_values(config_path)) {
    if (!given.count(key)) out.push_back("--" + key + "=" + value);
  }
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

void write_manifest(const std::string& path, Manifest manifest, const std::vector<std::string>& artifacts) {
  for (const auto& a : artifacts) {
    if (!a.empty()) manifest["artifact." + a + ".fnv1a64"] = hex64(fnv1a_file(a));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  for (const auto& [k, v] : manifest) out << k << "=" << v << "\n";
}

InterventionGrid parse_grid(const std::string& spec, const Dataset& data, TreatmentMode mode) {
  if (spec.empty() || spec == "default") {
    return intervention_grid_default(data, mode == TreatmentMode::Binary ? GridKind::Binary : GridKind::Percentile);
  }
  if (spec == "percentile") return intervention_grid_default(data, GridKind::Percentile);
  if (spec == "neec") return intervention_grid_default(data, GridKind::Neec);
  if (spec == "binary") return intervention_grid_default(data, GridKind::Binary);
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad grid value '" + s + "'");
    }
  };
  InterventionGrid grid;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(spec);
    for (std::string p; std::getline(in, p, ':');) parts.push_back(trim(p));
    if (parts.size() != 3) throw Error(ErrorCode::InvalidConfig, "grid range must be LO:HI:COUNT");
    const double lo = to_double(parts[0]);
    const double hi = to_double(parts[1]);
    const double count = to_double(parts[2]);
    if (count < 1 || count != std::floor(count)) throw Error(ErrorCode::InvalidConfig, "grid count must be >= 1");
    const int n = static_cast<int>(count);
    for (int k = 0; k < n; ++k) grid.values.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
  } else {
    std::stringstream in(spec);
    for (std::string p; std::getline(in, p, ',');) grid.values.push_back(to_double(trim(p)));
  }
  grid.validate();
  return grid;
}

struct GenerateArgs {
  std::string form = "additive";
  int objects = 20;
  int per_object = 10;
  int n_u = 3;
  int n_x = 3;
  std::uint64_t seed = 0;
  LinearParams linear;
  double bias = 0.0;
  int pool_size = 365;
  int samples_per_object = 25;
  bool with_replacement = false;
  std::string truth_source = "generator";
  int truth_n_outer = 200;
  int instances = 200;
  double fraction = 0.3;
  double noise_frac = 0.05;
  std::string grid;
  std::string out_data;
  std::string out_truth;
  std::string out_latent;
  std::string out_pools;
  std::string manifest;
  std::string config;
};

struct FitArgs {
  std::string data;
  std::string model = "gpslc";
  std::string mode = "continuous";
  std::string kernel = "rbf";
  int n_u = 3;
  InferenceConfig cfg;
  double prior_shape = 4.0;
  double prior_rate = 4.0;
  std::string grid;
  bool standardize = true;
  int chains = 1;
  int progress_every = 0;
  std::string out_estimates;
  std::string out_summary;
  std::string manifest;
  std::string config;
};

struct EvaluateArgs {
  std::string estimates;
  std::string truth;
  std::string data;
  std::string manifest;
  std::string config;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  Dataset data;
  GroundTruth truth;
  Confounders latent;
  std::optional<Dataset> pools;
  const bool fixed_grid = !(a.grid.empty() || a.grid == "default" || a.grid == "percentile");
  if (a.form == "additive" || a.form == "multiplicative" || a.form == "linear") {
    SyntheticSpec spec;
    spec.n_objects = a.objects;
    spec.instances_per_object = a.per_object;
    spec.n_u = a.n_u;
    spec.n_x = a.n_x;
    spec.form = a.form == "additive"         ? SyntheticForm::Additive
                : a.form == "multiplicative" ? SyntheticForm::Multiplicative
                                             : SyntheticForm::Linear;
    spec.linear = a.linear;
    spec.seed = a.seed;
    std::optional<InterventionGrid> grid;
    if (fixed_grid) grid = parse_grid(a.grid, Dataset{}, TreatmentMode::Continuous);
    SyntheticOutput g = generate_synthetic(spec, grid);
    data = std::move(g.data);
    truth = std::move(g.truth);
    latent = std::move(g.latent);
  } else if (a.form == "neec") {
    NeecSpec spec;
    spec.pool_size = a.pool_size;
    spec.seed = a.seed;
    pools = generate_neec_pools(spec);
    ResampleSpec rs;
    rs.shifts = spec.shifts;
    rs.bias = a.bias;
    rs.samples_per_object = a.samples_per_object;
    rs.with_replacement = a.with_replacement;
    rs.seed = a.seed + 1;
    data = biased_resample(*pools, rs).data;
    const InterventionGrid grid = fixed_grid ? parse_grid(a.grid, data, TreatmentMode::Continuous)
                                             : intervention_grid_default(data, GridKind::Neec);
    if (a.truth_source == "generator") {
      truth = neec_truth(data, spec.shifts, grid);
    } else if (a.truth_source == "fit") {
      InferenceConfig cfg;
      cfg.n_outer = a.truth_n_outer;
      cfg.seed = a.seed + 2;
      truth = fit_ground_truth_per_object(*pools, data, grid, PriorSpec{}, cfg);
    } else {
      throw Error(ErrorCode::InvalidConfig, "truth source must be generator or fit");
    }
    latent = Eigen::Map<const Eigen::VectorXd>(spec.shifts.data(), static_cast<Eigen::Index>(spec.shifts.size()));
  } else if (a.form == "binary") {
    BinarySpec spec;
    spec.n_instances = a.instances;
    spec.fraction = a.fraction;
    spec.noise_frac = a.noise_frac;
    spec.seed = a.seed;
    SyntheticOutput g = generate_binary(spec);
    data = std::move(g.data);
    truth = std::move(g.truth);
    latent = std::move(g.latent);
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown form '" + a.form + "'");
  }
  write_dataset_csv(a.out_data, data);
  if (!a.out_truth.empty()) write_truth_csv(a.out_truth, truth);
  if (!a.out_latent.empty()) write_latent_csv(a.out_latent, latent, data.object_ids);
  if (!a.out_pools.empty()) {
    if (!pools) throw Error(ErrorCode::InvalidConfig, "--out-pools applies to the neec form only");
    write_dataset_csv(a.out_pools, *pools);
  }
  out << "instances=" << data.n_instances() << "\nobjects=" << data.n_objects() << "\n";
  if (!a.manifest.empty()) {
    Manifest m{{"command", "generate"},
               {"form", a.form},
               {"seed", std::to_string(a.seed)},
               {"objects", std::to_string(a.objects)},
               {"per_object", std::to_string(a.per_object)},
               {"grid", a.grid.empty() ? "default" : a.grid}};
    write_manifest(a.manifest, m, {a.out_data, a.out_truth, a.out_latent, a.out_pools});
  }
  return kExitOk;
}

int cmd_fit(const FitArgs& a, std::ostream& err) {
  if (a.out_estimates == a.out_summary || a.out_estimates == a.data || a.out_summary == a.data) {
    throw Error(ErrorCode::InvalidConfig, "data, estimates and summary paths must differ");
  }
  const Dataset data = read_dataset_csv(a.data);
  FitOptions opt;
  opt.kind = parse_model_kind(a.model);
  if (a.mode != "continuous" && a.mode != "binary") throw Error(ErrorCode::InvalidConfig, "mode must be continuous or binary");
  if (a.kernel != "rbf" && a.kernel != "linear") throw Error(ErrorCode::InvalidConfig, "kernel must be rbf or linear");
  opt.spec.mode = a.mode == "binary" ? TreatmentMode::Binary : TreatmentMode::Continuous;
  opt.spec.family = a.kernel == "linear" ? KernelFamily::Linear : KernelFamily::ArdRbf;
  opt.spec.n_confounders = a.n_u;
  if (a.n_u < 0) throw Error(ErrorCode::InvalidConfig, "n-u must be >= 0");
  opt.priors.fallback = {a.prior_shape, a.prior_rate};
  opt.cfg = a.cfg;
  opt.chains = a.chains;
  opt.standardize = a.standardize;
  if (a.progress_every > 0) {
    opt.hooks.progress_every = a.progress_every;
    opt.hooks.progress = [&err](int iteration, const Chain& chain) {
      err << "iteration " << iteration << " log_density=" << format_double(chain.log_density()) << "\n";
    };
  }
  const InterventionGrid grid = parse_grid(a.grid, data, opt.spec.mode);
  const auto start = std::chrono::steady_clock::now();
  FitResult result;
  try {
    result = fit_and_estimate(data, grid, opt);
  } catch (const SamplerError& e) {
    const std::string dump = a.out_estimates + ".state.txt";
    std::ofstream out(dump);
    out << "iteration = " << e.iteration() << "\nerror = " << e.what() << "\n" << describe_state(e.state());
    err << "sampler failed at iteration " << e.iteration() << ": " << e.what() << "\nstate dumped to " << dump
        << "\n";
    return kExitInternal;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_estimates_csv(a.out_estimates, result.estimate);
  write_summary_csv(a.out_summary, result.estimate);
  err << "wall_clock_seconds=" << std::fixed << std::setprecision(3) << seconds << std::defaultfloat << "\n";
  for (std::size_t c = 0; c < result.acceptance.size(); ++c) {
    const AcceptanceStats& s = result.acceptance[c];
    for (std::size_t k = 0; k < s.names.size(); ++k) {
      err << "acceptance.chain" << c << "." << s.names[k] << "=" << std::setprecision(3) << s.rate(k) << "\n";
    }
  }
  if (!a.manifest.empty()) {
    Manifest m{{"command", "fit"},
               {"model", a.model},
               {"mode", a.mode},
               {"kernel", a.kernel},
               {"n_u", std::to_string(a.n_u)},
               {"n_outer", std::to_string(a.cfg.n_outer)},
               {"n_mh", std::to_string(a.cfg.n_mh)},
               {"n_es", std::to_string(a.cfg.n_es)},
               {"drift", format_double(a.cfg.drift)},
               {"burn_in", std::to_string(a.cfg.effective_burn_in())},
               {"thin", std::to_string(a.cfg.thin)},
               {"seed", std::to_string(a.cfg.seed)},
               {"chains", std::to_string(a.chains)},
               {"standardize", a.standardize ? "true" : "false"},
               {"prior_shape", format_double(a.prior_shape)},
               {"prior_rate", format_double(a.prior_rate)},
               {"grid", a.grid.empty() ? "default" : a.grid},
               {"data", a.data}};
    write_manifest(a.manifest, m, {a.data, a.out_estimates, a.out_summary});
  }
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const EffectEstimate estimate = read_estimates_csv(a.estimates);
  const GroundTruth truth = read_truth_csv(a.truth);
  std::ostringstream block;
  block << "sqrt_pehe=" << format_double(pehe(estimate, truth)) << "\n";
  block << "sqrt_mse=" << format_double(sate_mse(estimate, truth)) << "\n";
  if (!a.data.empty()) {
    const Dataset data = read_dataset_csv(a.data);
    if (data.n_instances() != estimate.n_instances()) {
      throw Error(ErrorCode::ShapeMismatch, "dataset and estimates differ in instance count");
    }
    const std::vector<double> per_object =
        sate_mse_by_object(estimate, truth, data.parent, static_cast<int>(data.n_objects()));
    for (std::size_t o = 0; o < per_object.size(); ++o) {
      block << "sqrt_mse." << data.object_ids[o] << "=" << format_double(per_object[o]) << "\n";
    }
  }
  out << block.str();
  if (!a.manifest.empty()) {
    write_manifest(a.manifest, {{"command", "evaluate"}}, {a.estimates, a.truth, a.data});
  }
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  if (is_data_contract_error(code)) return kExitDataContract;
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::Io:
    case ErrorCode::NonPositiveInput:
      return kExitUsage;
    default:
      return kExitInternal;
  }
}

}  // namespace

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "' for hashing");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    std::string key = trim(line.substr(0, eq));
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    out[key] = value;
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> raw(argv, argv + argc);
  CLI::App app{"Causal effect estimation with structured latent confounders", "gpslc"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Write a benchmark dataset and its ground truth");
  generate->add_option("--form", gen.form, "additive|multiplicative|linear|neec|binary")->capture_default_str();
  generate->add_option("--objects", gen.objects)->capture_default_str();
  generate->add_option("--per-object", gen.per_object)->capture_default_str();
  generate->add_option("--n-u", gen.n_u)->capture_default_str();
  generate->add_option("--n-x", gen.n_x)->capture_default_str();
  generate->add_option("--seed", gen.seed)->capture_default_str();
  generate->add_option("--alpha", gen.linear.alpha)->capture_default_str();
  generate->add_option("--beta", gen.linear.beta)->capture_default_str();
  generate->add_option("--tau", gen.linear.tau)->capture_default_str();
  generate->add_option("--var-u", gen.linear.var_u)->capture_default_str();
  generate->add_option("--var-t", gen.linear.var_t)->capture_default_str();
  generate->add_option("--var-y", gen.linear.var_y)->capture_default_str();
  generate->add_option("--bias", gen.bias)->capture_default_str();
  generate->add_option("--pool-size", gen.pool_size)->capture_default_str();
  generate->add_option("--samples-per-object", gen.samples_per_object)->capture_default_str();
  generate->add_flag("--with-replacement", gen.with_replacement);
  generate->add_option("--truth-source", gen.truth_source, "generator|fit")->capture_default_str();
  generate->add_option("--truth-n-outer", gen.truth_n_outer)->capture_default_str();
  generate->add_option("--instances", gen.instances)->capture_default_str();
  generate->add_option("--fraction", gen.fraction)->capture_default_str();
  generate->add_option("--noise-frac", gen.noise_frac)->capture_default_str();
  generate->add_option("--grid", gen.grid, "default|percentile|neec|binary|LO:HI:COUNT|v1,v2,...");
  generate->add_option("--out-data", gen.out_data)->required();
  generate->add_option("--out-truth", gen.out_truth);
  generate->add_option("--out-latent", gen.out_latent);
  generate->add_option("--out-pools", gen.out_pools);
  generate->add_option("--manifest", gen.manifest);
  generate->add_option("--config", gen.config, "key=value file; flags take precedence");

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model and write effect estimates");
  fit_cmd->add_option("--data", fit.data)->required();
  fit_cmd->add_option("--model", fit.model, "gpslc|gp-noconf|gp-noobj|gp-perobj|mlm1|mlm2")->capture_default_str();
  fit_cmd->add_option("--mode", fit.mode, "continuous|binary")->capture_default_str();
  fit_cmd->add_option("--kernel", fit.kernel, "rbf|linear")->capture_default_str();
  fit_cmd->add_option("--n-u", fit.n_u)->capture_default_str();
  fit_cmd->add_option("--n-outer", fit.cfg.n_outer)->capture_default_str();
  fit_cmd->add_option("--n-mh", fit.cfg.n_mh)->capture_default_str();
  fit_cmd->add_option("--n-es", fit.cfg.n_es)->capture_default_str();
  fit_cmd->add_option("--drift", fit.cfg.drift)->capture_default_str();
  fit_cmd->add_option("--burn-in", fit.cfg.burn_in, "negative selects n-outer / 2")->capture_default_str();
  fit_cmd->add_option("--thin", fit.cfg.thin)->capture_default_str();
  fit_cmd->add_option("--seed", fit.cfg.seed)->capture_default_str();
  fit_cmd->add_option("--prior-shape", fit.prior_shape)->capture_default_str();
  fit_cmd->add_option("--prior-rate", fit.prior_rate)->capture_default_str();
  fit_cmd->add_option("--grid", fit.grid, "default|percentile|neec|binary|LO:HI:COUNT|v1,v2,...");
  fit_cmd->add_option("--standardize", fit.standardize)->capture_default_str();
  fit_cmd->add_option("--chains", fit.chains)->capture_default_str();
  fit_cmd->add_option("--progress-every", fit.progress_every)->capture_default_str();
  fit_cmd->add_option("--out-estimates", fit.out_estimates)->required();
  fit_cmd->add_option("--out-summary", fit.out_summary)->required();
  fit_cmd->add_option("--manifest", fit.manifest);
  fit_cmd->add_option("--config", fit.config, "key=value file; flags take precedence");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score estimates against ground truth");
  evaluate->add_option("--estimates", ev.estimates)->required();
  evaluate->add_option("--truth", ev.truth)->required();
  evaluate->add_option("--data", ev.data, "dataset for per-object scores");
  evaluate->add_option("--manifest", ev.manifest);
  evaluate->add_option("--config", ev.config, "key=value file; flags take precedence");

  try {
    const std::vector<std::string> args = expand_config(raw);
    std::vector<const char*> cargs;
    for (const auto& s : args) cargs.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
      app.exit(e, out, err);
      return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
      app.exit(e, out, err);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      app.exit(e, out, err);
      return kExitUsage;
    }
    if (generate->parsed()) return cmd_generate(gen, out);
    if (fit_cmd->parsed()) return cmd_fit(fit, err);
    return cmd_evaluate(ev, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace gpslc
