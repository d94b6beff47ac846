/*
 * Copyright 2026 The gpbf Authors
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

#ifndef GPBF_EXPERIMENT_HPP
#define GPBF_EXPERIMENT_HPP

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gpbf/data.hpp"
#include "gpbf/lowrank.hpp"
#include "gpbf/models.hpp"
#include "gpbf/rng.hpp"

namespace gpbf {

using nlohmann::json;

enum class Family { Linear, SE, Ar1 };
enum class VarianceKind { Known, InverseGamma };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::Linear: return "linear";
    case Family::SE: return "se";
    case Family::Ar1: return "ar1";
  }
  return "?";
}

struct QuadratureSpec {
  bool enabled = false;
  int nodes = 64;
  int max_nodes = 512;
  double tol = 1e-6;
};

/*
 * Full description of one experiment: model family and hyperparameters,
 * true subset, candidate subsets, sample-size grid, replicate count, the
 * variance mode, and (for the AR(1) family) the quadrature rule for the
 * prior on rho.  A fixed seed makes every output byte-identical.
 */
struct ExperimentConfig {
  Family family = Family::Linear;
  int p = 4;
  std::vector<int> s0_indices = {1, 2};
  std::uint64_t seed = 0;
  std::vector<int> n_grid = {100, 200, 400, 800, 1600};
  int n_gen = 0;  // generation length; 0 means max(n_grid)
  int replicates = 50;
  bool candidates_all = true;
  std::vector<std::vector<int>> candidate_lists;
  VarianceKind variance = VarianceKind::Known;
  double alpha = 3.0;
  double beta = 1.0;
  double covariate_bound = 1.0;
  LinearZellnerSpec linear;
  SEKernelSpec se;
  AR1Spec ar1;
  QuadratureSpec quadrature;
  // Inverse-gamma mode ties the SE process variance to the error variance
  // (scale I + K); untied, sigma_f_sq acts as the process-to-error ratio.
  bool se_tie_process_variance = true;

  SubsetMask s0() const { return SubsetMask(s0_indices, p); }

  std::vector<SubsetMask> candidates() const {
    if (candidates_all) return SubsetMask::all_subsets(p);
    std::vector<SubsetMask> out;
    out.reserve(candidate_lists.size());
    for (const auto& c : candidate_lists) out.emplace_back(c, p);
    return out;
  }

  int generation_length() const {
    const int nmax = *std::max_element(n_grid.begin(), n_grid.end());
    return n_gen > 0 ? n_gen : nmax;
  }

  void validate() const {
    if (p < 1 || p > 16) throw ValidationError("p", "must be in [1, 16]");
    try {
      (void)s0();
    } catch (const InvalidArgument& e) {
      throw ValidationError("s0", e.what());
    }
    if (n_grid.empty()) throw ValidationError("n_grid", "must be nonempty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      if (n_grid[i] < 1) throw ValidationError("n_grid", "entries must be >= 1");
      if (i > 0 && n_grid[i] <= n_grid[i - 1])
        throw ValidationError("n_grid", "must be strictly increasing");
    }
    if (n_gen < 0) throw ValidationError("n_gen", "must be >= 0");
    if (n_gen > 0 && n_gen < n_grid.back())
      throw ValidationError("n_gen", "must be >= max(n_grid)");
    if (replicates < 1) throw ValidationError("replicates", "must be >= 1");
    if (!candidates_all) {
      if (candidate_lists.empty())
        throw ValidationError("candidates", "must list at least one subset");
      for (const auto& c : candidate_lists)
        try {
          (void)SubsetMask(c, p);
        } catch (const InvalidArgument& e) {
          throw ValidationError("candidates", e.what());
        }
    }
    if (!(covariate_bound > 0))
      throw ValidationError("covariate_bound", "must be > 0");
    if (variance == VarianceKind::InverseGamma) {
      if (!(alpha > 2))
        throw ValidationError("alpha", "inverse-gamma variance mode requires alpha > 2");
      if (!(beta > 0))
        throw ValidationError("beta", "inverse-gamma variance mode requires beta > 0");
    }
    switch (family) {
      case Family::Linear: linear.validate(p); break;
      case Family::SE: se.validate(p); break;
      case Family::Ar1: ar1.validate(p); break;
    }
    if (quadrature.enabled) {
      if (family != Family::Ar1)
        throw ValidationError("quadrature", "only the ar1 family integrates over a prior");
      if (quadrature.nodes < 1) throw ValidationError("quadrature.nodes", "must be >= 1");
      if (quadrature.max_nodes < quadrature.nodes)
        throw ValidationError("quadrature.max_nodes", "must be >= quadrature.nodes");
      if (!(quadrature.tol > 0)) throw ValidationError("quadrature.tol", "must be > 0");
    }
  }
};

// ---------------------------------------------------------------------------
// JSON parsing.  Unknown keys are rejected with their full path; missing
// keys fall back to documented defaults.
// ---------------------------------------------------------------------------
namespace cfgdetail {

inline void reject_unknown(const json& j, const std::vector<std::string>& known,
                           const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ValidationError(where.empty() ? it.key() : where + "." + it.key(),
                            "unknown key");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(key, std::string("wrong type: ") + e.what());
  }
}

inline VectorXd get_vector(const json& j, const std::string& key, const VectorXd& fallback) {
  if (!j.contains(key)) return fallback;
  std::vector<double> v;
  try {
    v = j.at(key).get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ValidationError(key, std::string("expected an array of numbers: ") + e.what());
  }
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace cfgdetail

inline ExperimentConfig parse_config(const json& j) {
  using namespace cfgdetail;
  reject_unknown(j, {"family", "p", "s0", "seed", "n_grid", "n_gen", "replicates",
                     "candidates", "variance_mode", "alpha", "beta", "covariate_bound",
                     "spec", "quadrature"},
                 "");
  ExperimentConfig c;
  const std::string fam = get_or<std::string>(j, "family", "linear");
  if (fam == "linear")
    c.family = Family::Linear;
  else if (fam == "se")
    c.family = Family::SE;
  else if (fam == "ar1")
    c.family = Family::Ar1;
  else
    throw ValidationError("family", "must be one of linear | se | ar1");

  c.p = get_or<int>(j, "p", 4);
  if (c.p < 1 || c.p > 16) throw ValidationError("p", "must be in [1, 16]");
  c.s0_indices = get_or<std::vector<int>>(j, "s0", {1, 2});
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  c.n_grid = get_or<std::vector<int>>(j, "n_grid", {100, 200, 400, 800, 1600});
  c.n_gen = get_or<int>(j, "n_gen", 0);
  c.replicates = get_or<int>(j, "replicates", 50);

  if (j.contains("candidates")) {
    const json& cand = j.at("candidates");
    if (cand.is_string() && cand.get<std::string>() == "all") {
      c.candidates_all = true;
    } else if (cand.is_array()) {
      c.candidates_all = false;
      try {
        c.candidate_lists = cand.get<std::vector<std::vector<int>>>();
      } catch (const json::exception& e) {
        throw ValidationError("candidates",
                              std::string("expected \"all\" or an array of index arrays: ") +
                                  e.what());
      }
    } else {
      throw ValidationError("candidates", "expected \"all\" or an array of index arrays");
    }
  }

  const std::string vm = get_or<std::string>(j, "variance_mode", "known");
  if (vm == "known")
    c.variance = VarianceKind::Known;
  else if (vm == "inverse_gamma")
    c.variance = VarianceKind::InverseGamma;
  else
    throw ValidationError("variance_mode", "must be known | inverse_gamma");
  c.alpha = get_or<double>(j, "alpha", 3.0);
  c.beta = get_or<double>(j, "beta", 1.0);
  c.covariate_bound = get_or<double>(j, "covariate_bound", 1.0);

  const json spec = j.contains("spec") ? j.at("spec") : json::object();
  switch (c.family) {
    case Family::Linear: {
      reject_unknown(spec, {"beta0", "sigma_beta_sq", "g", "sigma_eps_sq"}, "spec");
      c.linear.beta0 = get_vector(spec, "beta0", VectorXd::Ones(c.p));
      c.linear.sigma_beta_sq = get_or<double>(spec, "sigma_beta_sq", 1.0);
      c.linear.g = get_or<double>(spec, "g", 1.0);
      c.linear.sigma_eps_sq = get_or<double>(spec, "sigma_eps_sq", 1.0);
      break;
    }
    case Family::SE: {
      reject_unknown(spec,
                     {"sigma_f_sq", "length_scales", "sigma_eps_sq", "mean",
                      "tie_process_variance"},
                     "spec");
      c.se.sigma_f_sq = get_or<double>(spec, "sigma_f_sq", 1.0);
      c.se.length_scales = get_vector(spec, "length_scales", VectorXd::Ones(c.p));
      c.se.sigma_eps_sq = get_or<double>(spec, "sigma_eps_sq", 1.0);
      c.se_tie_process_variance = get_or<bool>(spec, "tie_process_variance", true);
      if (spec.contains("mean")) {
        const json& mj = spec.at("mean");
        reject_unknown(mj, {"type", "value", "coeffs", "bound"}, "spec.mean");
        const std::string type = get_or<std::string>(mj, "type", "constant");
        if (type == "constant") {
          c.se.mean_fn.kind = MeanFunction::Kind::Constant;
          c.se.mean_fn.value = get_or<double>(mj, "value", 0.0);
        } else if (type == "clipped_linear") {
          c.se.mean_fn.kind = MeanFunction::Kind::ClippedLinear;
          c.se.mean_fn.coeffs = get_vector(mj, "coeffs", VectorXd::Ones(c.p));
          c.se.mean_fn.bound = get_or<double>(mj, "bound", 5.0);
        } else {
          throw ValidationError("spec.mean.type", "must be constant | clipped_linear");
        }
      } else {
        c.se.mean_fn.kind = MeanFunction::Kind::Constant;
        c.se.mean_fn.value = 0.0;
      }
      break;
    }
    case Family::Ar1: {
      reject_unknown(spec, {"rho", "gamma", "beta0", "sigma_beta_sq", "g", "sigma_eps_sq"},
                     "spec");
      c.ar1.rho = get_or<double>(spec, "rho", 0.5);
      c.ar1.gamma = get_or<double>(spec, "gamma", 0.1);
      c.ar1.beta0 = get_vector(spec, "beta0", VectorXd::Ones(c.p));
      c.ar1.sigma_beta_sq = get_or<double>(spec, "sigma_beta_sq", 1.0);
      c.ar1.g = get_or<double>(spec, "g", 1.0);
      c.ar1.sigma_eps_sq = get_or<double>(spec, "sigma_eps_sq", 1.0);
      break;
    }
  }

  if (j.contains("quadrature") && !j.at("quadrature").is_null()) {
    const json& q = j.at("quadrature");
    reject_unknown(q, {"nodes", "max_nodes", "tol"}, "quadrature");
    c.quadrature.enabled = true;
    c.quadrature.nodes = get_or<int>(q, "nodes", 64);
    c.quadrature.max_nodes = get_or<int>(q, "max_nodes", 512);
    c.quadrature.tol = get_or<double>(q, "tol", 1e-6);
  }

  c.validate();
  return c;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + " byte " + std::to_string(e.byte), e.what());
  }
  return parse_config(j);
}

inline json serialize_config(const ExperimentConfig& c) {
  json j;
  j["family"] = family_name(c.family);
  j["p"] = c.p;
  j["s0"] = c.s0_indices;
  j["seed"] = c.seed;
  j["n_grid"] = c.n_grid;
  j["n_gen"] = c.n_gen;
  j["replicates"] = c.replicates;
  if (c.candidates_all)
    j["candidates"] = "all";
  else
    j["candidates"] = c.candidate_lists;
  j["variance_mode"] = c.variance == VarianceKind::Known ? "known" : "inverse_gamma";
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["covariate_bound"] = c.covariate_bound;
  json spec;
  switch (c.family) {
    case Family::Linear:
      spec["beta0"] = std::vector<double>(c.linear.beta0.data(),
                                          c.linear.beta0.data() + c.linear.beta0.size());
      spec["sigma_beta_sq"] = c.linear.sigma_beta_sq;
      spec["g"] = c.linear.g;
      spec["sigma_eps_sq"] = c.linear.sigma_eps_sq;
      break;
    case Family::SE: {
      spec["sigma_f_sq"] = c.se.sigma_f_sq;
      spec["length_scales"] = std::vector<double>(
          c.se.length_scales.data(), c.se.length_scales.data() + c.se.length_scales.size());
      spec["sigma_eps_sq"] = c.se.sigma_eps_sq;
      spec["tie_process_variance"] = c.se_tie_process_variance;
      json mj;
      if (c.se.mean_fn.kind == MeanFunction::Kind::Constant) {
        mj["type"] = "constant";
        mj["value"] = c.se.mean_fn.value;
      } else {
        mj["type"] = "clipped_linear";
        mj["coeffs"] = std::vector<double>(
            c.se.mean_fn.coeffs.data(), c.se.mean_fn.coeffs.data() + c.se.mean_fn.coeffs.size());
        mj["bound"] = c.se.mean_fn.bound;
      }
      spec["mean"] = mj;
      break;
    }
    case Family::Ar1:
      spec["rho"] = c.ar1.rho;
      spec["gamma"] = c.ar1.gamma;
      spec["beta0"] = std::vector<double>(c.ar1.beta0.data(),
                                          c.ar1.beta0.data() + c.ar1.beta0.size());
      spec["sigma_beta_sq"] = c.ar1.sigma_beta_sq;
      spec["g"] = c.ar1.g;
      spec["sigma_eps_sq"] = c.ar1.sigma_eps_sq;
      break;
  }
  j["spec"] = spec;
  if (c.quadrature.enabled) {
    json q;
    q["nodes"] = c.quadrature.nodes;
    q["max_nodes"] = c.quadrature.max_nodes;
    q["tol"] = c.quadrature.tol;
    j["quadrature"] = q;
  }
  return j;
}

// "key.path=value" overrides applied to a default-filled config json.  The
// path must already exist; values parse as JSON when possible, else as a
// bare string.
inline void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ValidationError(assignment, "override must look like key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string tok;
  while (std::getline(ss, tok, '.')) parts.push_back(tok);
  if (parts.empty()) throw ValidationError(assignment, "empty override key");

  json* node = &j;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object() || !node->contains(parts[i]))
      throw ValidationError(path, "override references a key that does not exist");
    node = &(*node)[parts[i]];
  }
  if (!node->is_object() || !node->contains(parts.back()))
    throw ValidationError(path, "override references a key that does not exist");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // plain string
  }
  (*node)[parts.back()] = parsed;
}

// ---------------------------------------------------------------------------
// Model-building glue used by the audit module and the simulation harness.
// ---------------------------------------------------------------------------

// Covariates are i.i.d. uniform on [-B, B], drawn row-major so that prefixes
// of the draw stream are prefixes of the design.
inline MatrixXd generate_covariates(const ExperimentConfig& c, Rng& rng, Eigen::Index n) {
  MatrixXd x(n, c.p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int jcol = 0; jcol < c.p; ++jcol)
      x(i, jcol) = rng.uniform(-c.covariate_bound, c.covariate_bound);
  return x;
}

// Moments at the configured (true) hyperparameters.
inline ModelMoments build_moments(const ExperimentConfig& c, const Dataset& data,
                                  const SubsetMask& s) {
  switch (c.family) {
    case Family::Linear: return build_linear_zellner(data, s, c.linear);
    case Family::SE: return build_se_gp(data, s, c.se);
    case Family::Ar1: return build_ar1_zellner(data, s, c.ar1);
  }
  throw InvalidArgument("build_moments: bad family");
}

// AR(1) moments at a quadrature node.
inline ModelMoments build_moments_ar1_at(const ExperimentConfig& c, const Dataset& data,
                                         const SubsetMask& s, double rho) {
  AR1Spec spec = c.ar1;
  spec.rho = rho;
  return build_ar1_zellner(data, s, spec);
}

}  // namespace gpbf

#endif  // GPBF_EXPERIMENT_HPP
