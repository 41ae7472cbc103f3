// Copyright 2026 The tscox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TSCOX_CLI_HPP
#define TSCOX_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "tscox/io.hpp"
#include "tscox/tscox.hpp"

/// \file
/// Batch front end: declarative run configs, the simulate / fit / compare /
/// summarize commands, and run manifests.
///
/// Every artifact directory gets a manifest.json holding the fully resolved
/// config (absolute paths, defaults filled in, seed) and git-style SHA-1
/// hashes of inputs and outputs; passing the manifest back as --config
/// re-runs the command bit-identically.

namespace tscox::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kParseError = 3, kNumericError = 4, kIncomparable = 5 };

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Domain:
    case ErrorKind::InvalidMark:
    case ErrorKind::NoContainingUnit: return kParseError;
    case ErrorKind::SingularCovariance:
    case ErrorKind::NonFiniteIntensity:
    case ErrorKind::NonFiniteLogLik:
    case ErrorKind::InvalidInitialState:
    case ErrorKind::DegenerateGeometry: return kNumericError;
    case ErrorKind::IncomparableModels: return kIncomparable;
    default: return kConfigError;
  }
}

/// SHA-1 of "blob <size>\0<content>", as `git hash-object` computes it.
inline std::string git_blob_sha1(const std::string& content) {
  const std::string head = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), head.data(), head.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    fail(ErrorKind::Io, "SHA-1 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

inline std::string file_sha1(const fs::path& p) { return git_blob_sha1(io::read_text(p)); }

// ---------------------------------------------------------------------------
// config

struct SimulationTruth {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  Eigen::VectorXd alpha;
  std::array<Eigen::VectorXd, 2> beta_mark;
  std::array<Eigen::VectorXd, 2> alpha_mark;
  std::optional<double> sigma_iid;
  double sigma1 = 1.0;
  std::optional<double> sigma2;
  double rho = 0.0;
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  bool seed_given = false;
  fs::path output;
  fs::path covariates;
  bool transpose = false;
  std::vector<fs::path> patterns;
  bool log_mark = false;
  ModelSpec model;
  NonspatialBounds bounds;
  McmcConfig mcmc;
  std::optional<std::size_t> budget;
  std::size_t knots = 100;
  std::optional<double> phi;
  std::size_t lattice = 400;
  // simulate
  SimulationTruth truth;
  NonspatialDistributionSpec nu_dist;
  std::size_t replicates = 1;
  // compare
  std::vector<std::pair<std::string, fs::path>> fits;
  // summarize
  fs::path chain;
};

namespace detail {

[[noreturn]] inline void bad(const std::string& key, const std::string& what) {
  fail(ErrorKind::Config, "config key '" + key + "': " + what);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(path.empty() ? key : path + "." + key, j.contains(key) ? "wrong type" : "missing");
  }
}

template <class T>
std::optional<T> get_opt(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key) || j[key].is_null()) return std::nullopt;
  return get<T>(j, key, path);
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> from_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return fs::weakly_canonical(path.is_absolute() ? path : base / path);
}

inline Design parse_design(const json& j, const std::string& key) {
  Design d;
  if (!j.contains(key) || j[key].is_null()) return d;
  const json& v = j[key];
  if (v.is_array()) {
    d.covariates = get<std::vector<std::string>>(j, key, "model");
    return d;
  }
  d.intercept = get_opt<bool>(v, "intercept", "model." + key).value_or(true);
  d.covariates = get_opt<std::vector<std::string>>(v, "covariates", "model." + key).value_or(std::vector<std::string>{});
  return d;
}

inline json design_json(const Design& d) { return json{{"intercept", d.intercept}, {"covariates", d.covariates}}; }

inline CovariateBound parse_bound(const json& j) {
  const auto kind = get<std::string>(j, "kind", "bounds");
  if (kind == "binary") return CovariateBound::binary();
  if (kind == "continuous") {
    const double lo = get<double>(j, "lower", "bounds");
    const double hi = get<double>(j, "upper", "bounds");
    if (!(lo < hi)) bad("bounds", "lower must be below upper");
    return CovariateBound::continuous(lo, hi);
  }
  bad("bounds.kind", "expected 'continuous' or 'binary', got '" + kind + "'");
}

inline json bound_json(const CovariateBound& b) {
  if (b.kind == CovariateBound::Kind::Binary) return json{{"kind", "binary"}};
  return json{{"kind", "continuous"}, {"lower", b.lower}, {"upper", b.upper}};
}

inline NonspatialDistribution parse_distribution(const json& j) {
  const auto kind = get<std::string>(j, "kind", "nonspatial_distributions");
  try {
    if (kind == "uniform") return NonspatialDistribution::uniform(get<double>(j, "lower", kind), get<double>(j, "upper", kind));
    if (kind == "beta") return NonspatialDistribution::beta(get<double>(j, "a", kind), get<double>(j, "b", kind));
    if (kind == "bernoulli") return NonspatialDistribution::bernoulli(get<double>(j, "p", kind));
    if (kind == "normal") return NonspatialDistribution::normal(get<double>(j, "mean", kind), get<double>(j, "sd", kind));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) bad("nonspatial_distributions", e.detail());
    throw;
  }
  bad("nonspatial_distributions.kind", "unknown distribution '" + kind + "'");
}

inline json distribution_json(const NonspatialDistribution& d) {
  using K = NonspatialDistribution::Kind;
  switch (d.kind) {
    case K::Uniform: return json{{"kind", "uniform"}, {"lower", d.a}, {"upper", d.b}};
    case K::Beta: return json{{"kind", "beta"}, {"a", d.a}, {"b", d.b}};
    case K::Bernoulli: return json{{"kind", "bernoulli"}, {"p", d.a}};
    case K::Normal: return json{{"kind", "normal"}, {"mean", d.a}, {"sd", d.b}};
  }
  return {};
}

}  // namespace detail

/// Parses a config document; relative paths resolve against `base`. A run
/// manifest is accepted too (its "config" member is used).
inline RunConfig parse_config(const json& doc_in, const fs::path& base) {
  using namespace detail;
  const json& doc = doc_in.contains("config") && doc_in["config"].is_object() ? doc_in["config"] : doc_in;
  if (!doc.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
  RunConfig c;
  c.command = get_opt<std::string>(doc, "command", "").value_or("");
  const auto seed = get_opt<std::uint64_t>(doc, "seed", "");
  if (seed) {
    c.seed = *seed;
    c.seed_given = true;
  }
  if (const auto out = get_opt<std::string>(doc, "output", "")) c.output = resolve(base, *out);
  if (const auto cov = get_opt<std::string>(doc, "covariates", "")) c.covariates = resolve(base, *cov);
  c.transpose = get_opt<bool>(doc, "transpose", "").value_or(false);
  c.log_mark = get_opt<bool>(doc, "log_mark", "").value_or(false);
  if (const auto p = get_opt<std::string>(doc, "pattern", "")) c.patterns.push_back(resolve(base, *p));
  if (const auto ps = get_opt<std::vector<std::string>>(doc, "patterns", "")) {
    for (const auto& p : *ps) c.patterns.push_back(resolve(base, p));
  }
  c.budget = get_opt<std::size_t>(doc, "budget", "");
  c.knots = get_opt<std::size_t>(doc, "knots", "").value_or(100);
  c.phi = get_opt<double>(doc, "phi", "");
  c.lattice = get_opt<std::size_t>(doc, "lattice", "").value_or(400);
  c.replicates = get_opt<std::size_t>(doc, "replicates", "").value_or(1);
  if (c.replicates == 0) bad("replicates", "must be at least 1");

  if (doc.contains("model")) {
    const json& m = doc["model"];
    const auto family = get_opt<std::string>(m, "family", "model").value_or("two-stage");
    if (family == "two-stage") {
      const int number = get_opt<int>(m, "model", "model").value_or(1);
      const auto marks = get_opt<std::string>(m, "marks", "model").value_or("logistic");
      if (marks != "logistic" && marks != "linear") bad("model.marks", "expected 'logistic' or 'linear'");
      c.model = ModelSpec::two_stage(number, marks == "linear" ? MarkFamily::Linear : MarkFamily::Logistic);
      c.model.stage2 = parse_design(m, "stage2");
    } else if (family == "bivariate") {
      c.model = ModelSpec::bivariate(get_opt<bool>(m, "gp", "model").value_or(false));
    } else {
      bad("model.family", "expected 'two-stage' or 'bivariate', got '" + family + "'");
    }
    c.model.stage1 = parse_design(m, "stage1");
    c.model.nonspatial = get_opt<std::vector<std::string>>(m, "nonspatial", "model").value_or(std::vector<std::string>{});
    if (m.contains("bounds")) {
      for (const auto& b : m["bounds"]) c.bounds.push_back(parse_bound(b));
    }
    if (c.model.is_two_stage() && (c.model.model < 1 || c.model.model > 4)) bad("model.model", "must be 1, 2, 3 or 4");
  }

  if (doc.contains("mcmc")) {
    const json& m = doc["mcmc"];
    c.mcmc.iterations = get_opt<std::size_t>(m, "iterations", "mcmc").value_or(c.mcmc.iterations);
    c.mcmc.burnin = get_opt<std::size_t>(m, "burnin", "mcmc").value_or(c.mcmc.burnin);
    c.mcmc.thin = get_opt<std::size_t>(m, "thin", "mcmc").value_or(c.mcmc.thin);
    c.mcmc.chains = get_opt<std::size_t>(m, "chains", "mcmc").value_or(c.mcmc.chains);
    c.mcmc.adapt = get_opt<bool>(m, "adapt", "mcmc").value_or(true);
  }

  if (doc.contains("truth")) {
    const json& t = doc["truth"];
    auto v = [&](const char* key) {
      return to_vector(get_opt<std::vector<double>>(t, key, "truth").value_or(std::vector<double>{}));
    };
    c.truth.beta = v("beta");
    c.truth.gamma = v("gamma");
    c.truth.alpha = v("alpha");
    for (const char* key : {"beta_mark", "alpha_mark"}) {
      if (!t.contains(key)) continue;
      const auto rows = get<std::vector<std::vector<double>>>(t, key, "truth");
      if (rows.size() != 2) bad(std::string("truth.") + key, "needs one vector per mark");
      auto& dst = std::string(key) == "beta_mark" ? c.truth.beta_mark : c.truth.alpha_mark;
      dst = {to_vector(rows[0]), to_vector(rows[1])};
    }
    c.truth.sigma_iid = get_opt<double>(t, "sigma_iid", "truth");
    c.truth.sigma1 = get_opt<double>(t, "sigma1", "truth").value_or(1.0);
    c.truth.sigma2 = get_opt<double>(t, "sigma2", "truth");
    c.truth.rho = get_opt<double>(t, "rho", "truth").value_or(0.0);
  }
  if (doc.contains("nonspatial_distributions")) {
    for (const auto& d : doc["nonspatial_distributions"]) c.nu_dist.push_back(parse_distribution(d));
  }
  if (doc.contains("fits")) {
    const json& f = doc["fits"];
    if (!f.is_object()) bad("fits", "expected an object mapping model names to fit directories");
    for (const auto& [name, dir] : f.items()) {
      if (!dir.is_string()) bad("fits." + name, "expected a directory path");
      c.fits.emplace_back(name, resolve(base, dir.get<std::string>()));
    }
  }
  if (const auto ch = get_opt<std::string>(doc, "chain", "")) c.chain = resolve(base, *ch);
  if (seed) c.mcmc.seed = *seed;
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, "cannot parse config '" + path.string() + "': " + e.what());
  }
  return parse_config(doc, fs::absolute(path).parent_path());
}

/// Fully resolved config, suitable for the manifest.
inline json to_json(const RunConfig& c) {
  using detail::from_vector;
  json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["output"] = c.output.string();
  if (c.command == "simulate" || c.command == "fit") {
    j["covariates"] = c.covariates.string();
    j["transpose"] = c.transpose;
    j["lattice"] = c.lattice;
    j["phi"] = c.phi ? json(*c.phi) : json(nullptr);
    json m;
    m["family"] = c.model.is_two_stage() ? "two-stage" : "bivariate";
    if (c.model.is_two_stage()) {
      m["model"] = c.model.model;
      m["marks"] = c.model.marks == MarkFamily::Linear ? "linear" : "logistic";
    } else {
      m["gp"] = c.model.with_gp;
    }
    m["stage1"] = detail::design_json(c.model.stage1);
    if (c.model.is_two_stage()) m["stage2"] = detail::design_json(c.model.stage2);
    m["nonspatial"] = c.model.nonspatial;
    m["bounds"] = json::array();
    for (const auto& b : c.bounds) m["bounds"].push_back(detail::bound_json(b));
    j["model"] = m;
  }
  if (c.command == "fit") {
    json ps = json::array();
    for (const auto& p : c.patterns) ps.push_back(p.string());
    j["patterns"] = ps;
    j["log_mark"] = c.log_mark;
    j["budget"] = c.budget ? json(*c.budget) : json(nullptr);
    j["knots"] = c.knots;
    j["mcmc"] = {{"iterations", c.mcmc.iterations},
                 {"burnin", c.mcmc.burnin},
                 {"thin", c.mcmc.thin},
                 {"chains", c.mcmc.chains},
                 {"adapt", c.mcmc.adapt}};
  }
  if (c.command == "simulate") {
    j["replicates"] = c.replicates;
    json t;
    t["beta"] = from_vector(c.truth.beta);
    t["gamma"] = from_vector(c.truth.gamma);
    t["alpha"] = from_vector(c.truth.alpha);
    if (!c.model.is_two_stage()) {
      t["beta_mark"] = {from_vector(c.truth.beta_mark[0]), from_vector(c.truth.beta_mark[1])};
      t["alpha_mark"] = {from_vector(c.truth.alpha_mark[0]), from_vector(c.truth.alpha_mark[1])};
    }
    t["sigma_iid"] = c.truth.sigma_iid ? json(*c.truth.sigma_iid) : json(nullptr);
    t["sigma1"] = c.truth.sigma1;
    t["sigma2"] = c.truth.sigma2 ? json(*c.truth.sigma2) : json(nullptr);
    t["rho"] = c.truth.rho;
    j["truth"] = t;
    j["nonspatial_distributions"] = json::array();
    for (const auto& d : c.nu_dist) j["nonspatial_distributions"].push_back(detail::distribution_json(d));
  }
  if (c.command == "compare") {
    json f = json::object();
    for (const auto& [name, dir] : c.fits) f[name] = dir.string();
    j["fits"] = f;
  }
  if (c.command == "summarize") j["chain"] = c.chain.string();
  return j;
}

/// Scalar overrides given on the command line.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> burnin;
  std::optional<std::size_t> thin;
  std::optional<std::size_t> chains;
  std::optional<std::size_t> knots;
  std::optional<std::size_t> budget;
  std::optional<std::string> output;
  bool log_mark = false;
  bool transpose = false;
};

inline void apply(RunConfig& c, const Overrides& o) {
  if (o.seed) {
    c.seed = c.mcmc.seed = *o.seed;
    c.seed_given = true;
  }
  if (o.iterations) c.mcmc.iterations = *o.iterations;
  if (o.burnin) c.mcmc.burnin = *o.burnin;
  if (o.thin) c.mcmc.thin = *o.thin;
  if (o.chains) c.mcmc.chains = *o.chains;
  if (o.knots) c.knots = *o.knots;
  if (o.budget) c.budget = *o.budget;
  if (o.output) c.output = fs::weakly_canonical(fs::absolute(*o.output));
  if (o.log_mark) c.log_mark = true;
  if (o.transpose) c.transpose = true;
}

// ---------------------------------------------------------------------------
// commands

namespace detail {

class ArtifactDir {
 public:
  explicit ArtifactDir(fs::path root) : root_(std::move(root)) {
    if (root_.empty()) fail(ErrorKind::Config, "config key 'output' is required");
    fs::create_directories(root_);
  }

  /// Writes one artifact; names are plain file names inside the directory.
  template <class F>
  void write(const std::string& name, F&& writer) {
    const fs::path p = root_ / name;
    {
      auto out = io::open_out(p);
      writer(out);
      if (!out) fail(ErrorKind::Io, "failed writing '" + p.string() + "'");
    }
    outputs_.push_back(name);
  }

  void manifest(const RunConfig& cfg, const std::vector<fs::path>& inputs) {
    json m;
    m["tool"] = "tscox";
    m["version"] = kVersion;
    m["command"] = cfg.command;
    m["config"] = to_json(cfg);
    m["inputs"] = json::array();
    for (const auto& p : inputs) m["inputs"].push_back({{"path", p.string()}, {"sha1", file_sha1(p)}});
    m["outputs"] = json::array();
    for (const auto& name : outputs_) m["outputs"].push_back({{"file", name}, {"sha1", file_sha1(root_ / name)}});
    auto out = io::open_out(root_ / "manifest.json");
    out << m.dump(2) << '\n';
  }

  [[nodiscard]] const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  std::vector<std::string> outputs_;
};

inline void require_file(const fs::path& p, const std::string& key) {
  if (p.empty()) bad(key, "missing");
  if (!fs::is_regular_file(p)) fail(ErrorKind::Config, "config key '" + key + "': file '" + p.string() + "' does not exist");
}

inline double resolve_phi(const RunConfig& cfg, const CovariateField& field) {
  if (cfg.phi) return *cfg.phi;
  const auto lattice = make_lattice(field, cfg.lattice);
  return fix_phi(std::span<const Location>(lattice));
}

inline std::size_t default_budget(const CovariateField& field) {
  return field.is_grid() ? field.unit_count() : 4 * field.unit_count();
}

inline ModelSpec fit_spec(const RunConfig& cfg, const CovariateField& field) {
  ModelSpec spec = cfg.model;
  if (spec.has_gp()) {
    GPSpec g;
    g.phi = resolve_phi(cfg, field);
    g.knots = default_knots(field.window(), cfg.knots);
    spec.gp = g;
  }
  spec.validate();
  return spec;
}

inline std::string indexed(const std::string& stem, std::size_t k, std::size_t n) {
  return n == 1 ? stem + ".csv" : stem + "_" + std::to_string(k + 1) + ".csv";
}

}  // namespace detail

inline void run_simulate(const RunConfig& cfg, std::ostream& log) {
  detail::require_file(cfg.covariates, "covariates");
  const CovariateField field = io::read_covariates(cfg.covariates, cfg.transpose);
  const ModelSpec& spec = cfg.model;
  if (cfg.nu_dist.size() != spec.nonspatial.size()) {
    detail::bad("nonspatial_distributions", "needs one entry per nonspatial covariate");
  }
  const auto lattice = make_lattice(field, cfg.lattice);
  const double phi = cfg.phi.value_or(fix_phi(std::span<const Location>(lattice)));
  detail::ArtifactDir dir(cfg.output);
  json report = json::array();
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    const std::uint64_t seed = cfg.seed + r;
    std::optional<GPRealization> gp;
    if (spec.has_gp()) {
      GPSpec g;
      g.sigma1 = cfg.truth.sigma1;
      g.phi = phi;
      const bool two = spec.latent_processes() == 2;
      if (two) {
        if (!cfg.truth.sigma2) detail::bad("truth.sigma2", "required by this model");
        g.sigma2 = cfg.truth.sigma2;
        g.rho = spec.uses_rho() ? cfg.truth.rho : 0.0;
      }
      gp = simulate_gp(g, lattice, two, seed);
    }
    SimulationResult res;
    if (spec.is_two_stage()) {
      TwoStageSimulationSpec s;
      s.stage1 = spec.stage1;
      s.stage2 = spec.stage2;
      s.beta = cfg.truth.beta;
      s.gamma = cfg.truth.gamma;
      s.alpha = cfg.truth.alpha;
      s.marks = spec.marks;
      s.sigma_iid = cfg.truth.sigma_iid;
      s.nu = cfg.nu_dist;
      s.nu_names = spec.nonspatial;
      res = simulate_two_stage(s, field, gp, seed, lattice);
    } else {
      BivariateSimulationSpec s;
      s.design = spec.stage1;
      s.beta = cfg.truth.beta_mark;
      s.alpha = cfg.truth.alpha_mark;
      s.nu = cfg.nu_dist;
      s.bounds = cfg.bounds;
      s.nu_names = spec.nonspatial;
      res = simulate_bivariate(s, field, gp, seed, lattice);
    }
    for (const auto& w : res.warnings) log << "warning: " << w << '\n';
    dir.write(detail::indexed("pattern", r, cfg.replicates), [&](std::ostream& o) { io::write_pattern(o, res.pattern); });
    if (gp) dir.write(detail::indexed("latent", r, cfg.replicates), [&](std::ostream& o) { io::write_realization(o, *gp); });
    report.push_back({{"seed", seed},
                      {"events", res.pattern.size()},
                      {"lambda_max", res.lambda_max},
                      {"proposed", res.proposed},
                      {"clamped", res.clamped},
                      {"unit_counts", res.unit_counts},
                      {"warnings", res.warnings}});
    log << "replicate " << r + 1 << ": " << res.pattern.size() << " events\n";
  }
  dir.write("simulation.json", [&](std::ostream& o) { o << json{{"phi", phi}, {"replicates", report}}.dump(2) << '\n'; });
  dir.manifest(cfg, {cfg.covariates});
}

inline void run_fit(const RunConfig& cfg, std::ostream& log) {
  detail::require_file(cfg.covariates, "covariates");
  if (cfg.patterns.empty()) detail::bad("pattern", "missing");
  for (const auto& p : cfg.patterns) detail::require_file(p, "pattern");
  const CovariateField field = io::read_covariates(cfg.covariates, cfg.transpose);
  const ModelSpec spec = detail::fit_spec(cfg, field);

  io::PatternReadOptions opt;
  opt.log_mark = cfg.log_mark;
  opt.transpose = cfg.transpose;
  std::vector<PointPattern> reps;
  for (const auto& p : cfg.patterns) reps.push_back(io::read_pattern(p, field.window(), opt));
  for (const auto& p : reps) {
    if (p.nu_names() != spec.nonspatial) {
      fail(ErrorKind::Config, "pattern nonspatial columns do not match model.nonspatial");
    }
  }

  const IntegrationScheme scheme =
      place_integration_points(field, cfg.budget.value_or(detail::default_budget(field)), cfg.seed);
  std::unique_ptr<ModelPosterior> post;
  if (spec.is_two_stage()) {
    post = std::make_unique<ModelPosterior>(TwoStageLikelihood(spec, field, reps, scheme));
  } else {
    post = std::make_unique<ModelPosterior>(BivariateLikelihood(spec, field, reps, scheme, cfg.bounds));
  }
  McmcConfig mc = cfg.mcmc;
  mc.seed = cfg.seed;
  log << "fitting " << post->event_count() << " events, " << post->scalar_count() << " scalar parameters, "
      << mc.chains << " chain(s)\n";
  const PosteriorChain chain = merge_chains(run_chains(*post, mc));
  const SummaryTable table = summarize(chain);
  const DiagnosticsReport diag = mcmc_diagnostics(chain);
  const WaicResult w = waic_details(chain.pointwise_loglik);

  detail::ArtifactDir dir(cfg.output);
  dir.write("chain.csv", [&](std::ostream& o) { io::write_chain(o, chain); });
  dir.write("summary.csv", [&](std::ostream& o) { io::write_summary(o, table); });
  dir.write("diagnostics.json", [&](std::ostream& o) { o << io::diagnostics_json(diag).dump(2) << '\n'; });
  dir.write("pointwise.csv", [&](std::ostream& o) { io::write_pointwise(o, chain.pointwise_loglik); });
  dir.write("waic.json", [&](std::ostream& o) {
    o << json{{"waic", w.waic}, {"lppd", w.lppd}, {"p_waic", w.p_waic}, {"events", chain.event_count()}}.dump(2)
      << '\n';
  });
  dir.write("scheme.csv", [&](std::ostream& o) { io::write_scheme(o, scheme); });
  if (spec.gp) {
    dir.write("knots.csv", [&](std::ostream& o) { io::write_locations(o, spec.gp->knots); });
  }
  std::vector<fs::path> inputs{cfg.covariates};
  inputs.insert(inputs.end(), cfg.patterns.begin(), cfg.patterns.end());
  dir.manifest(cfg, inputs);
  log << "WAIC " << io::format_number(w.waic) << '\n';
}

inline void run_compare(const RunConfig& cfg, std::ostream& log) {
  if (cfg.fits.empty()) detail::bad("fits", "missing");
  std::vector<ModelScore> scores;
  std::optional<std::set<std::string>> data_hashes;
  std::string first;
  std::vector<fs::path> inputs;
  for (const auto& [name, d] : cfg.fits) {
    const fs::path pw = d / "pointwise.csv";
    detail::require_file(pw, "fits." + name);
    inputs.push_back(pw);
    // Fits whose manifests name different pattern data are not comparable.
    if (fs::is_regular_file(d / "manifest.json")) {
      const json m = json::parse(io::read_text(d / "manifest.json"), nullptr, false);
      if (!m.is_discarded() && m.contains("inputs") && m.contains("config")) {
        std::set<std::string> hashes;
        const json lists = m["config"].value("patterns", json::array());
        for (const auto& in : m["inputs"]) {
          for (const auto& p : lists) {
            if (in.value("path", "") == p.get<std::string>()) hashes.insert(in.value("sha1", ""));
          }
        }
        if (!data_hashes) {
          data_hashes = hashes;
          first = name;
        } else if (*data_hashes != hashes) {
          fail(ErrorKind::IncomparableModels, "fits '" + first + "' and '" + name + "' use different pattern data");
        }
      }
    }
    auto in = io::open_in(pw);
    const Eigen::MatrixXd m = io::read_pointwise(in);
    scores.push_back(ModelScore{name, static_cast<std::size_t>(m.cols()), {}, 0, false});
    (void)rank_models(scores);
    scores.back().score = waic_details(m);
  }
  const auto ranking = rank_models(scores);
  detail::ArtifactDir dir(cfg.output);
  dir.write("ranking.csv", [&](std::ostream& o) { io::write_ranking(o, ranking); });
  dir.manifest(cfg, inputs);
  log << "best model: " << ranking.front().name << '\n';
}

inline void run_summarize(const RunConfig& cfg, std::ostream& log) {
  detail::require_file(cfg.chain, "chain");
  auto in = io::open_in(cfg.chain);
  const PosteriorChain chain = io::read_chain(in);
  const SummaryTable table = summarize(chain);
  const DiagnosticsReport diag = mcmc_diagnostics(chain);
  detail::ArtifactDir dir(cfg.output);
  dir.write("summary.csv", [&](std::ostream& o) { io::write_summary(o, table); });
  dir.write("diagnostics.json", [&](std::ostream& o) { o << io::diagnostics_json(diag).dump(2) << '\n'; });
  dir.manifest(cfg, {cfg.chain});
  log << "summarized " << chain.size() << " samples of " << chain.scalar_count << " parameters\n";
}

inline void run(RunConfig cfg, std::ostream& log) {
  if ((cfg.command == "simulate" || cfg.command == "fit") && !cfg.seed_given) {
    fail(ErrorKind::Config, "config key 'seed': missing; runs must be seeded to be reproducible");
  }
  if (cfg.command == "simulate") return run_simulate(cfg, log);
  if (cfg.command == "fit") return run_fit(cfg, log);
  if (cfg.command == "compare") return run_compare(cfg, log);
  if (cfg.command == "summarize") return run_summarize(cfg, log);
  fail(ErrorKind::Config, "unknown command '" + cfg.command + "'");
}

/// Entry point of the executable. Errors print one line to `err`:
///   error kind=<Kind> exit=<code> message=<text>
inline int main(int argc, char** argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Two-stage log Gaussian Cox process models: simulate, fit, compare, summarize"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string config_path;
  Overrides ov;
  for (const char* name : {"simulate", "fit", "compare", "summarize"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config,-c", config_path, "JSON run config or manifest")->required();
    sub->add_option("--seed", ov.seed, "override the seed");
    sub->add_option("--output,-o", ov.output, "override the output directory");
    if (std::string(name) == "fit") {
      sub->add_option("--iters", ov.iterations, "MCMC iterations");
      sub->add_option("--burnin", ov.burnin, "burn-in iterations");
      sub->add_option("--thin", ov.thin, "thinning interval");
      sub->add_option("--chains", ov.chains, "independent chains run concurrently");
      sub->add_option("--knots", ov.knots, "number of predictive-process knots");
      sub->add_option("--budget", ov.budget, "integration point budget");
      sub->add_flag("--log-mark", ov.log_mark, "log-transform positive real marks");
    }
    if (std::string(name) == "fit" || std::string(name) == "simulate") {
      sub->add_flag("--transpose", ov.transpose, "swap x and y in all spatial inputs");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    log << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error kind=Config exit=" << kConfigError << " message=" << e.what() << '\n';
    return kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = load_config(config_path);
    if (!cfg.command.empty() && cfg.command != command) {
      fail(ErrorKind::Config, "config is for '" + cfg.command + "' but '" + command + "' was requested");
    }
    cfg.command = command;
    apply(cfg, ov);
    run(std::move(cfg), log);
  } catch (const Error& e) {
    const int code = exit_code(e.kind());
    err << "error kind=" << to_string(e.kind()) << " exit=" << code << " message=" << e.detail() << '\n';
    return code;
  } catch (const fs::filesystem_error& e) {
    err << "error kind=Io exit=" << kConfigError << " message=" << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

}  // namespace tscox::cli

#endif  // TSCOX_CLI_HPP
