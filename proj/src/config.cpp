#include "trajprune/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "trajprune/errors.hpp"

namespace trajprune {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

DatasetSpec parse_dataset(const json& j) {
  Reader r(j, "dataset");
  DatasetSpec d;
  std::string kind = "blobs";
  r.opt("kind", kind);
  if (kind == "blobs") d.kind = DatasetSpec::Kind::blobs;
  else if (kind == "csv") d.kind = DatasetSpec::Kind::csv;
  else throw ConfigError("dataset.kind: unknown '" + kind + "'");
  r.opt("n", d.n);
  r.opt("d", d.d);
  r.opt("classes", d.classes);
  r.opt("cluster_std", d.cluster_std);
  r.opt("center_scale", d.center_scale);
  r.opt("n_test", d.n_test);
  if (r.child("seed")) {
    std::uint64_t seed = 0;
    r.opt("seed", seed);
    d.seed = seed;
  }
  r.opt("path", d.path);
  r.opt("test_fraction", d.test_fraction);
  r.finish();
  return d;
}

ReferenceSpec parse_reference(const json& j) {
  Reader r(j, "reference");
  ReferenceSpec s;
  std::string kind = "held_out_clean";
  r.opt("kind", kind);
  if (kind == "held_out_clean") s.kind = ReferenceSpec::Kind::held_out_clean;
  else if (kind == "pseudo_small_loss") s.kind = ReferenceSpec::Kind::pseudo_small_loss;
  else if (kind == "noisy_random") s.kind = ReferenceSpec::Kind::noisy_random;
  else if (kind == "reference_noise") s.kind = ReferenceSpec::Kind::reference_noise;
  else throw ConfigError("reference.kind: unknown '" + kind + "'");
  r.opt("fraction", s.fraction);
  r.opt("probe_epochs", s.probe_epochs);
  r.opt("rate", s.rate);
  r.finish();
  return s;
}

Threshold parse_threshold(const json& j) {
  Threshold t;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "mean") t.kind = Threshold::Kind::mean;
    else if (s == "all") t.kind = Threshold::Kind::all;
    else throw ConfigError("policy.threshold: unknown '" + s + "'");
    return t;
  }
  Reader r(j, "policy.threshold");
  t.kind = Threshold::Kind::quantile;
  r.opt("quantile", t.q);
  r.finish();
  return t;
}

PolicyConfig parse_policy(const json& j) {
  Reader r(j, "policy");
  PolicyConfig p;
  std::string policy = to_string(p.policy), source = to_string(p.score_source);
  r.opt("policy", policy);
  r.opt("score_source", source);
  p.policy = policy_kind_from_string(policy);
  p.score_source = score_source_from_string(source);
  r.opt("r", p.r);
  r.opt("delta", p.delta);
  r.opt("seta_alpha", p.seta_alpha);
  r.opt("seta_k", p.seta_k);
  r.opt("seed", p.seed);
  if (const json* t = r.child("threshold")) p.threshold = parse_threshold(*t);
  r.opt("rescale", p.rescale);
  r.finish();
  return p;
}

json threshold_json(const Threshold& t) {
  switch (t.kind) {
    case Threshold::Kind::mean: return "mean";
    case Threshold::Kind::all: return "all";
    case Threshold::Kind::quantile: return json{{"quantile", t.q}};
  }
  return "mean";
}

void set_dotted(json& target, const std::string& dotted, const json& value) {
  json* node = &target;
  std::stringstream ss(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
  (*node)[parts.back()] = value;
}

std::string label_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    std::ostringstream os;
    os << v.get<double>();
    return os.str();
  }
  return v.dump();
}

}  // namespace

double TrainerSpec::lr_at(std::size_t epoch) const {
  if (lr_step_epochs == 0 || epoch == 0) return lr;
  const auto steps = (epoch - 1) / lr_step_epochs;
  return lr * std::pow(lr_gamma, static_cast<double>(steps));
}

const char* to_string(ReferenceSpec::Kind k) {
  switch (k) {
    case ReferenceSpec::Kind::held_out_clean: return "held_out_clean";
    case ReferenceSpec::Kind::pseudo_small_loss: return "pseudo_small_loss";
    case ReferenceSpec::Kind::noisy_random: return "noisy_random";
    case ReferenceSpec::Kind::reference_noise: return "reference_noise";
  }
  return "?";
}

const char* to_string(TrajFill f) { return f == TrajFill::carry_forward ? "carry_forward" : "reevaluate"; }

void RunConfig::validate() const {
  if (dataset.kind == DatasetSpec::Kind::blobs) {
    if (dataset.n < 2 || dataset.d < 1 || dataset.classes < 2 || dataset.n_test < 1)
      throw ConfigError("dataset: blobs need n >= 2, d >= 1, classes >= 2, n_test >= 1");
  } else if (dataset.path.empty()) {
    throw ConfigError("dataset: csv needs a path");
  }
  if (dataset.kind == DatasetSpec::Kind::blobs) noise.validate(dataset.classes);
  else if (!(noise.rate >= 0.0 && noise.rate < 1.0)) throw ConfigError("noise rate must lie in [0, 1)");
  if (!(reference.fraction > 0.0 && reference.fraction < 1.0))
    throw ConfigError("reference.fraction must lie in (0, 1)");
  if (!(reference.rate >= 0.0 && reference.rate < 1.0)) throw ConfigError("reference.rate must lie in [0, 1)");
  if (trainer.batch_size == 0) throw ConfigError("trainer.batch_size must be positive");
  if (!(trainer.lr > 0.0)) throw ConfigError("trainer.lr must be positive");
  if (trainer.total_epochs == 0) throw ConfigError("trainer.total_epochs must be positive");
  if (!(target_prune_ratio >= 0.0 && target_prune_ratio < 1.0))
    throw ConfigError("target_prune_ratio must lie in [0, 1)");
  if (das.window == 0) throw ConfigError("das.window must be positive");
  if (das.min_window < 1 || das.min_window > das.window)
    throw ConfigError("das.min_window must lie in [1, window]");
  if (model.kind == Arch::mlp && model.hidden == 0) throw ConfigError("model.hidden must be positive for mlp");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  policy.validate();
  if (policy.policy == PolicyKind::static_random || policy.policy == PolicyKind::dynamic_random)
    if (policy.r >= 1.0) throw ConfigError("random policies need r < 1");
}

RunConfig parse_run_config(const json& j) {
  Reader r(j, "config");
  RunConfig c;
  r.opt("name", c.name);
  if (const json* d = r.child("dataset")) c.dataset = parse_dataset(*d);
  if (const json* n = r.child("noise")) {
    Reader nr(*n, "noise");
    std::string kind = "none";
    nr.opt("kind", kind);
    c.noise.kind = noise_kind_from_string(kind);
    nr.opt("rate", c.noise.rate);
    nr.opt("group_size", c.superclass_group_size);
    if (nr.child("superclass_map")) {
      SuperclassMap map;
      nr.opt("superclass_map", map);
      c.noise.superclass_map = map;
    }
    nr.finish();
  }
  if (const json* ref = r.child("reference")) c.reference = parse_reference(*ref);
  if (const json* m = r.child("model")) {
    Reader mr(*m, "model");
    std::string arch = c.model.kind == Arch::mlp ? "mlp" : "linear";
    mr.opt("arch", arch);
    if (arch == "linear") c.model = {Arch::linear, 0};
    else if (arch == "mlp") c.model.kind = Arch::mlp;
    else throw ConfigError("model.arch: unknown '" + arch + "'");
    mr.opt("hidden", c.model.hidden);
    mr.finish();
  }
  if (const json* t = r.child("trainer")) {
    Reader tr(*t, "trainer");
    tr.opt("batch_size", c.trainer.batch_size);
    tr.opt("lr", c.trainer.lr);
    tr.opt("total_epochs", c.trainer.total_epochs);
    tr.opt("full_epochs", c.trainer.full_epochs);
    tr.opt("lr_step_epochs", c.trainer.lr_step_epochs);
    tr.opt("lr_gamma", c.trainer.lr_gamma);
    tr.finish();
  }
  if (const json* p = r.child("policy")) c.policy = parse_policy(*p);
  if (const json* d = r.child("das")) {
    Reader dr(*d, "das");
    std::string corr = "pearson", fill = "carry_forward";
    dr.opt("window", c.das.window);
    dr.opt("min_window", c.das.min_window);
    dr.opt("correlation", corr);
    dr.opt("traj_fill", fill);
    c.das.correlation = correlation_from_string(corr);
    if (fill == "carry_forward") c.das.fill = TrajFill::carry_forward;
    else if (fill == "reevaluate") c.das.fill = TrajFill::reevaluate;
    else throw ConfigError("das.traj_fill: unknown '" + fill + "'");
    dr.finish();
  }
  r.opt("target_prune_ratio", c.target_prune_ratio);
  r.opt("seeds", c.seeds);
  r.opt("output_dir", c.output_dir);
  r.opt("dump_trajectories", c.dump_trajectories);
  r.opt("dump_das", c.dump_das);
  r.opt("record_wall_time", c.record_wall_time);
  r.finish();

  if (c.noise.kind == NoiseKind::asymmetric_superclass && !c.noise.superclass_map &&
      c.dataset.kind == DatasetSpec::Kind::blobs)
    c.noise.superclass_map = consecutive_superclasses(c.dataset.classes, c.superclass_group_size);
  c.validate();
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  json d;
  d["kind"] = c.dataset.kind == DatasetSpec::Kind::blobs ? "blobs" : "csv";
  if (c.dataset.kind == DatasetSpec::Kind::blobs) {
    d["n"] = c.dataset.n;
    d["d"] = c.dataset.d;
    d["classes"] = c.dataset.classes;
    d["cluster_std"] = c.dataset.cluster_std;
    d["center_scale"] = c.dataset.center_scale;
    d["n_test"] = c.dataset.n_test;
    if (c.dataset.seed) d["seed"] = *c.dataset.seed;
  } else {
    d["path"] = c.dataset.path;
    d["test_fraction"] = c.dataset.test_fraction;
  }
  j["dataset"] = d;
  j["noise"] = {{"kind", to_string(c.noise.kind)}, {"rate", c.noise.rate}, {"group_size", c.superclass_group_size}};
  if (c.noise.superclass_map) j["noise"]["superclass_map"] = *c.noise.superclass_map;
  j["reference"] = {{"kind", to_string(c.reference.kind)},
                    {"fraction", c.reference.fraction},
                    {"probe_epochs", c.reference.probe_epochs},
                    {"rate", c.reference.rate}};
  j["model"] = {{"arch", c.model.kind == Arch::mlp ? "mlp" : "linear"}, {"hidden", c.model.hidden}};
  j["trainer"] = {{"batch_size", c.trainer.batch_size},     {"lr", c.trainer.lr},
                  {"total_epochs", c.trainer.total_epochs}, {"full_epochs", c.trainer.full_epochs},
                  {"lr_step_epochs", c.trainer.lr_step_epochs}, {"lr_gamma", c.trainer.lr_gamma}};
  j["policy"] = {{"policy", c.policy.policy == PolicyKind::seta ? "seta" : to_string(c.policy.policy)},
                 {"score_source", to_string(c.policy.score_source)},
                 {"r", c.policy.r},
                 {"delta", c.policy.delta},
                 {"seta_alpha", c.policy.seta_alpha},
                 {"seta_k", c.policy.seta_k},
                 {"seed", c.policy.seed},
                 {"threshold", threshold_json(c.policy.threshold)},
                 {"rescale", c.policy.rescale}};
  j["das"] = {{"window", c.das.window},
              {"min_window", c.das.min_window},
              {"correlation", to_string(c.das.correlation)},
              {"traj_fill", to_string(c.das.fill)}};
  j["target_prune_ratio"] = c.target_prune_ratio;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["dump_trajectories"] = c.dump_trajectories;
  j["dump_das"] = c.dump_das;
  j["record_wall_time"] = c.record_wall_time;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json_file(path)); }

std::vector<RunConfig> expand_sweep(const json& j) {
  Reader r(j, "sweep");
  const json* base = r.child("base");
  const json* grid = r.child("grid");
  std::string output_dir;
  r.opt("output_dir", output_dir);
  r.finish();
  if (!base) throw ConfigError("sweep: missing 'base'");

  std::vector<std::pair<std::string, std::vector<json>>> axes;
  if (grid) {
    if (!grid->is_object()) throw ConfigError("sweep.grid: expected an object");
    for (const auto& [key, values] : grid->items()) {
      if (!values.is_array() || values.empty()) throw ConfigError("sweep.grid." + key + ": expected a non-empty array");
      axes.emplace_back(key, std::vector<json>(values.begin(), values.end()));
    }
  }

  std::vector<RunConfig> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  const std::string base_name = base->value("name", std::string("sweep"));
  while (true) {
    json cfg = *base;
    std::string name = base_name;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const auto& [key, values] = axes[a];
      set_dotted(cfg, key, values[idx[a]]);
      const auto dot = key.rfind('.');
      name += "_" + key.substr(dot == std::string::npos ? 0 : dot + 1) + "-" + label_value(values[idx[a]]);
    }
    cfg["name"] = name;
    if (!output_dir.empty()) cfg["output_dir"] = output_dir;
    out.push_back(parse_run_config(cfg));

    std::size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
    }
    if (a == axes.size()) break;
  }
  return out;
}

std::vector<RunConfig> load_sweep(const std::string& path) { return expand_sweep(read_json_file(path)); }

}  // namespace trajprune
