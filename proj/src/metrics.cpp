#include "trajprune/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trajprune/errors.hpp"

namespace trajprune {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

template <class F>
void for_each_json_line(const std::string& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(row) + ": " + e.what());
    }
  }
}

}  // namespace

double round_sig6(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

std::string format_sig6(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json to_json(const MetricsRecord& r) {
  json j;
  j["run"] = r.run;
  j["seed"] = r.seed;
  j["epoch"] = r.epoch;
  j["policy"] = r.policy;
  j["score_source"] = r.score_source;
  j["active_score_source"] = r.active_score_source;
  j["noise_kind"] = r.noise_kind;
  j["noise_rate"] = round_sig6(r.noise_rate);
  j["target_prune_ratio"] = round_sig6(r.target_prune_ratio);
  j["test_acc_true_labels"] = round_sig6(r.test_acc_true_labels);
  j["retained_noise_ratio"] = round_sig6(r.retained_noise_ratio);
  j["pruned_fraction"] = round_sig6(r.pruned_fraction);
  j["mean_das"] = r.mean_das ? json(round_sig6(*r.mean_das)) : json(nullptr);
  j["consumed_forward_passes"] = r.consumed_forward_passes;
  j["full_pass_budget"] = r.full_pass_budget;
  j["wall_ms"] = round_sig6(r.wall_ms);
  j["terminal"] = r.terminal;
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

MetricsRecord metrics_from_json(const json& j) {
  MetricsRecord r;
  r.run = j.at("run").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.epoch = j.at("epoch").get<std::size_t>();
  r.policy = j.at("policy").get<std::string>();
  r.score_source = j.at("score_source").get<std::string>();
  r.active_score_source = j.value("active_score_source", r.score_source);
  r.noise_kind = j.at("noise_kind").get<std::string>();
  r.noise_rate = j.at("noise_rate").get<double>();
  r.target_prune_ratio = j.at("target_prune_ratio").get<double>();
  r.test_acc_true_labels = j.at("test_acc_true_labels").get<double>();
  r.retained_noise_ratio = j.at("retained_noise_ratio").get<double>();
  r.pruned_fraction = j.at("pruned_fraction").get<double>();
  if (j.contains("mean_das") && !j.at("mean_das").is_null()) r.mean_das = j.at("mean_das").get<double>();
  r.consumed_forward_passes = j.at("consumed_forward_passes").get<std::size_t>();
  r.full_pass_budget = j.value("full_pass_budget", std::size_t{0});
  r.wall_ms = j.value("wall_ms", 0.0);
  r.terminal = j.value("terminal", false);
  r.status = j.value("status", std::string("ok"));
  r.error = j.value("error", std::string());
  return r;
}

void write_metrics_jsonl(const std::string& path, const std::vector<MetricsRecord>& records) {
  auto out = open_out(path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<MetricsRecord> read_metrics_jsonl(const std::string& path) {
  std::vector<MetricsRecord> out;
  for_each_json_line(path, [&](const json& j) { out.push_back(metrics_from_json(j)); });
  return out;
}

void write_trajectory_jsonl(const std::string& path, const std::vector<TrajectoryRecord>& records) {
  auto out = open_out(path);
  for (const auto& r : records)
    out << json{{"epoch", r.epoch}, {"id", r.id}, {"loss", round_sig6(r.loss)}, {"carried", r.carried}}.dump()
        << '\n';
}

std::vector<TrajectoryRecord> read_trajectory_jsonl(const std::string& path) {
  std::vector<TrajectoryRecord> out;
  for_each_json_line(path, [&](const json& j) {
    out.push_back({j.at("epoch").get<std::size_t>(), j.at("id").get<std::size_t>(), j.at("loss").get<double>(),
                   j.value("carried", false)});
  });
  return out;
}

void write_das_jsonl(const std::string& path, const std::vector<DasRecord>& records) {
  auto out = open_out(path);
  for (const auto& r : records)
    out << json{{"epoch", r.epoch}, {"id", r.id}, {"das", round_sig6(r.das)}}.dump() << '\n';
}

std::vector<DasRecord> read_das_jsonl(const std::string& path) {
  std::vector<DasRecord> out;
  for_each_json_line(path, [&](const json& j) {
    out.push_back({j.at("epoch").get<std::size_t>(), j.at("id").get<std::size_t>(), j.at("das").get<double>()});
  });
  return out;
}

void write_samples_csv(const std::string& path, const std::vector<SampleInfo>& samples) {
  auto out = open_out(path);
  out << "id,noisy_label,true_label,flipped\n";
  for (const auto& s : samples)
    out << s.id << ',' << s.noisy_label << ',' << s.true_label << ',' << (s.flipped() ? 1 : 0) << '\n';
}

std::vector<SampleInfo> read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<SampleInfo> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, noisy, truth;
    std::getline(ss, id, ',');
    std::getline(ss, noisy, ',');
    std::getline(ss, truth, ',');
    try {
      out.push_back({std::stoul(id), std::stoi(noisy), std::stoi(truth)});
    } catch (const std::exception&) {
      throw ConfigError(path + ": malformed row '" + line + "'");
    }
  }
  return out;
}

}  // namespace trajprune
