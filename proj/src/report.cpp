#include "trajprune/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "trajprune/errors.hpp"

namespace trajprune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

CellKey key_of(const MetricsRecord& r) {
  return {r.policy, r.score_source, r.noise_kind, r.noise_rate, r.target_prune_ratio};
}

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

std::string cell(double v, std::size_t n) { return n == 0 ? std::string() : format_sig6(v); }

json stat_json(const Stat& s) {
  if (s.n == 0) return json{{"mean", nullptr}, {"std", nullptr}, {"n", 0}};
  return json{{"mean", round_sig6(s.mean)}, {"std", round_sig6(s.std)}, {"n", s.n}};
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<AggregateCell> aggregate(const std::vector<MetricsRecord>& terminal_records) {
  struct Acc {
    std::size_t runs = 0, failed = 0;
    std::vector<double> acc, noise, pruned, das, consumed, epochs;
  };
  std::map<CellKey, Acc> groups;
  for (const auto& r : terminal_records) {
    Acc& a = groups[key_of(r)];
    ++a.runs;
    if (r.status != "ok") {
      ++a.failed;
      continue;
    }
    a.acc.push_back(r.test_acc_true_labels);
    a.noise.push_back(r.retained_noise_ratio);
    a.pruned.push_back(r.pruned_fraction);
    if (r.mean_das) a.das.push_back(*r.mean_das);
    a.consumed.push_back(static_cast<double>(r.consumed_forward_passes));
    a.epochs.push_back(static_cast<double>(r.epoch));
  }
  std::vector<AggregateCell> out;
  for (const auto& [key, a] : groups)
    out.push_back({key, a.runs, a.failed, summarize(a.acc), summarize(a.noise), summarize(a.pruned),
                   summarize(a.das), summarize(a.consumed), summarize(a.epochs)});
  return out;
}

std::vector<MetricsRecord> read_terminal_records(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() == "metrics.jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<MetricsRecord> out;
  for (const auto& f : files) {
    auto records = read_metrics_jsonl(f.string());
    if (!records.empty()) out.push_back(records.back());
  }
  return out;
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateCell>& cells) {
  auto out = open_out(path);
  out << "policy,score_source,noise_kind,noise_rate,target_prune_ratio,runs,failed,"
         "test_acc_true_labels_mean,test_acc_true_labels_std,retained_noise_ratio_mean,retained_noise_ratio_std,"
         "pruned_fraction_mean,pruned_fraction_std,mean_das_mean,mean_das_std,"
         "consumed_forward_passes_mean,consumed_forward_passes_std,epochs_mean,epochs_std\n";
  for (const auto& c : cells) {
    out << c.key.policy << ',' << c.key.score_source << ',' << c.key.noise_kind << ','
        << format_sig6(c.key.noise_rate) << ',' << format_sig6(c.key.target_prune_ratio) << ',' << c.runs << ','
        << c.failed;
    for (const Stat* s : {&c.test_acc, &c.retained_noise_ratio, &c.pruned_fraction, &c.mean_das,
                          &c.consumed_forward_passes, &c.epochs})
      out << ',' << cell(s->mean, s->n) << ',' << cell(s->std, s->n);
    out << '\n';
  }
}

void write_aggregate_jsonl(const std::string& path, const std::vector<AggregateCell>& cells) {
  auto out = open_out(path);
  for (const auto& c : cells) {
    json j{{"policy", c.key.policy},
           {"score_source", c.key.score_source},
           {"noise_kind", c.key.noise_kind},
           {"noise_rate", round_sig6(c.key.noise_rate)},
           {"target_prune_ratio", round_sig6(c.key.target_prune_ratio)},
           {"runs", c.runs},
           {"failed", c.failed},
           {"test_acc_true_labels", stat_json(c.test_acc)},
           {"retained_noise_ratio", stat_json(c.retained_noise_ratio)},
           {"pruned_fraction", stat_json(c.pruned_fraction)},
           {"mean_das", stat_json(c.mean_das)},
           {"consumed_forward_passes", stat_json(c.consumed_forward_passes)},
           {"epochs", stat_json(c.epochs)}};
    out << j.dump() << '\n';
  }
}

GapTable build_gap_table(const std::vector<AggregateCell>& cells, const std::vector<AggregateCell>& full_training) {
  std::map<std::pair<std::string, double>, double> full;
  for (const auto& f : full_training) {
    if (f.test_acc.n == 0) continue;
    const auto key = std::make_pair(f.key.noise_kind, f.key.noise_rate);
    if (full.count(key))
      throw ConfigError("several full-training cells for noise " + key.first + "@" + format_sig6(key.second));
    full[key] = f.test_acc.mean;
  }

  GapTable table;
  std::map<std::pair<std::string, double>, std::vector<double>> gaps;
  for (const auto& c : cells) {
    if (c.test_acc.n == 0) continue;
    const auto key = std::make_pair(c.key.noise_kind, c.key.noise_rate);
    const auto it = full.find(key);
    if (it == full.end())
      throw ConfigError("missing full-training cell for noise " + key.first + "@" + format_sig6(key.second));
    ComparisonCell cc{c.key.method(),  c.key.noise_kind, c.key.noise_rate, c.key.target_prune_ratio,
                      c.test_acc.mean, c.test_acc.std,   c.test_acc.mean - it->second};
    gaps[{cc.method, cc.target_prune_ratio}].push_back(cc.gap_vs_full);
    table.cells.push_back(cc);
  }
  for (const auto& [key, g] : gaps) {
    double sum = 0.0;
    for (double v : g) sum += v;
    table.mean_rows.push_back({key.first, key.second, sum / static_cast<double>(g.size()), g.size()});
  }
  return table;
}

void write_gap_table_csv(const std::string& path, const GapTable& table) {
  auto out = open_out(path);
  out << "method,noise_kind,noise_rate,target_prune_ratio,mean_acc,std_acc,gap_vs_full\n";
  for (const auto& c : table.cells)
    out << c.method << ',' << c.noise_kind << ',' << format_sig6(c.noise_rate) << ','
        << format_sig6(c.target_prune_ratio) << ',' << format_sig6(c.mean_acc) << ',' << format_sig6(c.std_acc) << ','
        << format_sig6(c.gap_vs_full) << '\n';
  for (const auto& m : table.mean_rows)
    out << m.method << ",mean_delta,," << format_sig6(m.target_prune_ratio) << ",,," << format_sig6(m.mean_gap)
        << '\n';
}

HardNoisySeries hard_vs_noisy_export(const std::vector<TrajectoryRecord>& trajectories,
                                     const std::vector<DasRecord>& das, const std::vector<SampleInfo>& samples,
                                     double top_percent) {
  if (!(top_percent > 0.0 && top_percent <= 100.0)) throw ConfigError("top percent must lie in (0, 100]");
  std::size_t n = 0;
  for (const auto& s : samples) n = std::max(n, s.id + 1);
  std::vector<int> group(n, -1);  // 0 clean, 1 flipped
  for (const auto& s : samples) group[s.id] = s.flipped() ? 1 : 0;

  HardNoisySeries out;
  std::vector<double> loss_sum(n, 0.0);
  std::vector<std::size_t> loss_count(n, 0);
  for (const auto& t : trajectories) {
    if (t.id >= n) throw ConfigError("trajectory record for unknown sample " + std::to_string(t.id));
    loss_sum[t.id] += t.loss;
    ++loss_count[t.id];
  }
  std::vector<std::size_t> clean;
  for (std::size_t i = 0; i < n; ++i) {
    if (group[i] == 1) out.flipped_ids.push_back(i);
    if (group[i] == 0) clean.push_back(i);
  }
  if (out.flipped_ids.empty()) throw ConfigError("hard-vs-noisy export needs flipped samples (noisy run)");

  auto avg = [&](std::size_t i) {
    return loss_count[i] ? loss_sum[i] / static_cast<double>(loss_count[i]) : -std::numeric_limits<double>::infinity();
  };
  std::stable_sort(clean.begin(), clean.end(), [&](std::size_t a, std::size_t b) { return avg(a) > avg(b); });
  const auto take = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(top_percent / 100.0 * static_cast<double>(clean.size()))), 1,
      clean.size());
  if (!clean.empty()) out.hard_clean_ids.assign(clean.begin(), clean.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(out.hard_clean_ids.begin(), out.hard_clean_ids.end());

  std::vector<int> member(n, -1);
  for (auto i : out.hard_clean_ids) member[i] = 0;
  for (auto i : out.flipped_ids) member[i] = 1;

  struct Sums {
    double loss[2] = {0, 0}, das[2] = {0, 0};
    std::size_t nl[2] = {0, 0}, nd[2] = {0, 0};
  };
  std::map<std::size_t, Sums> per_epoch;
  for (const auto& t : trajectories)
    if (member[t.id] >= 0) {
      auto& s = per_epoch[t.epoch];
      s.loss[member[t.id]] += t.loss;
      ++s.nl[member[t.id]];
    }
  for (const auto& d : das) {
    if (d.id >= n) throw ConfigError("das record for unknown sample " + std::to_string(d.id));
    if (member[d.id] >= 0) {
      auto& s = per_epoch[d.epoch];
      s.das[member[d.id]] += d.das;
      ++s.nd[member[d.id]];
    }
  }
  auto mean = [](double sum, std::size_t k) { return k ? sum / static_cast<double>(k) : nan(); };
  for (const auto& [epoch, s] : per_epoch)
    out.rows.push_back({epoch, mean(s.loss[0], s.nl[0]), mean(s.das[0], s.nd[0]), mean(s.loss[1], s.nl[1]),
                        mean(s.das[1], s.nd[1])});
  return out;
}

void write_hard_vs_noisy_csv(const std::string& path, const HardNoisySeries& series) {
  auto out = open_out(path);
  out << "epoch,hard_clean_mean_loss,hard_clean_mean_das,flipped_mean_loss,flipped_mean_das\n";
  for (const auto& r : series.rows)
    out << r.epoch << ',' << format_sig6(r.hard_clean_loss) << ',' << format_sig6(r.hard_clean_das) << ','
        << format_sig6(r.flipped_loss) << ',' << format_sig6(r.flipped_das) << '\n';
}

}  // namespace trajprune
