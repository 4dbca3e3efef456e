#include "trajprune/das.hpp"

#include <algorithm>
#include <cmath>

#include "trajprune/errors.hpp"
#include "trajprune/kernels.hpp"

namespace trajprune {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("correlation of empty vectors");
  if (a.size() != b.size()) throw ConfigError("correlation inputs differ in length");
}

bool constant(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo == *hi;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

const char* to_string(Correlation c) { return c == Correlation::pearson ? "pearson" : "cosine"; }

Correlation correlation_from_string(const std::string& s) {
  if (s == "pearson") return Correlation::pearson;
  if (s == "cosine") return Correlation::cosine;
  throw ConfigError("unknown correlation: " + s);
}

PreparedReference::PreparedReference(Correlation kind, std::span<const double> reference)
    : kind_(kind), values_(reference.begin(), reference.end()) {
  if (reference.empty()) throw ConfigError("correlation of empty vectors");
  if (kind == Correlation::pearson) {
    degenerate_ = values_.size() < 2 || constant(reference);
    const double m = mean_of(reference);
    for (double& v : values_) v -= m;
  }
  double ss = 0.0;
  for (double v : values_) ss += v * v;
  norm_ = std::sqrt(ss);
  degenerate_ = degenerate_ || norm_ == 0.0;
}

double PreparedReference::score(std::span<const double> a) const {
  if (a.size() != values_.size()) throw ConfigError("correlation inputs differ in length");
  if (degenerate_) return 0.0;
  double dot = 0.0, ss = 0.0;
  if (kind_ == Correlation::pearson) {
    if (constant(a)) return 0.0;
    const double m = mean_of(a);
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a[j] - m;
      dot += d * values_[j];
      ss += d * d;
    }
  } else {
    for (std::size_t j = 0; j < a.size(); ++j) {
      dot += a[j] * values_[j];
      ss += a[j] * a[j];
    }
  }
  if (ss == 0.0) return 0.0;
  return clamp_unit(dot / (std::sqrt(ss) * norm_));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  return PreparedReference(Correlation::pearson, b).score(a);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  return PreparedReference(Correlation::cosine, b).score(a);
}

double correlate(Correlation kind, std::span<const double> a, std::span<const double> b) {
  return kind == Correlation::pearson ? pearson(a, b) : cosine(a, b);
}

double DasScores::mean() const {
  if (scores.empty()) return 0.0;
  double s = 0.0;
  for (double v : scores) s += v;
  return s / static_cast<double>(scores.size());
}

DasScores compute_das_all(const TrajectoryBank& bank, const ReferenceTrajectory& ref, Correlation kind,
                          Execution exec) {
  const auto reference = ref.read();
  DasScores out{bank.epochs_recorded(), std::vector<double>(bank.num_samples()), kind};
  if (exec == Execution::parallel)
    kernels::parallel::alignment_scores(bank, reference, kind, out.scores);
  else
    kernels::serial::alignment_scores(bank, reference, kind, out.scores);
  return out;
}

}  // namespace trajprune
