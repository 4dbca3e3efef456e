#pragma once

#include <span>
#include <string>
#include <vector>

namespace trajprune {

enum class Correlation { pearson, cosine };

const char* to_string(Correlation c);
Correlation correlation_from_string(const std::string& s);

/// Pearson correlation in [-1, 1]. Length < 2 or a constant input gives 0.
/// Throws ConfigError on empty or mismatched inputs.
double pearson(std::span<const double> a, std::span<const double> b);

/// dot(a, b) / (|a| |b|) in [-1, 1]; a zero-norm input gives 0.
double cosine(std::span<const double> a, std::span<const double> b);

double correlate(Correlation kind, std::span<const double> a, std::span<const double> b);

/// One side of a correlation with its summary statistics computed once, so
/// scoring many samples against the same reference costs one pass each.
class PreparedReference {
 public:
  PreparedReference(Correlation kind, std::span<const double> reference);

  double score(std::span<const double> a) const;
  std::size_t size() const { return values_.size(); }

 private:
  Correlation kind_;
  std::vector<double> values_;  // centered for pearson, raw for cosine
  double norm_ = 0.0;           // sqrt of sum of squares of values_
  bool degenerate_ = false;
};

}  // namespace trajprune
