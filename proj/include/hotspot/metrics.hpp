#pragma once

#include <span>
#include <string>

#include "hotspot/train.hpp"

namespace hotspot {

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;

  long long total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// A probability at or above the threshold predicts positive.
ConfusionCounts confusion(std::span<const double> probs, std::span<const int> labels, double threshold = 0.5);

/// Positive-class F1, 2tp / (2tp + fp + fn); 0 when the denominator is 0.
double f1(const ConfusionCounts& c);

/// Fixed-width text table (Scheduler | F1 Validation | F1 Test) with cells as
/// "MM.MM ± S.SS". The best mean per column carries a trailing '*'; ties go
/// to the earlier row.
std::string render_table(const ResultTable& results);
std::string render_table_csv(const ResultTable& results);

}  // namespace hotspot
