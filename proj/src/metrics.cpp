#include "hotspot/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace hotspot {

ConfusionCounts confusion(std::span<const double> probs, std::span<const int> labels, double threshold) {
  if (probs.size() != labels.size()) throw std::invalid_argument("confusion: probs and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    const bool actual = labels[i] != 0;
    if (predicted && actual) {
      ++c.tp;
    } else if (predicted) {
      ++c.fp;
    } else if (actual) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

double f1(const ConfusionCounts& c) {
  const long long denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

namespace {

std::string cell(const MeanStd& v, bool best) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f%s", v.mean, v.std, best ? " *" : "");
  return buf;
}

// Display width: the plus-minus sign is two bytes in UTF-8 but one column.
std::size_t columns(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char ch : s) n += (ch & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = columns(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::size_t best_row(const ResultTable& results, bool test) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    const double v = test ? results[i].test.mean : results[i].validation.mean;
    const double b = test ? results[best].test.mean : results[best].validation.mean;
    if (v > b) best = i;
  }
  return best;
}

}  // namespace

std::string render_table(const ResultTable& results) {
  if (results.empty()) throw std::invalid_argument("render_table: no rows");
  const std::size_t best_val = best_row(results, false);
  const std::size_t best_test = best_row(results, true);

  std::vector<std::array<std::string, 3>> rows;
  rows.push_back({"Scheduler", "F1 Validation", "F1 Test"});
  for (std::size_t i = 0; i < results.size(); ++i) {
    rows.push_back({display_name(results[i].scheduler), cell(results[i].validation, i == best_val),
                    cell(results[i].test, i == best_test)});
  }
  std::array<std::size_t, 3> width{};
  for (const auto& r : rows) {
    for (int c = 0; c < 3; ++c) width[c] = std::max(width[c], columns(r[c]));
  }

  auto rule = [&] {
    std::string s = "+";
    for (int c = 0; c < 3; ++c) s += std::string(width[c] + 2, '-') + "+";
    return s + "\n";
  };
  std::string out = rule();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += "|";
    for (int c = 0; c < 3; ++c) out += " " + pad(rows[i][c], width[c]) + " |";
    out += "\n";
    if (i == 0) out += rule();
  }
  out += rule();
  return out;
}

std::string render_table_csv(const ResultTable& results) {
  std::string out = "scheduler,val_f1_mean,val_f1_std,test_f1_mean,test_f1_std\n";
  char buf[160];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%.4f,%.4f\n", to_string(r.scheduler).c_str(), r.validation.mean,
                  r.validation.std, r.test.mean, r.test.std);
    out += buf;
  }
  return out;
}

}  // namespace hotspot
