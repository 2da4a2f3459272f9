// Forecast accuracy: per-slot aggregated MAPE and demand-normalized MAE over
// meter groups, summarized as mean / population std over the evaluated slots.
//
// Both metrics are undefined at a slot when the group has no observed member
// there or its total demand is zero; undefined slots are skipped, not zeroed.
#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loadcast/common.hpp"
#include "loadcast/observation.hpp"

namespace loadcast {

// 100 · |Σy − Σf| / Σy over the group's observed members at slot i.
inline std::optional<double> slot_mape(Eigen::Index i, const std::vector<int>& group,
                                       const ObservationMatrix& y, const Eigen::MatrixXd& f) {
  double sum_y = 0.0, sum_f = 0.0;
  bool any = false;
  for (int j : group) {
    if (!y.mask(i, j)) continue;
    any = true;
    sum_y += y.values(i, j);
    sum_f += f(i, j);
  }
  if (!any || sum_y == 0.0) return std::nullopt;
  return 100.0 * std::abs(sum_y - sum_f) / sum_y;
}

// Σ|y − f| / Σy over the group's observed members at slot i; the all-zero
// predictor scores exactly 1.
inline std::optional<double> slot_nmae(Eigen::Index i, const std::vector<int>& group,
                                       const ObservationMatrix& y, const Eigen::MatrixXd& f) {
  double sum_y = 0.0, sum_err = 0.0;
  bool any = false;
  for (int j : group) {
    if (!y.mask(i, j)) continue;
    any = true;
    sum_y += y.values(i, j);
    sum_err += std::abs(y.values(i, j) - f(i, j));
  }
  if (!any || sum_y == 0.0) return std::nullopt;
  return sum_err / sum_y;
}

struct MetricSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std_dev = std::numeric_limits<double>::quiet_NaN();
  int evaluated = 0;
  int skipped = 0;

  bool available() const { return evaluated > 0; }
};

inline MetricSummary summarize(const std::vector<std::optional<double>>& per_slot) {
  MetricSummary s;
  double sum = 0.0;
  for (const auto& v : per_slot) {
    if (v) {
      sum += *v;
      ++s.evaluated;
    } else {
      ++s.skipped;
    }
  }
  if (s.evaluated == 0) return s;
  s.mean = sum / s.evaluated;
  double ss = 0.0;
  for (const auto& v : per_slot) {
    if (v) {
      double d = *v - s.mean;
      ss += d * d;
    }
  }
  s.std_dev = std::sqrt(ss / s.evaluated);  // population std: defined even for one slot
  return s;
}

struct MetricsRow {
  std::string group;
  std::string metric;  // "NMAE" or "MAPE"
  MetricSummary summary;
};

// One row per metric for a named group, over the given slot indices.
inline std::vector<MetricsRow> group_metric_rows(const std::string& name,
                                                 const std::vector<int>& group,
                                                 const std::vector<int>& slot_indices,
                                                 const ObservationMatrix& y,
                                                 const Eigen::MatrixXd& f) {
  std::vector<std::optional<double>> nmae, mape;
  nmae.reserve(slot_indices.size());
  mape.reserve(slot_indices.size());
  for (int i : slot_indices) {
    nmae.push_back(slot_nmae(i, group, y, f));
    mape.push_back(slot_mape(i, group, y, f));
  }
  return {MetricsRow{name, "NMAE", summarize(nmae)}, MetricsRow{name, "MAPE", summarize(mape)}};
}

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "group,metric,mean,std,evaluated_slots,skipped_slots\n";
  for (const auto& r : rows) {
    out += r.group + "," + r.metric + ",";
    if (r.summary.available()) {
      out += detail::format_double(r.summary.mean) + "," + detail::format_double(r.summary.std_dev);
    } else {
      out += "NA,NA";
    }
    out += "," + std::to_string(r.summary.evaluated) + "," + std::to_string(r.summary.skipped) +
           "\n";
  }
  return out;
}

// Aligned text table, one line per (group, metric).
inline std::string metrics_text(const std::vector<MetricsRow>& rows) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %-5s %12s %12s %10s %8s\n", "group", "metric", "mean",
                "std", "evaluated", "skipped");
  out += line;
  for (const auto& r : rows) {
    std::string mean = r.summary.available() ? fmt(r.summary.mean) : "NA";
    std::string sd = r.summary.available() ? fmt(r.summary.std_dev) : "NA";
    std::snprintf(line, sizeof(line), "%-12s %-5s %12s %12s %10d %8d\n", r.group.c_str(),
                  r.metric.c_str(), mean.c_str(), sd.c_str(), r.summary.evaluated,
                  r.summary.skipped);
    out += line;
  }
  return out;
}

}  // namespace loadcast
