// Full model comparison on one dataset: independent ridge regression under
// each kernel preset, plus the multi-task model trained as two partitions
// (Residential together with Others at a fixed rank, SME at full rank).
// Emits per-group NMAE/MAPE tables over the shared test horizon.
#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "loadcast/model_io.hpp"
#include "loadcast/train.hpp"

namespace loadcast {

struct BenchConfig {
  int train_days = 420;
  double validation_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::vector<double> lambda_grid = default_lambda_grid();
  int okl_rank = 12;  // rank of the Residential+Others joint model
  SolverOptions solver;
  std::vector<std::string> presets = {"am1", "am2", "sam1", "sam2", "mm1", "mm2"};
  std::string okl_preset = "mm2";
};

struct BenchEntry {
  std::string model;                  // e.g. "krr-mm2", "okl-mm2"
  std::string kernel;                 // canonical expression
  std::vector<MetricsRow> rows;       // groups × {NMAE, MAPE} on the test slots
};

struct BenchReport {
  std::vector<BenchEntry> entries;

  std::string to_csv() const {
    std::string out = "model,kernel,group,metric,mean,std,evaluated_slots,skipped_slots\n";
    for (const auto& e : entries) {
      for (const auto& r : e.rows) {
        out += e.model + ",\"" + e.kernel + "\"," + r.group + "," + r.metric + ",";
        if (r.summary.available()) {
          out += detail::format_double(r.summary.mean) + "," +
                 detail::format_double(r.summary.std_dev);
        } else {
          out += "NA,NA";
        }
        out += "," + std::to_string(r.summary.evaluated) + "," +
               std::to_string(r.summary.skipped) + "\n";
      }
    }
    return out;
  }

  // One table per group: rows are models, columns NMAE mean/std, MAPE mean/std.
  std::string to_text() const {
    const char* groups[] = {"all", "Residential", "SME", "Others"};
    std::string out;
    char line[200];
    for (const char* g : groups) {
      out += "== ";
      out += g;
      out += " ==\n";
      std::snprintf(line, sizeof(line), "%-10s %-28s %10s %10s %12s %12s\n", "model", "kernel",
                    "NMAE mean", "NMAE std", "MAPE mean", "MAPE std");
      out += line;
      for (const auto& e : entries) {
        double nmae_mean = 0, nmae_std = 0, mape_mean = 0, mape_std = 0;
        bool have = false;
        for (const auto& r : e.rows) {
          if (r.group != g || !r.summary.available()) continue;
          have = true;
          if (r.metric == "NMAE") {
            nmae_mean = r.summary.mean;
            nmae_std = r.summary.std_dev;
          } else {
            mape_mean = r.summary.mean;
            mape_std = r.summary.std_dev;
          }
        }
        if (!have) continue;
        std::snprintf(line, sizeof(line), "%-10s %-28s %10.4f %10.4f %12.4f %12.4f\n",
                      e.model.c_str(), e.kernel.c_str(), nmae_mean, nmae_std, mape_mean,
                      mape_std);
        out += line;
      }
      out += "\n";
    }
    return out;
  }
};

// Test-set predictions of a trained model written into the full meter layout.
namespace detail {

inline void place_predictions(const Eigen::MatrixXd& sub, const std::vector<int>& cols,
                              Eigen::MatrixXd& full) {
  for (std::size_t j = 0; j < cols.size(); ++j) {
    full.col(cols[j]) = sub.col(static_cast<Eigen::Index>(j));
  }
}

}  // namespace detail

inline BenchReport run_bench(const MeterDataset& ds, const BenchConfig& config) {
  BenchReport report;
  SplitSpec split = make_split(static_cast<int>(ds.slot_count()), config.train_days,
                               config.validation_fraction, config.split_seed);
  auto test_pts = detail::select_points(ds.slots, split.test_slots);
  std::vector<int> all_cols = group_indices(ds, "all");
  ObservationMatrix y_test =
      detail::restrict_observations(ds.observations, split.test_slots, all_cols);
  std::vector<int> test_rows(split.test_slots.size());
  for (std::size_t i = 0; i < test_rows.size(); ++i) test_rows[i] = static_cast<int>(i);

  std::map<std::string, std::vector<int>> group_cols;
  for (const char* g : {"all", "Residential", "SME", "Others"}) {
    group_cols[g] = group_indices(ds, g);
  }

  auto evaluate = [&](const std::string& model_name, const std::string& kernel_text,
                      const Eigen::MatrixXd& f) {
    BenchEntry entry;
    entry.model = model_name;
    entry.kernel = kernel_text;
    for (const auto& [name, cols] : std::map<std::string, std::vector<int>>{
             {"all", group_cols["all"]},
             {"Residential", group_cols["Residential"]},
             {"SME", group_cols["SME"]},
             {"Others", group_cols["Others"]}}) {
      if (cols.empty()) continue;
      auto rows = group_metric_rows(name, cols, test_rows, y_test, f);
      entry.rows.insert(entry.rows.end(), rows.begin(), rows.end());
    }
    report.entries.push_back(std::move(entry));
  };

  ExperimentConfig base;
  base.lambda_grid = config.lambda_grid;
  base.train_days = config.train_days;
  base.validation_fraction = config.validation_fraction;
  base.split_seed = config.split_seed;
  base.solver = config.solver;

  for (const auto& preset : config.presets) {
    ExperimentConfig cfg = base;
    cfg.kernel_text = to_string(preset_kernel(preset));
    cfg.method = "krr";
    cfg.group = "all";
    TrainedModel model = train_model(ds, cfg);
    evaluate("krr-" + preset, cfg.kernel_text, model.predict(test_pts));
  }

  // Multi-task model in two partitions sharing the split: Residential+Others
  // jointly at the configured rank, SME alone at full rank.
  {
    std::vector<int> res_others;
    std::merge(group_cols["Residential"].begin(), group_cols["Residential"].end(),
               group_cols["Others"].begin(), group_cols["Others"].end(),
               std::back_inserter(res_others));
    Eigen::MatrixXd f =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(test_rows.size()), ds.meter_count());
    const std::string kernel_text = to_string(preset_kernel(config.okl_preset));
    if (!res_others.empty()) {
      ExperimentConfig cfg = base;
      cfg.kernel_text = kernel_text;
      cfg.method = "okl";
      cfg.rank = std::min<int>(config.okl_rank, static_cast<int>(res_others.size()));
      TrainedModel model = train_on_columns(ds, cfg, res_others, "Residential+Others");
      detail::place_predictions(model.predict(test_pts), res_others, f);
    }
    if (!group_cols["SME"].empty()) {
      ExperimentConfig cfg = base;
      cfg.kernel_text = kernel_text;
      cfg.method = "okl";
      cfg.rank = static_cast<int>(group_cols["SME"].size());  // full rank
      TrainedModel model = train_on_columns(ds, cfg, group_cols["SME"], "SME");
      detail::place_predictions(model.predict(test_pts), group_cols["SME"], f);
    }
    evaluate("okl-" + config.okl_preset, kernel_text, f);
  }

  return report;
}

}  // namespace loadcast
