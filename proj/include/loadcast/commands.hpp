// Command implementations behind the CLI: preprocess, synth, train,
// forecast, evaluate, bench. Each writes its output files and returns a
// human-readable summary, so both main() and the tests drive the same code.
#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loadcast/bench.hpp"
#include "loadcast/data/ingest.hpp"
#include "loadcast/data/synth.hpp"
#include "loadcast/model_io.hpp"

namespace loadcast {

// Sentinel meter id used for per-slot aggregate rows in forecast CSVs.
inline constexpr const char* kAggregateId = "TOTAL";

struct PreprocessResult {
  MeterDataset dataset;
  RejectionReport report;
  std::string summary;
};

// Per-group meter counts and mask sparsity, plus the slot range.
inline std::string dataset_summary(const MeterDataset& ds) {
  std::map<MeterGroup, int> meter_count;
  std::map<MeterGroup, std::pair<long long, long long>> cells;  // (missing, total)
  for (Eigen::Index j = 0; j < ds.meter_count(); ++j) {
    MeterGroup g = ds.meters[static_cast<std::size_t>(j)].group;
    ++meter_count[g];
    for (Eigen::Index i = 0; i < ds.slot_count(); ++i) {
      ++cells[g].second;
      if (!ds.observations.mask(i, j)) ++cells[g].first;
    }
  }
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %8s %10s\n", "group", "meters", "missing");
  out += line;
  for (MeterGroup g : {MeterGroup::Residential, MeterGroup::SME, MeterGroup::Others}) {
    if (!meter_count.count(g)) continue;
    double pct = 100.0 * static_cast<double>(cells[g].first) /
                 static_cast<double>(std::max<long long>(cells[g].second, 1));
    std::snprintf(line, sizeof(line), "%-12s %8d %9.3f%%\n", to_string(g).c_str(),
                  meter_count[g], pct);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%lld meters, %lld slots (%lld days from %s to %s)\n",
                static_cast<long long>(ds.meter_count()),
                static_cast<long long>(ds.slot_count()),
                static_cast<long long>(ds.slot_count() / 8),
                ds.slots.front().iso_date().c_str(), ds.slots.back().iso_date().c_str());
  out += line;
  return out;
}

inline PreprocessResult cmd_preprocess(const std::filesystem::path& raw_path,
                                       const std::filesystem::path& groups_path,
                                       const std::optional<std::filesystem::path>& holidays_path,
                                       const std::filesystem::path& out_dir) {
  auto records = parse_raw_text(detail::read_text_file(raw_path));
  auto groups = parse_groups(detail::read_text_file(groups_path));
  std::set<int> holidays;
  if (holidays_path) holidays = parse_holidays(detail::read_text_file(*holidays_path));

  PreprocessResult result;
  result.dataset = build_dataset(records, groups, holidays, DstCalendar::ireland_2009_2010(),
                                 result.report);
  save_dataset(result.dataset, out_dir);
  detail::write_text_file(out_dir / "rejection_report.txt", result.report.to_text());
  result.summary = dataset_summary(result.dataset) + result.report.to_text();
  return result;
}

inline std::string cmd_synth(const SynthParams& params, const std::filesystem::path& out_dir) {
  MeterDataset ds = synth_gen(params);
  save_dataset(ds, out_dir);
  return dataset_summary(ds);
}

inline std::string cmd_train(const ExperimentConfig& config,
                             const std::filesystem::path& dataset_dir,
                             const std::filesystem::path& model_dir) {
  MeterDataset ds = load_dataset(dataset_dir);
  TrainedModel model = train_model(ds, config);
  save_model(model, model_dir);

  std::string out = "trained " + model.method + " on group '" + model.group + "' (" +
                    std::to_string(model.task_ids.size()) + " meters, " +
                    std::to_string(model.train_points().size()) + " slots)\n";
  out += "kernel: " + to_string(model.kernel) + "\n";
  for (const auto& trial : model.selection_log) {
    out += "  lambda " + detail::format_double(trial.lambda) + " -> validation NMAE " +
           (std::isfinite(trial.validation_nmae) ? detail::format_double(trial.validation_nmae)
                                                 : std::string("NA")) +
           "\n";
  }
  out += "selected lambda " + detail::format_double(model.lambda) +
         " (ties resolve to the larger value); refit on train+validation\n";
  out += "coefficients stored: " + std::to_string(model.coefficient_count()) + "\n";
  return out;
}

// Query slots for forecasting: either the model's test split applied to a
// dataset directory, or an explicit slots.csv-style file.
struct ForecastQuery {
  std::vector<int> slot_indices;
  std::vector<CalendarPoint> points;
};

inline ForecastQuery query_from_dataset(const TrainedModel& model,
                                        const std::filesystem::path& dataset_dir) {
  MeterDataset ds = load_dataset(dataset_dir);
  if (dataset_digest(ds) != model.data_digest) {
    throw DataError("dataset at '" + dataset_dir.string() +
                    "' does not match the model's training data digest");
  }
  ForecastQuery q;
  q.slot_indices = model.split.test_slots;
  q.points = detail::select_points(ds.slots, q.slot_indices);
  return q;
}

inline ForecastQuery query_from_slots_file(const std::filesystem::path& slots_path) {
  auto lines = detail::split_lines(detail::read_text_file(slots_path));
  if (lines.empty() || lines[0] != "slot_index,date,slot_of_day,t,d,c") {
    throw DataError("slots file: missing or unexpected header");
  }
  ForecastQuery q;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    auto f = detail::split_csv(lines[n]);
    if (f.size() != 6) {
      throw DataError("slots file line " + std::to_string(n + 1) + ": expected 6 fields");
    }
    CalendarPoint x{detail::parse_double(f[3], "t"), detail::parse_double(f[4], "d"),
                    static_cast<int>(detail::parse_int(f[5], "c"))};
    x.validate();
    q.slot_indices.push_back(static_cast<int>(detail::parse_int(f[0], "slot_index")));
    q.points.push_back(x);
  }
  return q;
}

inline std::string cmd_forecast(const std::filesystem::path& model_dir, const ForecastQuery& query,
                                bool aggregate, const std::filesystem::path& out_csv) {
  TrainedModel model = load_model(model_dir);
  Eigen::MatrixXd f = model.predict(query.points);

  std::string out = "slot_index,meter_id,forecast\n";
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
      out += std::to_string(query.slot_indices[static_cast<std::size_t>(i)]) + "," +
             model.task_ids[static_cast<std::size_t>(j)] + "," +
             detail::format_double(f(i, j)) + "\n";
    }
  }
  if (aggregate) {
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      out += std::to_string(query.slot_indices[static_cast<std::size_t>(i)]) + "," +
             std::string(kAggregateId) + "," + detail::format_double(f.row(i).sum()) + "\n";
    }
  }
  detail::write_text_file(out_csv, out);
  return "wrote " + std::to_string(f.rows() * f.cols()) + " forecasts for " +
         std::to_string(f.cols()) + " meters over " + std::to_string(f.rows()) + " slots\n";
}

struct EvaluateResult {
  std::vector<MetricsRow> rows;
  std::string csv;
  std::string text;
};

inline EvaluateResult cmd_evaluate(const std::filesystem::path& forecast_csv,
                                   const std::filesystem::path& dataset_dir,
                                   const std::vector<std::string>& groups,
                                   const std::optional<std::filesystem::path>& out_prefix) {
  MeterDataset ds = load_dataset(dataset_dir);
  std::map<std::string, int> column;
  for (std::size_t j = 0; j < ds.meters.size(); ++j) column[ds.meters[j].id] = static_cast<int>(j);

  auto lines = detail::split_lines(detail::read_text_file(forecast_csv));
  if (lines.empty() || lines[0] != "slot_index,meter_id,forecast") {
    throw DataError("forecast file: missing or unexpected header");
  }
  std::map<int, std::map<int, double>> forecasts;  // slot -> meter column -> value
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    auto f = detail::split_csv(lines[n]);
    if (f.size() != 3) {
      throw DataError("forecast file line " + std::to_string(n + 1) + ": expected 3 fields");
    }
    if (f[1] == kAggregateId) continue;  // aggregate rows are derived output
    auto it = column.find(f[1]);
    if (it == column.end()) {
      throw DataError("forecast file line " + std::to_string(n + 1) + ": unknown meter '" + f[1] +
                      "'");
    }
    auto slot = detail::parse_int(f[0], "slot_index");
    if (slot < 0 || slot >= ds.slot_count()) {
      throw DataError("forecast file line " + std::to_string(n + 1) + ": slot index " + f[0] +
                      " out of range");
    }
    forecasts[static_cast<int>(slot)][it->second] = detail::parse_double(f[2], "forecast");
  }
  if (forecasts.empty()) throw DataError("forecast file contains no forecasts");

  std::vector<int> eval_slots;
  for (const auto& [slot, _] : forecasts) eval_slots.push_back(slot);

  // Every observed cell of a requested group must be forecast.
  std::vector<std::string> gaps;
  std::set<int> wanted_cols;
  for (const auto& g : groups) {
    for (int j : group_indices(ds, g)) wanted_cols.insert(j);
  }
  for (int slot : eval_slots) {
    const auto& row = forecasts[slot];
    for (int j : wanted_cols) {
      if (ds.observations.mask(slot, j) && !row.count(j)) {
        gaps.push_back("slot " + std::to_string(slot) + " meter " +
                       ds.meters[static_cast<std::size_t>(j)].id);
      }
    }
  }
  if (!gaps.empty()) {
    std::string msg = "forecasts missing for " + std::to_string(gaps.size()) +
                      " observed cells:";
    for (std::size_t i = 0; i < gaps.size() && i < 10; ++i) msg += "\n  " + gaps[i];
    if (gaps.size() > 10) msg += "\n  ...";
    throw DataError(msg);
  }

  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eval_slots.size()),
                                            ds.meter_count());
  ObservationMatrix y_eval;
  std::vector<int> all_cols = group_indices(ds, "all");
  y_eval = detail::restrict_observations(ds.observations, eval_slots, all_cols);
  for (std::size_t i = 0; i < eval_slots.size(); ++i) {
    for (const auto& [j, value] : forecasts[eval_slots[i]]) {
      f(static_cast<Eigen::Index>(i), j) = value;
    }
  }
  std::vector<int> eval_rows(eval_slots.size());
  for (std::size_t i = 0; i < eval_rows.size(); ++i) eval_rows[i] = static_cast<int>(i);

  EvaluateResult result;
  for (const auto& g : groups) {
    auto cols = group_indices(ds, g);
    if (cols.empty()) continue;
    auto rows = group_metric_rows(g, cols, eval_rows, y_eval, f);
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  }
  result.csv = metrics_csv(result.rows);
  result.text = metrics_text(result.rows);
  if (out_prefix) {
    detail::write_text_file(out_prefix->string() + ".csv", result.csv);
    detail::write_text_file(out_prefix->string() + ".txt", result.text);
  }
  return result;
}

inline std::string cmd_bench(const std::filesystem::path& dataset_dir, const BenchConfig& config,
                             const std::optional<std::filesystem::path>& out_prefix) {
  MeterDataset ds = load_dataset(dataset_dir);
  BenchReport report = run_bench(ds, config);
  if (out_prefix) {
    detail::write_text_file(out_prefix->string() + ".csv", report.to_csv());
    detail::write_text_file(out_prefix->string() + ".txt", report.to_text());
  }
  return report.to_text();
}

}  // namespace loadcast
