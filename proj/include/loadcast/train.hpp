// Experiment driver: split the data, sweep the regularization grid, select
// the value with the best validation score, and refit on train+validation.
#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "loadcast/data/dataset.hpp"
#include "loadcast/data/split.hpp"
#include "loadcast/krr.hpp"
#include "loadcast/metrics.hpp"
#include "loadcast/okl.hpp"

namespace loadcast {

struct SolverOptions {
  int max_iters = 100;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
};

// 13 logarithmic points from 1e-4 to 1e2.
inline std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  grid.reserve(13);
  for (int i = 0; i <= 12; ++i) grid.push_back(std::pow(10.0, -4.0 + 0.5 * i));
  return grid;
}

struct ExperimentConfig {
  std::string kernel_text = "kt + kd";
  std::string method = "krr";  // "krr" or "okl"
  int rank = 0;                // required iff method == "okl"
  std::vector<double> lambda_grid = default_lambda_grid();
  std::string group = "all";
  int train_days = 365;
  double validation_fraction = 0.2;
  std::uint64_t split_seed = 0;
  SolverOptions solver;
};

struct LambdaTrial {
  double lambda = 0.0;
  double validation_nmae = 0.0;
};

struct TrainedModel {
  std::string method;
  KernelPtr kernel;
  double lambda = 0.0;
  std::string group;
  std::vector<std::string> task_ids;
  SplitSpec split;
  std::uint64_t data_digest = 0;
  std::vector<LambdaTrial> selection_log;
  std::optional<KrrModel> krr;
  std::optional<OklModel> okl;

  std::size_t coefficient_count() const {
    return krr ? krr->coefficient_count() : okl->coefficient_count();
  }

  Eigen::Index tasks() const { return krr ? krr->tasks() : okl->tasks(); }

  const std::vector<CalendarPoint>& train_points() const {
    return krr ? krr->train_points : okl->train_points;
  }

  Eigen::MatrixXd predict(const std::vector<CalendarPoint>& query) const {
    return krr ? predict_krr(*krr, query) : predict_okl(*okl, query);
  }
};

namespace detail {

inline std::vector<CalendarPoint> select_points(const std::vector<SlotInfo>& slots,
                                                const std::vector<int>& indices) {
  std::vector<CalendarPoint> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(slots[static_cast<std::size_t>(i)].point);
  return out;
}

inline ObservationMatrix restrict_observations(const ObservationMatrix& obs,
                                               const std::vector<int>& rows,
                                               const std::vector<int>& cols) {
  ObservationMatrix out;
  out.values = obs.values(rows, cols);
  out.mask = obs.mask(rows, cols);
  return out;
}

}  // namespace detail

inline void validate_config(const ExperimentConfig& config, Eigen::Index group_size) {
  if (config.method != "krr" && config.method != "okl") {
    throw std::invalid_argument("method must be 'krr' or 'okl', got '" + config.method + "'");
  }
  if (config.method == "okl") {
    if (config.rank < 1) throw std::invalid_argument("okl requires a positive rank");
    if (config.rank > group_size) {
      throw std::invalid_argument("rank " + std::to_string(config.rank) + " exceeds the " +
                                  std::to_string(group_size) + " tasks in group");
    }
  } else if (config.rank != 0) {
    throw std::invalid_argument("rank applies to the okl method only");
  }
  if (config.lambda_grid.empty()) {
    throw std::invalid_argument("regularization grid is empty");
  }
  for (double lam : config.lambda_grid) {
    if (!(lam > 0.0)) {
      throw std::invalid_argument("regularization grid contains non-positive value " +
                                  detail::format_double(lam));
    }
  }
}

// Trains on an explicit meter-column subset; `group_label` is recorded in
// the artifact. train_model resolves a named group and delegates here.
inline TrainedModel train_on_columns(const MeterDataset& ds, const ExperimentConfig& config,
                                     const std::vector<int>& group_cols,
                                     const std::string& group_label) {
  if (group_cols.empty()) {
    throw std::invalid_argument("group '" + group_label + "' selects no meters");
  }
  validate_config(config, static_cast<Eigen::Index>(group_cols.size()));
  KernelPtr kernel = parse_kernel_expr(config.kernel_text);

  TrainedModel out;
  out.method = config.method;
  out.kernel = kernel;
  out.group = group_label;
  for (int j : group_cols) out.task_ids.push_back(ds.meters[static_cast<std::size_t>(j)].id);
  out.split = make_split(static_cast<int>(ds.slot_count()), config.train_days,
                         config.validation_fraction, config.split_seed);
  out.data_digest = dataset_digest(ds);

  auto train_pts = detail::select_points(ds.slots, out.split.train_slots);
  auto val_pts = detail::select_points(ds.slots, out.split.validation_slots);
  ObservationMatrix y_train =
      detail::restrict_observations(ds.observations, out.split.train_slots, group_cols);
  ObservationMatrix y_val =
      detail::restrict_observations(ds.observations, out.split.validation_slots, group_cols);

  std::vector<int> all_tasks(group_cols.size());
  for (std::size_t j = 0; j < all_tasks.size(); ++j) all_tasks[j] = static_cast<int>(j);
  std::vector<int> val_rows(val_pts.size());
  for (std::size_t i = 0; i < val_rows.size(); ++i) val_rows[i] = static_cast<int>(i);

  Eigen::MatrixXd k_train = gram(kernel, train_pts);
  Eigen::MatrixXd k_val = gram(kernel, val_pts, train_pts);
  std::optional<SymEig> keig;
  if (config.method == "okl") keig = sym_eig(k_train);

  auto validation_score = [&](double lam) {
    Eigen::MatrixXd f;
    if (config.method == "krr") {
      KrrModel model = fit_krr_with_gram(kernel, train_pts, k_train, y_train, lam);
      f = predict_krr_with_gram(model, k_val);
    } else {
      OklOptions opts;
      opts.max_iters = config.solver.max_iters;
      opts.rel_tol = config.solver.rel_tol;
      opts.seed = config.solver.seed;
      OklModel model =
          fit_okl_with_eig(kernel, train_pts, k_train, *keig, y_train, lam, config.rank, opts);
      f = predict_okl_with_gram(model, k_val);
    }
    std::vector<std::optional<double>> per_slot;
    per_slot.reserve(val_rows.size());
    for (int i : val_rows) per_slot.push_back(slot_nmae(i, all_tasks, y_val, f));
    return summarize(per_slot);
  };

  // Grid selection: minimum validation score, ties resolved toward the
  // larger (more regularized) value.
  double best_lam = config.lambda_grid.front();
  double best_score = std::numeric_limits<double>::infinity();
  for (double lam : config.lambda_grid) {
    MetricSummary s = validation_score(lam);
    if (!s.available()) {
      if (config.lambda_grid.size() > 1) {
        throw std::invalid_argument(
            "validation split has no usable slots; cannot select a regularization value");
      }
      out.selection_log.push_back({lam, std::numeric_limits<double>::quiet_NaN()});
      best_lam = lam;
      break;
    }
    out.selection_log.push_back({lam, s.mean});
    if (s.mean <= best_score) {
      best_score = s.mean;
      best_lam = lam;
    }
  }
  out.lambda = best_lam;

  // Refit on train + validation at the chosen strength.
  std::vector<int> refit_slots;
  refit_slots.reserve(out.split.train_slots.size() + out.split.validation_slots.size());
  std::merge(out.split.train_slots.begin(), out.split.train_slots.end(),
             out.split.validation_slots.begin(), out.split.validation_slots.end(),
             std::back_inserter(refit_slots));
  auto refit_pts = detail::select_points(ds.slots, refit_slots);
  ObservationMatrix y_refit =
      detail::restrict_observations(ds.observations, refit_slots, group_cols);
  Eigen::MatrixXd k_refit = gram(kernel, refit_pts);

  if (config.method == "krr") {
    out.krr = fit_krr_with_gram(kernel, refit_pts, k_refit, y_refit, best_lam);
  } else {
    OklOptions opts;
    opts.max_iters = config.solver.max_iters;
    opts.rel_tol = config.solver.rel_tol;
    opts.seed = config.solver.seed;
    out.okl = fit_okl_with_eig(kernel, refit_pts, k_refit, sym_eig(k_refit), y_refit, best_lam,
                               config.rank, opts);
  }
  return out;
}

inline TrainedModel train_model(const MeterDataset& ds, const ExperimentConfig& config) {
  return train_on_columns(ds, config, group_indices(ds, config.group), config.group);
}

}  // namespace loadcast
