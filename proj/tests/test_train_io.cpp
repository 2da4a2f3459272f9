#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "loadcast/commands.hpp"

using namespace loadcast;
using Catch::Matchers::WithinAbs;
namespace fs = std::filesystem;

namespace {

MeterDataset small_synth() {
  SynthParams p;
  p.residential = 6;
  p.sme = 3;
  p.others = 3;
  p.n_days = 30;
  p.noise_sigma = 0.05;
  p.missing_rate = 0.1;
  p.seed = 13;
  return synth_gen(p);
}

ExperimentConfig krr_config() {
  ExperimentConfig config;
  config.kernel_text = "kt + kd";
  config.method = "krr";
  config.lambda_grid = {0.01, 0.1, 1.0};
  config.train_days = 20;
  config.validation_fraction = 0.25;
  config.split_seed = 5;
  return config;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("loadcast_train_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A dataset engineered so every regularization strength scores identically:
// train-slot readings are all zero, which forces zero coefficients and hence
// all-zero validation predictions regardless of the strength.
MeterDataset tie_dataset(std::uint64_t split_seed) {
  SplitSpec preview = make_split(32, 3, 1.0 / 3.0, split_seed);
  MeterDataset ds;
  ds.slots = make_slots(100, 4, {});
  ds.meters = {MeterInfo{"a", MeterGroup::Residential}, MeterInfo{"b", MeterGroup::SME}};
  ds.observations.values = Eigen::MatrixXd::Zero(32, 2);
  ds.observations.mask = MaskMatrix::Ones(32, 2);
  for (int i : preview.validation_slots) ds.observations.values.row(i).setConstant(1.0);
  for (int i : preview.test_slots) ds.observations.values.row(i).setConstant(1.0);
  ds.validate();
  return ds;
}

}  // namespace

TEST_CASE("krr training sweeps the grid and refits on train plus validation") {
  MeterDataset ds = small_synth();
  ExperimentConfig config = krr_config();
  TrainedModel model = train_model(ds, config);

  CHECK(model.method == "krr");
  REQUIRE(model.krr.has_value());
  CHECK_FALSE(model.okl.has_value());
  CHECK(model.group == "all");
  CHECK(model.task_ids.size() == 12);
  CHECK(model.data_digest == dataset_digest(ds));

  CHECK(model.split.train_slots.size() == 120);
  CHECK(model.split.validation_slots.size() == 40);  // llround(0.25 · 160)
  CHECK(model.split.test_slots.size() == 80);

  REQUIRE(model.selection_log.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(model.selection_log[i].lambda == config.lambda_grid[i]);
    CHECK(std::isfinite(model.selection_log[i].validation_nmae));
  }

  // the recorded winner is the last grid entry attaining the minimal score
  double best = model.selection_log[0].validation_nmae;
  double expected = model.selection_log[0].lambda;
  for (const auto& trial : model.selection_log) {
    if (trial.validation_nmae <= best) {
      best = trial.validation_nmae;
      expected = trial.lambda;
    }
  }
  CHECK(model.lambda == expected);

  // the final fit uses every train and validation slot
  CHECK(model.train_points().size() == 160);
  CHECK(model.krr->lam == model.lambda);

  auto test_pts = detail::select_points(ds.slots, model.split.test_slots);
  Eigen::MatrixXd f = model.predict(test_pts);
  CHECK(f.rows() == 80);
  CHECK(f.cols() == 12);
  CHECK(f.allFinite());
}

TEST_CASE("exact validation ties resolve to the strongest regularization") {
  MeterDataset ds = tie_dataset(7);
  ExperimentConfig config;
  config.kernel_text = "kt + kd";
  config.method = "krr";
  config.lambda_grid = {0.01, 0.1, 1.0};
  config.train_days = 3;
  config.validation_fraction = 1.0 / 3.0;
  config.split_seed = 7;

  TrainedModel model = train_model(ds, config);
  for (const auto& trial : model.selection_log) {
    CHECK(trial.validation_nmae == 1.0);  // all-zero predictions score exactly 1
  }
  CHECK(model.lambda == 1.0);
}

TEST_CASE("unusable validation scores: single-point grids pass, sweeps fail") {
  // flip the tie construction: validation readings are all zero, so the
  // score is undefined at every strength
  SplitSpec preview = make_split(32, 3, 1.0 / 3.0, 7);
  MeterDataset ds;
  ds.slots = make_slots(100, 4, {});
  ds.meters = {MeterInfo{"a", MeterGroup::Residential}, MeterInfo{"b", MeterGroup::SME}};
  ds.observations.values = Eigen::MatrixXd::Ones(32, 2);
  ds.observations.mask = MaskMatrix::Ones(32, 2);
  for (int i : preview.validation_slots) ds.observations.values.row(i).setZero();
  ds.validate();

  ExperimentConfig config;
  config.kernel_text = "kt + kd";
  config.method = "krr";
  config.train_days = 3;
  config.validation_fraction = 1.0 / 3.0;
  config.split_seed = 7;

  config.lambda_grid = {0.1, 1.0};
  CHECK_THROWS_AS(train_model(ds, config), std::invalid_argument);

  config.lambda_grid = {0.25};
  TrainedModel model = train_model(ds, config);
  CHECK(model.lambda == 0.25);
  REQUIRE(model.selection_log.size() == 1);
  CHECK(std::isnan(model.selection_log[0].validation_nmae));

  // the undefined score survives a save/load round trip as JSON null
  fs::path dir = fresh_dir("nan_log");
  save_model(model, dir);
  CHECK(detail::read_text_file(dir / "manifest.json").find("null") != std::string::npos);
  TrainedModel loaded = load_model(dir);
  REQUIRE(loaded.selection_log.size() == 1);
  CHECK(std::isnan(loaded.selection_log[0].validation_nmae));
  fs::remove_all(dir);
}

TEST_CASE("okl training path") {
  MeterDataset ds = small_synth();
  ExperimentConfig config = krr_config();
  config.method = "okl";
  config.kernel_text = "kt * kd * kc";
  config.rank = 3;
  config.lambda_grid = {0.1, 1.0};
  config.solver.max_iters = 10;
  config.solver.seed = 21;

  TrainedModel model = train_model(ds, config);
  CHECK(model.method == "okl");
  REQUIRE(model.okl.has_value());
  CHECK(model.okl->rank == 3);
  CHECK(model.coefficient_count() == static_cast<std::size_t>((160 + 12) * 3));
  for (std::size_t i = 1; i < model.okl->trace.size(); ++i) {
    CHECK(model.okl->trace[i] <=
          model.okl->trace[i - 1] + 1e-8 * std::abs(model.okl->trace[i - 1]));
  }

  auto test_pts = detail::select_points(ds.slots, model.split.test_slots);
  Eigen::MatrixXd f = model.predict(test_pts);
  CHECK(f.rows() == 80);
  CHECK(f.allFinite());
}

TEST_CASE("training is deterministic") {
  MeterDataset ds = small_synth();
  ExperimentConfig config = krr_config();
  TrainedModel a = train_model(ds, config);
  TrainedModel b = train_model(ds, config);
  REQUIRE(a.selection_log.size() == b.selection_log.size());
  for (std::size_t i = 0; i < a.selection_log.size(); ++i) {
    CHECK(a.selection_log[i].validation_nmae == b.selection_log[i].validation_nmae);
  }
  auto pts = detail::select_points(ds.slots, a.split.test_slots);
  CHECK(a.predict(pts) == b.predict(pts));
}

TEST_CASE("experiment configuration validation") {
  MeterDataset ds = small_synth();
  ExperimentConfig config = krr_config();

  config.method = "gp";
  CHECK_THROWS_AS(train_model(ds, config), std::invalid_argument);

  config = krr_config();
  config.rank = 2;  // rank is an okl-only knob
  CHECK_THROWS_AS(train_model(ds, config), std::invalid_argument);

  config = krr_config();
  config.method = "okl";
  config.rank = 0;
  CHECK_THROWS_AS(train_model(ds, config), std::invalid_argument);
  config.rank = 13;  // more than the 12 meters
  CHECK_THROWS_AS(train_model(ds, config), std::invalid_argument);
  config.rank = 4;
  config.group = "SME";  // 3 meters, rank 4 still too large
  CHECK_THROWS_AS(train_model(ds, config), std::invalid_argument);

  config = krr_config();
  config.lambda_grid = {};
  CHECK_THROWS_AS(train_model(ds, config), std::invalid_argument);
  config.lambda_grid = {0.1, -1.0};
  CHECK_THROWS_AS(train_model(ds, config), std::invalid_argument);

  config = krr_config();
  config.group = "household";
  CHECK_THROWS_AS(train_model(ds, config), DataError);

  SynthParams no_others;
  no_others.residential = 2;
  no_others.sme = 1;
  no_others.others = 0;
  no_others.n_days = 25;
  no_others.seed = 2;
  MeterDataset without = synth_gen(no_others);
  config = krr_config();
  config.group = "Others";
  CHECK_THROWS_AS(train_model(without, config), std::invalid_argument);
}

TEST_CASE("krr model round trips through its directory format") {
  MeterDataset ds = small_synth();
  TrainedModel model = train_model(ds, krr_config());

  fs::path dir = fresh_dir("krr_model");
  save_model(model, dir);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "observed.i32"));
  CHECK(fs::exists(dir / "coeffs.f64"));

  TrainedModel loaded = load_model(dir);
  CHECK(loaded.method == model.method);
  CHECK(loaded.lambda == model.lambda);
  CHECK(loaded.group == model.group);
  CHECK(loaded.task_ids == model.task_ids);
  CHECK(loaded.data_digest == model.data_digest);
  CHECK(loaded.split.train_slots == model.split.train_slots);
  CHECK(loaded.split.validation_slots == model.split.validation_slots);
  CHECK(loaded.split.test_slots == model.split.test_slots);
  CHECK(to_string(loaded.kernel) == to_string(model.kernel));
  REQUIRE(loaded.selection_log.size() == model.selection_log.size());
  for (std::size_t i = 0; i < model.selection_log.size(); ++i) {
    CHECK(loaded.selection_log[i].lambda == model.selection_log[i].lambda);
    CHECK(loaded.selection_log[i].validation_nmae == model.selection_log[i].validation_nmae);
  }
  REQUIRE(loaded.krr.has_value());
  CHECK(loaded.krr->observed == model.krr->observed);
  CHECK(loaded.krr->empty_tasks == model.krr->empty_tasks);
  REQUIRE(loaded.krr->coeffs.size() == model.krr->coeffs.size());
  for (std::size_t j = 0; j < model.krr->coeffs.size(); ++j) {
    CHECK(loaded.krr->coeffs[j] == model.krr->coeffs[j]);  // binary payload, bit-exact
  }

  auto pts = detail::select_points(ds.slots, model.split.test_slots);
  CHECK(loaded.predict(pts) == model.predict(pts));
  fs::remove_all(dir);
}

TEST_CASE("okl model round trips through its directory format") {
  MeterDataset ds = small_synth();
  ExperimentConfig config = krr_config();
  config.method = "okl";
  config.rank = 2;
  config.lambda_grid = {0.5};
  config.solver.max_iters = 12;
  config.solver.seed = 4;
  TrainedModel model = train_model(ds, config);

  fs::path dir = fresh_dir("okl_model");
  save_model(model, dir);
  CHECK(fs::exists(dir / "latent.f64"));
  CHECK(fs::exists(dir / "mixing.f64"));

  TrainedModel loaded = load_model(dir);
  REQUIRE(loaded.okl.has_value());
  CHECK(loaded.okl->rank == model.okl->rank);
  CHECK(loaded.okl->converged == model.okl->converged);
  CHECK(loaded.okl->sweeps == model.okl->sweeps);
  CHECK(loaded.okl->trace == model.okl->trace);
  CHECK(loaded.okl->latent_coeffs == model.okl->latent_coeffs);
  CHECK(loaded.okl->mixing == model.okl->mixing);

  auto pts = detail::select_points(ds.slots, model.split.test_slots);
  CHECK(loaded.predict(pts) == model.predict(pts));
  fs::remove_all(dir);
}

TEST_CASE("model loading rejects corrupted artifacts") {
  CHECK_THROWS_AS(load_model(fs::temp_directory_path() / "loadcast_no_such_model"), DataError);

  MeterDataset ds = small_synth();
  TrainedModel model = train_model(ds, krr_config());
  fs::path dir = fresh_dir("corrupt_model");
  save_model(model, dir);

  // truncated coefficient payload no longer matches the observed counts
  auto coeffs = detail::read_f64(dir / "coeffs.f64");
  coeffs.pop_back();
  detail::write_f64(dir / "coeffs.f64", coeffs);
  CHECK_THROWS_AS(load_model(dir), DataError);

  detail::write_text_file(dir / "manifest.json", "{ not json");
  CHECK_THROWS_AS(load_model(dir), DataError);
  fs::remove_all(dir);
}

TEST_CASE("command pipeline: synth, train, forecast, evaluate") {
  fs::path data_dir = fresh_dir("cmd_data");
  fs::path model_dir = fresh_dir("cmd_model");
  fs::path out_dir = fresh_dir("cmd_out");

  SynthParams p;
  p.residential = 6;
  p.sme = 3;
  p.others = 3;
  p.n_days = 30;
  p.noise_sigma = 0.05;
  p.missing_rate = 0.1;
  p.seed = 13;
  std::string synth_summary = cmd_synth(p, data_dir);
  CHECK(synth_summary.find("12 meters") != std::string::npos);
  CHECK(fs::exists(data_dir / "observations.csv"));

  std::string train_summary = cmd_train(krr_config(), data_dir, model_dir);
  CHECK(train_summary.find("selected lambda") != std::string::npos);
  CHECK(train_summary.find("validation NMAE") != std::string::npos);

  TrainedModel model = load_model(model_dir);
  ForecastQuery query = query_from_dataset(model, data_dir);
  CHECK(query.slot_indices.size() == 80);

  fs::path forecast_csv = out_dir / "forecast.csv";
  std::string forecast_summary = cmd_forecast(model_dir, query, true, forecast_csv);
  CHECK(forecast_summary.find("80 slots") != std::string::npos);

  // the aggregate rows are the per-slot sums over the meter rows
  auto lines = detail::split_lines(detail::read_text_file(forecast_csv));
  REQUIRE(lines.at(0) == "slot_index,meter_id,forecast");
  std::map<int, double> total_rows;
  std::map<int, double> summed;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    auto f = detail::split_csv(lines[n]);
    REQUIRE(f.size() == 3);
    int slot = static_cast<int>(std::stol(f[0]));
    double value = std::stod(f[2]);
    if (f[1] == "TOTAL") {
      total_rows[slot] = value;
    } else {
      summed[slot] += value;
    }
  }
  REQUIRE(total_rows.size() == 80);
  for (const auto& [slot, total] : total_rows) {
    CHECK_THAT(total, WithinAbs(summed[slot], 1e-9 * std::max(std::abs(summed[slot]), 1.0)));
  }

  EvaluateResult eval = cmd_evaluate(forecast_csv, data_dir,
                                     {"all", "Residential", "SME", "Others"},
                                     out_dir / "metrics");
  REQUIRE(eval.rows.size() == 8);  // four groups, two metrics each
  CHECK(fs::exists(out_dir / "metrics.csv"));
  CHECK(fs::exists(out_dir / "metrics.txt"));
  CHECK(eval.csv.rfind("group,metric,mean,std,evaluated_slots,skipped_slots\n", 0) == 0);
  for (const auto& row : eval.rows) {
    REQUIRE(row.summary.available());
    if (row.metric == "NMAE") CHECK(row.summary.mean < 0.8);  // clearly beats the zero forecast
  }

  // evaluating against a different dataset is refused up front
  fs::path other_dir = fresh_dir("cmd_other_data");
  SynthParams q = p;
  q.seed = 99;
  cmd_synth(q, other_dir);
  CHECK_THROWS_AS(query_from_dataset(model, other_dir), DataError);

  fs::remove_all(data_dir);
  fs::remove_all(model_dir);
  fs::remove_all(out_dir);
  fs::remove_all(other_dir);
}

TEST_CASE("evaluate guards its inputs") {
  fs::path data_dir = fresh_dir("eval_data");
  SynthParams p;
  p.residential = 3;
  p.sme = 1;
  p.others = 1;
  p.n_days = 6;
  p.seed = 17;
  cmd_synth(p, data_dir);
  MeterDataset ds = load_dataset(data_dir);

  // a forecast covering only the single SME meter leaves the other groups'
  // observed cells unforecast
  std::string partial = "slot_index,meter_id,forecast\n0,S0001,1.0\n1,S0001,1.0\n";
  fs::path partial_csv = data_dir / "partial.csv";
  detail::write_text_file(partial_csv, partial);
  try {
    cmd_evaluate(partial_csv, data_dir, {"all"}, std::nullopt);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }

  // but it is fine when the requested group is covered
  EvaluateResult res = cmd_evaluate(partial_csv, data_dir, {"SME"}, std::nullopt);
  CHECK(res.rows.size() == 2);

  // header-only file carries no forecasts
  fs::path empty_csv = data_dir / "empty.csv";
  detail::write_text_file(empty_csv, "slot_index,meter_id,forecast\n");
  CHECK_THROWS_AS(cmd_evaluate(empty_csv, data_dir, {"all"}, std::nullopt), DataError);

  // unknown meters and out-of-range slots are named
  detail::write_text_file(empty_csv, "slot_index,meter_id,forecast\n0,Z9,1.0\n");
  CHECK_THROWS_AS(cmd_evaluate(empty_csv, data_dir, {"all"}, std::nullopt), DataError);
  detail::write_text_file(empty_csv, "slot_index,meter_id,forecast\n99,R0001,1.0\n");
  CHECK_THROWS_AS(cmd_evaluate(empty_csv, data_dir, {"all"}, std::nullopt), DataError);

  // the all-zero forecast scores NMAE exactly 1 and MAPE exactly 100
  std::string zeros = "slot_index,meter_id,forecast\n";
  for (int slot = 0; slot < 5; ++slot) {
    for (const auto& m : ds.meters) {
      zeros += std::to_string(slot) + "," + m.id + ",0\n";
    }
  }
  fs::path zeros_csv = data_dir / "zeros.csv";
  detail::write_text_file(zeros_csv, zeros);
  EvaluateResult zero_eval = cmd_evaluate(zeros_csv, data_dir, {"all"}, std::nullopt);
  REQUIRE(zero_eval.rows.size() == 2);
  CHECK(zero_eval.rows[0].summary.mean == 1.0);
  CHECK(zero_eval.rows[1].summary.mean == 100.0);

  // SME rows in partial.csv-style evaluation calculate from the right meter:
  // an exact forecast of the SME meter scores zero
  std::string exact = "slot_index,meter_id,forecast\n";
  int sme_col = group_indices(ds, "SME").at(0);
  for (int slot = 0; slot < 3; ++slot) {
    if (!ds.observations.mask(slot, sme_col)) continue;
    exact += std::to_string(slot) + "," + ds.meters[static_cast<std::size_t>(sme_col)].id + "," +
             detail::format_double(ds.observations.values(slot, sme_col)) + "\n";
  }
  fs::path exact_csv = data_dir / "exact.csv";
  detail::write_text_file(exact_csv, exact);
  EvaluateResult exact_eval = cmd_evaluate(exact_csv, data_dir, {"SME"}, std::nullopt);
  CHECK(exact_eval.rows[0].summary.mean == 0.0);

  fs::remove_all(data_dir);
}

TEST_CASE("forecast from an explicit slots file and an empty horizon") {
  fs::path data_dir = fresh_dir("slots_data");
  fs::path model_dir = fresh_dir("slots_model");
  SynthParams p;
  p.residential = 4;
  p.sme = 2;
  p.others = 2;
  p.n_days = 25;
  p.seed = 23;
  cmd_synth(p, data_dir);

  // an explicit slots file drives prediction at arbitrary calendar points
  ExperimentConfig config = krr_config();
  config.lambda_grid = {0.1};
  cmd_train(config, data_dir, model_dir);
  MeterDataset ds = load_dataset(data_dir);
  std::string slots_text = "slot_index,date,slot_of_day,t,d,c\n";
  for (int i = 0; i < 4; ++i) {
    const auto& s = ds.slots[static_cast<std::size_t>(i)];
    slots_text += std::to_string(s.index) + "," + s.iso_date() + "," +
                  std::to_string(s.slot_of_day) + "," +
                  detail::format_double(s.point.time_of_day) + "," +
                  detail::format_double(s.point.day_of_year) + "," +
                  std::to_string(s.point.day_type) + "\n";
  }
  fs::path slots_file = data_dir / "query_slots.csv";
  detail::write_text_file(slots_file, slots_text);
  ForecastQuery query = query_from_slots_file(slots_file);
  REQUIRE(query.points.size() == 4);
  CHECK(query.slot_indices == std::vector<int>{0, 1, 2, 3});
  CHECK(query.points[1].time_of_day == 4.5);

  fs::path out_csv = data_dir / "from_slots.csv";
  cmd_forecast(model_dir, query, false, out_csv);
  auto lines = detail::split_lines(detail::read_text_file(out_csv));
  CHECK(lines.size() == 1 + 4 * 8);  // header + slots × meters, no aggregate rows

  detail::write_text_file(slots_file, "wrong,header\n");
  CHECK_THROWS_AS(query_from_slots_file(slots_file), DataError);

  // training through the full horizon leaves nothing to forecast
  fs::path full_model = fresh_dir("slots_model_full");
  ExperimentConfig full = krr_config();
  full.lambda_grid = {0.1};
  full.train_days = 25;
  cmd_train(full, data_dir, full_model);
  TrainedModel model = load_model(full_model);
  CHECK(model.split.test_slots.empty());
  ForecastQuery empty_query = query_from_dataset(model, data_dir);
  fs::path empty_csv = data_dir / "empty_forecast.csv";
  std::string summary = cmd_forecast(full_model, empty_query, true, empty_csv);
  CHECK(summary.find("0 meters") == std::string::npos);  // meters stay, slots are empty
  CHECK(summary.find("over 0 slots") != std::string::npos);
  CHECK(detail::split_lines(detail::read_text_file(empty_csv)).size() == 1);

  fs::remove_all(data_dir);
  fs::remove_all(model_dir);
  fs::remove_all(full_model);
}

TEST_CASE("benchmark report on a small panel") {
  SynthParams p;
  p.residential = 4;
  p.sme = 2;
  p.others = 2;
  p.n_days = 15;
  p.noise_sigma = 0.05;
  p.seed = 31;
  MeterDataset ds = synth_gen(p);

  BenchConfig config;
  config.train_days = 10;
  config.validation_fraction = 0.2;
  config.split_seed = 3;
  config.lambda_grid = {0.1, 1.0};
  config.okl_rank = 2;
  config.solver.max_iters = 15;
  config.presets = {"am1", "mm1"};
  config.okl_preset = "mm1";

  BenchReport report = run_bench(ds, config);
  REQUIRE(report.entries.size() == 3);
  CHECK(report.entries[0].model == "krr-am1");
  CHECK(report.entries[1].model == "krr-mm1");
  CHECK(report.entries[2].model == "okl-mm1");
  CHECK(report.entries[2].kernel == to_string(preset_kernel("mm1")));
  for (const auto& entry : report.entries) {
    CHECK(entry.rows.size() == 8);  // four groups × two metrics
    for (const auto& row : entry.rows) {
      REQUIRE(row.summary.available());
      CHECK(std::isfinite(row.summary.mean));
    }
  }

  std::string csv = report.to_csv();
  CHECK(csv.rfind("model,kernel,group,metric,mean,std,evaluated_slots,skipped_slots\n", 0) == 0);
  CHECK(csv.find("krr-am1") != std::string::npos);
  CHECK(csv.find("okl-mm1") != std::string::npos);
  std::string text = report.to_text();
  CHECK(text.find("== all ==") != std::string::npos);
  CHECK(text.find("== SME ==") != std::string::npos);
  CHECK(text.find("okl-mm1") != std::string::npos);
}
