// Command-line driver: preprocess raw readings, generate synthetic data,
// train/forecast/evaluate models, and run the full benchmark comparison.
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loadcast/loadcast.hpp"

namespace {

std::vector<double> parse_lambda_grid(const std::string& text) {
  std::vector<double> grid;
  for (const auto& field : loadcast::detail::split_csv(text)) {
    grid.push_back(loadcast::detail::parse_double(field, "lambda grid entry"));
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"long-horizon electricity demand forecasting with calendar kernels"};
  app.require_subcommand(1);

  // --- preprocess ---------------------------------------------------------
  auto* preprocess = app.add_subcommand("preprocess", "ingest raw half-hourly readings");
  std::string raw_path, groups_path, holidays_path, pre_out;
  preprocess->add_option("--raw", raw_path, "raw readings file (meter_id code value)")
      ->required();
  preprocess->add_option("--groups", groups_path, "meter_id,group CSV")->required();
  preprocess->add_option("--holidays", holidays_path, "optional holiday list, one ISO date per line");
  preprocess->add_option("--out", pre_out, "output dataset directory")->required();

  // --- synth --------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  loadcast::SynthParams sp;
  std::string synth_out;
  synth->add_option("--residential", sp.residential, "meters in the Residential group");
  synth->add_option("--sme", sp.sme, "meters in the SME group");
  synth->add_option("--others", sp.others, "meters in the Others group");
  synth->add_option("--days", sp.n_days, "number of days");
  synth->add_option("--rank", sp.rank, "number of latent load shapes");
  synth->add_option("--noise", sp.noise_sigma, "additive noise sigma");
  synth->add_option("--missing", sp.missing_rate, "missing-cell probability");
  synth->add_option("--seed", sp.seed, "generator seed");
  synth->add_option("--start-day", sp.start_day, "first day number (day 1 = 2009-01-01)");
  synth->add_option("--weekend-factor", sp.weekend_factor, "weekend demand level");
  synth->add_option("--out", synth_out, "output dataset directory")->required();

  // --- train ----------------------------------------------------------------
  auto* train = app.add_subcommand("train", "fit a model with validation-selected regularization");
  loadcast::ExperimentConfig config;
  std::string train_data, train_out, kernel_text, preset_name, lambda_csv;
  std::uint64_t train_seed = 0;
  auto* kernel_opt = train->add_option("--kernel", kernel_text, "kernel expression");
  auto* preset_opt =
      train->add_option("--preset", preset_name, "named kernel: am1 am2 sam1 sam2 mm1 mm2");
  kernel_opt->excludes(preset_opt);
  preset_opt->excludes(kernel_opt);
  train->add_option("--method", config.method, "krr or okl")->required();
  train->add_option("--rank", config.rank, "latent rank (okl only)");
  train->add_option("--lambda-grid", lambda_csv, "comma-separated regularization grid");
  train->add_option("--group", config.group, "meter group: all, Residential, SME, Others");
  train->add_option("--train-days", config.train_days, "days in train+validation");
  train->add_option("--val-frac", config.validation_fraction, "validation fraction");
  train->add_option("--seed", train_seed, "seed for the split draw and solver init");
  train->add_option("--max-iters", config.solver.max_iters, "solver sweep limit (okl)");
  train->add_option("--tol", config.solver.rel_tol, "relative objective tolerance (okl)");
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--out", train_out, "output model directory")->required();

  // --- forecast -------------------------------------------------------------
  auto* forecast = app.add_subcommand("forecast", "predict demand from a trained model");
  std::string fc_model, fc_data, fc_slots, fc_out;
  bool aggregate = false;
  forecast->add_option("--model", fc_model, "model directory")->required();
  auto* fc_data_opt =
      forecast->add_option("--data", fc_data, "dataset directory; forecasts its test split");
  auto* fc_slots_opt = forecast->add_option("--slots", fc_slots, "slots CSV to forecast instead");
  fc_data_opt->excludes(fc_slots_opt);
  fc_slots_opt->excludes(fc_data_opt);
  forecast->add_flag("--aggregate", aggregate, "append per-slot totals over all meters");
  forecast->add_option("--out", fc_out, "output forecast CSV")->required();

  // --- evaluate ---------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "score forecasts against observed demand");
  std::string ev_forecast, ev_data, ev_out;
  std::vector<std::string> ev_groups;
  evaluate->add_option("--forecast", ev_forecast, "forecast CSV")->required();
  evaluate->add_option("--data", ev_data, "dataset directory")->required();
  evaluate->add_option("--group", ev_groups,
                       "group to report (repeatable; default all four scopes)");
  evaluate->add_option("--out", ev_out, "output report prefix (.csv/.txt appended)");

  // --- bench ---------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "compare every kernel preset plus the multi-task model");
  loadcast::BenchConfig bc;
  std::string bench_data, bench_out, bench_lambda_csv;
  bench->add_option("--data", bench_data, "dataset directory")->required();
  bench->add_option("--out", bench_out, "output report prefix (.csv/.txt appended)");
  bench->add_option("--train-days", bc.train_days, "days in train+validation");
  bench->add_option("--val-frac", bc.validation_fraction, "validation fraction");
  bench->add_option("--seed", bc.split_seed, "split seed");
  bench->add_option("--rank", bc.okl_rank, "joint-model rank");
  bench->add_option("--lambda-grid", bench_lambda_csv, "comma-separated regularization grid");
  bench->add_option("--max-iters", bc.solver.max_iters, "solver sweep limit");
  bench->add_option("--tol", bc.solver.rel_tol, "relative objective tolerance");
  bench->add_option("--preset", bc.okl_preset, "kernel preset for the multi-task model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*preprocess) {
      std::optional<std::filesystem::path> holidays;
      if (!holidays_path.empty()) holidays = holidays_path;
      auto result = loadcast::cmd_preprocess(raw_path, groups_path, holidays, pre_out);
      std::fputs(result.summary.c_str(), stdout);
    } else if (*synth) {
      std::fputs(loadcast::cmd_synth(sp, synth_out).c_str(), stdout);
    } else if (*train) {
      if (kernel_opt->count()) {
        config.kernel_text = kernel_text;
      } else if (preset_opt->count()) {
        config.kernel_text = loadcast::to_string(loadcast::preset_kernel(preset_name));
      } else {
        throw std::invalid_argument("train requires --kernel or --preset");
      }
      if (!lambda_csv.empty()) config.lambda_grid = parse_lambda_grid(lambda_csv);
      config.split_seed = train_seed;
      config.solver.seed = train_seed;
      std::fputs(loadcast::cmd_train(config, train_data, train_out).c_str(), stdout);
    } else if (*forecast) {
      if (!fc_data_opt->count() && !fc_slots_opt->count()) {
        throw std::invalid_argument("forecast requires --data or --slots");
      }
      loadcast::TrainedModel model = loadcast::load_model(fc_model);
      loadcast::ForecastQuery query = fc_slots_opt->count()
                                          ? loadcast::query_from_slots_file(fc_slots)
                                          : loadcast::query_from_dataset(model, fc_data);
      if (query.slot_indices.empty()) {
        std::fputs("warning: nothing to forecast (empty test split)\n", stderr);
      }
      std::fputs(loadcast::cmd_forecast(fc_model, query, aggregate, fc_out).c_str(), stdout);
    } else if (*evaluate) {
      if (ev_groups.empty()) ev_groups = {"all", "Residential", "SME", "Others"};
      std::optional<std::filesystem::path> prefix;
      if (!ev_out.empty()) prefix = ev_out;
      auto result = loadcast::cmd_evaluate(ev_forecast, ev_data, ev_groups, prefix);
      std::fputs(result.text.c_str(), stdout);
    } else if (*bench) {
      if (!bench_lambda_csv.empty()) bc.lambda_grid = parse_lambda_grid(bench_lambda_csv);
      std::optional<std::filesystem::path> prefix;
      if (!bench_out.empty()) prefix = bench_out;
      std::fputs(loadcast::cmd_bench(bench_data, bc, prefix).c_str(), stdout);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const loadcast::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const loadcast::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 0;
}
