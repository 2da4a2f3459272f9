// Trained-model persistence: a directory holding manifest.json plus raw
// little-endian float64/int32 sidecar files for the numeric payload, so a
// save/load round trip reproduces predictions bit for bit.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "loadcast/train.hpp"

namespace loadcast {

static_assert(std::endian::native == std::endian::little,
              "model sidecar files are little-endian; big-endian hosts need byte swaps");

namespace detail {

inline void write_f64(const std::filesystem::path& path, const std::vector<double>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline std::vector<double> read_f64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % sizeof(double) != 0) {
    throw DataError("'" + path.string() + "' is not a whole number of float64 values");
  }
  std::vector<double> data(bytes / sizeof(double));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw DataError("read failed for '" + path.string() + "'");
  return data;
}

inline void write_i32(const std::filesystem::path& path, const std::vector<std::int32_t>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(std::int32_t)));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline std::vector<std::int32_t> read_i32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % sizeof(std::int32_t) != 0) {
    throw DataError("'" + path.string() + "' is not a whole number of int32 values");
  }
  std::vector<std::int32_t> data(bytes / sizeof(std::int32_t));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw DataError("read failed for '" + path.string() + "'");
  return data;
}

inline std::vector<double> matrix_rowmajor(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[k++] = m(i, j);
  }
  return out;
}

inline Eigen::MatrixXd matrix_from_rowmajor(const std::vector<double>& data, Eigen::Index rows,
                                            Eigen::Index cols, const std::string& what) {
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw DataError(what + ": expected " + std::to_string(rows * cols) + " values, found " +
                    std::to_string(data.size()));
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[k++];
  }
  return m;
}

}  // namespace detail

inline constexpr int kModelFormatVersion = 1;

inline void save_model(const TrainedModel& model, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format_version"] = kModelFormatVersion;
  manifest["method"] = model.method;
  manifest["kernel"] = to_string(model.kernel);
  manifest["lambda"] = model.lambda;
  manifest["group"] = model.group;
  manifest["task_ids"] = model.task_ids;
  manifest["data_digest"] = model.data_digest;
  manifest["split"] = {{"seed", model.split.seed},
                       {"train", model.split.train_slots},
                       {"validation", model.split.validation_slots},
                       {"test", model.split.test_slots}};

  nlohmann::json log = nlohmann::json::array();
  for (const auto& trial : model.selection_log) {
    nlohmann::json entry;
    entry["lambda"] = trial.lambda;
    if (std::isfinite(trial.validation_nmae)) {
      entry["validation_nmae"] = trial.validation_nmae;
    } else {
      entry["validation_nmae"] = nullptr;
    }
    log.push_back(entry);
  }
  manifest["selection_log"] = log;

  const auto& points = model.train_points();
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& x : points) {
    pts.push_back({x.time_of_day, x.day_of_year, x.day_type});
  }
  manifest["train_points"] = pts;

  if (model.krr) {
    const KrrModel& krr = *model.krr;
    std::vector<std::int32_t> counts, observed;
    std::vector<double> coeffs;
    for (std::size_t j = 0; j < krr.observed.size(); ++j) {
      counts.push_back(static_cast<std::int32_t>(krr.observed[j].size()));
      for (int i : krr.observed[j]) observed.push_back(i);
      const auto& c = krr.coeffs[j];
      coeffs.insert(coeffs.end(), c.data(), c.data() + c.size());
    }
    if (coeffs.size() != krr.coefficient_count()) {
      throw NumericError("save_model: coefficient payload does not match the observed counts");
    }
    manifest["krr"] = {{"task_observed_counts", counts}, {"empty_tasks", krr.empty_tasks}};
    detail::write_i32(dir / "observed.i32", observed);
    detail::write_f64(dir / "coeffs.f64", coeffs);
  } else {
    const OklModel& okl = *model.okl;
    const auto ell = okl.latent_coeffs.rows();
    const auto m = okl.mixing.rows();
    if (okl.coefficient_count() != static_cast<std::size_t>((ell + m) * okl.rank)) {
      throw NumericError("save_model: latent/mixing payload does not match (slots+tasks)*rank");
    }
    manifest["okl"] = {{"rank", okl.rank},
                       {"converged", okl.converged},
                       {"sweeps", okl.sweeps},
                       {"trace", okl.trace}};
    detail::write_f64(dir / "latent.f64", detail::matrix_rowmajor(okl.latent_coeffs));
    detail::write_f64(dir / "mixing.f64", detail::matrix_rowmajor(okl.mixing));
  }

  detail::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline TrainedModel load_model(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(detail::read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  try {
    if (manifest.at("format_version").get<int>() != kModelFormatVersion) {
      throw DataError("unsupported model format version");
    }
    TrainedModel model;
    model.method = manifest.at("method").get<std::string>();
    if (model.method != "krr" && model.method != "okl") {
      throw DataError("manifest method '" + model.method + "' is neither krr nor okl");
    }
    model.kernel = parse_kernel_expr(manifest.at("kernel").get<std::string>());
    model.lambda = manifest.at("lambda").get<double>();
    model.group = manifest.at("group").get<std::string>();
    model.task_ids = manifest.at("task_ids").get<std::vector<std::string>>();
    model.data_digest = manifest.at("data_digest").get<std::uint64_t>();
    const auto& split = manifest.at("split");
    model.split.seed = split.at("seed").get<std::uint64_t>();
    model.split.train_slots = split.at("train").get<std::vector<int>>();
    model.split.validation_slots = split.at("validation").get<std::vector<int>>();
    model.split.test_slots = split.at("test").get<std::vector<int>>();
    for (const auto& entry : manifest.at("selection_log")) {
      LambdaTrial trial;
      trial.lambda = entry.at("lambda").get<double>();
      const auto& v = entry.at("validation_nmae");
      trial.validation_nmae =
          v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
      model.selection_log.push_back(trial);
    }

    std::vector<CalendarPoint> points;
    for (const auto& p : manifest.at("train_points")) {
      CalendarPoint x{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<int>()};
      x.validate();
      points.push_back(x);
    }
    const auto ell = static_cast<Eigen::Index>(points.size());
    const auto m = static_cast<Eigen::Index>(model.task_ids.size());

    if (model.method == "krr") {
      KrrModel krr;
      krr.kernel = model.kernel;
      krr.lam = model.lambda;
      krr.train_points = points;
      auto counts = manifest.at("krr").at("task_observed_counts").get<std::vector<std::int32_t>>();
      krr.empty_tasks = manifest.at("krr").at("empty_tasks").get<std::vector<int>>();
      if (static_cast<Eigen::Index>(counts.size()) != m) {
        throw DataError("observed-count table does not match the task list");
      }
      auto observed = detail::read_i32(dir / "observed.i32");
      auto coeffs = detail::read_f64(dir / "coeffs.f64");
      std::size_t total = 0;
      for (auto c : counts) total += static_cast<std::size_t>(c);
      if (observed.size() != total || coeffs.size() != total) {
        throw DataError("sidecar sizes do not match the coefficient count " +
                        std::to_string(total));
      }
      std::size_t pos = 0;
      for (auto count : counts) {
        std::vector<int> rows;
        Eigen::VectorXd c(count);
        for (std::int32_t a = 0; a < count; ++a) {
          int slot = observed[pos];
          if (slot < 0 || slot >= ell) {
            throw DataError("observed slot index " + std::to_string(slot) + " out of range");
          }
          rows.push_back(slot);
          c[a] = coeffs[pos];
          ++pos;
        }
        krr.observed.push_back(std::move(rows));
        krr.coeffs.push_back(std::move(c));
      }
      model.krr = std::move(krr);
    } else {
      OklModel okl;
      okl.kernel = model.kernel;
      okl.lam = model.lambda;
      okl.train_points = points;
      const auto& node = manifest.at("okl");
      okl.rank = node.at("rank").get<int>();
      okl.converged = node.at("converged").get<bool>();
      okl.sweeps = node.at("sweeps").get<int>();
      okl.trace = node.at("trace").get<std::vector<double>>();
      if (okl.rank < 1 || okl.rank > m) {
        throw DataError("manifest rank " + std::to_string(okl.rank) + " out of range");
      }
      okl.latent_coeffs = detail::matrix_from_rowmajor(detail::read_f64(dir / "latent.f64"), ell,
                                                       okl.rank, "latent.f64");
      okl.mixing = detail::matrix_from_rowmajor(detail::read_f64(dir / "mixing.f64"), m, okl.rank,
                                                "mixing.f64");
      if (okl.coefficient_count() != static_cast<std::size_t>((ell + m) * okl.rank)) {
        throw DataError("loaded payload does not satisfy the (slots+tasks)*rank identity");
      }
      model.okl = std::move(okl);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
}

}  // namespace loadcast
