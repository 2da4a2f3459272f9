// Synthetic smart-meter data with planted multiplicative seasonal structure.
//
// Each of r latent load shapes is a product of a daily curve, a yearly curve
// and a weekday/weekend level; every meter mixes the latents with
// non-negative weights drawn around its group's profile. Gaussian noise is
// added and clipped at zero, and cells go missing independently at the
// requested rate. Everything is deterministic under the seed.
#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "loadcast/data/dataset.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

struct SynthParams {
  int residential = 40;
  int sme = 10;
  int others = 10;
  int n_days = 540;
  int rank = 3;
  double noise_sigma = 0.05;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  int start_day = 195;           // 2009-07-14, the usual campaign start
  double weekend_factor = 0.7;   // weekend/holiday demand level vs weekdays
};

struct SynthLatent {
  double daily_amp = 0.0;
  double daily_phase = 0.0;   // hours
  double yearly_amp = 0.0;
  double yearly_phase = 0.0;  // days
};

inline std::vector<SynthLatent> sample_latents(int rank, Rng& rng) {
  std::vector<SynthLatent> latents(static_cast<std::size_t>(rank));
  for (auto& g : latents) {
    g.daily_amp = 0.4 + 0.4 * rng.uniform();
    g.daily_phase = 24.0 * rng.uniform();
    g.yearly_amp = 0.3 + 0.4 * rng.uniform();
    g.yearly_phase = 366.0 * rng.uniform();
  }
  return latents;
}

// Latent value at a calendar point: daily × yearly × day-type level. Strictly
// positive since both amplitudes stay below 1. The weekend level is shared by
// all latents so the planted weekday/weekend gap is exact.
inline double eval_latent(const SynthLatent& g, const CalendarPoint& x, double weekend_factor) {
  constexpr double tau = 2.0 * std::numbers::pi;
  double daily = 1.0 + g.daily_amp * std::cos(tau * (x.time_of_day - g.daily_phase) / 24.0);
  double yearly = 1.0 + g.yearly_amp * std::cos(tau * (x.day_of_year - g.yearly_phase) / 366.0);
  double level = x.day_type >= 5 ? weekend_factor : 1.0;
  return daily * yearly * level;
}

struct SynthMeter {
  std::string id;
  MeterGroup group = MeterGroup::Others;
  std::vector<double> weights;  // non-negative, one per latent
};

// Group profiles: each group leans on its own latent with a distinct demand
// scale, plus per-meter jitter, so tasks are related but not identical.
inline std::vector<SynthMeter> sample_weights(int residential, int sme, int others, int rank,
                                              Rng& rng) {
  std::vector<SynthMeter> meters;
  auto add_group = [&](int count, MeterGroup group, const char* prefix, int group_idx,
                       double scale) {
    for (int n = 0; n < count; ++n) {
      SynthMeter m;
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%s%04d", prefix, n + 1);
      m.id = buf;
      m.group = group;
      m.weights.resize(static_cast<std::size_t>(rank));
      for (int k = 0; k < rank; ++k) {
        double base = (k == group_idx % rank) ? 1.0 : 0.1;
        m.weights[static_cast<std::size_t>(k)] = scale * (base + 0.2 * rng.uniform());
      }
      meters.push_back(std::move(m));
    }
  };
  add_group(residential, MeterGroup::Residential, "R", 0, 1.0);
  add_group(sme, MeterGroup::SME, "S", 1, 2.5);
  add_group(others, MeterGroup::Others, "O", 2, 0.6);
  return meters;
}

// Assembles the dataset from explicit latents and meter weights; exposed
// separately so tests can plant exact configurations.
inline MeterDataset assemble_synth(const std::vector<SynthLatent>& latents,
                                   const std::vector<SynthMeter>& meters, int n_days,
                                   int start_day, double noise_sigma, double missing_rate,
                                   double weekend_factor, Rng& rng) {
  if (meters.empty()) throw std::invalid_argument("assemble_synth: no meters");
  if (n_days < 1) throw std::invalid_argument("assemble_synth: n_days must be positive");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
    throw std::invalid_argument("assemble_synth: missing rate outside [0, 1)");
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("assemble_synth: negative noise sigma");
  }

  MeterDataset ds;
  ds.slots = make_slots(start_day, n_days, {});
  for (const auto& m : meters) {
    if (m.weights.size() != latents.size()) {
      throw std::invalid_argument("assemble_synth: meter '" + m.id + "' has " +
                                  std::to_string(m.weights.size()) + " weights for " +
                                  std::to_string(latents.size()) + " latents");
    }
    for (double w : m.weights) {
      if (!(w >= 0.0)) {
        throw std::invalid_argument("assemble_synth: negative weight for meter '" + m.id + "'");
      }
    }
    ds.meters.push_back(MeterInfo{m.id, m.group});
  }

  const auto ell = static_cast<Eigen::Index>(ds.slots.size());
  const auto m_count = static_cast<Eigen::Index>(meters.size());
  Eigen::MatrixXd latent_values(ell, static_cast<Eigen::Index>(latents.size()));
  for (Eigen::Index i = 0; i < ell; ++i) {
    for (std::size_t k = 0; k < latents.size(); ++k) {
      latent_values(i, static_cast<Eigen::Index>(k)) =
          eval_latent(latents[k], ds.slots[static_cast<std::size_t>(i)].point, weekend_factor);
    }
  }

  ds.observations.values = Eigen::MatrixXd::Zero(ell, m_count);
  ds.observations.mask = MaskMatrix::Zero(ell, m_count);
  for (Eigen::Index j = 0; j < m_count; ++j) {
    const auto& w = meters[static_cast<std::size_t>(j)].weights;
    for (Eigen::Index i = 0; i < ell; ++i) {
      double signal = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        signal += w[k] * latent_values(i, static_cast<Eigen::Index>(k));
      }
      double value = signal + noise_sigma * rng.normal();
      ds.observations.values(i, j) = std::max(value, 0.0);
      ds.observations.mask(i, j) = rng.uniform() >= missing_rate ? 1 : 0;
    }
  }
  for (Eigen::Index j = 0; j < m_count; ++j) {
    for (Eigen::Index i = 0; i < ell; ++i) {
      if (!ds.observations.mask(i, j)) ds.observations.values(i, j) = 0.0;
    }
  }

  ds.validate();
  return ds;
}

inline MeterDataset synth_gen(const SynthParams& params) {
  if (params.residential < 0 || params.sme < 0 || params.others < 0) {
    throw std::invalid_argument("synth_gen: negative meter count");
  }
  if (params.rank < 1) throw std::invalid_argument("synth_gen: rank must be at least 1");
  Rng rng(params.seed);
  auto latents = sample_latents(params.rank, rng);
  auto meters = sample_weights(params.residential, params.sme, params.others, params.rank, rng);
  return assemble_synth(latents, meters, params.n_days, params.start_day, params.noise_sigma,
                        params.missing_rate, params.weekend_factor, rng);
}

}  // namespace loadcast
