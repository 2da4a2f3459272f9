// Raw smart-meter reading ingestion: timestamp decoding, daylight-saving
// repair, 3-hour downsampling, and meter filtering into a MeterDataset.
//
// Raw record format: `meter_id SEP code SEP value`, SEP comma or whitespace.
// The 5-digit code packs (day number, half-hour index): day 1 = 2009-01-01,
// half-hours 1..48 on regular days, up to 50 on the day DST ends (the two
// wall-clock-repeated hours) and only 46 present on the day DST starts.
#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "loadcast/data/dataset.hpp"

namespace loadcast {

enum class DayKind { normal, dst_start, dst_end };

// Transition days by day number, with a bundled table for Ireland over the
// 2009–2010 metering campaign.
struct DstCalendar {
  std::map<int, DayKind> transitions;

  static DstCalendar ireland_2009_2010() {
    DstCalendar c;
    c.transitions = {{88, DayKind::dst_start},    // 2009-03-29
                     {298, DayKind::dst_end},     // 2009-10-25
                     {452, DayKind::dst_start},   // 2010-03-28
                     {669, DayKind::dst_end}};    // 2010-10-31
    return c;
  }

  DayKind day_kind(int day_number) const {
    auto it = transitions.find(day_number);
    return it == transitions.end() ? DayKind::normal : it->second;
  }
};

struct Timestamp {
  int day_number = 0;
  int half_hour = 0;  // 1-based
};

// Digit split only: first three digits name the day, last two the half-hour.
inline Timestamp decode_timestamp_raw(long long code) {
  if (code < 10000 || code > 99999) {
    throw DataError("timestamp " + std::to_string(code) + " is not a 5-digit code");
  }
  return Timestamp{static_cast<int>(code / 100), static_cast<int>(code % 100)};
}

// Full decoding contract: additionally rejects half-hour indices outside
// [1, 50] (DST repair narrows to [1, 48] later).
inline Timestamp decode_timestamp(long long code) {
  Timestamp ts = decode_timestamp_raw(code);
  if (ts.half_hour < 1 || ts.half_hour > 50) {
    throw DataError("timestamp " + std::to_string(code) + " carries half-hour index " +
                    std::to_string(ts.half_hour) + " outside [1, 50]");
  }
  return ts;
}

using HalfHourRecord = std::pair<int, double>;  // (half-hour index, reading)

// Normalizes one day's records to half-hour indices 1..48.
//   normal    — identity; indices must already lie in [1, 48].
//   dst_start — identity; the skipped hour's slots are simply absent.
//   dst_end   — indices 1..50 remap to {1,2,3,4,3,4,5,...,48}: 1–4 keep
//               their value, 5 and 6 fold onto 3 and 4, k ≥ 7 shifts to k−2;
//               readings landing on the same slot are averaged.
inline std::vector<HalfHourRecord> repair_dst(const std::vector<HalfHourRecord>& day_records,
                                              DayKind kind) {
  const int limit = kind == DayKind::dst_end ? 50 : 48;
  std::array<double, 49> sum{};
  std::array<int, 49> count{};
  for (const auto& [hh, value] : day_records) {
    if (hh < 1 || hh > limit) {
      throw DataError("half-hour index " + std::to_string(hh) + " invalid on a " +
                      (kind == DayKind::dst_end ? "DST-end" : kind == DayKind::dst_start
                                                                  ? "DST-start"
                                                                  : "normal") +
                      " day (allowed 1.." + std::to_string(limit) + ")");
    }
    int target = (kind == DayKind::dst_end && hh >= 5) ? hh - 2 : hh;
    sum[static_cast<std::size_t>(target)] += value;
    ++count[static_cast<std::size_t>(target)];
  }
  std::vector<HalfHourRecord> out;
  out.reserve(day_records.size());
  for (int hh = 1; hh <= 48; ++hh) {
    if (count[static_cast<std::size_t>(hh)] > 0) {
      out.emplace_back(hh, sum[static_cast<std::size_t>(hh)] /
                               count[static_cast<std::size_t>(hh)]);
    }
  }
  return out;
}

struct DaySlots {
  std::array<double, 8> value{};
  std::array<bool, 8> observed{};
};

// Averages repaired half-hour readings into eight 3-hour slots per day; slot
// s covers half-hours 6s+1 .. 6s+6 and is missing when none are present.
inline DaySlots downsample_3h(const std::vector<HalfHourRecord>& repaired) {
  std::array<double, 8> sum{};
  std::array<int, 8> count{};
  for (const auto& [hh, value] : repaired) {
    if (hh < 1 || hh > 48) {
      throw DataError("half-hour index " + std::to_string(hh) + " outside [1, 48] after repair");
    }
    int s = (hh - 1) / 6;
    sum[static_cast<std::size_t>(s)] += value;
    ++count[static_cast<std::size_t>(s)];
  }
  DaySlots out;
  for (int s = 0; s < 8; ++s) {
    if (count[static_cast<std::size_t>(s)] > 0) {
      out.value[static_cast<std::size_t>(s)] =
          sum[static_cast<std::size_t>(s)] / count[static_cast<std::size_t>(s)];
      out.observed[static_cast<std::size_t>(s)] = true;
    }
  }
  return out;
}

struct RawRecord {
  std::string meter_id;
  int day_number = 0;
  int half_hour = 0;
  double value = 0.0;
};

namespace detail {

inline std::vector<std::string> split_fields(std::string_view line) {
  if (line.find(',') != std::string_view::npos) return split_csv(line);
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos > start) fields.emplace_back(line.substr(start, pos - start));
  }
  return fields;
}

}  // namespace detail

// Parses the raw reading file. Structural problems (wrong field count,
// non-5-digit code, malformed or negative reading) are hard errors naming
// the line; half-hour range issues are deferred to filter_meters.
inline std::vector<RawRecord> parse_raw_text(std::string_view text) {
  std::vector<RawRecord> records;
  auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = detail::trim(lines[n]);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "line " + std::to_string(n + 1);
    auto fields = detail::split_fields(line);
    if (fields.size() != 3) {
      throw DataError(where + ": expected `meter_id code value`, got " +
                      std::to_string(fields.size()) + " fields");
    }
    long long code = detail::parse_int(fields[1], where + " timestamp");
    Timestamp ts;
    try {
      ts = decode_timestamp_raw(code);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    double value = detail::parse_double(fields[2], where + " reading");
    if (!std::isfinite(value)) throw DataError(where + ": non-finite reading");
    if (value < 0.0) {
      throw DataError(where + ": negative reading " + detail::format_double(value));
    }
    records.push_back(RawRecord{fields[0], ts.day_number, ts.half_hour, value});
  }
  return records;
}

struct RejectionReport {
  struct RemovedMeter {
    std::string meter_id;
    std::string reason;
  };
  struct DroppedRecord {
    std::string meter_id;
    int day_number = 0;
    int half_hour = 0;
    std::string reason;
  };
  std::vector<RemovedMeter> removed_meters;
  std::vector<DroppedRecord> dropped_records;

  std::string to_text() const {
    std::string out;
    out += "removed meters: " + std::to_string(removed_meters.size()) + "\n";
    for (const auto& m : removed_meters) out += "  " + m.meter_id + ": " + m.reason + "\n";
    out += "dropped records: " + std::to_string(dropped_records.size()) + "\n";
    for (const auto& r : dropped_records) {
      out += "  " + r.meter_id + " day " + std::to_string(r.day_number) + " slot " +
             std::to_string(r.half_hour) + ": " + r.reason + "\n";
    }
    return out;
  }
};

// meter -> day -> half-hour records, after filtering.
using MeterDayRecords = std::map<std::string, std::map<int, std::vector<HalfHourRecord>>>;

// Applies the retention rules: a meter with any half-hour index above 50 is
// removed outright; individual records with index 0 or an index beyond a
// day's valid range are dropped and reported, the meter kept.
inline MeterDayRecords filter_meters(const std::vector<RawRecord>& records,
                                     const DstCalendar& dst, RejectionReport& report) {
  std::set<std::string> removed;
  for (const auto& r : records) {
    if (r.half_hour > 50 && removed.insert(r.meter_id).second) {
      report.removed_meters.push_back(
          {r.meter_id, "half-hour index " + std::to_string(r.half_hour) + " exceeds 50"});
    }
  }
  MeterDayRecords kept;
  for (const auto& r : records) {
    if (removed.count(r.meter_id)) continue;
    const int limit = dst.day_kind(r.day_number) == DayKind::dst_end ? 50 : 48;
    if (r.half_hour < 1 || r.half_hour > limit) {
      report.dropped_records.push_back(
          {r.meter_id, r.day_number, r.half_hour,
           "half-hour index outside [1, " + std::to_string(limit) + "]"});
      continue;
    }
    kept[r.meter_id][r.day_number].emplace_back(r.half_hour, r.value);
  }
  return kept;
}

// Full ingestion: raw records -> filtered -> repaired -> downsampled dataset
// covering every day in [min, max] seen across retained meters, 8 slots per
// day. Meter order is lexicographic by id.
inline MeterDataset build_dataset(const std::vector<RawRecord>& records,
                                  const std::map<std::string, MeterGroup>& groups,
                                  const std::set<int>& holidays, const DstCalendar& dst,
                                  RejectionReport& report) {
  MeterDayRecords by_meter = filter_meters(records, dst, report);
  if (by_meter.empty()) throw DataError("no meters survived ingestion");

  int day_min = std::numeric_limits<int>::max();
  int day_max = std::numeric_limits<int>::min();
  for (const auto& [id, days] : by_meter) {
    day_min = std::min(day_min, days.begin()->first);
    day_max = std::max(day_max, days.rbegin()->first);
  }
  const int n_days = day_max - day_min + 1;

  MeterDataset ds;
  for (const auto& [id, days] : by_meter) {
    MeterInfo info;
    info.id = id;
    auto it = groups.find(id);
    info.group = it == groups.end() ? MeterGroup::Others : it->second;
    ds.meters.push_back(info);
  }

  ds.slots = make_slots(day_min, n_days, holidays);

  const auto ell = static_cast<Eigen::Index>(ds.slots.size());
  const auto m = static_cast<Eigen::Index>(ds.meters.size());
  ds.observations.values = Eigen::MatrixXd::Zero(ell, m);
  ds.observations.mask = MaskMatrix::Zero(ell, m);

  Eigen::Index j = 0;
  for (const auto& [id, days] : by_meter) {
    for (const auto& [day, day_records] : days) {
      DaySlots slots = downsample_3h(repair_dst(day_records, dst.day_kind(day)));
      const Eigen::Index base = static_cast<Eigen::Index>(day - day_min) * 8;
      for (int s = 0; s < 8; ++s) {
        if (slots.observed[static_cast<std::size_t>(s)]) {
          ds.observations.values(base + s, j) = slots.value[static_cast<std::size_t>(s)];
          ds.observations.mask(base + s, j) = 1;
        }
      }
    }
    ++j;
  }

  ds.validate();
  return ds;
}

// Meter-group file: CSV `meter_id,group`; a header line is optional.
inline std::map<std::string, MeterGroup> parse_groups(std::string_view text) {
  std::map<std::string, MeterGroup> groups;
  auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    auto line = detail::trim(lines[n]);
    if (line.empty() || line[0] == '#') continue;
    auto f = detail::split_csv(line);
    if (n == 0 && f.size() == 2 && f[0] == "meter_id" && f[1] == "group") continue;
    if (f.size() != 2) {
      throw DataError("groups file line " + std::to_string(n + 1) + ": expected `meter_id,group`");
    }
    try {
      groups[f[0]] = parse_group(f[1]);
    } catch (const DataError& e) {
      throw DataError("groups file line " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return groups;
}

}  // namespace loadcast
