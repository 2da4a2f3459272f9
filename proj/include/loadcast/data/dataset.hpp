// Processed smart-meter dataset: meters × 3-hour slots with calendar
// features, persisted as three CSV files (slots, meters, observations).
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "loadcast/calendar.hpp"
#include "loadcast/common.hpp"
#include "loadcast/observation.hpp"

namespace loadcast {

enum class MeterGroup { Residential, SME, Others };

inline std::string to_string(MeterGroup g) {
  switch (g) {
    case MeterGroup::Residential: return "Residential";
    case MeterGroup::SME: return "SME";
    case MeterGroup::Others: return "Others";
  }
  throw std::logic_error("to_string(MeterGroup): unreachable");
}

inline MeterGroup parse_group(std::string_view s) {
  if (s == "Residential") return MeterGroup::Residential;
  if (s == "SME") return MeterGroup::SME;
  if (s == "Others") return MeterGroup::Others;
  throw DataError("unknown meter group '" + std::string(s) +
                  "' (expected Residential, SME or Others)");
}

struct MeterInfo {
  std::string id;
  MeterGroup group = MeterGroup::Others;
};

struct SlotInfo {
  int index = 0;        // 0-based, strictly increasing
  int day_number = 0;   // day 1 = 2009-01-01
  int slot_of_day = 0;  // 0..7
  CalendarPoint point;

  std::string iso_date() const { return cal::iso_date_of_day_number(day_number); }
};

struct MeterDataset {
  std::vector<MeterInfo> meters;
  std::vector<SlotInfo> slots;
  ObservationMatrix observations;  // slots × meters

  Eigen::Index slot_count() const { return observations.values.rows(); }
  Eigen::Index meter_count() const { return observations.values.cols(); }

  std::vector<CalendarPoint> points() const {
    std::vector<CalendarPoint> out;
    out.reserve(slots.size());
    for (const auto& s : slots) out.push_back(s.point);
    return out;
  }

  void validate() const {
    observations.require_shape_consistent();
    if (static_cast<Eigen::Index>(slots.size()) != slot_count() ||
        static_cast<Eigen::Index>(meters.size()) != meter_count()) {
      throw DataError("dataset shape mismatch between metadata and observations");
    }
    std::set<std::string> ids;
    for (const auto& m : meters) {
      if (!ids.insert(m.id).second) throw DataError("duplicate meter id '" + m.id + "'");
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& s = slots[i];
      if (s.index != static_cast<int>(i)) {
        throw DataError("slot indices not contiguous at " + std::to_string(i));
      }
      if (s.slot_of_day != static_cast<int>(i % 8)) {
        throw DataError("slot " + std::to_string(i) + " breaks the 8-per-day layout");
      }
      s.point.validate();
    }
    observations.require_finite();
    observations.require_nonnegative();
  }
};

// Contiguous slot grid: 8 slots per day for n_days starting at first_day.
// Slot midpoints are 1.5, 4.5, …, 22.5 hours; day type is the Monday-based
// weekday unless the day is listed as a holiday.
inline std::vector<SlotInfo> make_slots(int first_day, int n_days, const std::set<int>& holidays) {
  std::vector<SlotInfo> slots;
  slots.reserve(static_cast<std::size_t>(n_days) * 8);
  for (int day = first_day; day < first_day + n_days; ++day) {
    auto date = cal::date_from_day_number(day);
    int c = holidays.count(day) ? kHolidayClass : cal::weekday_index(day);
    for (int s = 0; s < 8; ++s) {
      SlotInfo slot;
      slot.index = static_cast<int>(slots.size());
      slot.day_number = day;
      slot.slot_of_day = s;
      slot.point = CalendarPoint{3.0 * s + 1.5, static_cast<double>(cal::day_of_year(date)), c};
      slots.push_back(slot);
    }
  }
  return slots;
}

// Column indices of a named group; "all" selects every meter.
inline std::vector<int> group_indices(const MeterDataset& ds, std::string_view name) {
  std::vector<int> out;
  if (name == "all") {
    out.resize(ds.meters.size());
    for (std::size_t j = 0; j < ds.meters.size(); ++j) out[j] = static_cast<int>(j);
    return out;
  }
  MeterGroup g = parse_group(name);
  for (std::size_t j = 0; j < ds.meters.size(); ++j) {
    if (ds.meters[j].group == g) out.push_back(static_cast<int>(j));
  }
  return out;
}

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    if (end == std::string_view::npos) {
      fields.emplace_back(trim(line.substr(start)));
      break;
    }
    fields.emplace_back(trim(line.substr(start, end - start)));
    start = end + 1;
  }
  return fields;
}

}  // namespace detail

// --- canonical CSV serialization -----------------------------------------

inline std::string slots_csv(const MeterDataset& ds) {
  std::string out = "slot_index,date,slot_of_day,t,d,c\n";
  for (const auto& s : ds.slots) {
    out += std::to_string(s.index) + "," + s.iso_date() + "," + std::to_string(s.slot_of_day) +
           "," + detail::format_double(s.point.time_of_day) + "," +
           detail::format_double(s.point.day_of_year) + "," + std::to_string(s.point.day_type) +
           "\n";
  }
  return out;
}

inline std::string meters_csv(const MeterDataset& ds) {
  std::string out = "meter_id,group\n";
  for (const auto& m : ds.meters) out += m.id + "," + to_string(m.group) + "\n";
  return out;
}

// Long format, observed cells only, slot-major order.
inline std::string observations_csv(const MeterDataset& ds) {
  std::string out = "slot_index,meter_id,value\n";
  for (Eigen::Index i = 0; i < ds.slot_count(); ++i) {
    for (Eigen::Index j = 0; j < ds.meter_count(); ++j) {
      if (ds.observations.mask(i, j)) {
        out += std::to_string(i) + "," + ds.meters[static_cast<std::size_t>(j)].id + "," +
               detail::format_double(ds.observations.values(i, j)) + "\n";
      }
    }
  }
  return out;
}

// Content hash tying trained models to the exact dataset they saw.
inline std::uint64_t dataset_digest(const MeterDataset& ds) {
  std::uint64_t h = detail::fnv1a64(slots_csv(ds));
  h = detail::fnv1a64(meters_csv(ds), h);
  h = detail::fnv1a64(observations_csv(ds), h);
  return h;
}

inline void save_dataset(const MeterDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  detail::write_text_file(dir / "slots.csv", slots_csv(ds));
  detail::write_text_file(dir / "meters.csv", meters_csv(ds));
  detail::write_text_file(dir / "observations.csv", observations_csv(ds));
}

inline MeterDataset load_dataset(const std::filesystem::path& dir) {
  MeterDataset ds;

  auto slot_lines = detail::split_lines(detail::read_text_file(dir / "slots.csv"));
  if (slot_lines.empty() || slot_lines[0] != "slot_index,date,slot_of_day,t,d,c") {
    throw DataError("slots.csv: missing or unexpected header");
  }
  for (std::size_t n = 1; n < slot_lines.size(); ++n) {
    if (slot_lines[n].empty()) continue;
    auto f = detail::split_csv(slot_lines[n]);
    if (f.size() != 6) {
      throw DataError("slots.csv line " + std::to_string(n + 1) + ": expected 6 fields");
    }
    SlotInfo s;
    s.index = static_cast<int>(detail::parse_int(f[0], "slot_index"));
    s.day_number = cal::day_number_from_iso(f[1]);
    s.slot_of_day = static_cast<int>(detail::parse_int(f[2], "slot_of_day"));
    s.point.time_of_day = detail::parse_double(f[3], "t");
    s.point.day_of_year = detail::parse_double(f[4], "d");
    s.point.day_type = static_cast<int>(detail::parse_int(f[5], "c"));
    ds.slots.push_back(s);
  }

  auto meter_lines = detail::split_lines(detail::read_text_file(dir / "meters.csv"));
  if (meter_lines.empty() || meter_lines[0] != "meter_id,group") {
    throw DataError("meters.csv: missing or unexpected header");
  }
  std::map<std::string, int> column;
  for (std::size_t n = 1; n < meter_lines.size(); ++n) {
    if (meter_lines[n].empty()) continue;
    auto f = detail::split_csv(meter_lines[n]);
    if (f.size() != 2) {
      throw DataError("meters.csv line " + std::to_string(n + 1) + ": expected 2 fields");
    }
    column[f[0]] = static_cast<int>(ds.meters.size());
    ds.meters.push_back(MeterInfo{f[0], parse_group(f[1])});
  }

  const auto ell = static_cast<Eigen::Index>(ds.slots.size());
  const auto m = static_cast<Eigen::Index>(ds.meters.size());
  ds.observations.values = Eigen::MatrixXd::Zero(ell, m);
  ds.observations.mask = MaskMatrix::Zero(ell, m);

  auto obs_lines = detail::split_lines(detail::read_text_file(dir / "observations.csv"));
  if (obs_lines.empty() || obs_lines[0] != "slot_index,meter_id,value") {
    throw DataError("observations.csv: missing or unexpected header");
  }
  for (std::size_t n = 1; n < obs_lines.size(); ++n) {
    if (obs_lines[n].empty()) continue;
    auto f = detail::split_csv(obs_lines[n]);
    if (f.size() != 3) {
      throw DataError("observations.csv line " + std::to_string(n + 1) + ": expected 3 fields");
    }
    auto i = detail::parse_int(f[0], "slot_index");
    if (i < 0 || i >= ell) {
      throw DataError("observations.csv line " + std::to_string(n + 1) + ": slot index " +
                      f[0] + " out of range");
    }
    auto it = column.find(f[1]);
    if (it == column.end()) {
      throw DataError("observations.csv line " + std::to_string(n + 1) + ": unknown meter '" +
                      f[1] + "'");
    }
    ds.observations.values(static_cast<Eigen::Index>(i), it->second) =
        detail::parse_double(f[2], "value");
    ds.observations.mask(static_cast<Eigen::Index>(i), it->second) = 1;
  }

  ds.validate();
  return ds;
}

// Optional holiday list: one ISO date per line; those days get the extra
// day-type class beyond the seven weekdays.
inline std::set<int> parse_holidays(std::string_view text) {
  std::set<int> days;
  for (const auto& line : detail::split_lines(text)) {
    auto t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    days.insert(cal::day_number_from_iso(t));
  }
  return days;
}

}  // namespace loadcast
