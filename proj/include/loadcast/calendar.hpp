// Calendar features and date arithmetic.
//
// A sample is identified by (time of day, day of year, day type). Day
// numbering follows the CER smart-meter convention: day 1 = 2009-01-01.
#pragma once

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "loadcast/common.hpp"

namespace loadcast {

inline constexpr int kWeekdayClasses = 7;  // Monday..Sunday -> 0..6
inline constexpr int kHolidayClass = 7;    // optional 8th class

// One model input x = (t, d, c).
struct CalendarPoint {
  double time_of_day = 0.0;  // hours, in [0, 24)
  double day_of_year = 1.0;  // in [1, 366]
  int day_type = 0;          // categorical class id, >= 0

  void validate() const {
    if (!(time_of_day >= 0.0 && time_of_day < 24.0)) {
      throw std::invalid_argument("CalendarPoint: time of day " +
                                  detail::format_double(time_of_day) + " outside [0, 24)");
    }
    if (!(day_of_year >= 1.0 && day_of_year <= 366.0)) {
      throw std::invalid_argument("CalendarPoint: day of year " +
                                  detail::format_double(day_of_year) + " outside [1, 366]");
    }
    if (day_type < 0) {
      throw std::invalid_argument("CalendarPoint: negative day type");
    }
  }
};

namespace cal {

inline constexpr std::chrono::year_month_day kEpoch{std::chrono::year{2009}, std::chrono::month{1},
                                                    std::chrono::day{1}};

inline std::chrono::sys_days epoch_days() { return std::chrono::sys_days(kEpoch); }

// day_number 1 = 2009-01-01.
inline std::chrono::year_month_day date_from_day_number(int day_number) {
  return std::chrono::year_month_day(epoch_days() + std::chrono::days(day_number - 1));
}

inline int day_of_year(std::chrono::year_month_day ymd) {
  auto jan1 = std::chrono::sys_days(std::chrono::year_month_day(ymd.year(), std::chrono::month{1},
                                                                std::chrono::day{1}));
  return static_cast<int>((std::chrono::sys_days(ymd) - jan1).count()) + 1;
}

// Monday = 0 .. Sunday = 6.
inline int weekday_index(int day_number) {
  std::chrono::weekday wd{epoch_days() + std::chrono::days(day_number - 1)};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

inline std::string iso_date(std::chrono::year_month_day ymd) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::string iso_date_of_day_number(int day_number) {
  return iso_date(date_from_day_number(day_number));
}

// "YYYY-MM-DD" -> day number. Rejects invalid calendar dates.
inline int day_number_from_iso(std::string_view text) {
  auto s = detail::trim(text);
  int y = 0, m = 0, d = 0;
  if (std::sscanf(std::string(s).c_str(), "%d-%d-%d", &y, &m, &d) != 3) {
    throw DataError("invalid ISO date '" + std::string(s) + "'");
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw DataError("invalid ISO date '" + std::string(s) + "'");
  }
  return static_cast<int>((std::chrono::sys_days(ymd) - epoch_days()).count()) + 1;
}

}  // namespace cal
}  // namespace loadcast
