#pragma once

#include <cctype>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <string_view>

#include "idfc/error.hpp"

namespace idfc {

// Days since 1970-01-01 (UTC civil calendar).
using DayIndex = std::int32_t;
// Seconds since 1970-01-01T00:00:00 UTC.
using Sec = std::int64_t;

constexpr Sec kSecPerMin = 60;
constexpr Sec kSecPerDay = 86400;
constexpr int kMinPerDay = 1440;

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

// Howard Hinnant's days-from-civil algorithm.
constexpr DayIndex day_index_from_civil(const CivilDate& c) {
  int y = c.year;
  const int m = c.month;
  const int d = c.day;
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<DayIndex>(era * 146097 + static_cast<int>(doe) - 719468);
}

constexpr CivilDate civil_from_day_index(DayIndex z) {
  std::int64_t zz = static_cast<std::int64_t>(z) + 719468;
  const std::int64_t era = (zz >= 0 ? zz : zz - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(zz - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

// 1 = Monday ... 7 = Sunday.
constexpr int day_of_week(DayIndex z) {
  // 1970-01-01 was a Thursday.
  const int w = static_cast<int>(((z % 7) + 7 + 3) % 7);  // 0 = Monday
  return w + 1;
}

inline const char* day_of_week_name(int dow) {
  static const char* names[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  if (dow < 1 || dow > 7) throw Error("day_of_week_name: index out of range");
  return names[dow - 1];
}

inline std::string format_date(DayIndex day) {
  const CivilDate c = civil_from_day_index(day);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
  return buf;
}

inline DayIndex parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
      std::sscanf(std::string(s).c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw DataError("invalid date: '" + std::string(s) + "'");
  if (m < 1 || m > 12 || d < 1 || d > 31) throw DataError("invalid date: '" + std::string(s) + "'");
  return day_index_from_civil(CivilDate{y, m, d});
}

inline std::string format_datetime(Sec t) {
  DayIndex day = static_cast<DayIndex>(t >= 0 ? t / kSecPerDay : (t - kSecPerDay + 1) / kSecPerDay);
  Sec rem = t - static_cast<Sec>(day) * kSecPerDay;
  const int h = static_cast<int>(rem / 3600);
  const int mi = static_cast<int>((rem % 3600) / 60);
  const int se = static_cast<int>(rem % 60);
  char buf[32];
  const CivilDate c = civil_from_day_index(day);
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", c.year, c.month, c.day, h, mi, se);
  return buf;
}

// Accepts "YYYY-MM-DD[T ]HH:MM[:SS]".
inline Sec parse_datetime(std::string_view s) {
  if (s.size() < 16) throw DataError("invalid datetime: '" + std::string(s) + "'");
  if (s[10] != 'T' && s[10] != ' ')
    throw DataError("invalid datetime separator: '" + std::string(s) + "'");
  const DayIndex day = parse_date(s.substr(0, 10));
  const std::string rest(s.substr(11));
  int h = 0, mi = 0, se = 0;
  const int got = std::sscanf(rest.c_str(), "%d:%d:%d", &h, &mi, &se);
  if (got < 2) throw DataError("invalid datetime: '" + std::string(s) + "'");
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || se < 0 || se > 59)
    throw DataError("invalid datetime: '" + std::string(s) + "'");
  return static_cast<Sec>(day) * kSecPerDay + h * 3600 + mi * 60 + se;
}

// "HH:MM" -> minutes from midnight.
inline int parse_clock_minutes(std::string_view s) {
  int h = 0, mi = 0;
  if (std::sscanf(std::string(s).c_str(), "%d:%d", &h, &mi) != 2 || h < 0 || h > 23 || mi < 0 ||
      mi > 59)
    throw ConfigError("invalid clock time: '" + std::string(s) + "'");
  return h * 60 + mi;
}

inline std::string format_clock_minutes(int minutes_of_day) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes_of_day / 60, minutes_of_day % 60);
  return buf;
}

enum class ProductKind : std::uint8_t { Hourly, QuarterHourly };

constexpr int product_duration_min(ProductKind k) {
  return k == ProductKind::Hourly ? 60 : 15;
}

constexpr int products_per_day(ProductKind k) {
  return k == ProductKind::Hourly ? 24 : 96;
}

inline const char* kind_code(ProductKind k) { return k == ProductKind::Hourly ? "H" : "QH"; }

inline ProductKind parse_kind(std::string_view s) {
  if (s == "H") return ProductKind::Hourly;
  if (s == "QH") return ProductKind::QuarterHourly;
  throw DataError("invalid product kind: '" + std::string(s) + "'");
}

// One delivery product: (delivery day, start offset in minutes, kind).
struct ProductKey {
  DayIndex day = 0;
  int slot_min = 0;
  ProductKind kind = ProductKind::Hourly;

  auto operator<=>(const ProductKey&) const = default;

  bool valid() const {
    const int dur = product_duration_min(kind);
    return slot_min >= 0 && slot_min < kMinPerDay && slot_min % dur == 0;
  }

  // 0-based product index within its day.
  int slot_index() const { return slot_min / product_duration_min(kind); }

  // Product shifted by whole days, same slot and kind.
  ProductKey shifted_days(int delta) const { return ProductKey{day + delta, slot_min, kind}; }

  std::string to_string() const {
    return std::string(kind_code(kind)) + " " + format_date(day) + " " +
           format_clock_minutes(slot_min);
  }
};

// Product of `kind` whose delivery starts at absolute minute `t_min` (counted
// from the epoch). `t_min` must be aligned to the product duration.
inline ProductKey product_at(ProductKind kind, std::int64_t t_min) {
  DayIndex day = static_cast<DayIndex>(t_min >= 0 ? t_min / kMinPerDay
                                                  : (t_min - kMinPerDay + 1) / kMinPerDay);
  const int slot = static_cast<int>(t_min - static_cast<std::int64_t>(day) * kMinPerDay);
  ProductKey p{day, slot, kind};
  if (!p.valid()) throw Error("product_at: time not aligned to product grid");
  return p;
}

struct ProductKeyHash {
  std::size_t operator()(const ProductKey& p) const {
    std::uint64_t h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.day));
    h = h * 1441 + static_cast<std::uint64_t>(p.slot_min);
    h = h * 2 + static_cast<std::uint64_t>(p.kind);
    // splitmix64 finalizer
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

// Session clocks and publication rules of the market. All defaults follow the
// standard German setup; publication delays are configurable because the
// exchanges do not document result-release latencies.
struct MarketCalendar {
  int hourly_open_min = 15 * 60;      // day d-1
  int qh_open_min = 16 * 60;          // day d-1
  int gate_closure_min = 30;          // market-wide, before delivery start
  int da_publication_min = 13 * 60;   // day d-1, results of the 12:00 auction
  int ia_publication_min = 15 * 60 + 10;  // day d-1, results of the 15:00 auction
  int bv_publication_lag_min = 15;    // after delivery end

  Sec delivery_start(const ProductKey& p) const {
    return static_cast<Sec>(p.day) * kSecPerDay + static_cast<Sec>(p.slot_min) * kSecPerMin;
  }
  Sec delivery_end(const ProductKey& p) const {
    return delivery_start(p) + static_cast<Sec>(product_duration_min(p.kind)) * kSecPerMin;
  }
  Sec trading_open(ProductKind kind, DayIndex delivery_day) const {
    const int open = kind == ProductKind::Hourly ? hourly_open_min : qh_open_min;
    return static_cast<Sec>(delivery_day - 1) * kSecPerDay + static_cast<Sec>(open) * kSecPerMin;
  }
  Sec trading_open(const ProductKey& p) const { return trading_open(p.kind, p.day); }
  Sec gate_closure(const ProductKey& p) const {
    return delivery_start(p) - static_cast<Sec>(gate_closure_min) * kSecPerMin;
  }
  // Results for delivery day d become visible on day d-1.
  Sec da_publication(DayIndex delivery_day) const {
    return static_cast<Sec>(delivery_day - 1) * kSecPerDay +
           static_cast<Sec>(da_publication_min) * kSecPerMin;
  }
  Sec ia_publication(DayIndex delivery_day) const {
    return static_cast<Sec>(delivery_day - 1) * kSecPerDay +
           static_cast<Sec>(ia_publication_min) * kSecPerMin;
  }
  Sec bv_publication(DayIndex day, int slot_min) const {
    const Sec end = static_cast<Sec>(day) * kSecPerDay +
                    static_cast<Sec>(slot_min + product_duration_min(ProductKind::QuarterHourly)) *
                        kSecPerMin;
    return end + static_cast<Sec>(bv_publication_lag_min) * kSecPerMin;
  }
};

// A datum is visible iff its publication timestamp <= now; trades are visible
// iff their execution timestamp < now.
struct InformationClock {
  Sec now = 0;

  bool sees_publication(Sec published_at) const { return published_at <= now; }
  bool sees_trade(Sec executed_at) const { return executed_at < now; }
};

}  // namespace idfc
