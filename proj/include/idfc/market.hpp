#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "idfc/csv.hpp"
#include "idfc/error.hpp"
#include "idfc/hash.hpp"
#include "idfc/time.hpp"

namespace idfc {

// Prices are stored as 0.01 EUR/MWh ticks and volumes as 0.001 MWh ticks at
// the ingestion boundary so that CSV round trips are exact. Math happens in
// double precision.
constexpr std::int64_t kPriceScale = 100;
constexpr std::int64_t kVolumeScale = 1000;

inline std::int64_t parse_scaled(std::string_view s, std::int64_t scale, int max_dp,
                                 const char* what) {
  if (s.empty()) throw DataError(std::string("empty ") + what);
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  std::int64_t whole = 0, frac = 0;
  int dp = -1;
  bool any_digit = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.') {
      if (dp >= 0) throw DataError(std::string("invalid ") + what + ": '" + std::string(s) + "'");
      dp = 0;
      continue;
    }
    if (c < '0' || c > '9')
      throw DataError(std::string("invalid ") + what + ": '" + std::string(s) + "'");
    any_digit = true;
    if (dp < 0) {
      whole = whole * 10 + (c - '0');
    } else {
      if (++dp > max_dp)
        throw DataError(std::string(what) + " has more than " + std::to_string(max_dp) +
                        " decimal places: '" + std::string(s) + "'");
      frac = frac * 10 + (c - '0');
    }
  }
  if (!any_digit) throw DataError(std::string("invalid ") + what + ": '" + std::string(s) + "'");
  for (int k = std::max(dp, 0); k < max_dp; ++k) frac *= 10;
  const std::int64_t ticks = whole * scale + frac;
  return neg ? -ticks : ticks;
}

inline std::int64_t parse_price_ticks(std::string_view s) {
  return parse_scaled(s, kPriceScale, 2, "price");
}
inline std::int64_t parse_volume_ticks(std::string_view s) {
  return parse_scaled(s, kVolumeScale, 3, "volume");
}

inline std::string format_scaled(std::int64_t ticks, std::int64_t scale, int dp) {
  const bool neg = ticks < 0;
  const std::uint64_t a = static_cast<std::uint64_t>(neg ? -ticks : ticks);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%s%llu.%0*llu", neg ? "-" : "",
                static_cast<unsigned long long>(a / scale), dp,
                static_cast<unsigned long long>(a % scale));
  return buf;
}

inline std::string format_price_ticks(std::int64_t t) { return format_scaled(t, kPriceScale, 2); }
inline std::string format_volume_ticks(std::int64_t t) { return format_scaled(t, kVolumeScale, 3); }

// One intraday transaction.
struct Trade {
  Sec timestamp = 0;
  std::int64_t price_ticks = 0;
  std::int64_t volume_ticks = 0;
  // Executed within the control-zone-only window (gate closure .. delivery):
  // kept for the record but excluded from index math.
  bool after_gate = false;

  double price() const { return static_cast<double>(price_ticks) / kPriceScale; }
  double volume() const { return static_cast<double>(volume_ticks) / kVolumeScale; }
};

// Immutable after finalize(); per-product trades sorted by timestamp.
class TradeStore {
 public:
  void add(const ProductKey& product, Trade t) { by_product_[product].push_back(t); }

  void finalize(const MarketCalendar& cal) {
    for (auto& [product, trades] : by_product_) {
      std::stable_sort(trades.begin(), trades.end(),
                       [](const Trade& a, const Trade& b) { return a.timestamp < b.timestamp; });
      const Sec gate = cal.gate_closure(product);
      for (auto& t : trades) t.after_gate = t.timestamp >= gate;
    }
  }

  std::span<const Trade> trades(const ProductKey& product) const {
    auto it = by_product_.find(product);
    if (it == by_product_.end()) return {};
    return it->second;
  }

  const std::map<ProductKey, std::vector<Trade>>& all() const { return by_product_; }

  std::size_t total_trades() const {
    std::size_t n = 0;
    for (const auto& [p, v] : by_product_) n += v.size();
    return n;
  }

  bool empty() const { return by_product_.empty(); }

  // Stable content hash (product order is the map order, i.e. canonical).
  std::uint64_t content_hash() const {
    Fnv1a h;
    for (const auto& [p, trades] : by_product_) {
      h.update_i64(p.day);
      h.update_i64(p.slot_min);
      h.update_i64(static_cast<std::int64_t>(p.kind));
      for (const auto& t : trades) {
        h.update_i64(t.timestamp);
        h.update_i64(t.price_ticks);
        h.update_i64(t.volume_ticks);
      }
    }
    return h.digest();
  }

 private:
  std::map<ProductKey, std::vector<Trade>> by_product_;
};

enum class AuctionMarket : std::uint8_t { DA, IA };

inline const char* auction_code(AuctionMarket m) { return m == AuctionMarket::DA ? "DA" : "IA"; }

// Day-ahead (hourly) and intraday-auction (quarter-hourly) results.
class AuctionSeries {
 public:
  void set(AuctionMarket m, DayIndex day, int slot_min, std::int64_t price_ticks) {
    table(m)[key(day, slot_min)] = price_ticks;
  }

  std::optional<double> value(AuctionMarket m, DayIndex day, int slot_min) const {
    const auto& t = table(m);
    auto it = t.find(key(day, slot_min));
    if (it == t.end()) return std::nullopt;
    return static_cast<double>(it->second) / kPriceScale;
  }

  std::optional<std::int64_t> ticks(AuctionMarket m, DayIndex day, int slot_min) const {
    const auto& t = table(m);
    auto it = t.find(key(day, slot_min));
    if (it == t.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::int64_t, std::int64_t>& da() const { return da_; }
  const std::map<std::int64_t, std::int64_t>& ia() const { return ia_; }

  // Every slot of every day in [first, last] must be present.
  void validate_complete(DayIndex first, DayIndex last) const {
    for (DayIndex d = first; d <= last; ++d) {
      for (int s = 0; s < kMinPerDay; s += 60)
        if (!da_.count(key(d, s)))
          throw DataError("auction series: missing DA value for " + format_date(d) + " " +
                          format_clock_minutes(s));
      for (int s = 0; s < kMinPerDay; s += 15)
        if (!ia_.count(key(d, s)))
          throw DataError("auction series: missing IA value for " + format_date(d) + " " +
                          format_clock_minutes(s));
    }
  }

  static std::int64_t key(DayIndex day, int slot_min) {
    return static_cast<std::int64_t>(day) * kMinPerDay + slot_min;
  }
  static DayIndex key_day(std::int64_t k) { return static_cast<DayIndex>(k / kMinPerDay); }
  static int key_slot(std::int64_t k) { return static_cast<int>(k % kMinPerDay); }

 private:
  std::map<std::int64_t, std::int64_t>& table(AuctionMarket m) {
    return m == AuctionMarket::DA ? da_ : ia_;
  }
  const std::map<std::int64_t, std::int64_t>& table(AuctionMarket m) const {
    return m == AuctionMarket::DA ? da_ : ia_;
  }

  std::map<std::int64_t, std::int64_t> da_;
  std::map<std::int64_t, std::int64_t> ia_;
};

// Signed system imbalance per quarter-hour, in 0.001 MWh ticks.
class BalancingSeries {
 public:
  void set(DayIndex day, int slot_min, std::int64_t mwh_ticks) {
    bv_[AuctionSeries::key(day, slot_min)] = mwh_ticks;
  }
  std::optional<double> value(DayIndex day, int slot_min) const {
    auto it = bv_.find(AuctionSeries::key(day, slot_min));
    if (it == bv_.end()) return std::nullopt;
    return static_cast<double>(it->second) / kVolumeScale;
  }
  const std::map<std::int64_t, std::int64_t>& all() const { return bv_; }

  void validate_complete(DayIndex first, DayIndex last) const {
    for (DayIndex d = first; d <= last; ++d)
      for (int s = 0; s < kMinPerDay; s += 15)
        if (!bv_.count(AuctionSeries::key(d, s)))
          throw DataError("balancing series: missing value for " + format_date(d) + " " +
                          format_clock_minutes(s));
  }

 private:
  std::map<std::int64_t, std::int64_t> bv_;
};

// ---------------------------------------------------------------------------
// Ingestion

struct IngestOptions {
  // Idealized calendar by default: every day has 24 hours / 96 quarter-hours
  // and out-of-grid rows are errors. With dst_fold the duplicated hour of a
  // 25-hour local day is dropped (first occurrence wins) and the missing hour
  // of a 23-hour day is imputed linearly in the auction/balancing series.
  bool dst_fold = false;
};

namespace detail {

inline void expect_header(const std::vector<std::string>& got,
                          const std::vector<std::string>& want, const std::string& path) {
  if (got != want) {
    std::string w;
    for (std::size_t i = 0; i < want.size(); ++i) w += (i ? "," : "") + want[i];
    throw DataError(path + ": bad header, expected '" + w + "'");
  }
}

[[noreturn]] inline void row_error(const std::string& path, std::int64_t row,
                                   const std::string& msg) {
  throw DataError(path + ": row " + std::to_string(row) + ": " + msg);
}

}  // namespace detail

inline TradeStore ingest_trades(const std::string& path, const MarketCalendar& cal,
                                const IngestOptions& opts = {}) {
  CsvReader reader(path);
  std::vector<std::string> f;
  if (!reader.next(f)) throw DataError(path + ": empty file");
  detail::expect_header(
      f, {"delivery_day", "delivery_slot_min", "kind", "exec_time_utc", "price_eur_mwh",
          "volume_mwh"},
      path);
  TradeStore store;
  while (reader.next(f)) {
    const auto row = reader.row();
    if (f.size() != 6) detail::row_error(path, row, "expected 6 fields");
    try {
      ProductKey p;
      p.day = parse_date(f[0]);
      p.slot_min = static_cast<int>(std::stol(f[1]));
      p.kind = parse_kind(f[2]);
      if (!p.valid()) {
        if (opts.dst_fold) continue;  // out-of-grid local-time artifact
        detail::row_error(path, row, "invalid delivery slot " + f[1]);
      }
      Trade t;
      t.timestamp = parse_datetime(f[3]);
      t.price_ticks = parse_price_ticks(f[4]);
      t.volume_ticks = parse_volume_ticks(f[5]);
      if (t.volume_ticks <= 0) detail::row_error(path, row, "nonpositive volume " + f[5]);
      if (t.timestamp < cal.trading_open(p) || t.timestamp >= cal.delivery_start(p))
        detail::row_error(path, row,
                          "trade outside [trading open, delivery start) for product " +
                              p.to_string());
      store.add(p, t);
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      detail::row_error(path, row, e.what());
    }
  }
  store.finalize(cal);
  return store;
}

inline void export_trades(const TradeStore& store, const std::string& path) {
  CsvWriter w(path);
  w.write_row({"delivery_day", "delivery_slot_min", "kind", "exec_time_utc", "price_eur_mwh",
               "volume_mwh"});
  for (const auto& [p, trades] : store.all()) {
    for (const auto& t : trades) {
      w.write_row({format_date(p.day), std::to_string(p.slot_min), kind_code(p.kind),
                   format_datetime(t.timestamp), format_price_ticks(t.price_ticks),
                   format_volume_ticks(t.volume_ticks)});
    }
  }
}

namespace detail {

// Linear imputation across a day's slot grid; used by the dst_fold rule.
inline void impute_missing_slots(std::map<std::int64_t, std::int64_t>& table, DayIndex day,
                                 int step) {
  std::vector<int> slots;
  for (int s = 0; s < kMinPerDay; s += step) slots.push_back(s);
  std::vector<bool> present(slots.size());
  bool any_missing = false, any_present = false;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    present[i] = table.count(AuctionSeries::key(day, slots[i])) > 0;
    any_missing |= !present[i];
    any_present |= present[i];
  }
  if (!any_missing || !any_present) return;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (present[i]) continue;
    std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(i) - 1;
    while (lo >= 0 && !present[static_cast<std::size_t>(lo)]) --lo;
    std::size_t hi = i + 1;
    while (hi < slots.size() && !present[hi]) ++hi;
    std::int64_t v;
    if (lo >= 0 && hi < slots.size()) {
      const auto a = table.at(AuctionSeries::key(day, slots[static_cast<std::size_t>(lo)]));
      const auto b = table.at(AuctionSeries::key(day, slots[hi]));
      const double t = static_cast<double>(i - static_cast<std::size_t>(lo)) /
                       static_cast<double>(hi - static_cast<std::size_t>(lo));
      v = static_cast<std::int64_t>(std::llround(static_cast<double>(a) +
                                                 t * static_cast<double>(b - a)));
    } else if (lo >= 0) {
      v = table.at(AuctionSeries::key(day, slots[static_cast<std::size_t>(lo)]));
    } else {
      v = table.at(AuctionSeries::key(day, slots[hi]));
    }
    table[AuctionSeries::key(day, slots[i])] = v;
  }
}

}  // namespace detail

inline AuctionSeries ingest_auctions(const std::string& path, const IngestOptions& opts = {}) {
  CsvReader reader(path);
  std::vector<std::string> f;
  if (!reader.next(f)) throw DataError(path + ": empty file");
  detail::expect_header(f, {"day", "slot_min", "market", "price_eur_mwh"}, path);
  AuctionSeries series;
  std::map<DayIndex, bool> da_days, ia_days;
  while (reader.next(f)) {
    const auto row = reader.row();
    if (f.size() != 4) detail::row_error(path, row, "expected 4 fields");
    try {
      const DayIndex day = parse_date(f[0]);
      const int slot = static_cast<int>(std::stol(f[1]));
      AuctionMarket m;
      if (f[2] == "DA")
        m = AuctionMarket::DA;
      else if (f[2] == "IA")
        m = AuctionMarket::IA;
      else
        detail::row_error(path, row, "market must be DA or IA, got '" + f[2] + "'");
      const int step = m == AuctionMarket::DA ? 60 : 15;
      if (slot < 0 || slot >= kMinPerDay || slot % step != 0) {
        if (opts.dst_fold) continue;
        detail::row_error(path, row, "invalid slot " + f[1]);
      }
      const std::int64_t ticks = parse_price_ticks(f[3]);
      if (series.ticks(m, day, slot)) {
        if (opts.dst_fold) continue;  // duplicated hour: first occurrence wins
        detail::row_error(path, row, "duplicate auction value");
      }
      series.set(m, day, slot, ticks);
      (m == AuctionMarket::DA ? da_days : ia_days)[day] = true;
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      detail::row_error(path, row, e.what());
    }
  }
  // Per-day completeness: a day that appears at all must have every slot.
  auto check_or_fold = [&](AuctionMarket m, const std::map<DayIndex, bool>& days, int step) {
    for (const auto& [day, _] : days) {
      for (int s = 0; s < kMinPerDay; s += step) {
        if (!series.ticks(m, day, s)) {
          if (!opts.dst_fold)
            throw DataError(path + ": missing " + std::string(auction_code(m)) + " value for " +
                            format_date(day) + " " + format_clock_minutes(s));
        }
      }
    }
    return true;
  };
  check_or_fold(AuctionMarket::DA, da_days, 60);
  check_or_fold(AuctionMarket::IA, ia_days, 15);
  if (opts.dst_fold) {
    AuctionSeries folded = series;
    for (const auto& [day, _] : da_days)
      detail::impute_missing_slots(const_cast<std::map<std::int64_t, std::int64_t>&>(folded.da()),
                                   day, 60);
    for (const auto& [day, _] : ia_days)
      detail::impute_missing_slots(const_cast<std::map<std::int64_t, std::int64_t>&>(folded.ia()),
                                   day, 15);
    return folded;
  }
  return series;
}

inline void export_auctions(const AuctionSeries& series, const std::string& path) {
  CsvWriter w(path);
  w.write_row({"day", "slot_min", "market", "price_eur_mwh"});
  for (const auto& [k, ticks] : series.da())
    w.write_row({format_date(AuctionSeries::key_day(k)),
                 std::to_string(AuctionSeries::key_slot(k)), "DA", format_price_ticks(ticks)});
  for (const auto& [k, ticks] : series.ia())
    w.write_row({format_date(AuctionSeries::key_day(k)),
                 std::to_string(AuctionSeries::key_slot(k)), "IA", format_price_ticks(ticks)});
}

inline BalancingSeries ingest_balancing(const std::string& path, const IngestOptions& opts = {}) {
  CsvReader reader(path);
  std::vector<std::string> f;
  if (!reader.next(f)) throw DataError(path + ": empty file");
  detail::expect_header(f, {"day", "slot_min", "imbalance_mwh"}, path);
  BalancingSeries series;
  std::map<DayIndex, bool> days;
  while (reader.next(f)) {
    const auto row = reader.row();
    if (f.size() != 3) detail::row_error(path, row, "expected 3 fields");
    try {
      const DayIndex day = parse_date(f[0]);
      const int slot = static_cast<int>(std::stol(f[1]));
      if (slot < 0 || slot >= kMinPerDay || slot % 15 != 0) {
        if (opts.dst_fold) continue;
        detail::row_error(path, row, "invalid slot " + f[1]);
      }
      if (series.value(day, slot)) {
        if (opts.dst_fold) continue;
        detail::row_error(path, row, "duplicate balancing value");
      }
      series.set(day, slot, parse_volume_ticks(f[2]));
      days[day] = true;
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      detail::row_error(path, row, e.what());
    }
  }
  for (const auto& [day, _] : days) {
    for (int s = 0; s < kMinPerDay; s += 15) {
      if (!series.value(day, s) && !opts.dst_fold)
        throw DataError(path + ": missing balancing value for " + format_date(day) + " " +
                        format_clock_minutes(s));
    }
    if (opts.dst_fold)
      detail::impute_missing_slots(const_cast<std::map<std::int64_t, std::int64_t>&>(series.all()),
                                   day, 15);
  }
  return series;
}

inline void export_balancing(const BalancingSeries& series, const std::string& path) {
  CsvWriter w(path);
  w.write_row({"day", "slot_min", "imbalance_mwh"});
  for (const auto& [k, ticks] : series.all())
    w.write_row({format_date(AuctionSeries::key_day(k)),
                 std::to_string(AuctionSeries::key_slot(k)), format_volume_ticks(ticks)});
}

// ---------------------------------------------------------------------------
// Descriptive statistics

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};

// R type-7 quantile on a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error("quantile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double idx = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double t = idx - static_cast<double>(lo);
  return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

inline FiveNumber five_number(std::vector<double> v) {
  if (v.empty()) throw Error("five_number of empty sample");
  std::sort(v.begin(), v.end());
  FiveNumber f;
  f.min = v.front();
  f.max = v.back();
  f.q1 = quantile_sorted(v, 0.25);
  f.median = quantile_sorted(v, 0.5);
  f.q3 = quantile_sorted(v, 0.75);
  double s = 0;
  for (double x : v) s += x;
  f.mean = s / static_cast<double>(v.size());
  return f;
}

struct KindSummary {
  std::size_t products = 0;
  FiveNumber trade_count;
  FiveNumber volume;
};

struct SummaryTable {
  std::optional<KindSummary> hourly;
  std::optional<KindSummary> quarter_hourly;
};

// Per-product trade counts and traded volumes, summarized per product kind.
inline SummaryTable descriptive_stats(const TradeStore& store) {
  if (store.empty()) throw DataError("descriptive_stats: empty trade store");
  std::vector<double> counts[2], volumes[2];
  for (const auto& [p, trades] : store.all()) {
    const int k = p.kind == ProductKind::Hourly ? 0 : 1;
    counts[k].push_back(static_cast<double>(trades.size()));
    double vol = 0;
    for (const auto& t : trades) vol += t.volume();
    volumes[k].push_back(vol);
  }
  SummaryTable table;
  if (!counts[0].empty())
    table.hourly = KindSummary{counts[0].size(), five_number(counts[0]), five_number(volumes[0])};
  if (!counts[1].empty())
    table.quarter_hourly =
        KindSummary{counts[1].size(), five_number(counts[1]), five_number(volumes[1])};
  return table;
}

// ---------------------------------------------------------------------------
// Information-availability slices

inline TradeStore visible_trades(const TradeStore& store, const InformationClock& clock,
                                 const MarketCalendar& cal) {
  TradeStore out;
  for (const auto& [p, trades] : store.all())
    for (const auto& t : trades)
      if (clock.sees_trade(t.timestamp)) out.add(p, t);
  out.finalize(cal);
  return out;
}

inline AuctionSeries visible_auctions(const AuctionSeries& series, const InformationClock& clock,
                                      const MarketCalendar& cal) {
  AuctionSeries out;
  for (const auto& [k, ticks] : series.da())
    if (clock.sees_publication(cal.da_publication(AuctionSeries::key_day(k))))
      out.set(AuctionMarket::DA, AuctionSeries::key_day(k), AuctionSeries::key_slot(k), ticks);
  for (const auto& [k, ticks] : series.ia())
    if (clock.sees_publication(cal.ia_publication(AuctionSeries::key_day(k))))
      out.set(AuctionMarket::IA, AuctionSeries::key_day(k), AuctionSeries::key_slot(k), ticks);
  return out;
}

inline BalancingSeries visible_balancing(const BalancingSeries& series,
                                         const InformationClock& clock,
                                         const MarketCalendar& cal) {
  BalancingSeries out;
  for (const auto& [k, ticks] : series.all())
    if (clock.sees_publication(
            cal.bv_publication(AuctionSeries::key_day(k), AuctionSeries::key_slot(k))))
      out.set(AuctionSeries::key_day(k), AuctionSeries::key_slot(k), ticks);
  return out;
}

}  // namespace idfc
