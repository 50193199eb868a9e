#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "idfc/csv.hpp"
#include "idfc/error.hpp"
#include "idfc/market.hpp"
#include "idfc/time.hpp"

namespace idfc {

enum class Provenance : std::uint8_t { Traded, FallbackLastTrade, FallbackAuction };

inline const char* provenance_code(Provenance p) {
  switch (p) {
    case Provenance::Traded: return "traded";
    case Provenance::FallbackLastTrade: return "last_trade";
    case Provenance::FallbackAuction: return "auction";
  }
  return "?";
}

// A volume-weighted index value. Fallback values carry zero volume.
struct IdValue {
  double value = 0.0;
  double volume = 0.0;
  Provenance provenance = Provenance::Traded;
};

// Averaging window [b - x - y, b - x) expressed in minutes before the
// delivery start b. Integer minutes keep the tiling arithmetic exact.
struct IdWindow {
  int x_min = 0;  // distance from window end to delivery start
  int y_min = 0;  // window length

  static IdWindow from_hours(double x_hours, double y_hours) {
    const double xm = x_hours * 60.0, ym = y_hours * 60.0;
    IdWindow w{static_cast<int>(std::llround(xm)), static_cast<int>(std::llround(ym))};
    if (std::abs(xm - w.x_min) > 1e-9 || std::abs(ym - w.y_min) > 1e-9)
      throw Error("IdWindow: x/y must be whole minutes");
    if (w.x_min < 0 || w.y_min <= 0) throw Error("IdWindow: require x >= 0, y > 0");
    return w;
  }

  double x_hours() const { return x_min / 60.0; }
  double y_hours() const { return y_min / 60.0; }

  Sec start(Sec delivery_start) const {
    return delivery_start - static_cast<Sec>(x_min + y_min) * kSecPerMin;
  }
  Sec end(Sec delivery_start) const { return delivery_start - static_cast<Sec>(x_min) * kSecPerMin; }
};

namespace detail {

// Neumaier-compensated accumulator; windows can span a whole session.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double total() const { return sum + comp; }
};

// VWAP over eligible trades with timestamps in [start, end). Returns false if
// the window holds no eligible trade.
inline bool vwap_in(std::span<const Trade> trades, Sec start, Sec end, IdValue& out) {
  CompensatedSum vol, volprice;
  bool any = false;
  auto it = std::lower_bound(trades.begin(), trades.end(), start,
                             [](const Trade& t, Sec s) { return t.timestamp < s; });
  for (; it != trades.end() && it->timestamp < end; ++it) {
    if (it->after_gate) continue;
    any = true;
    vol.add(it->volume());
    volprice.add(it->volume() * it->price());
  }
  if (!any) return false;
  out.value = volprice.total() / vol.total();
  out.volume = vol.total();
  out.provenance = Provenance::Traded;
  return true;
}

}  // namespace detail

inline double auction_fallback_value(const AuctionSeries& auctions, const ProductKey& product) {
  const AuctionMarket m =
      product.kind == ProductKind::Hourly ? AuctionMarket::DA : AuctionMarket::IA;
  const auto v = auctions.value(m, product.day, product.slot_min);
  if (!v)
    throw DataError(std::string("missing ") + auction_code(m) + " fallback value for product " +
                    product.to_string());
  return *v;
}

// Volume-weighted average over the window; if the window holds no trade, the
// price of the last trade before the window start (back to trading open);
// failing that, the auction value of the product's kind.
inline IdValue compute_xidy(const TradeStore& store, const AuctionSeries& auctions,
                            const MarketCalendar& cal, const ProductKey& product,
                            const IdWindow& window) {
  const Sec b = cal.delivery_start(product);
  const Sec open = cal.trading_open(product);
  Sec start = window.start(b);
  const Sec end = window.end(b);
  if (end > b) throw Error("compute_xidy: window extends past delivery start");
  if (start < open) start = open;  // clip at trading open

  const auto trades = store.trades(product);
  IdValue out;
  if (end > start && detail::vwap_in(trades, start, end, out)) return out;

  // Last trade strictly before the window start, within this session.
  auto it = std::lower_bound(trades.begin(), trades.end(), start,
                             [](const Trade& t, Sec s) { return t.timestamp < s; });
  while (it != trades.begin()) {
    --it;
    if (it->after_gate) continue;
    return IdValue{it->price(), 0.0, Provenance::FallbackLastTrade};
  }
  return IdValue{auction_fallback_value(auctions, product), 0.0, Provenance::FallbackAuction};
}

// Exchange definition: VWAP over the last 3 hours of trading ending 30
// minutes before delivery; empty -> VWAP over the whole trading period;
// no trades at all -> auction value.
inline IdValue compute_epex_id3(const TradeStore& store, const AuctionSeries& auctions,
                                const MarketCalendar& cal, const ProductKey& product) {
  const Sec b = cal.delivery_start(product);
  const auto trades = store.trades(product);
  IdValue out;
  if (detail::vwap_in(trades, b - 180 * kSecPerMin, b - 30 * kSecPerMin, out)) return out;
  if (detail::vwap_in(trades, cal.trading_open(product), cal.gate_closure(product), out))
    return out;
  return IdValue{auction_fallback_value(auctions, product), 0.0, Provenance::FallbackAuction};
}

inline IdValue compute_epex_id1(const TradeStore& store, const AuctionSeries& auctions,
                                const MarketCalendar& cal, const ProductKey& product) {
  const Sec b = cal.delivery_start(product);
  const auto trades = store.trades(product);
  IdValue out;
  if (detail::vwap_in(trades, b - 90 * kSecPerMin, b - 30 * kSecPerMin, out)) return out;
  if (detail::vwap_in(trades, cal.trading_open(product), cal.gate_closure(product), out))
    return out;
  return IdValue{auction_fallback_value(auctions, product), 0.0, Provenance::FallbackAuction};
}

// Volume-weighted combination of disjoint sub-window values. Zero-volume
// parts (fallbacks) carry no trades and are skipped.
inline IdValue combine_weighted(std::span<const IdValue> parts) {
  detail::CompensatedSum vol, volprice;
  bool any = false;
  for (const auto& p : parts) {
    if (p.volume <= 0.0) continue;
    any = true;
    vol.add(p.volume);
    volprice.add(p.value * p.volume);
  }
  if (!any) throw Error("combine_weighted: all parts have zero volume");
  return IdValue{volprice.total() / vol.total(), vol.total(), Provenance::Traded};
}

// Dense 15-minute index grid of one product: contiguous x-ID-0.25 tiles from
// trading open up to the last tile ending at or before min(cutoff, gate).
struct GridEntry {
  IdWindow window;
  IdValue value;
};

struct IdGrid {
  ProductKey product;
  std::vector<GridEntry> entries;
};

inline IdGrid build_id_grid(const TradeStore& store, const AuctionSeries& auctions,
                            const MarketCalendar& cal, const ProductKey& product,
                            const InformationClock& cutoff) {
  const Sec b = cal.delivery_start(product);
  const Sec open = cal.trading_open(product);
  if (cutoff.now < open) throw Error("build_id_grid: cutoff before trading open");
  const Sec stop = std::min(cutoff.now, cal.gate_closure(product));
  IdGrid grid{product, {}};
  for (Sec t0 = open; t0 + 15 * kSecPerMin <= stop; t0 += 15 * kSecPerMin) {
    const Sec t1 = t0 + 15 * kSecPerMin;
    IdWindow w{static_cast<int>((b - t1) / kSecPerMin), 15};
    grid.entries.push_back(GridEntry{w, compute_xidy(store, auctions, cal, product, w)});
  }
  return grid;
}

inline void export_id_values(const std::vector<std::pair<ProductKey, GridEntry>>& rows,
                             const std::string& path) {
  CsvWriter w(path);
  w.write_row({"day", "slot_min", "kind", "x_hours", "y_hours", "value", "volume", "provenance"});
  char num[64];
  for (const auto& [p, e] : rows) {
    std::vector<std::string> fields;
    fields.push_back(format_date(p.day));
    fields.push_back(std::to_string(p.slot_min));
    fields.push_back(kind_code(p.kind));
    std::snprintf(num, sizeof(num), "%.10g", e.window.x_hours());
    fields.push_back(num);
    std::snprintf(num, sizeof(num), "%.10g", e.window.y_hours());
    fields.push_back(num);
    std::snprintf(num, sizeof(num), "%.10g", e.value.value);
    fields.push_back(num);
    std::snprintf(num, sizeof(num), "%.10g", e.value.volume);
    fields.push_back(num);
    fields.push_back(provenance_code(e.value.provenance));
    w.write_row(fields);
  }
}

}  // namespace idfc
