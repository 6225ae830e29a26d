#include "padshield/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "padshield/errors.hpp"

namespace padshield::metrics {

AggregatedTimeSeries aggregate(const Trace& trace, uint32_t window_ms) {
  if (window_ms == 0) throw ParamError("window_ms", "window must be positive");
  if (trace.events.empty()) throw ParamError("trace", "empty trace");

  const double window_s = window_ms / 1000.0;
  const double duration = trace.events.back().time_s;
  const size_t windows =
      std::max<size_t>(1, static_cast<size_t>(std::ceil(duration / window_s)));

  AggregatedTimeSeries series;
  series.window_ms = window_ms;
  series.upload.assign(windows, 0);
  series.download.assign(windows, 0);
  for (const TraceEvent& ev : trace.events) {
    size_t idx = static_cast<size_t>(ev.time_s / window_s);
    if (idx >= windows) idx = windows - 1;  // boundary event, closed last window
    (ev.direction == Direction::Outgoing ? series.upload : series.download)[idx] +=
        ev.size;
  }
  return series;
}

std::optional<double> pearson(const std::vector<uint64_t>& a,
                              const std::vector<uint64_t>& b) {
  const size_t n = std::max(a.size(), b.size());
  if (n < 2) throw ParamError("series", "need at least two windows");

  auto at = [](const std::vector<uint64_t>& v, size_t i) {
    return i < v.size() ? static_cast<double>(v[i]) : 0.0;
  };
  double mean_a = 0, mean_b = 0;
  for (size_t i = 0; i < n; ++i) {
    mean_a += at(a, i);
    mean_b += at(b, i);
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);

  double cov = 0, var_a = 0, var_b = 0;
  for (size_t i = 0; i < n; ++i) {
    const double da = at(a, i) - mean_a;
    const double db = at(b, i) - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return std::nullopt;
  return cov / std::sqrt(var_a * var_b);
}

double lcss(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
  if (a.empty() || b.empty()) throw ParamError("series", "empty series");
  const std::vector<uint64_t>& rows = a.size() <= b.size() ? a : b;
  const std::vector<uint64_t>& cols = a.size() <= b.size() ? b : a;

  std::vector<uint32_t> prev(cols.size() + 1, 0), curr(cols.size() + 1, 0);
  for (size_t i = 1; i <= rows.size(); ++i) {
    for (size_t j = 1; j <= cols.size(); ++j) {
      if (rows[i - 1] == cols[j - 1])
        curr[j] = prev[j - 1] + 1;
      else
        curr[j] = std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return static_cast<double>(prev[cols.size()]) /
         static_cast<double>(rows.size());
}

OverheadReport bandwidth_overhead(const Trace& defended) {
  uint64_t pad_out = 0, pad_in = 0, real_out = 0, real_in = 0;
  for (const TraceEvent& ev : defended.events) {
    uint64_t& counter = ev.direction == Direction::Outgoing
                            ? (ev.is_padding ? pad_out : real_out)
                            : (ev.is_padding ? pad_in : real_in);
    counter += ev.size;
  }
  if (real_out + real_in == 0)
    throw ParamError("trace", "no non-padding bytes to compare against");

  OverheadReport report;
  if (real_out > 0)
    report.send_bw_pct = 100.0 * static_cast<double>(pad_out) /
                         static_cast<double>(real_out);
  if (real_in > 0)
    report.recv_bw_pct = 100.0 * static_cast<double>(pad_in) /
                         static_cast<double>(real_in);
  report.overall_bw_pct = 100.0 * static_cast<double>(pad_out + pad_in) /
                          static_cast<double>(real_out + real_in);
  return report;
}

double latency_overhead(const Trace& defended, const Trace& base) {
  if (base.events.empty() || defended.events.empty())
    throw ParamError("trace", "empty trace");
  double base_end = -1.0, defended_end = -1.0;
  for (const TraceEvent& ev : base.events)
    if (!ev.is_padding) base_end = std::max(base_end, ev.time_s);
  for (const TraceEvent& ev : defended.events)
    if (!ev.is_padding) defended_end = std::max(defended_end, ev.time_s);
  if (base_end <= 0.0)
    throw ParamError("base", "zero-duration base trace");
  if (defended_end < 0.0)
    throw ParamError("defended", "no non-padding cell in defended trace");
  return std::max(0.0, (defended_end / base_end - 1.0) * 100.0);
}

SummaryStats summarize(std::vector<double> values) {
  SummaryStats stats;
  stats.count = values.size();
  if (values.empty()) return stats;
  std::sort(values.begin(), values.end());

  // Quantile by linear interpolation between order statistics.
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
  };

  double sum = 0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(values.size());
  stats.median = quantile(0.5);
  stats.q1 = quantile(0.25);
  stats.q3 = quantile(0.75);

  const double iqr = stats.q3 - stats.q1;
  const double lo_fence = stats.q1 - 1.5 * iqr;
  const double hi_fence = stats.q3 + 1.5 * iqr;
  stats.lo_whisker = stats.q1;
  stats.hi_whisker = stats.q3;
  for (double v : values) {
    if (v >= lo_fence) {
      stats.lo_whisker = v;
      break;
    }
  }
  for (size_t i = values.size(); i-- > 0;) {
    if (values[i] <= hi_fence) {
      stats.hi_whisker = values[i];
      break;
    }
  }
  return stats;
}

}  // namespace padshield::metrics
