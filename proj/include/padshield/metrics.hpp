#ifndef PADSHIELD_METRICS_HPP
#define PADSHIELD_METRICS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "padshield/trace.hpp"

namespace padshield::metrics {

/// Per-direction byte totals in fixed windows of `window_ms`, covering
/// [0, last event time]. The final window is closed so boundary events and
/// their bytes are never dropped.
struct AggregatedTimeSeries {
  uint32_t window_ms = 25;
  std::vector<uint64_t> upload;
  std::vector<uint64_t> download;
};

AggregatedTimeSeries aggregate(const Trace& trace, uint32_t window_ms);

/// Sample Pearson correlation. The shorter series is zero-padded to the
/// longer. Returns nullopt when either series is constant (undefined
/// correlation, reported and excluded from aggregates upstream).
std::optional<double> pearson(const std::vector<uint64_t>& a,
                              const std::vector<uint64_t>& b);

/// Longest-common-subsequence measure: |LCS| / min(|a|, |b|), exact equality
/// on elements. In [0, 1].
double lcss(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);

/// Bandwidth overhead percentages (padding bytes / non-padding bytes * 100).
/// A direction with no non-padding bytes reports nullopt; a trace with no
/// non-padding bytes at all is an error.
struct OverheadReport {
  std::optional<double> send_bw_pct;
  std::optional<double> recv_bw_pct;
  double overall_bw_pct = 0.0;
  std::optional<double> latency_pct;
};

OverheadReport bandwidth_overhead(const Trace& defended);

/// Relative growth of time-to-last-non-padding-cell, percent, floored at 0.
double latency_overhead(const Trace& defended, const Trace& base);

/// Box-plot style summary: median, quartiles (linear interpolation), Tukey
/// whiskers (most extreme points within 1.5 IQR of the box), plus the mean.
struct SummaryStats {
  size_t count = 0;
  double mean = 0, median = 0, q1 = 0, q3 = 0;
  double lo_whisker = 0, hi_whisker = 0;
};

SummaryStats summarize(std::vector<double> values);

}  // namespace padshield::metrics

#endif
