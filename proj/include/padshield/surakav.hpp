#ifndef PADSHIELD_SURAKAV_HPP
#define PADSHIELD_SURAKAV_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "padshield/machine.hpp"
#include "padshield/rng.hpp"
#include "padshield/trace.hpp"

namespace padshield::surakav {

/// Strictly alternating outgoing/incoming burst sizes, outgoing first.
struct BurstPair {
  uint32_t outgoing;
  uint32_t incoming;

  bool operator==(const BurstPair&) const = default;
};

using BurstSequence = std::vector<BurstPair>;

/// File format: one `out_size<TAB>in_size` line per burst pair.
BurstSequence load_burst_sequence(const std::filesystem::path& path);
BurstSequence parse_burst_sequence(const std::string& text);
std::string format_burst_sequence(const BurstSequence& seq);

/// Concatenates `factor` copies of the sequence; stands in for generating a
/// longer reference when a download outlasts the supplied one.
BurstSequence tile_burst_sequence(const BurstSequence& seq, int factor);

/// Collapses a trace into its alternating burst sizes. Throws ParamError if
/// the trace does not start with an outgoing cell.
BurstSequence extract_bursts(const Trace& trace);

struct SurakavParams {
  double tolerance = 0.6;            // δ in (0,1): burst size slack
  std::optional<double> skip_prob;   // q; sampled per download when unset
  double gap_max_ms = 100.0;         // ρ: max gap between outgoing bursts
  int max_bursts = 8000;             // machine truncation limit
  double send_timeout_us = 5.0;      // per-cell SEND pacing

  void validate() const;
};

/// Burst-size window for a reference burst of size `b`:
///   lower = floor((1 - tolerance) * b),  upper = floor((1 + tolerance) * b).
/// Computed so that decimal tolerances hit the exact mathematical floor
/// (0.6 * 5 is 3, not the 2 naive binary arithmetic would give).
std::pair<uint64_t, uint64_t> burst_thresholds(uint64_t b, double tolerance);

/// Trace-transform version: replay the reference burst sequence round by
/// round, sizing each real burst within the thresholds of its reference
/// burst and padding up to the lower threshold when short. An empty relay
/// queue skips the response burst with probability q. Throws ParamError when
/// the reference runs out before the base trace completes.
Trace surakav_reference(const Trace& base, const BurstSequence& reference,
                        const SurakavParams& p, Rng& rng);

struct MachinePair {
  Machine client;
  Machine relay;
  bool truncated = false;  // reference exceeded max_bursts
};

/// Exact-replay machines for one reference sequence. The pair assumes the
/// download opens with a single outgoing cell (which triggers both machines
/// and counts toward the first reference burst).
MachinePair gen_surakav_machines(const BurstSequence& reference,
                                 const SurakavParams& p);

}  // namespace padshield::surakav

#endif
