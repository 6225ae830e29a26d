#ifndef PADSHIELD_SIMULATOR_HPP
#define PADSHIELD_SIMULATOR_HPP

#include <cstdint>
#include <vector>

#include "padshield/machine.hpp"
#include "padshield/trace.hpp"

namespace padshield {

/// Two-endpoint (client, relay) deterministic discrete-event simulation.
///
/// Base outgoing cells originate at the client at their trace time; base
/// incoming cells originate at the relay one-way-delay earlier, so that an
/// undefended cell reaches the client exactly at its trace time. Every cell
/// an endpoint emits triggers the local Sent event and, one delay later, the
/// peer's Recv event.
///
/// Blocking applies to an endpoint's own sends only. A padding action fires
/// after its timeout unless non-bypassable blocking is active; with the
/// replace flag set and base cells queued, the oldest queued cell is sent in
/// place of the padding and both PaddingSent and NonPaddingSent (in that
/// order) are fed back.
struct SimConfig {
  std::vector<Machine> client_machines;
  std::vector<Machine> relay_machines;
  double one_way_delay_us = 10'000.0;
  uint64_t seed = 0;
  uint64_t max_events = 10'000'000;  // guard against runaway machines
};

/// Per-machine event feed, in processing order. Useful for scripted replays.
struct SimLogEntry {
  int endpoint;  // 0 = client, 1 = relay
  size_t machine;
  EventKind event;
  double time_us;
};

/// Applies the configured machines to an undefended trace and returns the
/// defended trace from the client's perspective. Throws BudgetExceeded when
/// cfg.max_events is hit.
Trace simulate(const Trace& base, const SimConfig& cfg,
               std::vector<SimLogEntry>* event_log = nullptr);

}  // namespace padshield

#endif
