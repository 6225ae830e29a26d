#ifndef PADSHIELD_REGULATOR_HPP
#define PADSHIELD_REGULATOR_HPP

#include "padshield/machine.hpp"
#include "padshield/rng.hpp"
#include "padshield/trace.hpp"

namespace padshield::regulator {

/// RegulaTor: the relay shapes download traffic to a decaying constant rate
/// (restarting the "surge" when the queue backs up); the client uploads one
/// cell per `upload_ratio` cells received.
struct RegulatorParams {
  double initial_rate = 206.0;     // R: surge rate, cells/s
  double decay = 0.86;             // D: per-second rate multiplier, (0, 1]
  double surge_threshold = 3.75;   // T: queued > T*rate restarts the surge
  int padding_budget = 1650;       // N: relay padding cells (reference only)
  double upload_ratio = 4.02;      // U: cells received per cell sent, >= 1
  double max_queue_wait_s = 2.08;  // C: client flush deadline (reference only)
  int cells_per_state = 20;        // ω: cells per SEND state (machines only)

  void validate() const;
};

/// Rate prescribed by the decay schedule `t` seconds into a surge.
double target_rate(const RegulatorParams& p, double elapsed_s);

/// Trace-transform version of the defense (both endpoints).
Trace regulator_reference(const Trace& base, const RegulatorParams& p, Rng& rng);

/// Relay machine: infinite bypass/replace blocking, nine BOOT states pacing
/// 10 cells/s until ten non-padding cells are out, then SEND states stepping
/// down the decay schedule ω cells at a time, with a 2/(T·rate) chance per
/// non-padding send of restarting at SEND_0. States run until the schedule
/// decays to `min_rate` cells/s.
Machine gen_regulator_relay(const RegulatorParams& p, double min_rate = 1.0);

/// Number of SEND states gen_regulator_relay will emit.
int regulator_send_states(const RegulatorParams& p, double min_rate = 1.0);

/// Client machine: floor(U) COUNT states advancing per received cell, then a
/// zero-timeout SEND; a fractional U becomes a biased self-loop on the last
/// COUNT state with its limit fixed at 2.
Machine gen_regulator_client(const RegulatorParams& p);

}  // namespace padshield::regulator

#endif
