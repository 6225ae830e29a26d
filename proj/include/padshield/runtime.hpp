#ifndef PADSHIELD_RUNTIME_HPP
#define PADSHIELD_RUNTIME_HPP

#include <optional>

#include "padshield/machine.hpp"
#include "padshield/rng.hpp"

namespace padshield {

/// Executes one Machine against an event stream.
///
/// Semantics:
///  - An event with no transition vector in the current state is ignored.
///  - A sampled transition that lands in the residual mass (vector sums to
///    less than 1) is also ignored: stay, keep the pending action, no
///    re-sampling.
///  - Entering a state returns its action with freshly sampled timeout and
///    value; a fresh entry also re-samples the self-transition limit, a
///    self-transition does not.
///  - The Nth self-transition of a state with sampled limit N synthesizes a
///    LimitReached event that is processed before anything else, so the state
///    emits exactly N actions (the entry action plus N-1 self-entries).
///  - Entering StateEnd terminates the machine; every later event returns
///    nothing.
///
/// The machine itself never suppresses or rewrites host traffic: when the
/// host replaces scheduled padding with a queued cell it must feed back both
/// PaddingSent and NonPaddingSent.
class MachineRuntime {
 public:
  MachineRuntime(const Machine& machine, Rng rng);

  /// Feed one event; returns the action to take, if any.
  std::optional<DefenseAction> process(const FrameworkEvent& event);

  bool terminated() const { return terminated_; }
  size_t current_state() const { return current_state_; }
  uint64_t self_transition_count() const { return self_transitions_; }
  uint64_t sampled_limit() const { return limit_; }

 private:
  std::optional<DefenseAction> apply(EventKind kind);
  DefenseAction enter_state();

  const Machine* machine_;
  Rng rng_;
  size_t current_state_;
  uint64_t self_transitions_ = 0;
  uint64_t limit_ = 0;
  bool terminated_ = false;
};

}  // namespace padshield

#endif
