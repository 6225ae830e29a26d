#include "padshield/runtime.hpp"

#include <algorithm>
#include <cmath>

namespace padshield {

namespace {

// Limit samples are positive integers.
uint64_t sample_limit(const DistributionSpec& dist, Rng& rng) {
  const double v = std::round(dist.sample(rng));
  return v < 1.0 ? 1 : static_cast<uint64_t>(v);
}

// Padding payloads are positive multiples of one cell.
double snap_padding_bytes(double bytes) {
  double cells = std::round(bytes / FrameworkEvent::kCellBytes);
  if (cells < 1.0) cells = 1.0;
  return cells * FrameworkEvent::kCellBytes;
}

}  // namespace

MachineRuntime::MachineRuntime(const Machine& machine, Rng rng)
    : machine_(&machine), rng_(rng), current_state_(machine.start_state) {
  limit_ = sample_limit(machine.states[current_state_].limit_dist, rng_);
}

std::optional<DefenseAction> MachineRuntime::process(const FrameworkEvent& event) {
  if (terminated_) return std::nullopt;
  return apply(event.kind);
}

std::optional<DefenseAction> MachineRuntime::apply(EventKind kind) {
  const StateSpec& state = machine_->states[current_state_];
  const auto it = state.transitions.find(kind);
  if (it == state.transitions.end()) return std::nullopt;

  const double u = rng_.uniform();
  double cumulative = 0.0;
  size_t target = kStateEnd;
  bool hit = false;
  for (const auto& [candidate, p] : it->second) {
    cumulative += p;
    if (u < cumulative) {
      target = candidate;
      hit = true;
      break;
    }
  }
  if (!hit) return std::nullopt;  // residual mass: ignore the event

  if (target == kStateEnd) {
    terminated_ = true;
    return std::nullopt;
  }

  if (target == current_state_) {
    if (self_transitions_ < limit_) {
      ++self_transitions_;
      std::optional<DefenseAction> action = enter_state();
      if (self_transitions_ == limit_) {
        // Synthesized LimitReached is processed before any further external
        // event; a resulting transition supersedes the self-entry action.
        std::optional<DefenseAction> chained = apply(EventKind::LimitReached);
        if (chained || terminated_) return chained;
      }
      return action;
    }
    // Spent limit with nowhere to go: keep re-entering without recounting.
    return enter_state();
  }

  current_state_ = target;
  self_transitions_ = 0;
  limit_ = sample_limit(machine_->states[current_state_].limit_dist, rng_);
  return enter_state();
}

DefenseAction MachineRuntime::enter_state() {
  const StateSpec& state = machine_->states[current_state_];
  DefenseAction action;
  action.timeout_us = state.timeout_dist.sample(rng_);
  const double value = state.action_dist.sample(rng_);
  action.bypass = state.bypass;
  action.replace = state.replace;
  switch (state.action) {
    case StateActionKind::SendPadding:
      action.kind = DefenseAction::Kind::SchedulePadding;
      action.payload = snap_padding_bytes(value);
      break;
    case StateActionKind::BlockOutgoing:
      action.kind = DefenseAction::Kind::ScheduleBlocking;
      action.payload = value;
      break;
    case StateActionKind::NoOp:
      // Pure counting states: clear whatever this machine had pending.
      action.kind = DefenseAction::Kind::Cancel;
      action.timeout_us = 0.0;
      action.payload = 0.0;
      break;
  }
  return action;
}

}  // namespace padshield
