#ifndef PADSHIELD_MACHINE_HPP
#define PADSHIELD_MACHINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padshield/dist.hpp"

namespace padshield {

/// Events a host application feeds into a machine. Sent/Recv are from the
/// perspective of the endpoint the machine runs at; LimitReached is
/// synthesized internally when a state exhausts its self-transition limit;
/// BlockingBegin fires when a blocking action takes effect at the endpoint.
enum class EventKind {
  NonPaddingSent,
  NonPaddingRecv,
  PaddingSent,
  PaddingRecv,
  LimitReached,
  BlockingBegin,
};

inline constexpr int kEventKindCount = 6;

const char* event_kind_name(EventKind k);
std::optional<EventKind> event_kind_from_name(const std::string& name);

/// One observation fed to machines. All cells are 512 bytes.
struct FrameworkEvent {
  EventKind kind;
  double timestamp_us = 0.0;  // non-negative, non-decreasing per endpoint
  uint32_t byte_count = kCellBytes;

  static constexpr uint32_t kCellBytes = 512;
};

enum class StateActionKind { SendPadding, BlockOutgoing, NoOp };

/// What the framework asks the host to do. SchedulePadding carries payload
/// bytes (positive multiple of 512); ScheduleBlocking carries a duration in
/// microseconds, possibly infinite; Cancel clears the machine's pending
/// action. Timeouts are the delay before the action applies.
struct DefenseAction {
  enum class Kind { SchedulePadding, ScheduleBlocking, Cancel };

  Kind kind = Kind::Cancel;
  double timeout_us = 0.0;
  double payload = 0.0;  // bytes of padding, or µs of blocking (may be inf)
  bool bypass = false;
  bool replace = false;
};

std::string to_string(const DefenseAction& action);

/// Target index of the distinguished terminating pseudo-state.
inline constexpr size_t kStateEnd = static_cast<size_t>(-1);

/// Limit value for states whose self-transitions should never run out.
inline constexpr double kUnlimited = 9.0e15;

/// A machine state: an action, three distributions, per-event transition
/// vectors, and the bypass/replace flags.
///
/// Transition probabilities for one event may sum to less than 1; the
/// residual mass means "ignore the event": stay in the state without
/// re-sampling anything.
struct StateSpec {
  StateActionKind action = StateActionKind::NoOp;
  DistributionSpec action_dist = DistributionSpec::point(0);   // bytes or µs
  DistributionSpec timeout_dist = DistributionSpec::point(0);  // µs
  DistributionSpec limit_dist = DistributionSpec::point(kUnlimited);
  bool bypass = false;
  bool replace = false;
  std::map<EventKind, std::vector<std::pair<size_t, double>>> transitions;

  bool operator==(const StateSpec&) const = default;

  /// Appends (target, probability) to the event's transition vector. The
  /// probability is stored quantized to 12 significant digits, the precision
  /// of the serialized form, so that machines round-trip exactly.
  StateSpec& on(EventKind event, size_t target, double probability);
};

/// Round to 12 significant decimal digits (the serialization precision).
double quantize_probability(double p);

/// A padding-defense automaton. States are indexed from 0; `kStateEnd` is a
/// valid transition target and terminates the machine.
struct Machine {
  std::vector<StateSpec> states;
  size_t start_state = 0;

  bool operator==(const Machine&) const = default;

  /// Structural checks: start/target indices valid, probabilities in [0,1]
  /// with per-event sums <= 1 + 1e-12, distributions in domain.
  /// Throws ParamError on violation.
  void validate() const;
};

/// Versioned line-oriented text encoding ("MBN1"), deterministic output.
std::string serialize(const Machine& machine);

/// Inverse of serialize(). Throws ParseError with the offending line number.
Machine deserialize(const std::string& text);

}  // namespace padshield

#endif
