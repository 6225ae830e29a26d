#ifndef PADSHIELD_TRACE_HPP
#define PADSHIELD_TRACE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace padshield {

enum class Direction { Outgoing, Incoming };  // client perspective

/// One 512-byte cell. Times are seconds relative to the first cell.
struct TraceEvent {
  double time_s = 0.0;
  Direction direction = Direction::Outgoing;
  bool is_padding = false;
  uint32_t size = 512;

  bool operator==(const TraceEvent&) const = default;
};

struct Trace {
  std::vector<TraceEvent> events;
  std::string id;

  bool operator==(const Trace&) const = default;
};

/// File format, one cell per line:
///   base trace:     <time_seconds>\t<+1|-1>
///   defended trace: <time_seconds>\t<+1|-1>\t<p|n>
/// +1 is outgoing, -1 incoming; 'p' marks padding. Both forms are accepted
/// on load. Times are shifted so the first event is at 0.
Trace load_trace(const std::filesystem::path& path);
Trace parse_trace(const std::string& text, const std::string& id);

enum class TraceFormat { Base, Defended };
void save_trace(const Trace& trace, const std::filesystem::path& path,
                TraceFormat format);
std::string format_trace(const Trace& trace, TraceFormat format);

/// Drops every event after the last non-padding cell (both directions
/// jointly). Interior padding is kept. Idempotent.
/// Throws ParamError if the trace has no non-padding cell at all.
Trace strip_trailing_padding(const Trace& trace);

}  // namespace padshield

#endif
