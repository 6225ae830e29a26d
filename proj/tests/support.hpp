#ifndef PADSHIELD_TESTS_SUPPORT_HPP
#define PADSHIELD_TESTS_SUPPORT_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "padshield/machine.hpp"
#include "padshield/rng.hpp"
#include "padshield/runtime.hpp"
#include "padshield/trace.hpp"

namespace testsupport {

using namespace padshield;

/// Drives a runtime with a scripted event stream (timestamps synthesized);
/// returns the non-empty actions in order.
inline std::vector<DefenseAction> run_script(MachineRuntime& rt,
                                             const std::vector<EventKind>& script) {
  std::vector<DefenseAction> actions;
  double t = 0;
  for (EventKind kind : script) {
    FrameworkEvent ev{kind, t};
    t += 1.0;
    if (auto action = rt.process(ev)) actions.push_back(*action);
  }
  return actions;
}

/// Feeds the machine its own PaddingSent echoes until it terminates or
/// `max_steps` is hit: the scripted stand-in for a host that sends every
/// scheduled padding cell. Returns the number of padding actions taken.
inline size_t run_padding_loop(MachineRuntime& rt, EventKind trigger,
                               size_t max_steps = 1u << 20) {
  size_t actions = 0;
  double t = 0;
  auto pending = rt.process({trigger, t});
  while (pending && !rt.terminated() && actions < max_steps) {
    ++actions;
    t += 1.0;
    pending = rt.process({EventKind::PaddingSent, t});
  }
  return actions;
}

/// Web-download-shaped synthetic base trace: a short upload request burst
/// followed by download bursts, roughly `download_ratio` incoming cells per
/// outgoing cell, spread over `duration_s`.
inline Trace synthetic_trace(uint64_t seed, int upload_cells = 40,
                             int download_ratio = 15, double duration_s = 18.0) {
  Rng rng(seed);
  Trace trace;
  trace.id = "synthetic-" + std::to_string(seed);
  trace.events.push_back({0.0, Direction::Outgoing, false, 512});
  double t = 0.0;
  const int uploads = upload_cells;
  const int downloads = upload_cells * download_ratio;
  std::vector<TraceEvent> events;
  for (int i = 1; i < uploads; ++i) {
    t = rng.uniform(0.0, duration_s * 0.8);
    events.push_back({t, Direction::Outgoing, false, 512});
  }
  for (int i = 0; i < downloads; ++i) {
    // Responses only after a round trip.
    t = rng.uniform(0.04, duration_s);
    events.push_back({t, Direction::Incoming, false, 512});
  }
  std::sort(events.begin(), events.end(),
            [](const TraceEvent& a, const TraceEvent& b) {
              return a.time_s < b.time_s;
            });
  trace.events.insert(trace.events.end(), events.begin(), events.end());
  return trace;
}

/// Unique scratch directory under the build tree, wiped on construction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() /
              ("padshield-test-" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testsupport

#endif
