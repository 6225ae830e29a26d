#include "padshield/front.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "padshield/errors.hpp"

namespace padshield::front {

namespace {

constexpr double kCell = 512.0;

// Appends one pipeline of PADDING states and returns the index of its first
// state. `p` carries the pipeline's own budget and state count. The last
// state's LimitReached edge is wired to StateEnd.
size_t append_pipeline(Machine& machine, const FrontParams& p) {
  const int states = p.padding_states;
  const double per_state = std::floor(static_cast<double>(p.padding_budget) / states);
  if (per_state < 1.0)
    throw ParamError("N", "padding budget below one cell per PADDING state");
  const double slice_ms = p.window_max_s * 1000.0 / states;
  const size_t first = machine.states.size();
  for (int i = 0; i < states; ++i) {
    SliceTiming timing = padding_slice_timing(p, i * slice_ms, (i + 1) * slice_ms);
    StateSpec st;
    st.action = StateActionKind::SendPadding;
    st.action_dist = DistributionSpec::uniform(kCell, kCell);
    st.timeout_dist = DistributionSpec::normal(timing.mean_us, timing.stddev_us)
                          .clamped(0.0, 2.0 * timing.mean_us);
    st.limit_dist = DistributionSpec::uniform_discrete(1, per_state);
    const size_t self = machine.states.size();
    st.on(EventKind::PaddingSent, self, 1.0);
    st.on(EventKind::LimitReached, self + 1, 1.0);  // patched for last state
    machine.states.push_back(std::move(st));
  }
  machine.states.back().transitions[EventKind::LimitReached] = {{kStateEnd, 1.0}};
  return first;
}

}  // namespace

void FrontParams::validate() const {
  if (padding_states < 1) throw ParamError("psi", "at least one PADDING state");
  if (padding_budget < padding_states)
    throw ParamError("N", "budget must be at least the number of PADDING states");
  if (window_min_s < 1.0 || window_min_s > window_max_s)
    throw ParamError("W_min", "need 1 <= W_min <= W_max");
}

std::vector<double> sample_padding_times(int count, double window_s, Rng& rng) {
  DistributionSpec dist = DistributionSpec::rayleigh(window_s);
  std::vector<double> times(static_cast<size_t>(std::max(count, 0)));
  for (double& t : times) t = dist.sample(rng);
  return times;
}

Trace front_reference(const Trace& base, const FrontParams& client,
                      const FrontParams& relay, Rng& rng) {
  client.validate();
  relay.validate();
  if (base.events.empty()) throw ParamError("base", "empty trace");
  const double download_end = base.events.back().time_s;

  Trace out = base;
  auto schedule = [&](const FrontParams& p, Direction dir) {
    const auto count = static_cast<int>(
        DistributionSpec::uniform_discrete(1, p.padding_budget).sample(rng));
    const double window = rng.uniform(p.window_min_s, p.window_max_s);
    for (double t : sample_padding_times(count, window, rng)) {
      if (t > download_end) continue;  // nothing after the download completes
      out.events.push_back({t, dir, true, 512});
    }
  };
  schedule(client, Direction::Outgoing);
  schedule(relay, Direction::Incoming);

  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) {
                     return a.time_s < b.time_s;
                   });
  return out;
}

SliceTiming padding_slice_timing(const FrontParams& p, double t1_ms, double t2_ms) {
  const double states = p.padding_states;
  const double budget = p.padding_budget;
  const double window_ms = p.window_max_s * 1000.0;
  SliceTiming timing;
  // Mean inter-cell delay that spreads budget/states cells over the slice.
  timing.mean_us = states / budget * (t2_ms - t1_ms) * 1000.0;
  // Wider spread early in the window, narrowing as the slice midpoint grows.
  timing.stddev_us = window_ms * window_ms / std::sqrt(std::numbers::pi) /
                     (budget / states * (t1_ms + t2_ms) / 2.0) * 1000.0;
  return timing;
}

Machine gen_maybenot_front(const FrontParams& p) {
  p.validate();
  Machine machine;
  machine.states.emplace_back();  // START
  const size_t first = append_pipeline(machine, p);
  machine.states[0].on(EventKind::NonPaddingSent, first, 1.0);
  machine.states[0].on(EventKind::NonPaddingRecv, first, 1.0);
  machine.validate();
  return machine;
}

Machine gen_pipelined_front(const FrontParams& p, int pipelines,
                            int per_pipeline_states) {
  p.validate();
  if (pipelines < 2) throw ParamError("pipelines", "need at least 2 pipelines");
  if (per_pipeline_states < 1)
    throw ParamError("states_per_pipeline", "need at least 1 state per pipeline");

  Machine machine;
  machine.states.emplace_back();  // START
  const double low = static_cast<double>(p.padding_budget) / pipelines;
  const double high = p.padding_budget;
  for (int k = 0; k < pipelines; ++k) {
    FrontParams pipeline = p;
    pipeline.padding_budget = static_cast<int>(
        std::floor(low + k * (high - low) / (pipelines - 1)));
    pipeline.padding_states = per_pipeline_states;
    const size_t first = append_pipeline(machine, pipeline);
    machine.states[0].on(EventKind::NonPaddingSent, first, 1.0 / pipelines);
    machine.states[0].on(EventKind::NonPaddingRecv, first, 1.0 / pipelines);
  }
  machine.validate();
  return machine;
}

}  // namespace padshield::front
