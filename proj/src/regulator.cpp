#include "padshield/regulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "padshield/errors.hpp"

namespace padshield::regulator {

namespace {

constexpr double kCell = 512.0;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBootStates = 9;
constexpr double kBootTimeoutUs = 100'000.0;  // 10 cells/s

StateSpec infinite_block_state() {
  StateSpec st;
  st.action = StateActionKind::BlockOutgoing;
  st.action_dist = DistributionSpec::point(kInf);
  st.timeout_dist = DistributionSpec::point(0);
  st.bypass = true;
  st.replace = true;
  return st;
}

StateSpec padding_state(double timeout_us) {
  StateSpec st;
  st.action = StateActionKind::SendPadding;
  st.action_dist = DistributionSpec::uniform(kCell, kCell);
  st.timeout_dist = DistributionSpec::point(timeout_us);
  st.bypass = true;
  st.replace = true;
  return st;
}

}  // namespace

void RegulatorParams::validate() const {
  if (!(initial_rate > 0)) throw ParamError("R", "initial rate must be > 0");
  if (!(decay > 0) || decay > 1) throw ParamError("D", "decay must be in (0, 1]");
  if (!(surge_threshold > 0)) throw ParamError("T", "threshold must be > 0");
  if (padding_budget < 0) throw ParamError("N", "padding budget must be >= 0");
  if (upload_ratio < 1) throw ParamError("U", "upload ratio must be >= 1");
  if (!(max_queue_wait_s > 0)) throw ParamError("C", "queue wait must be > 0");
  if (cells_per_state < 1) throw ParamError("omega", "cells per state must be >= 1");
}

double target_rate(const RegulatorParams& p, double elapsed_s) {
  return p.initial_rate * std::pow(p.decay, elapsed_s);
}

Trace regulator_reference(const Trace& base, const RegulatorParams& p, Rng& rng) {
  p.validate();
  if (base.events.empty()) throw ParamError("base", "empty trace");

  std::vector<double> down_arrivals, up_arrivals;
  for (const TraceEvent& ev : base.events)
    (ev.direction == Direction::Incoming ? down_arrivals : up_arrivals)
        .push_back(ev.time_s);

  Trace out;
  out.id = base.id;

  // Relay: pace the download at the decaying target rate, padding when the
  // queue runs dry until the sampled budget is spent.
  std::vector<double> down_emissions;
  if (!down_arrivals.empty()) {
    const auto budget = static_cast<int64_t>(
        DistributionSpec::uniform_discrete(0, p.padding_budget).sample(rng));
    const size_t surge_anchor = std::min<size_t>(10, down_arrivals.size()) - 1;
    double surge_start = down_arrivals[surge_anchor];
    double t = surge_start;
    size_t next_arrival = 0;
    size_t sent = 0;
    int64_t padding_sent = 0;
    while (sent < down_arrivals.size()) {
      double rate = target_rate(p, t - surge_start);
      while (next_arrival < down_arrivals.size() && down_arrivals[next_arrival] <= t)
        ++next_arrival;
      const size_t queued = next_arrival - sent;
      if (static_cast<double>(queued) > p.surge_threshold * rate) {
        surge_start = t;
        rate = p.initial_rate;
      }
      if (queued > 0) {
        out.events.push_back({t, Direction::Incoming, false, 512});
        down_emissions.push_back(t);
        ++sent;
      } else if (padding_sent < budget) {
        out.events.push_back({t, Direction::Incoming, true, 512});
        down_emissions.push_back(t);
        ++padding_sent;
      }
      // Rate-capped: an empty queue with a spent budget emits nothing.
      t += 1.0 / rate;
    }
  }

  // Client: one upload per U download emissions; anything queued longer than
  // C seconds is flushed at its deadline.
  {
    std::deque<double> queue(up_arrivals.begin(), up_arrivals.end());
    double credit = 0.0;
    size_t next_down = 0;
    auto emit_upload = [&](double t, bool real) {
      if (real) queue.pop_front();
      out.events.push_back({t, Direction::Outgoing, !real, 512});
    };
    while (next_down < down_emissions.size() || !queue.empty()) {
      const double deadline =
          queue.empty() ? kInf : queue.front() + p.max_queue_wait_s;
      const double next_tick =
          next_down < down_emissions.size() ? down_emissions[next_down] : kInf;
      if (deadline == kInf && next_tick == kInf) break;
      if (deadline < next_tick) {
        emit_upload(deadline, true);
        continue;
      }
      ++next_down;
      credit += 1.0;
      if (credit >= p.upload_ratio) {
        credit -= p.upload_ratio;
        const bool real = !queue.empty() && queue.front() <= next_tick;
        emit_upload(next_tick, real);
      }
    }
  }

  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const TraceEvent& a, const TraceEvent& b) {
                     return a.time_s < b.time_s;
                   });
  return out;
}

int regulator_send_states(const RegulatorParams& p, double min_rate) {
  int count = 0;
  double elapsed = 0.0;
  double rate = p.initial_rate;
  while (rate >= min_rate && count < 100'000) {
    ++count;
    elapsed += p.cells_per_state / rate;
    rate = target_rate(p, elapsed);
  }
  return count;
}

Machine gen_regulator_relay(const RegulatorParams& p, double min_rate) {
  p.validate();
  if (!(min_rate > 0)) throw ParamError("min_rate", "must be > 0");
  const int send_states = regulator_send_states(p, min_rate);

  Machine machine;
  machine.states.emplace_back();                       // 0: START
  machine.states.push_back(infinite_block_state());    // 1: BLOCK
  machine.states[0].on(EventKind::NonPaddingSent, 1, 1.0);
  machine.states[1].on(EventKind::BlockingBegin, 2, 1.0);

  for (int i = 0; i < kBootStates; ++i) {              // 2..10: BOOT_0..BOOT_8
    StateSpec st = padding_state(kBootTimeoutUs);
    const size_t self = machine.states.size();
    st.on(EventKind::PaddingSent, self, 1.0);
    st.on(EventKind::NonPaddingSent, self + 1, 1.0);
    machine.states.push_back(std::move(st));
  }

  const size_t send0 = machine.states.size();          // 11: SEND_0
  double elapsed = 0.0;
  for (int i = 0; i < send_states; ++i) {
    const double rate = target_rate(p, elapsed);
    StateSpec st = padding_state(1e6 / rate);
    st.limit_dist = DistributionSpec::point(p.cells_per_state);
    const size_t self = machine.states.size();
    st.on(EventKind::PaddingSent, self, 1.0);
    st.on(EventKind::LimitReached,
          i + 1 < send_states ? self + 1 : kStateEnd, 1.0);
    if (i > 0) {
      // Surge restart stands in for queue-length feedback the framework
      // does not have.
      const double restart = std::min(1.0, 2.0 / (p.surge_threshold * rate));
      st.on(EventKind::NonPaddingSent, send0, restart);
    }
    machine.states.push_back(std::move(st));
    elapsed += p.cells_per_state / rate;
  }
  machine.validate();
  return machine;
}

Machine gen_regulator_client(const RegulatorParams& p) {
  p.validate();
  const int whole = static_cast<int>(std::floor(p.upload_ratio));
  const double fraction = p.upload_ratio - whole;

  Machine machine;
  for (int i = 0; i < whole; ++i)
    machine.states.push_back(infinite_block_state());  // 0..whole-1: COUNT
  const size_t send = machine.states.size();           // whole: SEND

  for (int i = 0; i + 1 < whole; ++i) {
    machine.states[i].on(EventKind::PaddingRecv, i + 1, 1.0);
    machine.states[i].on(EventKind::NonPaddingRecv, i + 1, 1.0);
  }
  StateSpec& last = machine.states[whole - 1];
  if (fraction == 0.0) {
    last.on(EventKind::PaddingRecv, send, 1.0);
    last.on(EventKind::NonPaddingRecv, send, 1.0);
  } else {
    last.limit_dist = DistributionSpec::point(2);
    last.on(EventKind::PaddingRecv, send, 1.0 - fraction);
    last.on(EventKind::PaddingRecv, whole - 1, fraction);
    last.on(EventKind::NonPaddingRecv, send, 1.0 - fraction);
    last.on(EventKind::NonPaddingRecv, whole - 1, fraction);
    last.on(EventKind::LimitReached, send, 1.0);
  }

  StateSpec st = padding_state(0.0);
  st.on(EventKind::PaddingSent, 0, 1.0);
  machine.states.push_back(std::move(st));
  machine.validate();
  return machine;
}

}  // namespace padshield::regulator
