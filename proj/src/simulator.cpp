#include "padshield/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

#include "padshield/errors.hpp"
#include "padshield/runtime.hpp"

namespace padshield {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kClient = 0;
constexpr int kRelay = 1;

// Queue item kinds, in tie-break order at equal (time, endpoint): base
// traffic first, then arrivals, then unblocking, then machine actions.
enum class ItemKind : int {
  BaseDeparture = 0,
  Arrival = 1,
  UnblockFlush = 2,
  BlockApply = 3,
  PaddingFire = 4,
};

struct QItem {
  double t;
  int endpoint;
  ItemKind kind;
  uint64_t seq;
  size_t cell = 0;          // BaseDeparture: index into base trace
  bool cell_padding = false;  // Arrival
  size_t machine = 0;       // PaddingFire / BlockApply
  uint64_t token = 0;       // PaddingFire / BlockApply: pending-action token
  uint64_t block_gen = 0;   // UnblockFlush
  DefenseAction action;     // PaddingFire / BlockApply
};

struct QItemOrder {
  bool operator()(const QItem& a, const QItem& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.endpoint != b.endpoint) return a.endpoint > b.endpoint;
    if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
    return a.seq > b.seq;
  }
};

struct QueuedCell {
  size_t index;       // base trace index
  double original_t;  // departure time it wanted, internal µs
};

// Output timestamps are kept in seconds; undelayed base cells carry their
// original value bit-for-bit so padding-only defenses leave timing intact.
struct OutputCell {
  double client_time_s;
  Direction direction;
  bool is_padding;
  uint64_t seq;
};

struct Endpoint {
  std::vector<MachineRuntime> runtimes;
  std::vector<uint64_t> token;  // pending-action token per machine
  double blocked_until = -kInf;
  bool block_bypassable = false;
  uint64_t block_gen = 0;
  std::deque<QueuedCell> queue;
};

class Simulation {
 public:
  Simulation(const Trace& base, const SimConfig& cfg,
             std::vector<SimLogEntry>* event_log)
      : base_(base), cfg_(cfg), log_(event_log) {
    Rng root(cfg.seed);
    for (int e = 0; e < 2; ++e) {
      const auto& machines = e == kClient ? cfg.client_machines : cfg.relay_machines;
      for (size_t i = 0; i < machines.size(); ++i) {
        endpoints_[e].runtimes.emplace_back(machines[i],
                                            root.split(e * 4096 + i + 1));
        endpoints_[e].token.push_back(0);
      }
    }
  }

  Trace run() {
    for (size_t i = 0; i < base_.events.size(); ++i) {
      const TraceEvent& ev = base_.events[i];
      QItem item;
      item.kind = ItemKind::BaseDeparture;
      item.cell = i;
      if (ev.direction == Direction::Outgoing) {
        item.endpoint = kClient;
        item.t = ev.time_s * 1e6;
      } else {
        item.endpoint = kRelay;
        item.t = ev.time_s * 1e6 - cfg_.one_way_delay_us;
      }
      push(item);
    }

    uint64_t processed = 0;
    while (!pq_.empty()) {
      if (++processed > cfg_.max_events) throw BudgetExceeded(cfg_.max_events);
      QItem item = pq_.top();
      pq_.pop();
      now_ = item.t;
      dispatch(item);
    }
    flush_stranded_cells();
    return assemble();
  }

 private:
  void push(QItem item) {
    item.seq = next_seq_++;
    pq_.push(item);
  }

  bool is_blocked(const Endpoint& ep) const { return now_ < ep.blocked_until; }

  void dispatch(const QItem& item) {
    Endpoint& ep = endpoints_[item.endpoint];
    switch (item.kind) {
      case ItemKind::BaseDeparture: {
        if (is_blocked(ep)) {
          ep.queue.push_back({item.cell, item.t});
        } else {
          emit_base_cell(item.endpoint, item.cell, item.t, /*delayed=*/false);
        }
        break;
      }
      case ItemKind::Arrival: {
        feed(item.endpoint, item.cell_padding ? EventKind::PaddingRecv
                                              : EventKind::NonPaddingRecv);
        break;
      }
      case ItemKind::UnblockFlush: {
        if (item.block_gen != ep.block_gen) break;  // superseded blocking
        drain_queue(item.endpoint);
        break;
      }
      case ItemKind::BlockApply: {
        if (item.token != ep.token[item.machine]) break;  // action replaced
        ep.blocked_until = item.action.payload == kInf ? kInf
                                                       : now_ + item.action.payload;
        ep.block_bypassable = item.action.bypass;
        ++ep.block_gen;
        if (ep.blocked_until != kInf) {
          QItem flush;
          flush.kind = ItemKind::UnblockFlush;
          flush.endpoint = item.endpoint;
          flush.t = ep.blocked_until;
          flush.block_gen = ep.block_gen;
          push(flush);
        }
        feed(item.endpoint, EventKind::BlockingBegin);
        break;
      }
      case ItemKind::PaddingFire: {
        if (item.token != ep.token[item.machine]) break;  // action replaced
        if (is_blocked(ep) && !(ep.block_bypassable && item.action.bypass))
          break;  // blocked padding does not fire
        if (item.action.replace && !ep.queue.empty()) {
          QueuedCell cell = ep.queue.front();
          ep.queue.pop_front();
          record(item.endpoint, now_, base_.events[cell.index].is_padding);
          schedule_arrival(item.endpoint, base_.events[cell.index].is_padding);
          feed(item.endpoint, EventKind::PaddingSent);
          feed(item.endpoint, EventKind::NonPaddingSent);
        } else {
          const auto cells = static_cast<uint64_t>(
              std::max(1.0, std::round(item.action.payload /
                                       FrameworkEvent::kCellBytes)));
          for (uint64_t c = 0; c < cells; ++c) {
            record(item.endpoint, now_, /*is_padding=*/true);
            schedule_arrival(item.endpoint, /*is_padding=*/true);
            feed(item.endpoint, EventKind::PaddingSent);
          }
        }
        break;
      }
    }
  }

  void emit_base_cell(int endpoint, size_t index, double departure_t, bool delayed) {
    const TraceEvent& ev = base_.events[index];
    double client_s;
    if (!delayed)
      client_s = ev.time_s;
    else
      client_s = (endpoint == kClient ? departure_t
                                      : departure_t + cfg_.one_way_delay_us) /
                 1e6;
    output_.push_back({client_s, ev.direction, ev.is_padding, out_seq_++});
    schedule_arrival(endpoint, ev.is_padding);
    feed(endpoint,
         ev.is_padding ? EventKind::PaddingSent : EventKind::NonPaddingSent);
  }

  void drain_queue(int endpoint) {
    Endpoint& ep = endpoints_[endpoint];
    while (!ep.queue.empty() && !is_blocked(ep)) {
      QueuedCell cell = ep.queue.front();
      ep.queue.pop_front();
      emit_base_cell(endpoint, cell.index, now_, /*delayed=*/true);
    }
  }

  void record(int endpoint, double t, bool is_padding) {
    const double client_t = endpoint == kClient ? t : t + cfg_.one_way_delay_us;
    output_.push_back({client_t / 1e6,
                       endpoint == kClient ? Direction::Outgoing
                                           : Direction::Incoming,
                       is_padding, out_seq_++});
  }

  void schedule_arrival(int from_endpoint, bool is_padding) {
    QItem arrival;
    arrival.kind = ItemKind::Arrival;
    arrival.endpoint = from_endpoint == kClient ? kRelay : kClient;
    arrival.t = now_ + cfg_.one_way_delay_us;
    arrival.cell_padding = is_padding;
    push(arrival);
  }

  void feed(int endpoint, EventKind kind) {
    Endpoint& ep = endpoints_[endpoint];
    FrameworkEvent event{kind, std::max(0.0, now_)};
    for (size_t i = 0; i < ep.runtimes.size(); ++i) {
      if (log_) log_->push_back({endpoint, i, kind, event.timestamp_us});
      std::optional<DefenseAction> action = ep.runtimes[i].process(event);
      if (ep.runtimes[i].terminated()) ++ep.token[i];  // drop pending action
      if (!action) continue;
      ++ep.token[i];  // a new action replaces the pending one
      if (action->kind == DefenseAction::Kind::Cancel) continue;
      QItem item;
      item.kind = action->kind == DefenseAction::Kind::SchedulePadding
                      ? ItemKind::PaddingFire
                      : ItemKind::BlockApply;
      item.endpoint = endpoint;
      item.t = now_ + action->timeout_us;
      item.machine = i;
      item.token = ep.token[i];
      item.action = *action;
      push(item);
    }
  }

  // Machines may terminate while infinite blocking still holds queued cells;
  // the defended trace must conserve every base cell, so release leftovers
  // once no event can ever free them.
  void flush_stranded_cells() {
    for (int e = 0; e < 2; ++e) {
      Endpoint& ep = endpoints_[e];
      while (!ep.queue.empty()) {
        QueuedCell cell = ep.queue.front();
        ep.queue.pop_front();
        const double t = std::max(now_, cell.original_t);
        const TraceEvent& ev = base_.events[cell.index];
        const double client_t = e == kClient ? t : t + cfg_.one_way_delay_us;
        output_.push_back({client_t / 1e6, ev.direction, ev.is_padding, out_seq_++});
      }
    }
  }

  Trace assemble() {
    std::stable_sort(output_.begin(), output_.end(),
                     [](const OutputCell& a, const OutputCell& b) {
                       return a.client_time_s < b.client_time_s;
                     });
    Trace out;
    out.id = base_.id;
    out.events.reserve(output_.size());
    for (const OutputCell& cell : output_)
      out.events.push_back(
          {cell.client_time_s, cell.direction, cell.is_padding, 512});
    return out;
  }

  const Trace& base_;
  const SimConfig& cfg_;
  std::vector<SimLogEntry>* log_;
  Endpoint endpoints_[2];
  std::priority_queue<QItem, std::vector<QItem>, QItemOrder> pq_;
  std::vector<OutputCell> output_;
  double now_ = 0.0;
  uint64_t next_seq_ = 0;
  uint64_t out_seq_ = 0;
};

}  // namespace

Trace simulate(const Trace& base, const SimConfig& cfg,
               std::vector<SimLogEntry>* event_log) {
  if (cfg.one_way_delay_us < 0)
    throw ParamError("one_way_delay_us", "delay must be >= 0");
  Simulation sim(base, cfg, event_log);
  return sim.run();
}

}  // namespace padshield
