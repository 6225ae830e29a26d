#include "padshield/surakav.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "padshield/errors.hpp"

namespace padshield::surakav {

namespace {

constexpr double kCell = 512.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

StateSpec infinite_block_state() {
  StateSpec st;
  st.action = StateActionKind::BlockOutgoing;
  st.action_dist = DistributionSpec::point(kInf);
  st.timeout_dist = DistributionSpec::point(0);
  st.bypass = true;
  st.replace = true;
  return st;
}

uint64_t parse_size(const std::string& tok, size_t line) {
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(tok, &pos);
    if (pos != tok.size() || v == 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "bad burst size '" + tok + "'");
  }
}

}  // namespace

BurstSequence parse_burst_sequence(const std::string& text) {
  BurstSequence seq;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(lineno, "expected '<out_size>\\t<in_size>'");
    BurstPair pair;
    pair.outgoing = static_cast<uint32_t>(parse_size(line.substr(0, tab), lineno));
    pair.incoming = static_cast<uint32_t>(parse_size(line.substr(tab + 1), lineno));
    seq.push_back(pair);
  }
  if (seq.empty()) throw ParseError(0, "empty burst sequence");
  return seq;
}

BurstSequence load_burst_sequence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_burst_sequence(buf.str());
}

std::string format_burst_sequence(const BurstSequence& seq) {
  std::string out;
  for (const BurstPair& pair : seq) {
    out += std::to_string(pair.outgoing);
    out += '\t';
    out += std::to_string(pair.incoming);
    out += '\n';
  }
  return out;
}

BurstSequence tile_burst_sequence(const BurstSequence& seq, int factor) {
  if (factor < 1) throw ParamError("repeat", "tiling factor must be >= 1");
  BurstSequence out;
  out.reserve(seq.size() * factor);
  for (int i = 0; i < factor; ++i) out.insert(out.end(), seq.begin(), seq.end());
  return out;
}

BurstSequence extract_bursts(const Trace& trace) {
  if (trace.events.empty()) throw ParamError("trace", "empty trace");
  if (trace.events.front().direction != Direction::Outgoing)
    throw ParamError("trace", "burst sequence must start with an outgoing cell");
  BurstSequence seq;
  Direction current = Direction::Outgoing;
  uint32_t run = 0;
  for (const TraceEvent& ev : trace.events) {
    if (ev.direction == current) {
      ++run;
      continue;
    }
    if (current == Direction::Outgoing)
      seq.push_back({run, 0});
    else
      seq.back().incoming = run;
    current = ev.direction;
    run = 1;
  }
  if (current == Direction::Outgoing)
    seq.push_back({run, 0});
  else
    seq.back().incoming = run;
  return seq;
}

void SurakavParams::validate() const {
  if (!(tolerance >= 0) || tolerance >= 1)
    throw ParamError("delta", "tolerance must be in [0, 1)");
  if (skip_prob && (*skip_prob < 0 || *skip_prob > 1))
    throw ParamError("q", "skip probability must be in [0, 1]");
  if (!(gap_max_ms > 0)) throw ParamError("rho", "burst gap must be > 0");
  if (max_bursts < 1) throw ParamError("max_bursts", "must be >= 1");
  if (!(send_timeout_us >= 0)) throw ParamError("send_timeout_us", "must be >= 0");
}

std::pair<uint64_t, uint64_t> burst_thresholds(uint64_t b, double tolerance) {
  if (b < 1) throw ParamError("b", "burst size must be >= 1");
  // Snap products that sit within one part in 10^9 of an integer before
  // flooring, so decimal tolerances behave like exact arithmetic.
  auto snap_floor = [](double x) {
    const double nearest = std::round(x);
    if (std::abs(x - nearest) < 1e-9 * std::max(1.0, std::abs(x)))
      return static_cast<uint64_t>(nearest);
    return static_cast<uint64_t>(std::floor(x));
  };
  const double size = static_cast<double>(b);
  return {snap_floor((1.0 - tolerance) * size),
          snap_floor((1.0 + tolerance) * size)};
}

Trace surakav_reference(const Trace& base, const BurstSequence& reference,
                        const SurakavParams& p, Rng& rng) {
  p.validate();
  if (reference.empty()) throw ParamError("reference", "empty burst sequence");
  if (base.events.empty()) throw ParamError("base", "empty trace");

  std::deque<double> out_queue, in_queue;
  for (const TraceEvent& ev : base.events)
    (ev.direction == Direction::Outgoing ? out_queue : in_queue)
        .push_back(ev.time_s);

  const double skip_prob = p.skip_prob ? *p.skip_prob : rng.uniform();

  Trace out;
  out.id = base.id;
  double t = 0.0;
  size_t round = 0;
  auto send_burst = [&](std::deque<double>& queue, uint64_t ref_size,
                        Direction dir) {
    const auto [lower, upper] = burst_thresholds(ref_size, p.tolerance);
    uint64_t available = 0;
    for (double arrival : queue) {
      if (arrival > t) break;
      ++available;
    }
    const uint64_t size = std::clamp(available, lower, upper);
    for (uint64_t i = 0; i < size; ++i) {
      const bool real = i < available;
      if (real) queue.pop_front();
      out.events.push_back({t, dir, !real, 512});
    }
  };

  while (!out_queue.empty() || !in_queue.empty()) {
    if (round >= reference.size())
      throw ParamError("reference",
                       "reference exhausted before the download completed; "
                       "supply a longer burst sequence (e.g. --repeat)");
    t += rng.uniform(0.0, p.gap_max_ms / 1000.0);
    send_burst(out_queue, reference[round].outgoing, Direction::Outgoing);

    const bool relay_empty = in_queue.empty() || in_queue.front() > t;
    if (!(relay_empty && rng.uniform() < skip_prob))
      send_burst(in_queue, reference[round].incoming, Direction::Incoming);
    ++round;
  }
  return out;
}

MachinePair gen_surakav_machines(const BurstSequence& reference,
                                 const SurakavParams& p) {
  p.validate();
  if (reference.empty()) throw ParamError("reference", "empty burst sequence");

  MachinePair pair;
  BurstSequence ref = reference;
  if (ref.size() > static_cast<size_t>(p.max_bursts)) {
    ref.resize(p.max_bursts);
    pair.truncated = true;
  }

  auto padding_send_state = [&](uint64_t cells) {
    StateSpec st;
    st.action = StateActionKind::SendPadding;
    st.action_dist = DistributionSpec::uniform(kCell, kCell);
    st.timeout_dist = DistributionSpec::point(p.send_timeout_us);
    st.limit_dist = DistributionSpec::point(static_cast<double>(cells));
    st.bypass = true;
    st.replace = true;
    return st;
  };
  auto recv_state = [&](uint64_t cells) {
    StateSpec st = infinite_block_state();
    st.limit_dist = DistributionSpec::point(static_cast<double>(cells));
    return st;
  };

  auto build = [&](bool is_client) {
    Machine m;
    m.states.emplace_back();                     // 0: START
    m.states.push_back(infinite_block_state());  // 1: BLOCK
    m.states[0].on(EventKind::NonPaddingSent, 1, 1.0);
    m.states[0].on(EventKind::NonPaddingRecv, 1, 1.0);
    m.states[1].on(EventKind::BlockingBegin, 2, 1.0);

    for (size_t k = 0; k < ref.size(); ++k) {
      // The cell that starts the download is outgoing and already part of
      // the first reference burst: the client sends one fewer, and the
      // relay's first counting state saw its NonPaddingRecv consumed by
      // START, so it also counts one fewer.
      uint64_t out_cells = ref[k].outgoing;
      if (k == 0 && out_cells > 0) --out_cells;

      auto push_send = [&](uint64_t cells) {
        if (cells == 0) return;  // burst fully covered by the trigger cell
        StateSpec st = padding_send_state(cells);
        const size_t self = m.states.size();
        st.on(EventKind::PaddingSent, self, 1.0);
        st.on(EventKind::LimitReached, self + 1, 1.0);
        m.states.push_back(std::move(st));
      };
      auto push_recv = [&](uint64_t cells) {
        if (cells == 0) return;
        StateSpec st = recv_state(cells);
        const size_t self = m.states.size();
        st.on(EventKind::PaddingRecv, self, 1.0);
        st.on(EventKind::NonPaddingRecv, self, 1.0);
        st.on(EventKind::LimitReached, self + 1, 1.0);
        m.states.push_back(std::move(st));
      };

      if (is_client) {
        push_send(out_cells);
        push_recv(ref[k].incoming);
      } else {
        push_recv(out_cells);
        push_send(ref[k].incoming);
      }
    }
    // Last chain state terminates the machine.
    m.states.back().transitions[EventKind::LimitReached] = {{kStateEnd, 1.0}};
    m.validate();
    return m;
  };

  pair.client = build(true);
  pair.relay = build(false);
  return pair;
}

}  // namespace padshield::surakav
