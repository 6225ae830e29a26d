#include "padshield/machine.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "padshield/errors.hpp"

namespace padshield {

namespace {

constexpr const char* kMagic = "MBN1";
constexpr double kProbSumTolerance = 1e-12;

const char* kEventNames[kEventKindCount] = {
    "NonPaddingSent", "NonPaddingRecv", "PaddingSent",
    "PaddingRecv",    "LimitReached",   "BlockingBegin",
};

const char* action_kind_name(StateActionKind k) {
  switch (k) {
    case StateActionKind::SendPadding: return "padding";
    case StateActionKind::BlockOutgoing: return "block";
    case StateActionKind::NoOp: return "noop";
  }
  return "?";
}

std::optional<StateActionKind> action_kind_from_name(const std::string& s) {
  if (s == "padding") return StateActionKind::SendPadding;
  if (s == "block") return StateActionKind::BlockOutgoing;
  if (s == "noop") return StateActionKind::NoOp;
  return std::nullopt;
}

std::string format_probability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", p);
  return buf;
}

}  // namespace

const char* event_kind_name(EventKind k) {
  return kEventNames[static_cast<int>(k)];
}

std::optional<EventKind> event_kind_from_name(const std::string& name) {
  for (int i = 0; i < kEventKindCount; ++i)
    if (name == kEventNames[i]) return static_cast<EventKind>(i);
  return std::nullopt;
}

std::string to_string(const DefenseAction& action) {
  char buf[128];
  const char* kind = action.kind == DefenseAction::Kind::SchedulePadding ? "padding"
                     : action.kind == DefenseAction::Kind::ScheduleBlocking
                         ? "blocking"
                         : "cancel";
  std::snprintf(buf, sizeof(buf), "%s timeout=%.6f payload=%g bypass=%d replace=%d",
                kind, action.timeout_us, action.payload, action.bypass ? 1 : 0,
                action.replace ? 1 : 0);
  return buf;
}

double quantize_probability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", p);
  return std::strtod(buf, nullptr);
}

StateSpec& StateSpec::on(EventKind event, size_t target, double probability) {
  transitions[event].emplace_back(target, quantize_probability(probability));
  return *this;
}

void Machine::validate() const {
  if (states.empty()) throw ParamError("states", "machine has no states");
  if (start_state >= states.size())
    throw ParamError("start_state", "start index out of range");
  for (size_t i = 0; i < states.size(); ++i) {
    const StateSpec& st = states[i];
    st.action_dist.validate("action_dist");
    st.timeout_dist.validate("timeout_dist");
    st.limit_dist.validate("limit_dist");
    for (const auto& [event, vec] : st.transitions) {
      double sum = 0.0;
      for (const auto& [target, p] : vec) {
        if (target != kStateEnd && target >= states.size())
          throw ParamError("transitions", "state " + std::to_string(i) + " on " +
                                              event_kind_name(event) +
                                              ": dangling target");
        if (p < 0.0 || p > 1.0)
          throw ParamError("transitions", "state " + std::to_string(i) + " on " +
                                              event_kind_name(event) +
                                              ": probability outside [0,1]");
        sum += p;
      }
      if (sum > 1.0 + kProbSumTolerance)
        throw ParamError("transitions", "state " + std::to_string(i) + " on " +
                                            event_kind_name(event) +
                                            ": probabilities sum to more than 1");
    }
  }
}

std::string serialize(const Machine& machine) {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "states " << machine.states.size() << " start " << machine.start_state
      << '\n';
  for (size_t i = 0; i < machine.states.size(); ++i) {
    const StateSpec& st = machine.states[i];
    out << "state " << i << " action=" << action_kind_name(st.action)
        << " adist=" << st.action_dist.format()
        << " tdist=" << st.timeout_dist.format()
        << " ldist=" << st.limit_dist.format() << " bypass=" << (st.bypass ? 1 : 0)
        << " replace=" << (st.replace ? 1 : 0) << '\n';
  }
  for (size_t i = 0; i < machine.states.size(); ++i) {
    for (const auto& [event, vec] : machine.states[i].transitions) {
      for (const auto& [target, p] : vec) {
        out << "on " << event_kind_name(event) << ' ' << i << " -> ";
        if (target == kStateEnd)
          out << "END";
        else
          out << target;
        out << " p=" << format_probability(p) << '\n';
      }
    }
  }
  return out.str();
}

namespace {

// "key=value" → value, or throw.
std::string expect_kv(const std::string& tok, const std::string& key, size_t line) {
  const std::string prefix = key + "=";
  if (tok.rfind(prefix, 0) != 0)
    throw ParseError(line, "expected '" + key + "=...', got '" + tok + "'");
  return tok.substr(prefix.size());
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

size_t parse_index(const std::string& tok, size_t line) {
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return static_cast<size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(line, "bad index '" + tok + "'");
  }
}

bool parse_flag(const std::string& tok, size_t line) {
  if (tok == "0") return false;
  if (tok == "1") return true;
  throw ParseError(line, "bad flag '" + tok + "'");
}

}  // namespace

Machine deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;

  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError(lineno + 1, std::string("missing ") + what);
    ++lineno;
  };

  next_line("magic");
  if (line != kMagic) throw ParseError(lineno, "unknown version '" + line + "'");

  next_line("state count");
  auto header = split_ws(line);
  if (header.size() != 4 || header[0] != "states" || header[2] != "start")
    throw ParseError(lineno, "expected 'states <n> start <i>'");
  const size_t nstates = parse_index(header[1], lineno);
  if (nstates == 0) throw ParseError(lineno, "machine has no states");

  Machine machine;
  machine.start_state = parse_index(header[3], lineno);
  machine.states.resize(nstates);

  for (size_t i = 0; i < nstates; ++i) {
    next_line("state line");
    auto tok = split_ws(line);
    if (tok.size() != 8 || tok[0] != "state")
      throw ParseError(lineno, "expected state line");
    if (parse_index(tok[1], lineno) != i)
      throw ParseError(lineno, "state lines out of order");
    StateSpec& st = machine.states[i];
    auto action = action_kind_from_name(expect_kv(tok[2], "action", lineno));
    if (!action) throw ParseError(lineno, "unknown action kind");
    st.action = *action;
    try {
      st.action_dist = DistributionSpec::parse(expect_kv(tok[3], "adist", lineno));
      st.timeout_dist = DistributionSpec::parse(expect_kv(tok[4], "tdist", lineno));
      st.limit_dist = DistributionSpec::parse(expect_kv(tok[5], "ldist", lineno));
    } catch (const ParseError& e) {
      throw ParseError(lineno, e.what());
    } catch (const ParamError& e) {
      throw ParseError(lineno, e.what());
    }
    st.bypass = parse_flag(expect_kv(tok[6], "bypass", lineno), lineno);
    st.replace = parse_flag(expect_kv(tok[7], "replace", lineno), lineno);
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tok = split_ws(line);
    if (tok.size() != 6 || tok[0] != "on" || tok[3] != "->")
      throw ParseError(lineno, "expected 'on <event> <from> -> <to> p=<prob>'");
    auto event = event_kind_from_name(tok[1]);
    if (!event) throw ParseError(lineno, "unknown event '" + tok[1] + "'");
    const size_t from = parse_index(tok[2], lineno);
    if (from >= nstates) throw ParseError(lineno, "dangling source index");
    size_t to = kStateEnd;
    if (tok[4] != "END") {
      to = parse_index(tok[4], lineno);
      if (to >= nstates) throw ParseError(lineno, "dangling state index");
    }
    const std::string prob_text = expect_kv(tok[5], "p", lineno);
    double p = 0;
    try {
      size_t pos = 0;
      p = std::stod(prob_text, &pos);
      if (pos != prob_text.size()) throw std::invalid_argument(prob_text);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad probability '" + prob_text + "'");
    }
    machine.states[from].on(*event, to, p);
  }

  try {
    machine.validate();
  } catch (const ParamError& e) {
    throw ParseError(0, e.what());
  }
  return machine;
}

}  // namespace padshield
