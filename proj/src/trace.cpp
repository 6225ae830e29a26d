#include "padshield/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "padshield/errors.hpp"

namespace padshield {

Trace parse_trace(const std::string& text, const std::string& id) {
  Trace trace;
  trace.id = id;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string time_tok, dir_tok, pad_tok;
    if (!std::getline(fields, time_tok, '\t') || !std::getline(fields, dir_tok, '\t'))
      throw ParseError(lineno, "expected '<time>\\t<+1|-1>'");
    const bool has_pad = static_cast<bool>(std::getline(fields, pad_tok, '\t'));

    TraceEvent ev;
    try {
      size_t pos = 0;
      ev.time_s = std::stod(time_tok, &pos);
      if (pos != time_tok.size()) throw std::invalid_argument(time_tok);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad timestamp '" + time_tok + "'");
    }
    if (dir_tok == "1" || dir_tok == "+1")
      ev.direction = Direction::Outgoing;
    else if (dir_tok == "-1")
      ev.direction = Direction::Incoming;
    else
      throw ParseError(lineno, "bad direction '" + dir_tok + "'");
    if (has_pad) {
      if (pad_tok == "p")
        ev.is_padding = true;
      else if (pad_tok == "n")
        ev.is_padding = false;
      else
        throw ParseError(lineno, "bad padding flag '" + pad_tok + "'");
    }
    if (!trace.events.empty() && ev.time_s < trace.events.back().time_s)
      throw ParseError(lineno, "timestamps must be non-decreasing");
    trace.events.push_back(ev);
  }
  if (trace.events.empty()) throw ParseError(0, "empty trace");

  const double t0 = trace.events.front().time_s;
  for (TraceEvent& ev : trace.events) ev.time_s -= t0;
  return trace;
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str(), path.stem().string());
}

std::string format_trace(const Trace& trace, TraceFormat format) {
  std::string out;
  out.reserve(trace.events.size() * 16);
  char line[64];
  for (const TraceEvent& ev : trace.events) {
    const char* dir = ev.direction == Direction::Outgoing ? "1" : "-1";
    if (format == TraceFormat::Defended)
      std::snprintf(line, sizeof(line), "%.6f\t%s\t%c\n", ev.time_s, dir,
                    ev.is_padding ? 'p' : 'n');
    else
      std::snprintf(line, sizeof(line), "%.6f\t%s\n", ev.time_s, dir);
    out += line;
  }
  return out;
}

void save_trace(const Trace& trace, const std::filesystem::path& path,
                TraceFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(0, "cannot write " + path.string());
  out << format_trace(trace, format);
}

Trace strip_trailing_padding(const Trace& trace) {
  size_t last_real = trace.events.size();
  for (size_t i = trace.events.size(); i-- > 0;) {
    if (!trace.events[i].is_padding) {
      last_real = i;
      break;
    }
  }
  if (last_real == trace.events.size())
    throw ParamError("trace", "no non-padding cell to anchor trailing removal");
  Trace out;
  out.id = trace.id;
  out.events.assign(trace.events.begin(), trace.events.begin() + last_real + 1);
  return out;
}

}  // namespace padshield
