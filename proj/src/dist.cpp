#include "padshield/dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <vector>

#include "padshield/errors.hpp"

namespace padshield {

namespace {

const char* family_name(DistFamily f) {
  switch (f) {
    case DistFamily::UniformContinuous: return "uniform";
    case DistFamily::UniformDiscrete: return "udiscrete";
    case DistFamily::Normal: return "normal";
    case DistFamily::Rayleigh: return "rayleigh";
    case DistFamily::PointMass: return "point";
  }
  return "?";
}

// %.17g round-trips doubles exactly; "inf" kept readable.
std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& tok) {
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-inf") return -std::numeric_limits<double>::infinity();
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(0, "bad number '" + tok + "'");
  }
  if (pos != tok.size()) throw ParseError(0, "bad number '" + tok + "'");
  return v;
}

}  // namespace

DistributionSpec DistributionSpec::point(double value) {
  return {DistFamily::PointMass, value, 0.0, {}, {}};
}

DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  return {DistFamily::UniformContinuous, lo, hi, {}, {}};
}

DistributionSpec DistributionSpec::uniform_discrete(double lo, double hi) {
  return {DistFamily::UniformDiscrete, lo, hi, {}, {}};
}

DistributionSpec DistributionSpec::normal(double mean, double stddev) {
  return {DistFamily::Normal, mean, stddev, {}, {}};
}

DistributionSpec DistributionSpec::rayleigh(double scale) {
  return {DistFamily::Rayleigh, scale, 0.0, {}, {}};
}

DistributionSpec DistributionSpec::clamped(std::optional<double> lo,
                                           std::optional<double> hi) const {
  DistributionSpec d = *this;
  d.clamp_min = lo;
  d.clamp_max = hi;
  return d;
}

void DistributionSpec::validate(const char* field) const {
  switch (family) {
    case DistFamily::UniformContinuous:
    case DistFamily::UniformDiscrete:
      if (a > b) throw ParamError(field, "uniform bounds require a <= b");
      break;
    case DistFamily::Normal:
      if (b < 0) throw ParamError(field, "normal stddev must be >= 0");
      break;
    case DistFamily::Rayleigh:
      if (!(a > 0)) throw ParamError(field, "rayleigh scale must be > 0");
      break;
    case DistFamily::PointMass:
      break;
  }
  if (clamp_min && clamp_max && *clamp_min > *clamp_max)
    throw ParamError(field, "clamp interval is empty");
}

double DistributionSpec::sample(Rng& rng) const {
  double v = 0.0;
  switch (family) {
    case DistFamily::PointMass:
      v = a;
      break;
    case DistFamily::UniformContinuous:
      v = rng.uniform(a, b);
      break;
    case DistFamily::UniformDiscrete: {
      const auto lo = static_cast<int64_t>(std::floor(a));
      const auto hi = static_cast<int64_t>(std::floor(b));
      v = static_cast<double>(rng.uniform_int(lo, hi));
      break;
    }
    case DistFamily::Normal:
      v = a + b * rng.normal();
      break;
    case DistFamily::Rayleigh:
      // Inverse CDF: scale * sqrt(-2 ln(1 - u)), u in [0, 1).
      v = a * std::sqrt(-2.0 * std::log1p(-rng.uniform()));
      break;
  }
  if (clamp_min) v = std::max(v, *clamp_min);
  if (clamp_max) v = std::min(v, *clamp_max);
  return v;
}

std::string DistributionSpec::format() const {
  std::string out = family_name(family);
  out += ':';
  out += format_double(a);
  if (family == DistFamily::UniformContinuous ||
      family == DistFamily::UniformDiscrete || family == DistFamily::Normal) {
    out += ':';
    out += format_double(b);
  }
  if (clamp_min || clamp_max) {
    out += ':';
    out += clamp_min ? format_double(*clamp_min) : "-";
    out += ':';
    out += clamp_max ? format_double(*clamp_max) : "-";
  }
  return out;
}

DistributionSpec DistributionSpec::parse(const std::string& text) {
  std::vector<std::string> tok;
  size_t start = 0;
  while (true) {
    size_t colon = text.find(':', start);
    if (colon == std::string::npos) {
      tok.push_back(text.substr(start));
      break;
    }
    tok.push_back(text.substr(start, colon - start));
    start = colon + 1;
  }
  if (tok.empty()) throw ParseError(0, "empty distribution");

  DistributionSpec d;
  size_t nparams = 0;
  if (tok[0] == "uniform") {
    d.family = DistFamily::UniformContinuous;
    nparams = 2;
  } else if (tok[0] == "udiscrete") {
    d.family = DistFamily::UniformDiscrete;
    nparams = 2;
  } else if (tok[0] == "normal") {
    d.family = DistFamily::Normal;
    nparams = 2;
  } else if (tok[0] == "rayleigh") {
    d.family = DistFamily::Rayleigh;
    nparams = 1;
  } else if (tok[0] == "point") {
    d.family = DistFamily::PointMass;
    nparams = 1;
  } else {
    throw ParseError(0, "unknown distribution family '" + tok[0] + "'");
  }

  const size_t n = tok.size() - 1;
  if (n != nparams && n != nparams + 2)
    throw ParseError(0, "wrong parameter count for '" + tok[0] + "'");

  d.a = parse_double(tok[1]);
  if (nparams == 2) d.b = parse_double(tok[2]);
  if (n == nparams + 2) {
    const std::string& lo = tok[1 + nparams];
    const std::string& hi = tok[2 + nparams];
    if (lo != "-") d.clamp_min = parse_double(lo);
    if (hi != "-") d.clamp_max = parse_double(hi);
  }
  d.validate();
  return d;
}

}  // namespace padshield
