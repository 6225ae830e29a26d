// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Everything here is deterministic under the fixed seeds below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "padshield/cli.hpp"
#include "padshield/front.hpp"
#include "padshield/metrics.hpp"
#include "padshield/regulator.hpp"
#include "padshield/simulator.hpp"
#include "padshield/surakav.hpp"
#include "support.hpp"

using namespace padshield;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& description,
               const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  const auto start = std::chrono::steady_clock::now();
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::printf("[%s] criterion %2d (%5.1fs): %s%s%s\n", ok ? "PASS" : "FAIL",
              number, secs, description.c_str(), detail.empty() ? "" : " -- ",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

// ---------------------------------------------------------------------------
// 1. Framework semantics on randomly generated machines.

Machine random_machine(Rng& rng) {
  const int nstates = static_cast<int>(rng.uniform_int(1, 6));
  Machine m;
  for (int i = 0; i < nstates; ++i) {
    StateSpec st;
    switch (rng.uniform_int(0, 2)) {
      case 0:
        st.action = StateActionKind::SendPadding;
        st.action_dist = DistributionSpec::uniform(512, 512 * rng.uniform_int(1, 4));
        break;
      case 1:
        st.action = StateActionKind::BlockOutgoing;
        st.action_dist = DistributionSpec::point(rng.uniform(0, 5000));
        break;
      default:
        st.action = StateActionKind::NoOp;
        break;
    }
    st.timeout_dist = rng.uniform() < 0.5
                          ? DistributionSpec::point(rng.uniform(0, 2000))
                          : DistributionSpec::normal(1000, 300).clamped(0, 2000);
    st.limit_dist = DistributionSpec::uniform_discrete(1, rng.uniform_int(1, 8));
    st.bypass = rng.uniform() < 0.5;
    st.replace = rng.uniform() < 0.5;
    m.states.push_back(std::move(st));
  }
  for (int i = 0; i < nstates; ++i) {
    for (int e = 0; e < kEventKindCount; ++e) {
      if (rng.uniform() < 0.4) continue;
      // Probabilities in thousandths so the serialized form is exact.
      double remaining = 1000;
      const int edges = static_cast<int>(rng.uniform_int(1, 3));
      for (int k = 0; k < edges && remaining > 0; ++k) {
        const double p = std::floor(rng.uniform(1, remaining + 1));
        remaining -= p;
        const int64_t pick = rng.uniform_int(0, nstates);
        const size_t target =
            pick == nstates ? kStateEnd : static_cast<size_t>(pick);
        m.states[i].on(static_cast<EventKind>(e), target, p / 1000.0);
      }
    }
  }
  m.validate();
  return m;
}

std::vector<EventKind> random_script(Rng& rng, size_t length) {
  std::vector<EventKind> script;
  script.reserve(length);
  for (size_t i = 0; i < length; ++i)
    script.push_back(static_cast<EventKind>(rng.uniform_int(0, 3)));
  return script;
}

bool check_framework_semantics(std::string& detail) {
  Rng master(101);
  for (int trial = 0; trial < 1000; ++trial) {
    Rng gen = master.split(trial);
    Machine m = random_machine(gen);

    // Probability conservation, re-checked directly.
    for (const StateSpec& st : m.states) {
      for (const auto& [event, vec] : st.transitions) {
        double sum = 0;
        for (const auto& [target, p] : vec) sum += p;
        if (sum > 1.0 + 1e-12) {
          detail = "probability sum above one";
          return false;
        }
      }
    }

    // Serialization round-trip.
    if (deserialize(serialize(m)) != m) {
      detail = "serialization round-trip mismatch in trial " +
               std::to_string(trial);
      return false;
    }

    const auto script = random_script(gen, 200);
    std::string log_a, log_b;
    for (int run = 0; run < 2; ++run) {
      MachineRuntime rt(m, Rng(5000 + trial));
      std::string& log = run == 0 ? log_a : log_b;
      bool was_terminated = false;
      for (EventKind kind : script) {
        auto action = rt.process({kind, 0});
        if (rt.self_transition_count() > rt.sampled_limit()) {
          detail = "self-transition count exceeded the sampled limit";
          return false;
        }
        if (was_terminated && action) {
          detail = "terminated machine produced an action";
          return false;
        }
        was_terminated = rt.terminated();
        if (action) log += to_string(*action) + "\n";
      }
    }
    if (log_a != log_b) {
      detail = "same seed, different action logs";
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

bool check_front_budget_law(std::string& detail) {
  front::FrontParams p;
  p.padding_budget = 1500;
  p.padding_states = 30;
  p.window_max_s = 14;
  Machine m = front::gen_maybenot_front(p);
  Rng seeds(202);
  double total = 0;
  const int runs = 10'000;
  for (int r = 0; r < runs; ++r) {
    MachineRuntime rt(m, seeds.split(r));
    const size_t count =
        testsupport::run_padding_loop(rt, EventKind::NonPaddingSent);
    if (count < 30 || count > 1500) {
      detail = "padding count " + std::to_string(count) + " outside [30, 1500]";
      return false;
    }
    total += static_cast<double>(count);
  }
  const double mean = total / runs;
  detail = "mean " + std::to_string(mean) + " vs 765";
  return std::abs(mean - 765.0) <= 0.02 * 765.0;
}

bool check_rayleigh_fidelity(std::string& detail) {
  Rng rng(303);
  const double window = 5.0;
  auto times = front::sample_padding_times(100'000, window, rng);
  std::sort(times.begin(), times.end());
  double ks = 0;
  const double n = static_cast<double>(times.size());
  for (size_t i = 0; i < times.size(); ++i) {
    const double cdf =
        1.0 - std::exp(-times[i] * times[i] / (2.0 * window * window));
    ks = std::max(ks, std::abs(cdf - (i + 1) / n));
    ks = std::max(ks, std::abs(cdf - i / n));
  }
  detail = "KS statistic " + std::to_string(ks);
  return ks < 0.01;
}

// ---------------------------------------------------------------------------

bool check_regulator_boot(std::string& detail) {
  regulator::RegulatorParams p;
  p.initial_rate = 324;
  p.decay = 0.86;
  p.surge_threshold = 3.75;
  p.cells_per_state = 20;
  Machine m = regulator::gen_regulator_relay(p);
  const size_t send0 = 11;
  Rng master(404);
  for (int run = 0; run < 100; ++run) {
    Rng host = master.split(run);
    MachineRuntime rt(m, master.split(10'000 + run));
    size_t non_padding = 1;  // the trigger
    rt.process({EventKind::NonPaddingSent, 0});
    rt.process({EventKind::BlockingBegin, 0});
    size_t guard = 0;
    while (rt.current_state() != send0 && ++guard < 100'000) {
      rt.process({EventKind::PaddingSent, 0});
      if (rt.current_state() == send0) break;
      if (host.uniform() < 0.6) {
        rt.process({EventKind::NonPaddingSent, 0});
        ++non_padding;
      }
    }
    if (rt.current_state() != send0 || non_padding != 10) {
      detail = "run " + std::to_string(run) + ": " +
               std::to_string(non_padding) + " non-padding cells before SEND_0";
      return false;
    }
  }
  return true;
}

bool check_regulator_client_ratio(std::string& detail) {
  regulator::RegulatorParams p;
  p.upload_ratio = 3.95;
  Machine m = regulator::gen_regulator_client(p);
  MachineRuntime rt(m, Rng(505));
  Rng mix(506);
  size_t sends = 0;
  const size_t recvs = 100'000;
  for (size_t i = 0; i < recvs; ++i) {
    auto action = rt.process({mix.uniform() < 0.5 ? EventKind::PaddingRecv
                                                  : EventKind::NonPaddingRecv,
                              0});
    if (action && action->kind == DefenseAction::Kind::SchedulePadding) {
      ++sends;
      rt.process({EventKind::PaddingSent, 0});
    }
  }
  const double ratio = static_cast<double>(sends) / recvs;
  const double expected = 1.0 / 3.95;
  detail = "ratio " + std::to_string(ratio) + " vs " + std::to_string(expected);
  return std::abs(ratio - expected) <= 0.02 * expected;
}

// ---------------------------------------------------------------------------

bool check_surakav_replay(std::string& detail) {
  Rng master(606);
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng = master.split(trial);
    surakav::BurstSequence ref;
    const int bursts = static_cast<int>(rng.uniform_int(3, 100));
    uint64_t out_capacity = 0, in_capacity = 0;
    for (int i = 0; i < bursts; ++i) {
      surakav::BurstPair pair{static_cast<uint32_t>(rng.uniform_int(1, 20)),
                              static_cast<uint32_t>(rng.uniform_int(1, 20))};
      ref.push_back(pair);
      out_capacity += pair.outgoing;
      in_capacity += pair.incoming;
    }

    // A base the replay can always carry: per-direction counts within the
    // reference capacity, and every cell queued at its endpoint before the
    // first padding fire (client blocking starts at 0, relay blocking when
    // the trigger lands at 0.01; the earliest fire is 5us later), so
    // replacement strictly precedes padding.
    Trace base;
    base.events.push_back({0.0, Direction::Outgoing, false, 512});
    const int extra_out = static_cast<int>(
        rng.uniform_int(0, static_cast<int64_t>(out_capacity) - 1));
    const int extra_in = static_cast<int>(
        rng.uniform_int(1, static_cast<int64_t>(in_capacity)));
    std::vector<TraceEvent> rest;
    for (int i = 0; i < extra_out; ++i)
      rest.push_back({rng.uniform(1e-7, 4.9e-6), Direction::Outgoing, false, 512});
    for (int i = 0; i < extra_in; ++i)
      rest.push_back({0.02 + rng.uniform(1e-7, 4.9e-6), Direction::Incoming,
                      false, 512});
    std::sort(rest.begin(), rest.end(),
              [](const TraceEvent& a, const TraceEvent& b) {
                return a.time_s < b.time_s;
              });
    base.events.insert(base.events.end(), rest.begin(), rest.end());

    auto pair = surakav::gen_surakav_machines(ref, surakav::SurakavParams{});
    SimConfig cfg;
    cfg.client_machines = {pair.client};
    cfg.relay_machines = {pair.relay};
    cfg.seed = 700 + trial;
    Trace defended = simulate(base, cfg);
    if (surakav::extract_bursts(defended) != ref) {
      detail = "trial " + std::to_string(trial) + " diverged from the reference";
      return false;
    }
  }
  return true;
}

bool check_surakav_thresholds(std::string& detail) {
  for (uint64_t b = 1; b <= 1000; ++b) {
    struct Tol {
      double value;
      uint64_t num;  // tolerance as num/10
    };
    for (const Tol& tol : {Tol{0.4, 4}, Tol{0.6, 6}}) {
      const auto [lo, hi] = surakav::burst_thresholds(b, tol.value);
      const uint64_t lo_oracle = (10 - tol.num) * b / 10;  // exact rational floor
      const uint64_t hi_oracle = (10 + tol.num) * b / 10;
      if (lo != lo_oracle || hi != hi_oracle) {
        detail = "b=" + std::to_string(b) + " got (" + std::to_string(lo) + "," +
                 std::to_string(hi) + ") want (" + std::to_string(lo_oracle) +
                 "," + std::to_string(hi_oracle) + ")";
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

bool check_metric_oracles(std::string& detail) {
  Rng rng(707);

  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = static_cast<size_t>(rng.uniform_int(2, 200));
    std::vector<uint64_t> a(n), b(static_cast<size_t>(rng.uniform_int(2, 200)));
    for (auto& v : a) v = rng.uniform_int(0, 10'000);
    for (auto& v : b) v = rng.uniform_int(0, 10'000);

    // Direct-formula oracle in extended precision over the padded series.
    const size_t len = std::max(a.size(), b.size());
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < len; ++i) {
      const long double x = i < a.size() ? a[i] : 0;
      const long double y = i < b.size() ? b[i] : 0;
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
    const long double nl = static_cast<long double>(len);
    const long double vx = nl * sxx - sx * sx;
    const long double vy = nl * syy - sy * sy;
    auto got = metrics::pearson(a, b);
    if (vx == 0 || vy == 0) {
      if (got) {
        detail = "correlation defined for a constant series";
        return false;
      }
      continue;
    }
    const long double want = (nl * sxy - sx * sy) / std::sqrt(vx * vy);
    if (!got || std::abs(*got - static_cast<double>(want)) > 1e-12) {
      detail = "pearson mismatch in trial " + std::to_string(trial);
      return false;
    }
  }

  // LCSS against memoized-recursion brute force on short series.
  struct BruteForce {
    const std::vector<uint64_t>& a;
    const std::vector<uint64_t>& b;
    std::map<std::pair<size_t, size_t>, size_t> memo;
    size_t lcs(size_t i, size_t j) {
      if (i == a.size() || j == b.size()) return 0;
      const auto key = std::make_pair(i, j);
      if (auto it = memo.find(key); it != memo.end()) return it->second;
      size_t best;
      if (a[i] == b[j])
        best = 1 + lcs(i + 1, j + 1);
      else
        best = std::max(lcs(i + 1, j), lcs(i, j + 1));
      memo[key] = best;
      return best;
    }
  };
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<uint64_t> a(static_cast<size_t>(rng.uniform_int(1, 12)));
    std::vector<uint64_t> b(static_cast<size_t>(rng.uniform_int(1, 12)));
    for (auto& v : a) v = rng.uniform_int(0, 3);
    for (auto& v : b) v = rng.uniform_int(0, 3);
    BruteForce oracle{a, b, {}};
    const double want = static_cast<double>(oracle.lcs(0, 0)) /
                        static_cast<double>(std::min(a.size(), b.size()));
    if (metrics::lcss(a, b) != want) {
      detail = "lcss mismatch in trial " + std::to_string(trial);
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

std::vector<Trace> synthetic_set(size_t count, uint64_t seed) {
  std::vector<Trace> set;
  set.reserve(count);
  for (size_t i = 0; i < count; ++i)
    set.push_back(testsupport::synthetic_trace(seed + i));
  return set;
}

bool check_zero_latency(std::string& detail) {
  auto spec = cli::load_preset("ft1-pipelined",
                               {fs::path(PADSHIELD_PRESETS_DIR)});
  Machine m = front::gen_pipelined_front(spec.front, spec.pipelines,
                                         spec.states_per_pipeline);
  SimConfig cfg;
  cfg.client_machines = {m};
  cfg.relay_machines = {m};
  const auto bases = synthetic_set(1000, 900'000);
  for (size_t i = 0; i < bases.size(); ++i) {
    cfg.seed = 808 + i;
    Trace defended = simulate(bases[i], cfg);
    const double latency = metrics::latency_overhead(defended, bases[i]);
    if (latency != 0.0) {
      detail = "trace " + std::to_string(i) + " latency " +
               std::to_string(latency) + "%";
      return false;
    }
  }
  return true;
}

bool check_overhead_asymmetry(std::string& detail) {
  auto spec = cli::load_preset("ft1-maybenot",
                               {fs::path(PADSHIELD_PRESETS_DIR)});
  Machine m = front::gen_maybenot_front(spec.front);
  SimConfig cfg;
  cfg.client_machines = {m};
  cfg.relay_machines = {m};
  const auto bases = synthetic_set(400, 910'000);
  double send_sum = 0, recv_sum = 0;
  size_t counted = 0;
  for (size_t i = 0; i < bases.size(); ++i) {
    cfg.seed = 909 + i;
    Trace defended = strip_trailing_padding(simulate(bases[i], cfg));
    auto report = metrics::bandwidth_overhead(defended);
    if (!report.send_bw_pct || !report.recv_bw_pct) continue;
    send_sum += *report.send_bw_pct;
    recv_sum += *report.recv_bw_pct;
    ++counted;
  }
  const double send = send_sum / counted;
  const double recv = recv_sum / counted;
  detail = "send " + std::to_string(send) + "% vs recv " + std::to_string(recv) +
           "% over " + std::to_string(counted) + " traces";
  return counted == bases.size() && send > 5.0 * recv;
}

bool check_end_to_end_determinism(std::string& detail) {
  testsupport::TempDir dir("acceptance-determinism");
  const fs::path base_dir = dir.path() / "base";
  fs::create_directories(base_dir);
  const auto bases = synthetic_set(1000, 920'000);
  for (size_t i = 0; i < bases.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "site-%04zu.trace", i);
    save_trace(bases[i], base_dir / name, TraceFormat::Base);
  }

  cli::GenerateOptions gen;
  gen.spec = cli::load_preset("ft1-maybenot", {fs::path(PADSHIELD_PRESETS_DIR)});
  gen.out = dir.path() / "ft1.mbn1";
  cli::run_generate(gen);

  cli::DefendOptions defend;
  defend.dataset_dir = base_dir;
  defend.machine_files = {gen.out};
  defend.seed = 424242;
  defend.workers = 4;

  const auto start = std::chrono::steady_clock::now();
  defend.out_dir = dir.path() / "run1";
  auto r1 = cli::run_defend(defend);
  defend.out_dir = dir.path() / "run2";
  auto r2 = cli::run_defend(defend);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  if (r1.failed || r2.failed) {
    detail = "defend reported failures";
    return false;
  }
  for (size_t i = 0; i < bases.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "site-%04zu.trace", i);
    const std::string a = testsupport::slurp(dir.path() / "run1" / name);
    const std::string b = testsupport::slurp(dir.path() / "run2" / name);
    if (a.empty() || a != b) {
      detail = std::string("output mismatch for ") + name;
      return false;
    }
  }
  detail = "two full runs in " + std::to_string(secs) + "s";
  return secs < 300.0;
}

}  // namespace

int main() {
  criterion(1, "framework semantics on 1000 random machines",
            [](std::string& d) {
              const auto start = std::chrono::steady_clock::now();
              if (!check_framework_semantics(d)) return false;
              const double secs = std::chrono::duration<double>(
                                      std::chrono::steady_clock::now() - start)
                                      .count();
              return secs < 30.0;
            });
  criterion(2, "FRONT budget law, 10k downloads of the lightweight machine",
            [](std::string& d) {
              const auto start = std::chrono::steady_clock::now();
              if (!check_front_budget_law(d)) return false;
              const double secs = std::chrono::duration<double>(
                                      std::chrono::steady_clock::now() - start)
                                      .count();
              return secs < 120.0;
            });
  criterion(3, "reference FRONT Rayleigh fidelity (KS < 0.01)",
            check_rayleigh_fidelity);
  criterion(4, "RegulaTor boot: exactly 10 non-padding cells before SEND_0",
            check_regulator_boot);
  criterion(5, "RegulaTor client ratio 1/3.95 within 2%",
            check_regulator_client_ratio);
  criterion(6, "Surakav exact replay on 100 random references",
            check_surakav_replay);
  criterion(7, "Surakav thresholds vs rational-arithmetic oracle",
            check_surakav_thresholds);
  criterion(8, "metric oracles: Pearson 1e-12, LCSS exact",
            check_metric_oracles);
  criterion(9, "zero latency overhead for padding-only pipelines on 1000 traces",
            check_zero_latency);
  criterion(10, "send overhead exceeds 5x receive overhead on 15:1 traffic",
            check_overhead_asymmetry);
  criterion(11, "byte-identical defend runs under a fixed seed, within budget",
            check_end_to_end_determinism);

  if (g_failures == 0) {
    std::printf("acceptance: all 11 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
