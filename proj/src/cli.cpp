#include "padshield/cli.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "padshield/errors.hpp"
#include "padshield/metrics.hpp"
#include "padshield/simulator.hpp"

namespace padshield::cli {

namespace fs = std::filesystem;

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PADSHIELD_LOG");
    if (!env) return LogLevel::Error;
    const std::string v(env);
    if (v == "warn" || v == "1") return LogLevel::Warn;
    if (v == "info" || v == "2") return LogLevel::Info;
    if (v == "debug" || v == "3") return LogLevel::Debug;
    return LogLevel::Error;
  }();
  return level;
}

void log(LogLevel level, const std::string& message) {
  static std::mutex mu;
  if (level > log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(mu);
  std::fprintf(stderr, "padshield [%s] %s\n", names[static_cast<int>(level)],
               message.c_str());
}

namespace {

double parse_number(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParamError(key, "bad number '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  if (v != std::floor(v)) throw ParamError(key, "expected an integer");
  return static_cast<int>(v);
}

}  // namespace

void apply_param(DefenseSpec& spec, const std::string& key,
                 const std::string& value) {
  if (key == "defense") {
    if (value == "front")
      spec.defense = DefenseSpec::Defense::Front;
    else if (value == "regulator")
      spec.defense = DefenseSpec::Defense::Regulator;
    else if (value == "surakav")
      spec.defense = DefenseSpec::Defense::Surakav;
    else
      throw ParamError(key, "unknown defense '" + value + "'");
    return;
  }
  if (key == "variant") {
    if (value == "maybenot" || value == "machine")
      spec.variant = DefenseSpec::Variant::Machine;
    else if (value == "pipelined")
      spec.variant = DefenseSpec::Variant::Pipelined;
    else if (value == "reference" || value == "simulated")
      spec.variant = DefenseSpec::Variant::Reference;
    else
      throw ParamError(key, "unknown variant '" + value + "'");
    return;
  }

  // FRONT
  if (key == "N" && spec.defense == DefenseSpec::Defense::Front) {
    spec.front.padding_budget = parse_int(key, value);
    return;
  }
  if (key == "W_min") {
    spec.front.window_min_s = parse_number(key, value);
    return;
  }
  if (key == "W_max") {
    spec.front.window_max_s = parse_number(key, value);
    return;
  }
  if (key == "psi") {
    spec.front.padding_states = parse_int(key, value);
    return;
  }
  if (key == "pipelines") {
    spec.pipelines = parse_int(key, value);
    return;
  }
  if (key == "states_per_pipeline") {
    spec.states_per_pipeline = parse_int(key, value);
    return;
  }

  // RegulaTor
  if (key == "R") {
    spec.regulator.initial_rate = parse_number(key, value);
    return;
  }
  if (key == "D") {
    spec.regulator.decay = parse_number(key, value);
    return;
  }
  if (key == "T") {
    spec.regulator.surge_threshold = parse_number(key, value);
    return;
  }
  if (key == "N") {  // regulator budget when not FRONT
    spec.regulator.padding_budget = parse_int(key, value);
    return;
  }
  if (key == "U") {
    spec.regulator.upload_ratio = parse_number(key, value);
    return;
  }
  if (key == "C") {
    spec.regulator.max_queue_wait_s = parse_number(key, value);
    return;
  }
  if (key == "omega") {
    spec.regulator.cells_per_state = parse_int(key, value);
    return;
  }
  if (key == "min_rate") {
    spec.regulator_min_rate = parse_number(key, value);
    return;
  }

  // Surakav
  if (key == "delta") {
    spec.surakav.tolerance = parse_number(key, value);
    return;
  }
  if (key == "q") {
    spec.surakav.skip_prob = parse_number(key, value);
    return;
  }
  if (key == "rho_ms") {
    spec.surakav.gap_max_ms = parse_number(key, value);
    return;
  }
  if (key == "max_bursts") {
    spec.surakav.max_bursts = parse_int(key, value);
    return;
  }
  if (key == "timeout_us") {
    spec.surakav.send_timeout_us = parse_number(key, value);
    return;
  }
  throw ParamError(key, "unknown parameter");
}

DefenseSpec load_preset(const std::string& name_or_path,
                        const std::vector<fs::path>& search_dirs) {
  fs::path path = name_or_path;
  if (!fs::exists(path)) {
    for (const fs::path& dir : search_dirs) {
      const fs::path candidate = dir / (name_or_path + ".preset");
      if (fs::exists(candidate)) {
        path = candidate;
        break;
      }
    }
  }
  std::ifstream in(path);
  if (!in) throw ParamError("preset", "cannot find preset '" + name_or_path + "'");

  DefenseSpec spec;
  std::string line;
  size_t lineno = 0;
  // Two passes so "defense" takes effect before ambiguous keys like N.
  std::vector<std::pair<std::string, std::string>> pairs;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    std::string key, value;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::istringstream check(line);
      std::string rest;
      if (check >> rest)
        throw ParseError(lineno, "expected 'key = value'");
      continue;
    }
    auto trim = [](std::string s) {
      const auto begin = s.find_first_not_of(" \t\r");
      const auto end = s.find_last_not_of(" \t\r");
      return begin == std::string::npos ? std::string()
                                        : s.substr(begin, end - begin + 1);
    };
    key = trim(line.substr(0, eq));
    value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError(lineno, "expected 'key = value'");
    pairs.emplace_back(key, value);
  }
  for (const auto& [key, value] : pairs)
    if (key == "defense") apply_param(spec, key, value);
  for (const auto& [key, value] : pairs)
    if (key != "defense") apply_param(spec, key, value);
  return spec;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(0, "cannot write " + path.string());
  out << content;
}

std::vector<fs::path> write_machine_pair(const fs::path& prefix,
                                         const Machine& client,
                                         const Machine& relay) {
  fs::path client_path = prefix;
  client_path += ".client.mbn1";
  fs::path relay_path = prefix;
  relay_path += ".relay.mbn1";
  write_file(client_path, serialize(client));
  write_file(relay_path, serialize(relay));
  return {client_path, relay_path};
}

}  // namespace

std::vector<fs::path> run_generate(const GenerateOptions& opt) {
  const DefenseSpec& spec = opt.spec;
  if (spec.variant == DefenseSpec::Variant::Reference)
    throw ParamError("variant",
                     "reference variants have no machines; use defend --reference");

  switch (spec.defense) {
    case DefenseSpec::Defense::Front: {
      Machine machine =
          spec.variant == DefenseSpec::Variant::Pipelined
              ? front::gen_pipelined_front(spec.front, spec.pipelines,
                                           spec.states_per_pipeline)
              : front::gen_maybenot_front(spec.front);
      write_file(opt.out, serialize(machine));
      return {opt.out};
    }
    case DefenseSpec::Defense::Regulator: {
      Machine relay =
          regulator::gen_regulator_relay(spec.regulator, spec.regulator_min_rate);
      Machine client = regulator::gen_regulator_client(spec.regulator);
      return write_machine_pair(opt.out, client, relay);
    }
    case DefenseSpec::Defense::Surakav: {
      std::vector<fs::path> written;
      auto emit = [&](const fs::path& bursts, const fs::path& prefix) {
        surakav::BurstSequence ref = surakav::load_burst_sequence(bursts);
        if (opt.repeat > 1) ref = surakav::tile_burst_sequence(ref, opt.repeat);
        surakav::MachinePair pair = surakav::gen_surakav_machines(ref, spec.surakav);
        if (pair.truncated)
          log(LogLevel::Warn, "reference " + bursts.string() + " truncated to " +
                                  std::to_string(spec.surakav.max_bursts) +
                                  " bursts");
        auto paths = write_machine_pair(prefix, pair.client, pair.relay);
        written.insert(written.end(), paths.begin(), paths.end());
      };
      if (!opt.references_dir.empty()) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(opt.references_dir))
          if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
          throw ParamError("references", "no reference files in " +
                                             opt.references_dir.string());
        for (const fs::path& file : files) {
          fs::path rel = fs::relative(file, opt.references_dir);
          rel.replace_extension();
          emit(file, opt.out / rel);
        }
      } else if (!opt.reference.empty()) {
        emit(opt.reference, opt.out);
      } else {
        throw ParamError("reference", "surakav needs --reference or --references-dir");
      }
      return written;
    }
  }
  throw ParamError("defense", "unreachable");
}

std::vector<std::string> list_dataset(const fs::path& root) {
  if (!fs::is_directory(root))
    throw ParamError("dataset", "not a directory: " + root.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    fs::path rel = fs::relative(entry.path(), root);
    rel.replace_extension();
    ids.push_back(rel.generic_string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace {

// Dataset files are listed by id (extension-free relative path); this finds
// the actual file again.
fs::path resolve_dataset_file(const fs::path& root, const std::string& id) {
  const fs::path base = root / fs::path(id);
  if (fs::exists(base)) return base;
  const fs::path dir = base.parent_path();
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      fs::path candidate = entry.path();
      fs::path stem = candidate;
      stem.replace_extension();
      if (stem == base) return candidate;
    }
  }
  throw ParseError(0, "no trace file for id '" + id + "'");
}

uint64_t trace_seed(uint64_t seed, const std::string& id) {
  uint64_t x = seed ^ Rng::hash_string(id.c_str());
  return Rng::splitmix64(x);
}

// Runs fn(index) over [0, count) on a small worker pool; exceptions are
// collected as failures.
size_t parallel_for(size_t count, int workers,
                    const std::function<void(size_t)>& fn) {
  if (workers <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    workers = hw == 0 ? 1 : static_cast<int>(hw);
  }
  workers = std::min<int>(workers, static_cast<int>(count) == 0 ? 1 : count);
  std::atomic<size_t> next{0};
  std::atomic<size_t> failures{0};
  auto body = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (const std::exception& e) {
        ++failures;
        log(LogLevel::Error, e.what());
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (std::thread& t : pool) t.join();
  }
  return failures.load();
}

Trace defend_one_reference(const Trace& base, const DefenseSpec& spec,
                           const fs::path& references_dir, const std::string& id,
                           Rng& rng) {
  switch (spec.defense) {
    case DefenseSpec::Defense::Front:
      return front::front_reference(base, spec.front, spec.front, rng);
    case DefenseSpec::Defense::Regulator:
      return regulator::regulator_reference(base, spec.regulator, rng);
    case DefenseSpec::Defense::Surakav: {
      if (references_dir.empty())
        throw ParamError("references",
                         "surakav reference mode needs --references-dir");
      fs::path bursts = references_dir / fs::path(id + ".bursts");
      if (!fs::exists(bursts))
        bursts = resolve_dataset_file(references_dir, id);
      return surakav::surakav_reference(base, surakav::load_burst_sequence(bursts),
                                        spec.surakav, rng);
    }
  }
  throw ParamError("defense", "unreachable");
}

}  // namespace

BatchResult run_defend(const DefendOptions& opt) {
  const std::vector<std::string> ids = list_dataset(opt.dataset_dir);
  if (ids.empty()) throw ParamError("dataset", "no traces in " +
                                                   opt.dataset_dir.string());
  if (opt.out_dir.empty()) throw ParamError("out", "output directory required");
  fs::create_directories(opt.out_dir);

  // Shared machines are loaded once; per-trace machines (Surakav pairs) are
  // looked up inside the worker.
  std::vector<Machine> shared_client, shared_relay;
  auto load_into = [](const std::vector<fs::path>& files,
                      std::vector<Machine>& dest) {
    for (const fs::path& file : files) {
      std::ifstream in(file, std::ios::binary);
      if (!in) throw ParseError(0, "cannot open " + file.string());
      std::ostringstream buf;
      buf << in.rdbuf();
      dest.push_back(deserialize(buf.str()));
    }
  };
  load_into(opt.machine_files, shared_client);
  load_into(opt.machine_files, shared_relay);
  load_into(opt.client_machine_files, shared_client);
  load_into(opt.relay_machine_files, shared_relay);

  const bool machine_mode = !opt.reference.has_value();
  if (machine_mode && shared_client.empty() && shared_relay.empty() &&
      opt.machines_dir.empty())
    throw ParamError("machines", "no machines given (and no --reference mode)");

  const size_t failures = parallel_for(
      ids.size(), opt.workers, [&](size_t i) {
        const std::string& id = ids[i];
        Trace base = load_trace(resolve_dataset_file(opt.dataset_dir, id));
        base.id = id;
        Trace defended;
        if (machine_mode) {
          SimConfig cfg;
          cfg.client_machines = shared_client;
          cfg.relay_machines = shared_relay;
          if (!opt.machines_dir.empty()) {
            std::ifstream c(opt.machines_dir / (id + ".client.mbn1"),
                            std::ios::binary);
            std::ifstream r(opt.machines_dir / (id + ".relay.mbn1"),
                            std::ios::binary);
            if (!c || !r)
              throw ParseError(0, "no machine pair for id '" + id + "'");
            std::ostringstream cb, rb;
            cb << c.rdbuf();
            rb << r.rdbuf();
            cfg.client_machines.push_back(deserialize(cb.str()));
            cfg.relay_machines.push_back(deserialize(rb.str()));
          }
          cfg.one_way_delay_us = opt.delay_us;
          cfg.max_events = opt.max_events;
          cfg.seed = trace_seed(opt.seed, id);
          defended = simulate(base, cfg);
        } else {
          Rng rng(trace_seed(opt.seed, id));
          defended = defend_one_reference(base, *opt.reference,
                                          opt.references_dir, id, rng);
        }
        defended = strip_trailing_padding(defended);
        const fs::path out_path = opt.out_dir / fs::path(id + ".trace");
        if (out_path.has_parent_path())
          fs::create_directories(out_path.parent_path());
        save_trace(defended, out_path, TraceFormat::Defended);
        log(LogLevel::Info, "defended " + id);
      });

  return {ids.size() - failures, failures};
}

namespace {

std::string csv_number(std::optional<double> v) {
  if (!v) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", *v);
  return buf;
}

struct PairRow {
  std::string id;
  bool ok = false;
  // [window][direction]: 0 = upload, 1 = download
  std::vector<std::array<std::optional<double>, 2>> pearson;
  std::vector<std::array<double, 2>> lcss;
  metrics::OverheadReport overhead_a, overhead_b;
};

}  // namespace

BatchResult run_evaluate(const EvaluateOptions& opt) {
  for (uint32_t w : opt.windows_ms)
    if (w == 0) throw ParamError("windows", "window must be positive");
  if (opt.out_dir.empty()) throw ParamError("out", "output directory required");

  const std::vector<std::string> ids_a = list_dataset(opt.set_a);
  if (ids_a.empty())
    throw ParamError("setA", "no traces in " + opt.set_a.string());
  std::vector<std::string> ids_b = list_dataset(opt.set_b);
  std::sort(ids_b.begin(), ids_b.end());

  std::vector<std::string> matched;
  for (const std::string& id : ids_a) {
    if (std::binary_search(ids_b.begin(), ids_b.end(), id))
      matched.push_back(id);
    else
      log(LogLevel::Warn, "id '" + id + "' missing from setB; row omitted");
  }

  fs::create_directories(opt.out_dir);
  const bool with_latency = !opt.base_dir.empty();

  std::vector<PairRow> rows(matched.size());
  const size_t failures = parallel_for(
      matched.size(), opt.workers, [&](size_t i) {
        PairRow& row = rows[i];
        row.id = matched[i];
        const Trace a = load_trace(resolve_dataset_file(opt.set_a, row.id));
        const Trace b = load_trace(resolve_dataset_file(opt.set_b, row.id));
        for (uint32_t window : opt.windows_ms) {
          const auto sa = metrics::aggregate(a, window);
          const auto sb = metrics::aggregate(b, window);
          std::array<std::optional<double>, 2> corr;
          std::array<double, 2> common;
          corr[0] = metrics::pearson(sa.upload, sb.upload);
          corr[1] = metrics::pearson(sa.download, sb.download);
          common[0] = metrics::lcss(sa.upload, sb.upload);
          common[1] = metrics::lcss(sa.download, sb.download);
          row.pearson.push_back(corr);
          row.lcss.push_back(common);
        }
        row.overhead_a = metrics::bandwidth_overhead(a);
        row.overhead_b = metrics::bandwidth_overhead(b);
        if (with_latency) {
          const Trace base = load_trace(resolve_dataset_file(opt.base_dir, row.id));
          row.overhead_a.latency_pct = metrics::latency_overhead(a, base);
          row.overhead_b.latency_pct = metrics::latency_overhead(b, base);
        }
        row.ok = true;
      });

  // pairwise.csv
  {
    std::ofstream out(opt.out_dir / "pairwise.csv", std::ios::binary);
    out << "id,direction,window_ms,pearson,lcss\n";
    for (const PairRow& row : rows) {
      if (!row.ok) continue;
      for (size_t w = 0; w < opt.windows_ms.size(); ++w) {
        for (int d = 0; d < 2; ++d) {
          out << row.id << ',' << (d == 0 ? "upload" : "download") << ','
              << opt.windows_ms[w] << ',' << csv_number(row.pearson[w][d]) << ','
              << csv_number(row.lcss[w][d]) << '\n';
        }
      }
    }
  }

  // overhead.csv
  {
    std::ofstream out(opt.out_dir / "overhead.csv", std::ios::binary);
    out << "set,id,send_bw_pct,recv_bw_pct,overall_bw_pct,latency_pct\n";
    for (const PairRow& row : rows) {
      if (!row.ok) continue;
      const metrics::OverheadReport* reports[2] = {&row.overhead_a,
                                                   &row.overhead_b};
      for (int s = 0; s < 2; ++s) {
        out << (s == 0 ? 'A' : 'B') << ',' << row.id << ','
            << csv_number(reports[s]->send_bw_pct) << ','
            << csv_number(reports[s]->recv_bw_pct) << ','
            << csv_number(reports[s]->overall_bw_pct) << ','
            << csv_number(reports[s]->latency_pct) << '\n';
      }
    }
  }

  // summary.csv: similarity metrics per direction and window, overheads per set.
  {
    std::ofstream out(opt.out_dir / "summary.csv", std::ios::binary);
    out << "metric,scope,window_ms,count,mean,median,q1,q3,lo_whisker,hi_whisker\n";
    auto emit = [&](const std::string& metric, const std::string& scope,
                    const std::string& window, std::vector<double> values) {
      const metrics::SummaryStats s = metrics::summarize(std::move(values));
      out << metric << ',' << scope << ',' << window << ',' << s.count << ','
          << csv_number(s.mean) << ',' << csv_number(s.median) << ','
          << csv_number(s.q1) << ',' << csv_number(s.q3) << ','
          << csv_number(s.lo_whisker) << ',' << csv_number(s.hi_whisker) << '\n';
    };
    for (size_t w = 0; w < opt.windows_ms.size(); ++w) {
      for (int d = 0; d < 2; ++d) {
        const std::string scope = d == 0 ? "upload" : "download";
        std::vector<double> corr, common;
        for (const PairRow& row : rows) {
          if (!row.ok) continue;
          if (row.pearson[w][d]) corr.push_back(*row.pearson[w][d]);
          common.push_back(row.lcss[w][d]);
        }
        emit("pearson", scope, std::to_string(opt.windows_ms[w]), std::move(corr));
        emit("lcss", scope, std::to_string(opt.windows_ms[w]), std::move(common));
      }
    }
    for (int s = 0; s < 2; ++s) {
      const std::string scope = s == 0 ? "setA" : "setB";
      std::vector<double> send, recv, overall, latency;
      for (const PairRow& row : rows) {
        if (!row.ok) continue;
        const metrics::OverheadReport& r = s == 0 ? row.overhead_a : row.overhead_b;
        if (r.send_bw_pct) send.push_back(*r.send_bw_pct);
        if (r.recv_bw_pct) recv.push_back(*r.recv_bw_pct);
        overall.push_back(r.overall_bw_pct);
        if (r.latency_pct) latency.push_back(*r.latency_pct);
      }
      emit("send_bw", scope, "", std::move(send));
      emit("recv_bw", scope, "", std::move(recv));
      emit("overall_bw", scope, "", std::move(overall));
      emit("latency", scope, "", std::move(latency));
    }
  }

  return {matched.size() - failures, failures};
}

}  // namespace padshield::cli
