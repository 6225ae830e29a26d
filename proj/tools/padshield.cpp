// padshield: generate padding machines, defend trace datasets, evaluate
// similarity and overhead.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "padshield/cli.hpp"
#include "padshield/errors.hpp"

namespace fs = std::filesystem;
using namespace padshield;

namespace {

std::vector<fs::path> preset_search_dirs(const std::string& extra,
                                         const char* argv0) {
  std::vector<fs::path> dirs;
  if (!extra.empty()) dirs.emplace_back(extra);
  if (const char* env = std::getenv("PADSHIELD_PRESETS")) dirs.emplace_back(env);
  dirs.emplace_back("presets");
  std::error_code ec;
  fs::path exe = fs::canonical(fs::path(argv0), ec);
  if (!ec) {
    dirs.push_back(exe.parent_path() / "presets");
    dirs.push_back(exe.parent_path().parent_path() / "presets");
    dirs.push_back(exe.parent_path().parent_path().parent_path() / "presets");
  }
  return dirs;
}

cli::DefenseSpec build_spec(const std::string& defense, const std::string& preset,
                            const std::vector<std::string>& sets,
                            const std::vector<fs::path>& search_dirs) {
  cli::DefenseSpec spec;
  if (!preset.empty()) spec = cli::load_preset(preset, search_dirs);
  if (!defense.empty()) cli::apply_param(spec, "defense", defense);
  for (const std::string& kv : sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ParamError("set", "expected key=value, got '" + kv + "'");
    cli::apply_param(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return spec;
}

std::vector<uint32_t> parse_windows(const std::string& text) {
  std::vector<uint32_t> windows;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t comma = text.find(',', start);
    const std::string tok = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) windows.push_back(static_cast<uint32_t>(std::stoul(tok)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (windows.empty()) throw ParamError("windows", "no window sizes given");
  return windows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Website-fingerprinting defense toolkit: state-machine padding "
               "defenses, a two-endpoint trace simulator, and evaluation "
               "reports"};
  app.require_subcommand(1);

  std::string preset, defense, windows_text = "25,50", preset_dir;
  std::vector<std::string> sets;
  uint64_t seed = 0;
  double delay_us = 10'000.0;
  uint64_t max_events = 10'000'000;
  int workers = 0;
  int repeat = 1;

  // generate
  auto* gen = app.add_subcommand("generate", "Generate machine files (MBN1)");
  std::string gen_out, gen_reference, gen_references_dir;
  gen->add_option("defense", defense, "front | regulator | surakav");
  gen->add_option("--preset", preset, "preset name or file");
  gen->add_option("--preset-dir", preset_dir, "extra preset search directory");
  gen->add_option("--set", sets, "override parameter, key=value")->take_all();
  gen->add_option("--out", gen_out, "output file (front) or prefix/dir")
      ->required();
  gen->add_option("--reference", gen_reference,
                  "surakav: burst-sequence file");
  gen->add_option("--references-dir", gen_references_dir,
                  "surakav: directory of burst-sequence files, one pair each");
  gen->add_option("--repeat", repeat, "surakav: tile the reference N times");

  // defend
  auto* def = app.add_subcommand("defend", "Apply a defense to a dataset");
  std::string def_dataset, def_out, def_machines_dir, def_reference,
      def_references_dir;
  std::vector<std::string> def_machines, def_client_machines, def_relay_machines;
  def->add_option("--dataset", def_dataset, "directory of base traces")
      ->required();
  def->add_option("--out", def_out, "output directory")->required();
  def->add_option("--machine", def_machines,
                  "machine file used at both endpoints")
      ->take_all();
  def->add_option("--client-machine", def_client_machines, "client machine file")
      ->take_all();
  def->add_option("--relay-machine", def_relay_machines, "relay machine file")
      ->take_all();
  def->add_option("--machines-dir", def_machines_dir,
                  "per-trace machine pairs: <id>.client.mbn1 / <id>.relay.mbn1");
  def->add_option("--reference", def_reference,
                  "apply the reference transform instead of the simulator: "
                  "front | regulator | surakav");
  def->add_option("--references-dir", def_references_dir,
                  "surakav reference mode: <id>.bursts files");
  def->add_option("--preset", preset, "preset for --reference parameters");
  def->add_option("--preset-dir", preset_dir, "extra preset search directory");
  def->add_option("--set", sets, "override parameter, key=value")->take_all();
  def->add_option("--seed", seed, "root seed; all randomness derives from it");
  def->add_option("--delay-us", delay_us, "one-way client-relay delay, µs");
  def->add_option("--max-events", max_events, "per-trace event budget");
  def->add_option("--workers", workers, "worker threads (0 = all cores)");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Compare two defended datasets");
  std::string eval_a, eval_b, eval_base, eval_out;
  eval->add_option("--a", eval_a, "dataset A")->required();
  eval->add_option("--b", eval_b, "dataset B")->required();
  eval->add_option("--base", eval_base, "undefended dataset (enables latency)");
  eval->add_option("--out", eval_out, "output directory for CSV reports")
      ->required();
  eval->add_option("--windows", windows_text, "window sizes in ms, comma-separated");
  eval->add_option("--workers", workers, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto search_dirs = preset_search_dirs(preset_dir, argv[0]);
    if (gen->parsed()) {
      cli::GenerateOptions opt;
      opt.spec = build_spec(defense, preset, sets, search_dirs);
      opt.out = gen_out;
      opt.reference = gen_reference;
      opt.references_dir = gen_references_dir;
      opt.repeat = repeat;
      const auto written = cli::run_generate(opt);
      for (const fs::path& path : written)
        cli::log(cli::LogLevel::Info, "wrote " + path.string());
      std::printf("generated %zu machine file(s)\n", written.size());
      return 0;
    }
    if (def->parsed()) {
      cli::DefendOptions opt;
      opt.dataset_dir = def_dataset;
      opt.out_dir = def_out;
      for (const auto& f : def_machines) opt.machine_files.emplace_back(f);
      for (const auto& f : def_client_machines)
        opt.client_machine_files.emplace_back(f);
      for (const auto& f : def_relay_machines)
        opt.relay_machine_files.emplace_back(f);
      opt.machines_dir = def_machines_dir;
      if (!def_reference.empty())
        opt.reference = build_spec(def_reference, preset, sets, search_dirs);
      opt.references_dir = def_references_dir;
      opt.delay_us = delay_us;
      opt.seed = seed;
      opt.max_events = max_events;
      opt.workers = workers;
      const cli::BatchResult result = cli::run_defend(opt);
      std::printf("defended %zu trace(s), %zu failed\n", result.processed,
                  result.failed);
      return result.failed == 0 ? 0 : 1;
    }
    if (eval->parsed()) {
      cli::EvaluateOptions opt;
      opt.set_a = eval_a;
      opt.set_b = eval_b;
      opt.base_dir = eval_base;
      opt.out_dir = eval_out;
      opt.windows_ms = parse_windows(windows_text);
      opt.workers = workers;
      const cli::BatchResult result = cli::run_evaluate(opt);
      std::printf("evaluated %zu pair(s), %zu failed\n", result.processed,
                  result.failed);
      return result.failed == 0 ? 0 : 1;
    }
  } catch (const ParamError& e) {
    std::fprintf(stderr, "padshield: parameter error: %s\n", e.what());
    return 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "padshield: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "padshield: %s\n", e.what());
    return 1;
  }
  return 0;
}
