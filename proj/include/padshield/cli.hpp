#ifndef PADSHIELD_CLI_HPP
#define PADSHIELD_CLI_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padshield/front.hpp"
#include "padshield/regulator.hpp"
#include "padshield/surakav.hpp"

namespace padshield::cli {

/// Verbosity comes from the PADSHIELD_LOG environment variable:
/// error (default) | warn | info | debug, or 0-3.
enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };
LogLevel log_level();
void log(LogLevel level, const std::string& message);

/// A defense selection plus its parameters. Presets are plain key=value
/// files; command-line overrides are applied on top with the same keys.
struct DefenseSpec {
  enum class Defense { Front, Regulator, Surakav };
  enum class Variant { Machine, Pipelined, Reference };

  Defense defense = Defense::Front;
  Variant variant = Variant::Machine;
  front::FrontParams front;
  int pipelines = 2;
  int states_per_pipeline = 2;
  regulator::RegulatorParams regulator;
  double regulator_min_rate = 1.0;  // SEND chain stops below this rate
  surakav::SurakavParams surakav;
};

/// Applies one key=value pair (preset line or --set flag) to the spec.
/// Throws ParamError for unknown keys or bad values.
void apply_param(DefenseSpec& spec, const std::string& key,
                 const std::string& value);

/// Loads a preset by file path, or by name looked up as <name>.preset in the
/// given directories.
DefenseSpec load_preset(const std::string& name_or_path,
                        const std::vector<std::filesystem::path>& search_dirs);

struct GenerateOptions {
  DefenseSpec spec;
  std::filesystem::path out;           // file (front) or prefix (pairs)
  std::filesystem::path reference;     // surakav: one burst-sequence file
  std::filesystem::path references_dir;  // surakav: one pair per file
  int repeat = 1;                      // surakav: tile the reference
};

/// Writes MBN1 machine files; returns the paths written.
std::vector<std::filesystem::path> run_generate(const GenerateOptions& opt);

struct DefendOptions {
  std::filesystem::path dataset_dir;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> machine_files;        // both endpoints
  std::vector<std::filesystem::path> client_machine_files;
  std::vector<std::filesystem::path> relay_machine_files;
  std::filesystem::path machines_dir;  // per-trace <id>.client.mbn1 pairs
  std::optional<DefenseSpec> reference;  // bypass the simulator
  std::filesystem::path references_dir;  // surakav reference: <id>.bursts
  double delay_us = 10'000.0;
  uint64_t seed = 0;
  uint64_t max_events = 10'000'000;
  int workers = 0;  // 0 = hardware concurrency
};

struct BatchResult {
  size_t processed = 0;
  size_t failed = 0;
};

/// Defends every trace in the dataset and writes <id>.trace files with
/// trailing padding stripped. Deterministic for a fixed seed: each trace is
/// keyed by (seed, id), independent of worker scheduling.
BatchResult run_defend(const DefendOptions& opt);

struct EvaluateOptions {
  std::filesystem::path set_a;
  std::filesystem::path set_b;
  std::filesystem::path base_dir;  // optional; enables latency overhead
  std::vector<uint32_t> windows_ms = {25, 50};
  std::filesystem::path out_dir;
  int workers = 0;
};

/// Pairwise similarity of matching ids plus per-set overheads; writes
/// pairwise.csv, overhead.csv and summary.csv into out_dir.
BatchResult run_evaluate(const EvaluateOptions& opt);

/// Dataset helper: relative-path ids (extension dropped) of all regular
/// files under root, sorted.
std::vector<std::string> list_dataset(const std::filesystem::path& root);

}  // namespace padshield::cli

#endif
