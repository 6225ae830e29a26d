#ifndef PADSHIELD_FRONT_HPP
#define PADSHIELD_FRONT_HPP

#include "padshield/machine.hpp"
#include "padshield/rng.hpp"
#include "padshield/trace.hpp"

namespace padshield::front {

/// FRONT: a burst of padding cells early in the download, scheduled from a
/// Rayleigh distribution whose scale and cell count are re-sampled per
/// download.
struct FrontParams {
  int padding_budget = 1700;    // N: maximum padding cells per download
  double window_min_s = 1.0;    // W_min: lower bound of the Rayleigh scale
  double window_max_s = 14.0;   // W_max: upper bound of the Rayleigh scale
  int padding_states = 30;      // ψ: PADDING states (single-pipeline machine)

  void validate() const;
};

/// Rayleigh-scheduled padding times (seconds), unsorted. The scale is the
/// sampled window w.
std::vector<double> sample_padding_times(int count, double window_s, Rng& rng);

/// The trace-transform version of the defense: each endpoint samples a cell
/// count n ~ UniformDiscrete[1, N] and a window w ~ Uniform[W_min, W_max],
/// draws n Rayleigh(w) times, and inserts a padding cell at each time that
/// falls before the download ends (no padding after the last base cell).
Trace front_reference(const Trace& base, const FrontParams& client,
                      const FrontParams& relay, Rng& rng);

/// Timeout distribution parameters for the PADDING state covering the time
/// slice [t1, t2] (milliseconds in, microsecond-unit distribution out).
struct SliceTiming {
  double mean_us;
  double stddev_us;
};
SliceTiming padding_slice_timing(const FrontParams& p, double t1_ms, double t2_ms);

/// Single-pipeline machine: START fans into a chain of ψ PADDING states
/// linked by LimitReached, each covering W_max/ψ of the window and holding a
/// UniformDiscrete[1, N/ψ] limit, so the per-download padding count is a sum
/// of ψ uniforms on [ψ, N].
Machine gen_maybenot_front(const FrontParams& p);

/// Multi-pipeline variant: START picks one of `pipelines` chains uniformly;
/// pipeline budgets are spread evenly over [N/pipelines, N].
Machine gen_pipelined_front(const FrontParams& p, int pipelines,
                            int per_pipeline_states);

}  // namespace padshield::front

#endif
