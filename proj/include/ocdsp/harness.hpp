#ifndef OCDSP_HARNESS_HPP
#define OCDSP_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ocdsp/config.hpp"
#include "ocdsp/metrics.hpp"

namespace ocdsp {

/// Worker count for trial-level parallelism: $OCDSP_THREADS if set, else the
/// hardware concurrency (at least 1).
int default_thread_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
/// written to per-index slots; the first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

/// Seed of trial `t`: stream_seed(master, t).
std::uint64_t trial_seed(std::uint64_t master, int trial);

/// Intermediate data kept when a dump is requested.
struct RunArtifacts {
  DualPolSignalXd received;               // channel output at the sample rate
  std::optional<FirTaps<double>> cd_taps; // static / FDE FIR, or final TD-LMS weights (X)
  std::optional<LmsRun<double>> lms_run;  // TD-LMS on X
  std::vector<TapSnapshot<double>> pol_trace;
  Index first_symbol = 0;                 // absolute index of the first counted symbol
  RVectorXd true_phase;                   // per counted symbol
  RVectorXd estimated_phase;              // per counted symbol (zeros without CPE)
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> evm_db;  // in stage order
  BerReport ber;
  int singularity_resets = 0;
  bool pol_swapped = false;
  double wall_time_s = 0.0;
};

/// One pass through the chain: bits -> (differential) PSK -> upsample -> CD ->
/// PMD -> AWGN -> CD equalizer -> polarization equalizer -> lumped phase noise
/// -> CPE -> decision -> BER over both polarizations, with the first and last
/// run.discard_symbols symbols excluded.
TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed, RunArtifacts* artifacts = nullptr);

struct RunReport {
  std::vector<TrialResult> trials;  // sorted by trial index
  BerReport total;
  std::optional<double> analytic_floor;
  double phase_noise_sigma = 0.0;
};

/// Analytic floor of the configured CPE when the channel is phase-noise-only.
std::optional<double> config_floor(const ExperimentConfig& cfg);

RunReport run_simulation(const ExperimentConfig& cfg, int threads = default_thread_count());

nlohmann::ordered_json report_json(const ExperimentConfig& cfg, const RunReport& report, bool timing);

// ---------------------------------------------------------------------------

struct SweepRow {
  std::string value;
  int trial = 0;
  std::uint64_t seed = 0;
  BerReport ber;
  std::optional<double> floor;
  double wall_time_s = 0.0;
};

/// "a,b,c" or an inclusive range "start:stop:step".
std::vector<std::string> parse_sweep_values(const std::string& text);

/// One row per (value, trial), values in the given order, trials ascending.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& param,
                                const std::vector<std::string>& values, int threads = default_thread_count());

/// Columns: value,trial,seed,bit_errors,bits,ber,ci95,floor,wall_time_s. The
/// floor is empty when undefined; wall time is empty unless `timing`.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool timing);

// ---------------------------------------------------------------------------

struct FloorCheck {
  CpeMethod method = CpeMethod::Differential;
  int size = 1;
  double sigma = 0.0;
  double floor = 0.0;
  BerReport ber;
  double z = 0.0;
  bool pass = false;
};

/// Monte Carlo check of each requested CPE floor on the phase-noise-only
/// channel. Throws ConfigError when AWGN, CD or PMD is configured.
std::vector<FloorCheck> validate_floors(const ExperimentConfig& cfg, int threads = default_thread_count());

nlohmann::ordered_json validation_json(const std::vector<FloorCheck>& checks);

// ---------------------------------------------------------------------------

/// Artifacts: taps, lms-trace, pol-taps, signal, phase-trace, floors.
std::vector<std::string> dump_artifact_names();

/// Runs trial 0 and writes the named artifact. Throws UsageError for unknown
/// names or artifacts the configured chain does not produce.
void dump_artifact(const ExperimentConfig& cfg, const std::string& what, const std::string& path);

}  // namespace ocdsp

#endif  // OCDSP_HARNESS_HPP
