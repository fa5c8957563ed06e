#ifndef OCDSP_CONFIG_HPP
#define OCDSP_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ocdsp/cd_equalizer.hpp"
#include "ocdsp/cpe.hpp"
#include "ocdsp/polarization.hpp"
#include "ocdsp/types.hpp"

namespace ocdsp {

enum class CdEqMethod { None, Fde, StdFir, TdLms };
enum class PolEqMethod { None, Cma, DdLms };

/// Typed experiment description. Every key of the INI file maps to one field;
/// units are part of the key names (see config_keys()).
struct ExperimentConfig {
  struct System {
    double symbol_rate_gbaud = 28.0;
    int samples_per_symbol = 2;
    double wavelength_nm = 1550.0;
    int modulation_order = 4;
  } system;

  struct Channel {
    double fiber_length_km = 0.0;
    double cd_coefficient_ps_nm_km = 16.0;
    double dgd_ps = 0.0;
    double pmd_rotation_deg = 0.0;
    double tx_linewidth_khz = 0.0;
    double lo_linewidth_khz = 0.0;
    std::optional<double> phase_noise_sigma_rad;  // overrides the linewidths when set
    double snr_db = kNoiselessSnr;                // per sample; inf = off
  } channel;

  struct CdEq {
    CdEqMethod method = CdEqMethod::None;
    int n_taps = 0;  // 0 = analytic length (stdfir) / 9 (tdlms)
    Index fft_size = 0;
    Index overlap = 0;
    FdeMethod block_method = FdeMethod::OverlapSave;
    double lms_mu = 0.1;
    Index lms_training_symbols = 2000;
    LmsMode lms_mode = LmsMode::SequenceTraining;
  } cd_eq;

  struct PolEq {
    PolEqMethod method = PolEqMethod::None;
    int n_taps = 7;
    double mu = 1e-3;
    Index training_symbols = 2000;
  } pol_eq;

  struct Cpe {
    std::optional<CpeMethod> method;  // empty = no carrier recovery
    double mu_nlms = 1.0;
    int block_size = 11;
    int window = 11;
    Index training_symbols = 32;
  } cpe;

  struct Run {
    std::uint64_t seed = 1;
    Index n_symbols = 100000;
    int n_trials = 1;
    Index discard_symbols = 1000;  // excluded from EVM/BER at each end
  } run;

  struct Validate {
    std::vector<std::string> methods{"differential", "nlms", "bwa", "vv"};
    std::vector<int> sizes{5, 11};
    double target_floor = 1e-3;
    std::optional<double> sigma_rad;  // empty = tuned per method to target_floor
  } validate;

  SystemParams system_params() const;
  PmdState pmd() const;
  /// FDE block parameters: the defaults, overridden by cd_eq.overlap / fft_size.
  FdeConfig fde_config() const;
  /// Per-symbol phase-noise standard deviation in rad.
  double phase_noise_sigma() const;
  bool awgn_enabled() const { return std::isfinite(channel.snr_db); }
  bool phase_noise_only() const;
  /// Checks every enabled stage's preconditions; throws ConfigError naming section.key.
  void validate_all() const;
};

const char* to_string(CdEqMethod m);
const char* to_string(PolEqMethod m);

/// Assigns one key from its text form; throws ConfigError for unknown
/// section/key or malformed values.
void set_config_value(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value);

/// "section.key" form used by sweeps.
void set_config_path(ExperimentConfig& cfg, const std::string& path, const std::string& value);

/// All accepted "section.key" names, in file order.
std::vector<std::string> config_keys();

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

}  // namespace ocdsp

#endif  // OCDSP_CONFIG_HPP
