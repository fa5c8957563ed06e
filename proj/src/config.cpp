#include "ocdsp/config.hpp"

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace ocdsp {

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

struct KeySpec {
  const char* section;
  const char* key;
  Setter set;
};

struct Location {
  const char* section;
  const char* key;
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(section, key, msg); }
};

double parse_real(const Location& at, const std::string& text) {
  const std::string v = boost::algorithm::trim_copy(text);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) at.fail("expected a number, got '" + text + "'");
  if (!std::isfinite(out)) at.fail("must be finite");
  return out;
}

template <typename Int>
Int parse_int(const Location& at, const std::string& text) {
  const std::string v = boost::algorithm::trim_copy(text);
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) at.fail("expected an integer, got '" + text + "'");
  return out;
}

std::vector<std::string> parse_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    boost::algorithm::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string lower_trim(const std::string& text) {
  std::string v = boost::algorithm::trim_copy(text);
  for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return v;
}

#define OCDSP_REAL(sec, name, field)                                                          \
  KeySpec {                                                                                   \
    sec, #name, [](ExperimentConfig& c, const std::string& v) { c.field = parse_real({sec, #name}, v); } \
  }
#define OCDSP_INT(sec, name, field, type)                                                     \
  KeySpec {                                                                                   \
    sec, #name, [](ExperimentConfig& c, const std::string& v) { c.field = parse_int<type>({sec, #name}, v); } \
  }

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      OCDSP_REAL("system", symbol_rate_gbaud, system.symbol_rate_gbaud),
      OCDSP_INT("system", samples_per_symbol, system.samples_per_symbol, int),
      OCDSP_REAL("system", wavelength_nm, system.wavelength_nm),
      OCDSP_INT("system", modulation_order, system.modulation_order, int),

      OCDSP_REAL("channel", fiber_length_km, channel.fiber_length_km),
      OCDSP_REAL("channel", cd_coefficient_ps_nm_km, channel.cd_coefficient_ps_nm_km),
      OCDSP_REAL("channel", dgd_ps, channel.dgd_ps),
      OCDSP_REAL("channel", pmd_rotation_deg, channel.pmd_rotation_deg),
      OCDSP_REAL("channel", tx_linewidth_khz, channel.tx_linewidth_khz),
      OCDSP_REAL("channel", lo_linewidth_khz, channel.lo_linewidth_khz),
      {"channel", "phase_noise_sigma_rad",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower_trim(v);
         if (t == "off" || t == "none" || t.empty()) c.channel.phase_noise_sigma_rad.reset();
         else c.channel.phase_noise_sigma_rad = parse_real({"channel", "phase_noise_sigma_rad"}, v);
       }},
      {"channel", "snr_db",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower_trim(v);
         if (t == "off" || t == "inf" || t == "none") c.channel.snr_db = kNoiselessSnr;
         else c.channel.snr_db = parse_real({"channel", "snr_db"}, v);
       }},

      {"cd_eq", "method",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower_trim(v);
         if (t == "none") c.cd_eq.method = CdEqMethod::None;
         else if (t == "fde") c.cd_eq.method = CdEqMethod::Fde;
         else if (t == "stdfir") c.cd_eq.method = CdEqMethod::StdFir;
         else if (t == "tdlms") c.cd_eq.method = CdEqMethod::TdLms;
         else throw ConfigError("cd_eq", "method", "unknown method '" + v + "' (none | fde | stdfir | tdlms)");
       }},
      OCDSP_INT("cd_eq", n_taps, cd_eq.n_taps, int),
      OCDSP_INT("cd_eq", fft_size, cd_eq.fft_size, Index),
      OCDSP_INT("cd_eq", overlap, cd_eq.overlap, Index),
      {"cd_eq", "block_method",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower_trim(v);
         if (t == "ols" || t == "overlap-save") c.cd_eq.block_method = FdeMethod::OverlapSave;
         else if (t == "ola" || t == "overlap-add") c.cd_eq.block_method = FdeMethod::OverlapAdd;
         else if (t == "whole") c.cd_eq.block_method = FdeMethod::WholeRecord;
         else throw ConfigError("cd_eq", "block_method", "unknown value '" + v + "' (ols | ola | whole)");
       }},
      OCDSP_REAL("cd_eq", lms_mu, cd_eq.lms_mu),
      OCDSP_INT("cd_eq", lms_training_symbols, cd_eq.lms_training_symbols, Index),
      {"cd_eq", "lms_mode",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower_trim(v);
         if (t == "training") c.cd_eq.lms_mode = LmsMode::SequenceTraining;
         else if (t == "decision") c.cd_eq.lms_mode = LmsMode::DecisionDirected;
         else throw ConfigError("cd_eq", "lms_mode", "unknown value '" + v + "' (training | decision)");
       }},

      {"pol_eq", "method",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower_trim(v);
         if (t == "none") c.pol_eq.method = PolEqMethod::None;
         else if (t == "cma") c.pol_eq.method = PolEqMethod::Cma;
         else if (t == "ddlms") c.pol_eq.method = PolEqMethod::DdLms;
         else throw ConfigError("pol_eq", "method", "unknown method '" + v + "' (none | cma | ddlms)");
       }},
      OCDSP_INT("pol_eq", n_taps, pol_eq.n_taps, int),
      OCDSP_REAL("pol_eq", mu, pol_eq.mu),
      OCDSP_INT("pol_eq", training_symbols, pol_eq.training_symbols, Index),

      {"cpe", "method",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower_trim(v);
         if (t == "none") c.cpe.method.reset();
         else c.cpe.method = cpe_method_from_string(t);
       }},
      OCDSP_REAL("cpe", mu_nlms, cpe.mu_nlms),
      OCDSP_INT("cpe", block_size, cpe.block_size, int),
      OCDSP_INT("cpe", window, cpe.window, int),
      OCDSP_INT("cpe", training_symbols, cpe.training_symbols, Index),

      OCDSP_INT("run", seed, run.seed, std::uint64_t),
      OCDSP_INT("run", n_symbols, run.n_symbols, Index),
      OCDSP_INT("run", n_trials, run.n_trials, int),
      OCDSP_INT("run", discard_symbols, run.discard_symbols, Index),

      {"validate", "methods",
       [](ExperimentConfig& c, const std::string& v) {
         c.validate.methods = parse_list(lower_trim(v));
         for (const auto& m : c.validate.methods) (void)cpe_method_from_string(m);
       }},
      {"validate", "sizes",
       [](ExperimentConfig& c, const std::string& v) {
         c.validate.sizes.clear();
         for (const auto& s : parse_list(v)) c.validate.sizes.push_back(parse_int<int>({"validate", "sizes"}, s));
       }},
      OCDSP_REAL("validate", target_floor, validate.target_floor),
      {"validate", "sigma_rad",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = lower_trim(v);
         if (t == "auto") c.validate.sigma_rad.reset();
         else c.validate.sigma_rad = parse_real({"validate", "sigma_rad"}, v);
       }},
  };
  return table;
}

#undef OCDSP_REAL
#undef OCDSP_INT

}  // namespace

const char* to_string(CdEqMethod m) {
  switch (m) {
    case CdEqMethod::None: return "none";
    case CdEqMethod::Fde: return "fde";
    case CdEqMethod::StdFir: return "stdfir";
    case CdEqMethod::TdLms: return "tdlms";
  }
  return "?";
}

const char* to_string(PolEqMethod m) {
  switch (m) {
    case PolEqMethod::None: return "none";
    case PolEqMethod::Cma: return "cma";
    case PolEqMethod::DdLms: return "ddlms";
  }
  return "?";
}

SystemParams ExperimentConfig::system_params() const {
  SystemParams p;
  p.symbol_rate = system.symbol_rate_gbaud * 1e9;
  p.samples_per_symbol = system.samples_per_symbol;
  p.wavelength = system.wavelength_nm * 1e-9;
  p.cd_coefficient = ps_per_nm_km(channel.cd_coefficient_ps_nm_km);
  p.fiber_length = channel.fiber_length_km * 1e3;
  p.tx_linewidth = channel.tx_linewidth_khz * 1e3;
  p.lo_linewidth = channel.lo_linewidth_khz * 1e3;
  return p;
}

FdeConfig ExperimentConfig::fde_config() const {
  const SystemParams p = system_params();
  FdeConfig f = fde_default_config(p, p.sample_rate(), cd_eq.block_method);
  if (cd_eq.overlap > 0) f.overlap = cd_eq.overlap;
  if (cd_eq.fft_size > 0) f.fft_size = cd_eq.fft_size;
  else if (cd_eq.overlap > 0) f.fft_size = next_pow2(4 * f.overlap);
  return f;
}

PmdState ExperimentConfig::pmd() const { return {channel.dgd_ps * 1e-12, channel.pmd_rotation_deg * kPi / 180.0}; }

double ExperimentConfig::phase_noise_sigma() const {
  if (channel.phase_noise_sigma_rad) return *channel.phase_noise_sigma_rad;
  const double linewidth = (channel.tx_linewidth_khz + channel.lo_linewidth_khz) * 1e3;
  return std::sqrt(2.0 * kPi * linewidth / (system.symbol_rate_gbaud * 1e9));
}

bool ExperimentConfig::phase_noise_only() const {
  return !awgn_enabled() && channel.fiber_length_km == 0.0 && channel.dgd_ps == 0.0 &&
         channel.pmd_rotation_deg == 0.0;
}

void ExperimentConfig::validate_all() const {
  const SystemParams p = system_params();
  if (!(system.symbol_rate_gbaud > 0)) throw ConfigError("system", "symbol_rate_gbaud", "must be positive");
  if (system.samples_per_symbol < 1 || system.samples_per_symbol > 2)
    throw ConfigError("system", "samples_per_symbol", "must be 1 or 2");
  if (!(system.wavelength_nm > 0)) throw ConfigError("system", "wavelength_nm", "must be positive");
  {
    const int m = system.modulation_order;
    if (m < 2 || (m & (m - 1)) != 0) throw ConfigError("system", "modulation_order", "must be a power of two >= 2");
  }
  if (channel.fiber_length_km < 0) throw ConfigError("channel", "fiber_length_km", "must be >= 0");
  if (channel.dgd_ps < 0) throw ConfigError("channel", "dgd_ps", "must be >= 0");
  if (channel.tx_linewidth_khz < 0) throw ConfigError("channel", "tx_linewidth_khz", "must be >= 0");
  if (channel.lo_linewidth_khz < 0) throw ConfigError("channel", "lo_linewidth_khz", "must be >= 0");
  if (channel.phase_noise_sigma_rad && *channel.phase_noise_sigma_rad < 0)
    throw ConfigError("channel", "phase_noise_sigma_rad", "must be >= 0");

  if (run.n_symbols < 2) throw ConfigError("run", "n_symbols", "must be >= 2");
  if (run.n_trials < 1) throw ConfigError("run", "n_trials", "must be >= 1");
  if (run.discard_symbols < 0 || 2 * run.discard_symbols >= run.n_symbols)
    throw ConfigError("run", "discard_symbols", "must leave symbols to count (2 * discard < n_symbols)");

  const double fs = p.sample_rate();
  switch (cd_eq.method) {
    case CdEqMethod::None: break;
    case CdEqMethod::Fde:
      if (dispersion_beta(p) != 0.0) fde_validate(fde_config(), p, fs);
      break;
    case CdEqMethod::StdFir:
      if (cd_eq.n_taps < 0 || (cd_eq.n_taps > 0 && cd_eq.n_taps % 2 == 0))
        throw ConfigError("cd_eq", "n_taps", "FIR length must be odd (0 = analytic length)");
      break;
    case CdEqMethod::TdLms:
      if (cd_eq.n_taps < 0 || (cd_eq.n_taps > 0 && cd_eq.n_taps % 2 == 0))
        throw ConfigError("cd_eq", "n_taps", "LMS length must be odd (0 = 9 taps)");
      if (!(cd_eq.lms_mu > 0)) throw ConfigError("cd_eq", "lms_mu", "step size must be positive");
      if (cd_eq.lms_training_symbols < 0 || cd_eq.lms_training_symbols > run.n_symbols)
        throw ConfigError("cd_eq", "lms_training_symbols", "must lie in [0, n_symbols]");
      break;
  }
  if (pol_eq.method != PolEqMethod::None) {
    if (pol_eq.n_taps < 1 || pol_eq.n_taps % 2 == 0) throw ConfigError("pol_eq", "n_taps", "must be odd and >= 1");
    if (!(pol_eq.mu >= 0)) throw ConfigError("pol_eq", "mu", "must be >= 0");
    if (pol_eq.training_symbols < 0 || pol_eq.training_symbols > run.n_symbols)
      throw ConfigError("pol_eq", "training_symbols", "must lie in [0, n_symbols]");
  }
  if (cpe.method) {
    CpeConfig c;
    c.method = *cpe.method;
    c.order = system.modulation_order;
    c.mu_nlms = cpe.mu_nlms;
    c.block_size = cpe.block_size;
    c.window = cpe.window;
    c.training_length = static_cast<int>(cpe.training_symbols);
    c.validate();
    if (cpe.training_symbols > run.n_symbols) throw ConfigError("cpe", "training_symbols", "exceeds n_symbols");
  }
  if (validate.methods.empty()) throw ConfigError("validate", "methods", "must list at least one method");
  for (int n : validate.sizes)
    if (n < 1) throw ConfigError("validate", "sizes", "block/window sizes must be >= 1");
  if (!(validate.target_floor > 0)) throw ConfigError("validate", "target_floor", "must be positive");
}

void set_config_value(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value) {
  bool known_section = false;
  for (const auto& spec : key_table()) {
    if (section != spec.section) continue;
    known_section = true;
    if (key == spec.key) {
      spec.set(cfg, value);
      return;
    }
  }
  throw ConfigError(section, key, known_section ? "unknown key" : "unknown section");
}

void set_config_path(ExperimentConfig& cfg, const std::string& path, const std::string& value) {
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
    throw UsageError("parameter path must have the form section.key, got '" + path + "'");
  set_config_value(cfg, path.substr(0, dot), path.substr(dot + 1), value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& spec : key_table()) out.push_back(std::string(spec.section) + "." + spec.key);
  return out;
}

ExperimentConfig parse_config(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("", section, "key outside of any section");
    for (const auto& [key, node] : body) set_config_value(cfg, section, key, node.data());
  }
  cfg.validate_all();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace ocdsp
