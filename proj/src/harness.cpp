#include "ocdsp/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "ocdsp/analytics.hpp"
#include "ocdsp/channel.hpp"
#include "ocdsp/cpe.hpp"
#include "ocdsp/csv.hpp"
#include "ocdsp/signal_io.hpp"

namespace ocdsp {

int default_thread_count() {
  if (const char* env = std::getenv("OCDSP_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int workers = std::clamp(threads, 1, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
  return stream_seed(master, static_cast<std::uint64_t>(trial));
}

namespace {

// Seed stream layout inside a trial.
enum Stream : std::uint64_t { kBitsX = 0, kBitsY = 1, kAwgn = 2, kPhase = 3 };

bool uses_differential_coding(const ExperimentConfig& cfg) {
  return cfg.cpe.method && (*cfg.cpe.method == CpeMethod::Differential || *cfg.cpe.method == CpeMethod::Nlms);
}

int cpe_size(const ExperimentConfig& cfg) {
  if (!cfg.cpe.method) return 1;
  if (*cfg.cpe.method == CpeMethod::Bwa) return cfg.cpe.block_size;
  if (*cfg.cpe.method == CpeMethod::Vv) return cfg.cpe.window;
  return 1;
}

CVectorXd stack(const CVectorXd& a, const CVectorXd& b) {
  CVectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

std::span<const std::uint8_t> bit_slice(const Bits& bits, Index first_word, Index words, int k) {
  return {bits.data() + first_word * k, static_cast<std::size_t>(words * k)};
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed, RunArtifacts* art) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate_all();
  const SystemParams p = cfg.system_params();
  const PskModulation mod(cfg.system.modulation_order);
  const int k = mod.bits_per_symbol();
  const Index n = cfg.run.n_symbols;
  const bool differential = uses_differential_coding(cfg);
  const int sps = cfg.system.samples_per_symbol;
  const double fs = p.sample_rate();

  TrialResult res;
  res.seed = seed;

  // Transmitter.
  Bits bits[2];
  CVectorXd tx[2];
  for (int pol = 0; pol < 2; ++pol) {
    Rng rng(stream_seed(seed, pol == 0 ? kBitsX : kBitsY));
    if (differential) {
      bits[pol] = random_bits(static_cast<std::size_t>((n - 1) * k), rng);
      tx[pol] = differential_encode(bits[pol], mod);
    } else {
      bits[pol] = random_bits(static_cast<std::size_t>(n * k), rng);
      tx[pol] = modulate(bits[pol], mod);
    }
  }
  const DualPolSignalXd tx_sig(tx[0], tx[1], p.symbol_rate);

  // Channel.
  DualPolSignalXd sig(upsample_ideal(tx[0], sps), upsample_ideal(tx[1], sps), fs);
  sig = apply_cd(sig, p);
  sig = apply_pmd(sig, cfg.pmd());
  sig = add_awgn(sig, cfg.channel.snr_db, stream_seed(seed, kAwgn));
  if (art) art->received = sig;

  // Chromatic dispersion equalizer.
  int cur_sps = sps;
  switch (cfg.cd_eq.method) {
    case CdEqMethod::None: break;
    case CdEqMethod::Fde: {
      const FdeConfig f = cfg.fde_config();
      sig = {fde_run(sig.x, fs, p, f).samples, fde_run(sig.y, fs, p, f).samples, fs};
      if (art && dispersion_beta(p) != 0.0) art->cd_taps = fde_design_taps<double>(p, fs, f);
      break;
    }
    case CdEqMethod::StdFir: {
      const auto taps = stdfir_design(p, cfg.cd_eq.n_taps);
      sig = {fir_filter(sig.x, taps).samples, fir_filter(sig.y, taps).samples, fs};
      if (art) art->cd_taps = taps;
      break;
    }
    case CdEqMethod::TdLms: {
      const Index nt = cfg.cd_eq.n_taps > 0 ? cfg.cd_eq.n_taps : 9;
      CVectorXd out[2];
      for (int pol = 0; pol < 2; ++pol) {
        auto state = LmsState<double>::identity(nt, cfg.cd_eq.lms_mu, cfg.cd_eq.lms_mode);
        const std::span<const Complex<double>> training(tx[pol].data(),
                                                        static_cast<std::size_t>(cfg.cd_eq.lms_training_symbols));
        auto run = tdlms_run(pol == 0 ? sig.x : sig.y, cur_sps, training, state, mod, 10);
        out[pol] = run.symbols;
        if (art && pol == 0) {
          art->cd_taps = FirTaps<double>{state.weights};
          art->lms_run = std::move(run);
        }
      }
      sig = {out[0], out[1], p.symbol_rate};
      cur_sps = 1;
      break;
    }
  }

  const Index lo = cfg.run.discard_symbols;
  const Index cnt = n - 2 * lo;
  CVectorXd ref[2] = {tx[0].segment(lo, cnt), tx[1].segment(lo, cnt)};
  const CVectorXd ref_both = stack(ref[0], ref[1]);
  const auto symbols_of = [&](const CVectorXd& v) { return cur_sps == 1 ? v : decimate(v, cur_sps); };
  {
    const CVectorXd x = symbols_of(sig.x), y = symbols_of(sig.y);
    res.evm_db.emplace_back("cd_eq", evm_db(ref_both, stack(x.segment(lo, cnt), y.segment(lo, cnt))));
  }

  // Polarization equalizer.
  DualPolSignalXd sym;
  if (cfg.pol_eq.method == PolEqMethod::None) {
    sym = {symbols_of(sig.x), symbols_of(sig.y), p.symbol_rate};
  } else {
    PolEqMode mode;
    mode.algorithm = cfg.pol_eq.method == PolEqMethod::Cma ? PolAlgorithm::Cma : PolAlgorithm::DdLms;
    mode.phase = cfg.pol_eq.training_symbols > 0 ? DdLmsPhase::Training : DdLmsPhase::DecisionDirected;
    mode.training_length = cfg.pol_eq.training_symbols;
    auto r = equalize_dualpol(sig, cur_sps, mode, ButterflyTaps<double>::identity(cfg.pol_eq.n_taps, cfg.pol_eq.mu),
                              mod, &tx_sig);
    res.singularity_resets = r.singularity_resets;
    if (art) art->pol_trace = std::move(r.trace);
    sym = std::move(r.symbols);
  }

  // Counted window; the adaptive transients and filter edges stay outside.
  CVectorXd rx[2] = {sym.x.segment(lo, cnt), sym.y.segment(lo, cnt)};

  // CMA output is defined only up to a tributary swap and a 2 pi / m rotation
  // per output; both discrete choices are fixed against the counted window.
  if (cfg.pol_eq.method == PolEqMethod::Cma) {
    const auto corr = [](const CVectorXd& r, const CVectorXd& s) { return std::abs(r.dot(s)); };
    if (corr(ref[0], rx[1]) + corr(ref[1], rx[0]) > corr(ref[0], rx[0]) + corr(ref[1], rx[1])) {
      std::swap(rx[0], rx[1]);
      res.pol_swapped = true;
    }
    const double step = 2.0 * kPi / mod.order();
    for (int pol = 0; pol < 2; ++pol) {
      const double phase = std::arg(ref[pol].dot(rx[pol]));
      rx[pol] *= std::polar(1.0, -step * std::round(phase / step));
    }
  }
  res.evm_db.emplace_back("pol_eq", evm_db(ref_both, stack(rx[0], rx[1])));

  // Lumped transmitter + local-oscillator phase noise at the symbol rate.
  const auto pn = PhaseNoiseModel::from_sigma(cfg.phase_noise_sigma(), p.symbol_period(), stream_seed(seed, kPhase));
  auto noisy = apply_phase_noise(DualPolSignalXd(rx[0], rx[1], p.symbol_rate), pn);
  rx[0] = std::move(noisy.signal.x);
  rx[1] = std::move(noisy.signal.y);

  // Carrier phase estimation.
  RVectorXd estimated = RVectorXd::Zero(cnt);
  if (cfg.cpe.method) {
    CpeConfig c;
    c.method = *cfg.cpe.method;
    c.order = mod.order();
    c.mu_nlms = cfg.cpe.mu_nlms;
    c.block_size = cfg.cpe.block_size;
    c.window = cfg.cpe.window;
    c.training_length = static_cast<int>(cfg.cpe.training_symbols);
    for (int pol = 0; pol < 2; ++pol) {
      const std::span<const Complex<double>> training(ref[pol].data(),
                                                      static_cast<std::size_t>(std::min(cfg.cpe.training_symbols, cnt)));
      auto r = run_cpe(rx[pol], c, training);
      rx[pol] = std::move(r.corrected);
      if (pol == 0) estimated = std::move(r.phase);
    }
  }
  res.evm_db.emplace_back("cpe", evm_db(ref_both, stack(rx[0], rx[1])));

  // Decisions.
  std::uint64_t errors = 0, total = 0;
  for (int pol = 0; pol < 2; ++pol) {
    BerReport b;
    if (differential) {
      const CVectorXd detected =
          *cfg.cpe.method == CpeMethod::Nlms ? hard_decision(rx[pol], mod).points : rx[pol];
      const Bits got = differential_demod(detected, mod);
      b = count_ber(bit_slice(bits[pol], lo, cnt - 1, k), got);
    } else {
      b = count_ber(bit_slice(bits[pol], lo, cnt, k), hard_decision(rx[pol], mod).bits);
    }
    errors += b.bit_errors;
    total += b.bits_total;
  }
  res.ber = make_ber_report(errors, total);

  if (art) {
    art->first_symbol = lo;
    art->true_phase = noisy.phase;
    art->estimated_phase = estimated;
  }
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::optional<double> config_floor(const ExperimentConfig& cfg) {
  if (!cfg.phase_noise_only() || !cfg.cpe.method) return std::nullopt;
  return analytics::ber_floor(*cfg.cpe.method, cfg.system.modulation_order, cfg.phase_noise_sigma(), cpe_size(cfg));
}

RunReport run_simulation(const ExperimentConfig& cfg, int threads) {
  cfg.validate_all();
  RunReport report;
  report.trials.resize(static_cast<std::size_t>(cfg.run.n_trials));
  parallel_for(cfg.run.n_trials, threads, [&](int t) {
    auto r = run_trial(cfg, trial_seed(cfg.run.seed, t));
    r.trial = t;
    report.trials[static_cast<std::size_t>(t)] = std::move(r);
  });
  std::uint64_t errors = 0, total = 0;
  for (const auto& t : report.trials) {
    errors += t.ber.bit_errors;
    total += t.ber.bits_total;
  }
  report.total = make_ber_report(errors, total);
  report.analytic_floor = config_floor(cfg);
  report.phase_noise_sigma = cfg.phase_noise_sigma();
  return report;
}

namespace {

nlohmann::ordered_json ber_json(const BerReport& b) {
  return {{"bit_errors", b.bit_errors}, {"bits", b.bits_total}, {"ber", b.ber}, {"ci95", b.ci95_halfwidth}};
}

}  // namespace

nlohmann::ordered_json report_json(const ExperimentConfig& cfg, const RunReport& report, bool timing) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.run.seed;
  j["n_symbols"] = cfg.run.n_symbols;
  j["n_trials"] = cfg.run.n_trials;
  j["chain"] = {{"cd_eq", to_string(cfg.cd_eq.method)},
                {"pol_eq", to_string(cfg.pol_eq.method)},
                {"cpe", cfg.cpe.method ? to_string(*cfg.cpe.method) : "none"}};
  j["phase_noise_sigma_rad"] = report.phase_noise_sigma;
  j["phase_noise_only"] = cfg.phase_noise_only();
  auto trials = nlohmann::ordered_json::array();
  for (const auto& t : report.trials) {
    nlohmann::ordered_json row;
    row["trial"] = t.trial;
    row["seed"] = t.seed;
    nlohmann::ordered_json evm;
    for (const auto& [stage, value] : t.evm_db) evm[stage] = value;
    row["evm_db"] = evm;
    row["ber"] = ber_json(t.ber);
    row["pol_swapped"] = t.pol_swapped;
    row["singularity_resets"] = t.singularity_resets;
    if (timing) row["wall_time_s"] = t.wall_time_s;
    trials.push_back(std::move(row));
  }
  j["trials"] = std::move(trials);
  j["ber"] = ber_json(report.total);
  j["analytic_floor"] = report.analytic_floor ? nlohmann::ordered_json(*report.analytic_floor) : nullptr;
  return j;
}

// ---------------------------------------------------------------------------

std::vector<std::string> parse_sweep_values(const std::string& text) {
  std::vector<std::string> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = csv::split_line([&] {
      std::string t = text;
      std::replace(t.begin(), t.end(), ':', ',');
      return t;
    }());
    if (parts.size() != 3) throw ConfigError("sweep", "values", "range must be start:stop:step");
    double a = 0, b = 0, step = 0;
    try {
      a = csv::parse_double(parts[0]);
      b = csv::parse_double(parts[1]);
      step = csv::parse_double(parts[2]);
    } catch (const ShapeError&) {
      throw ConfigError("sweep", "values", "malformed range '" + text + "'");
    }
    if (!(step > 0) || b < a) throw ConfigError("sweep", "values", "range needs step > 0 and stop >= start");
    const auto count = static_cast<Index>(std::floor((b - a) / step + 1e-9)) + 1;
    for (Index i = 0; i < count; ++i) out.push_back(fmt::format("{}", a + static_cast<double>(i) * step));
  } else {
    for (auto& v : csv::split_line(text))
      if (!v.empty()) out.push_back(v);
  }
  if (out.empty()) throw ConfigError("sweep", "values", "empty value set");
  return out;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& param,
                                const std::vector<std::string>& values, int threads) {
  if (values.empty()) throw ConfigError("sweep", "values", "empty value set");
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    ExperimentConfig c = base;
    set_config_path(c, param, v);
    c.validate_all();
    configs.push_back(std::move(c));
  }
  const int trials = base.run.n_trials;
  const int jobs = static_cast<int>(values.size()) * trials;
  std::vector<SweepRow> rows(static_cast<std::size_t>(jobs));
  parallel_for(jobs, threads, [&](int job) {
    const auto vi = static_cast<std::size_t>(job / trials);
    const int t = job % trials;
    const auto& c = configs[vi];
    const auto r = run_trial(c, trial_seed(c.run.seed, t));
    rows[static_cast<std::size_t>(job)] = {values[vi], t, r.seed, r.ber, config_floor(c), r.wall_time_s};
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool timing) {
  csv::write_row(os, {"value", "trial", "seed", "bit_errors", "bits", "ber", "ci95", "floor", "wall_time_s"});
  for (const auto& r : rows)
    csv::write_row(os, {r.value, std::to_string(r.trial), std::to_string(r.seed), std::to_string(r.ber.bit_errors),
                        std::to_string(r.ber.bits_total), csv::format_double(r.ber.ber),
                        csv::format_double(r.ber.ci95_halfwidth), r.floor ? csv::format_double(*r.floor) : "",
                        timing ? csv::format_double(r.wall_time_s) : ""});
}

// ---------------------------------------------------------------------------

std::vector<FloorCheck> validate_floors(const ExperimentConfig& cfg, int threads) {
  cfg.validate_all();
  if (cfg.awgn_enabled())
    throw ConfigError("channel", "snr_db", "floor validation needs the noiseless channel (snr_db = off)");
  if (cfg.channel.fiber_length_km != 0.0)
    throw ConfigError("channel", "fiber_length_km", "floor validation needs a channel without dispersion");
  if (cfg.channel.dgd_ps != 0.0) throw ConfigError("channel", "dgd_ps", "floor validation needs a channel without PMD");
  if (cfg.channel.pmd_rotation_deg != 0.0)
    throw ConfigError("channel", "pmd_rotation_deg", "floor validation needs a channel without PMD");

  const int m = cfg.system.modulation_order;
  std::vector<FloorCheck> checks;
  for (const auto& name : cfg.validate.methods) {
    const CpeMethod method = cpe_method_from_string(name);
    const bool sized = method == CpeMethod::Bwa || method == CpeMethod::Vv;
    const std::vector<int> sizes = sized ? cfg.validate.sizes : std::vector<int>{1};
    for (int size : sizes) {
      FloorCheck fc;
      fc.method = method;
      fc.size = size;
      if (cfg.validate.sigma_rad) fc.sigma = *cfg.validate.sigma_rad;
      else if (sized && size == 1)  // zero floor at any sigma; stay 8 sd inside the unwrap limit pi/m
        fc.sigma = kPi / (8.0 * m);
      else fc.sigma = analytics::sigma_for_floor(method, m, cfg.validate.target_floor, size);

      ExperimentConfig c = cfg;
      c.cd_eq.method = CdEqMethod::None;
      c.pol_eq.method = PolEqMethod::None;
      c.cpe.method = method;
      c.cpe.block_size = size;
      c.cpe.window = size;
      c.channel.phase_noise_sigma_rad = fc.sigma;
      c.validate_all();
      const auto report = run_simulation(c, threads);
      fc.floor = analytics::ber_floor(method, m, fc.sigma, size);
      fc.ber = report.total;
      const double sd = std::sqrt(fc.floor * (1.0 - fc.floor) / static_cast<double>(fc.ber.bits_total));
      if (sd > 0) fc.z = (fc.ber.ber - fc.floor) / sd;
      else fc.z = fc.ber.bit_errors == 0 ? 0.0 : std::numeric_limits<double>::infinity();
      fc.pass = std::abs(fc.z) <= 3.0;
      checks.push_back(fc);
    }
  }
  return checks;
}

nlohmann::ordered_json validation_json(const std::vector<FloorCheck>& checks) {
  auto rows = nlohmann::ordered_json::array();
  bool all = true;
  for (const auto& c : checks) {
    nlohmann::ordered_json r;
    r["method"] = to_string(c.method);
    r["size"] = c.size;
    r["sigma_rad"] = c.sigma;
    r["floor"] = c.floor;
    r["ber"] = ber_json(c.ber);
    r["z"] = std::isfinite(c.z) ? nlohmann::ordered_json(c.z) : nlohmann::ordered_json("inf");
    r["pass"] = c.pass;
    all = all && c.pass;
    rows.push_back(std::move(r));
  }
  return {{"checks", rows}, {"all_pass", all}};
}

// ---------------------------------------------------------------------------

std::vector<std::string> dump_artifact_names() {
  return {"taps", "lms-trace", "pol-taps", "signal", "phase-trace", "floors"};
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file '" + path + "'");
  return out;
}

}  // namespace

void dump_artifact(const ExperimentConfig& cfg, const std::string& what, const std::string& path) {
  const auto names = dump_artifact_names();
  if (std::find(names.begin(), names.end(), what) == names.end())
    throw UsageError("unknown artifact '" + what + "' (taps | lms-trace | pol-taps | signal | phase-trace | floors)");
  cfg.validate_all();

  if (what == "floors") {
    const CpeMethod method = cfg.cpe.method.value_or(CpeMethod::Vv);
    std::vector<double> sigmas;
    for (int i = 0; i <= 60; ++i) sigmas.push_back(0.005 * i);
    const bool sized = method == CpeMethod::Bwa || method == CpeMethod::Vv;
    auto out = open_out(path);
    analytics::write_floor_csv(out, analytics::floor_table(method, cfg.system.modulation_order, sigmas,
                                                           sized ? cfg.validate.sizes : std::vector<int>{1}));
    return;
  }

  RunArtifacts art;
  run_trial(cfg, trial_seed(cfg.run.seed, 0), &art);

  if (what == "signal") {
    write_signal_file(path, art.received);
    return;
  }
  if (what == "taps") {
    if (!art.cd_taps) throw UsageError("artifact 'taps' needs a dispersive link and cd_eq.method != none");
    auto out = open_out(path);
    csv::write_row(out, {"tap_index", "re", "im", "abs", "arg"});
    const auto& f = *art.cd_taps;
    for (Index i = 0; i < f.size(); ++i) {
      const auto w = f.taps(i);
      csv::write_row(out, {std::to_string(i - f.center()), csv::format_double(w.real()), csv::format_double(w.imag()),
                           csv::format_double(std::abs(w)), csv::format_double(std::arg(w))});
    }
    return;
  }
  if (what == "lms-trace") {
    if (!art.lms_run) throw UsageError("artifact 'lms-trace' needs cd_eq.method = tdlms");
    auto out = open_out(path);
    csv::write_row(out, {"iteration", "tap_index", "abs", "arg"});
    const auto& run = *art.lms_run;
    for (std::size_t r = 0; r < run.trace_iterations.size(); ++r)
      for (Index j = 0; j < run.weight_trace.cols(); ++j) {
        const auto w = run.weight_trace(static_cast<Index>(r), j);
        csv::write_row(out, {std::to_string(run.trace_iterations[r]), std::to_string(j),
                             csv::format_double(std::abs(w)), csv::format_double(std::arg(w))});
      }
    return;
  }
  if (what == "pol-taps") {
    if (art.pol_trace.empty()) throw UsageError("artifact 'pol-taps' needs pol_eq.method != none");
    auto out = open_out(path);
    csv::write_row(out, {"symbol", "tap", "tap_index", "re", "im"});
    for (const auto& snap : art.pol_trace) {
      const std::pair<const char*, const CVectorXd*> branches[] = {
          {"wxx", &snap.taps.wxx}, {"wxy", &snap.taps.wxy}, {"wyx", &snap.taps.wyx}, {"wyy", &snap.taps.wyy}};
      for (const auto& [name, taps] : branches)
        for (Index j = 0; j < taps->size(); ++j)
          csv::write_row(out, {std::to_string(snap.symbol), name, std::to_string(j),
                               csv::format_double((*taps)(j).real()), csv::format_double((*taps)(j).imag())});
    }
    return;
  }
  // phase-trace
  auto out = open_out(path);
  csv::write_row(out, {"symbol", "true_phase", "estimated_phase"});
  for (Index i = 0; i < art.true_phase.size(); ++i)
    csv::write_row(out, {std::to_string(art.first_symbol + i), csv::format_double(art.true_phase(i)),
                         csv::format_double(art.estimated_phase(i))});
}

}  // namespace ocdsp
