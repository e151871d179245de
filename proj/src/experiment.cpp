#include "nfdm/experiment.hpp"

#include "nfdm/detection.hpp"
#include "nfdm/log.hpp"
#include "nfdm/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace nfdm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t counter_of(std::size_t power_index, std::size_t index) {
    return (static_cast<std::uint64_t>(power_index) << 32) | static_cast<std::uint64_t>(index);
}

Burst random_burst(const ModemConfig& m, Rng rng) {
    std::uniform_int_distribution<int> pick(0, m.constellation.size() - 1);
    std::vector<int> idx(static_cast<std::size_t>(m.N_b));
    for (auto& i : idx) i = pick(rng);
    return Burst::from_indices(m.constellation, idx, m.N_z);
}

bool is_linear(DetectorKind d) { return d == DetectorKind::edc || d == DetectorKind::dbp; }

double safe_q(double pb) { return pb > 0.0 && pb < 0.5 ? q_factor_from_pb(pb) : kNaN; }

// Runs fn(i) for i in [begin, end) on up to `workers` threads.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, int workers, Fn fn) {
    const std::size_t n = end - begin;
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
    if (w <= 1) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{begin};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= end) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!failure) failure = std::current_exception();
                    next = end;
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct PowerContext {
    const ExperimentConfig* cfg = nullptr;
    std::size_t power_index = 0;
    ModemConfig rx;      // detection side, no precompensation
    ModemConfig tx;      // transmit side
    ModemConfig linear;  // conventional QAM transmission
    FiberLink link;
    Normalization norm;
    double N0 = 0.0;
};

struct DetectorOutcome {
    ErrorCount errors;
    double evm_err = 0.0;
    double evm_ref = 0.0;
};

std::vector<int> indices_of(const Burst& b, const Constellation& c) {
    std::vector<int> out;
    for (const auto& x : b.symbols) out.push_back(c.index_of(x));
    return out;
}

ComplexEnvelope fiber_channel(const ComplexEnvelope& sig, const PowerContext& ctx, Rng& rng) {
    const auto& cfg = *ctx.cfg;
    auto phys = denormalize(sig, ctx.norm);
    if (cfg.dac_bandwidth_ghz > 0.0) phys = lowpass(phys, cfg.dac_bandwidth_ghz * 1e9);
    phys = ssfm_propagate(phys, ctx.link, cfg.dz_km * 1e3, NoiseKind::distributed, rng);
    if (cfg.adc_bandwidth_ghz > 0.0) phys = lowpass(phys, cfg.adc_bandwidth_ghz * 1e9);
    return phys;
}

std::vector<DetectorOutcome> process_burst(const PowerContext& ctx, std::size_t index,
                                           const std::vector<DetectorKind>& detectors) {
    const auto& cfg = *ctx.cfg;
    const std::uint64_t counter = counter_of(ctx.power_index, index);
    const Burst burst = random_burst(ctx.rx, make_stream(cfg.seed, counter, StreamTag::symbols));
    const auto& constellation = ctx.rx.constellation;
    std::vector<DetectorOutcome> out(detectors.size());

    bool need_nfdm = false;
    bool need_linear = false;
    for (auto d : detectors) (is_linear(d) ? need_linear : need_nfdm) = true;

    if (need_nfdm) {
        Rng rng = make_stream(cfg.seed, counter, StreamTag::noise);
        ComplexEnvelope r;
        if (cfg.channel == ChannelKind::awgn) {
            r = awgn_channel(transmit(burst, ctx.rx), ctx.N0, rng);
        } else {
            r = normalize(fiber_channel(transmit(burst, ctx.tx), ctx, rng), ctx.norm);
        }
        std::optional<ReceivedWindows> windows;
        auto get_windows = [&]() -> const ReceivedWindows& {
            if (!windows) {
                windows = adc_front_end(r, ctx.rx.samples_per_symbol, ctx.rx.symbol_time(), ctx.rx.N_b);
                if (cfg.phase_comp) windows = phase_offset_compensate(*windows, noiseless_windows(burst, ctx.rx)).first;
            }
            return *windows;
        };
        for (std::size_t d = 0; d < detectors.size(); ++d) {
            std::vector<int> decided;
            switch (detectors[d]) {
                case DetectorKind::fnft: {
                    const auto y = fnft_symbol_estimates(r, ctx.rx);
                    for (std::size_t k = 0; k < y.size(); ++k) {
                        out[d].evm_err += std::norm(y[k] - burst.symbols[k]);
                        out[d].evm_ref += std::norm(burst.symbols[k]);
                    }
                    decided = decide(y, constellation).decided;
                    break;
                }
                case DetectorKind::df_bnft: decided = df_bnft_detect(get_windows(), ctx.rx).decided; break;
                case DetectorKind::genie_df: decided = genie_df_detect(get_windows(), ctx.rx, burst).decided; break;
                case DetectorKind::optimum:
                    decided = indices_of(optimum_sequence_detect(get_windows(), ctx.rx), constellation);
                    break;
                default: continue;
            }
            out[d].errors = count_errors(decided, burst, constellation);
        }
    }

    if (need_linear) {
        Rng rng = make_stream(cfg.seed, counter, StreamTag::noise);
        const auto received = fiber_channel(build_qam_signal(burst, ctx.linear), ctx, rng);
        for (std::size_t d = 0; d < detectors.size(); ++d) {
            if (!is_linear(detectors[d])) continue;
            const auto compensated = detectors[d] == DetectorKind::edc
                                         ? edc(received, ctx.link)
                                         : dbp(received, ctx.link, cfg.dbp_steps_per_span, cfg.span_km * 1e3);
            const auto y = matched_filter(normalize(compensated, ctx.norm), ctx.linear);
            std::vector<int> decided;
            for (std::size_t k = 0; k < y.size(); ++k) {
                decided.push_back(constellation.nearest(y[k]));
                out[d].evm_err += std::norm(y[k] - burst.symbols[k]);
                out[d].evm_ref += std::norm(burst.symbols[k]);
            }
            out[d].errors = count_errors(decided, burst, constellation);
        }
    }
    return out;
}

PowerContext make_context(const ExperimentConfig& cfg, std::size_t p) {
    PowerContext ctx;
    ctx.cfg = &cfg;
    ctx.power_index = p;
    ctx.link = cfg.link();
    ctx.norm = cfg.normalization();
    ctx.N0 = cfg.noise_psd_norm();
    ctx.rx = cfg.modem();
    ctx.rx.gain = calibrated_gain(cfg, cfg.power_dbm[p]);
    ctx.tx = ctx.rx;
    ctx.tx.precomp_length = ctx.norm.length_norm(ctx.link.length);
    ctx.linear = cfg.modem();
    double eg = 0.0;
    for (double v : ctx.linear.window_pulse()) eg += v * v;
    eg *= ctx.linear.dt();
    ctx.linear.gain = std::sqrt(cfg.energy_per_symbol_norm(cfg.power_dbm[p]) / eg);
    return ctx;
}

struct Tally {
    std::size_t bursts = 0;
    std::vector<DetectorOutcome> totals;
};

// Processes bursts in fixed-size batches until stop(tally) holds after a batch
// or max_bursts is reached.
template <class Stop>
Tally run_bursts(const PowerContext& ctx, const std::vector<DetectorKind>& detectors, Stop stop) {
    const auto& cfg = *ctx.cfg;
    Tally tally;
    tally.totals.resize(detectors.size());
    while (tally.bursts < cfg.max_bursts) {
        const std::size_t n = std::min(cfg.batch, cfg.max_bursts - tally.bursts);
        std::vector<std::vector<DetectorOutcome>> results(n);
        parallel_for(0, n, cfg.workers,
                     [&](std::size_t i) { results[i] = process_burst(ctx, tally.bursts + i, detectors); });
        for (const auto& r : results)
            for (std::size_t d = 0; d < detectors.size(); ++d) {
                tally.totals[d].errors.symbol_errors += r[d].errors.symbol_errors;
                tally.totals[d].errors.bit_errors += r[d].errors.bit_errors;
                tally.totals[d].evm_err += r[d].evm_err;
                tally.totals[d].evm_ref += r[d].evm_ref;
            }
        tally.bursts += n;
        if (tally.bursts >= cfg.min_bursts && stop(tally)) break;
    }
    return tally;
}

struct BoundsResult {
    Estimates estimates{kNaN, kNaN, kNaN};
    std::size_t sequences = 0;
    bool converged = false;
};

BoundsResult semianalytic(const ExperimentConfig& cfg, const PowerContext& ctx) {
    const auto source = [&](std::size_t s) {
        return random_burst(ctx.rx, make_stream(cfg.seed, counter_of(ctx.power_index, s), StreamTag::sequences));
    };
    BoundsResult out;
    try {
        const auto r = pe_semianalytic(ctx.rx, cfg.noise_sigma(), source, cfg.convergence);
        out.estimates = r.estimates;
        out.sequences = r.sequences;
        out.converged = true;
    } catch (const ConvergenceError& e) {
        warn(std::string(e.what()) + "; reporting the partial estimate");
        out.estimates = e.partial().estimates;
        out.sequences = e.partial().sequences;
    }
    return out;
}

ResultRow make_row(const ExperimentConfig& cfg, DetectorKind det, double dbm, const Tally& tally, std::size_t d,
                   const BoundsResult* bounds, double seconds) {
    ResultRow row;
    row.detector = to_string(det);
    row.channel_kind = to_string(cfg.channel);
    row.N_b = cfg.N_b;
    row.N_z = cfg.N_z;
    row.eta = rate_efficiency(cfg.N_b, cfg.N_z);
    row.ps_dbm = dbm;
    row.n_bursts = tally.bursts;
    const auto& t = tally.totals[d];
    row.n_symbol_errors = t.errors.symbol_errors;
    row.n_bit_errors = t.errors.bit_errors;
    const double symbols = static_cast<double>(tally.bursts) * cfg.N_b;
    row.pe = static_cast<double>(t.errors.symbol_errors) / symbols;
    row.pb = static_cast<double>(t.errors.bit_errors) / (symbols * std::log2(static_cast<double>(cfg.M)));
    row.q_db = safe_q(row.pb);
    row.pe_upper = row.pe_approx = row.pe_lower = kNaN;
    row.q_upper_db = row.q_approx_db = row.q_lower_db = kNaN;
    if (bounds) {
        const auto& e = bounds->estimates;
        row.pe_upper = e.upper;
        row.pe_approx = e.approx;
        row.pe_lower = e.lower;
        row.q_upper_db = safe_q(pb_from_pe(e.lower, cfg.M, cfg.pb_mapping));
        row.q_approx_db = safe_q(pb_from_pe(e.approx, cfg.M, cfg.pb_mapping));
        row.q_lower_db = safe_q(pb_from_pe(std::min(e.upper, 1.0), cfg.M, cfg.pb_mapping));
    }
    row.q_evm_db = kNaN;
    if (t.evm_ref > 0.0) {
        row.q_evm_db = q_from_evm(std::sqrt(t.evm_err / t.evm_ref), cfg.M);
    }
    row.seed = cfg.seed;
    row.wall_time_s = cfg.wall_time ? seconds : 0.0;
    return row;
}

void write_double(std::ostream& os, double v) {
    if (std::isnan(v)) return;
    if (std::isinf(v)) {
        os << (v > 0 ? "inf" : "-inf");
        return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    os << buf;
}

}  // namespace

std::string to_string(ChannelKind kind) { return kind == ChannelKind::awgn ? "awgn" : "fiber"; }

std::string to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::fnft: return "fnft";
        case DetectorKind::df_bnft: return "df-bnft";
        case DetectorKind::genie_df: return "genie-df";
        case DetectorKind::optimum: return "optimum";
        case DetectorKind::edc: return "edc";
        case DetectorKind::dbp: return "dbp";
    }
    return "unknown";
}

DetectorKind detector_from_string(const std::string& name) {
    for (auto d : {DetectorKind::fnft, DetectorKind::df_bnft, DetectorKind::genie_df, DetectorKind::optimum,
                   DetectorKind::edc, DetectorKind::dbp})
        if (to_string(d) == name) return d;
    throw ValidationError("unknown detector '" + name + "'");
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
    ExperimentConfig c;
    c.M = kv.get_int("modem.M", c.M);
    c.N_b = kv.get_int("modem.N_b", c.N_b);
    c.N_z = kv.get_int("modem.N_z", c.N_z);
    c.guard_lead = kv.get_int("modem.guard_lead", c.guard_lead);
    c.symbol_rate_gbd = kv.get_double("modem.symbol_rate_gbd", c.symbol_rate_gbd);
    c.width_param = kv.get_double("modem.width_param", c.width_param);
    c.samples_per_symbol = kv.get_int("modem.samples_per_symbol", c.samples_per_symbol);
    c.glme_tolerance = kv.get_double("modem.glme_tolerance", c.glme_tolerance);

    c.beta2_ps2_per_km = kv.get_double("fiber.beta2_ps2_per_km", c.beta2_ps2_per_km);
    c.gamma_per_w_km = kv.get_double("fiber.gamma_per_w_km", c.gamma_per_w_km);
    c.alpha_db_per_km = kv.get_double("fiber.alpha_db_per_km", c.alpha_db_per_km);
    c.length_km = kv.get_double("fiber.length_km", c.length_km);
    c.eta_sp = kv.get_double("fiber.eta_sp", c.eta_sp);
    c.carrier_thz = kv.get_double("fiber.carrier_thz", c.carrier_thz);
    c.ase_polarizations = kv.get_int("fiber.ase_polarizations", c.ase_polarizations);

    const auto kind = kv.get_string("channel.kind", to_string(c.channel));
    if (kind == "awgn") c.channel = ChannelKind::awgn;
    else if (kind == "fiber") c.channel = ChannelKind::fiber;
    else throw ValidationError("channel.kind must be 'awgn' or 'fiber', got '" + kind + "'");
    c.dz_km = kv.get_double("channel.dz_km", c.dz_km);
    c.dac_bandwidth_ghz = kv.get_double("channel.dac_bandwidth_ghz", c.dac_bandwidth_ghz);
    c.adc_bandwidth_ghz = kv.get_double("channel.adc_bandwidth_ghz", c.adc_bandwidth_ghz);
    c.dbp_steps_per_span = kv.get_int("channel.dbp_steps_per_span", c.dbp_steps_per_span);
    c.span_km = kv.get_double("channel.span_km", c.span_km);

    if (kv.has("detector.types")) {
        c.detectors.clear();
        for (const auto& name : kv.get_string_list("detector.types", {})) c.detectors.push_back(detector_from_string(name));
    }
    c.phase_comp = kv.get_bool("detector.phase_comp", c.phase_comp);

    c.power_dbm = kv.get_double_list("power.dbm", c.power_dbm);

    auto get_size = [&](const std::string& key, std::size_t fallback) {
        const auto v = kv.get_u64(key, fallback);
        return static_cast<std::size_t>(v);
    };
    c.min_bursts = get_size("monte_carlo.min_bursts", c.min_bursts);
    c.max_bursts = get_size("monte_carlo.max_bursts", c.max_bursts);
    c.target_errors = get_size("monte_carlo.target_errors", c.target_errors);
    c.batch = get_size("monte_carlo.batch", c.batch);
    c.calibration_bursts = get_size("monte_carlo.calibration_bursts", c.calibration_bursts);

    c.bounds = kv.get_bool("analysis.bounds", c.bounds);
    const auto mapping = kv.get_string("analysis.pb_mapping", "per_M");
    if (mapping == "per_M") c.pb_mapping = BitMapping::per_symbol_alphabet;
    else if (mapping == "per_log2M") c.pb_mapping = BitMapping::per_bit;
    else throw ValidationError("analysis.pb_mapping must be 'per_M' or 'per_log2M', got '" + mapping + "'");
    c.convergence.rel_tol = kv.get_double("analysis.rel_tol", c.convergence.rel_tol);
    c.convergence.window = get_size("analysis.window", c.convergence.window);
    c.convergence.max_sequences = get_size("analysis.max_sequences", c.convergence.max_sequences);
    c.count_rel_halfwidth = kv.get_double("analysis.count_rel_halfwidth", c.count_rel_halfwidth);

    c.demo_symbols = kv.get_int("demo.symbols", c.demo_symbols);
    c.demo_prefix = kv.get_int("demo.prefix", c.demo_prefix);

    c.wall_time = kv.get_bool("output.wall_time", c.wall_time);
    c.seed = kv.get_u64("seed", c.seed);
    c.workers = kv.get_int("workers", c.workers);
    kv.reject_unknown();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) { return from_kv(KeyValueConfig::load(path)); }

void ExperimentConfig::validate() const {
    if (M != 4 && M != 16 && M != 64) throw ValidationError("modem.M must be 4, 16 or 64");
    if (!(symbol_rate_gbd > 0.0)) throw ValidationError("modem.symbol_rate_gbd must be positive");
    if (!(length_km > 0.0)) throw ValidationError("fiber.length_km must be positive");
    if (!(alpha_db_per_km > 0.0)) throw ValidationError("fiber.alpha_db_per_km must be positive");
    if (!(gamma_per_w_km > 0.0)) throw ValidationError("fiber.gamma_per_w_km must be positive");
    if (!(beta2_ps2_per_km < 0.0)) throw ValidationError("fiber.beta2_ps2_per_km must be negative (anomalous dispersion)");
    if (!(eta_sp >= 1.0)) throw ValidationError("fiber.eta_sp must be at least 1");
    if (!(carrier_thz > 0.0)) throw ValidationError("fiber.carrier_thz must be positive");
    if (ase_polarizations != 1 && ase_polarizations != 2) throw ValidationError("fiber.ase_polarizations must be 1 or 2");
    if (!(dz_km > 0.0)) throw ValidationError("channel.dz_km must be positive");
    if (dac_bandwidth_ghz < 0.0 || adc_bandwidth_ghz < 0.0) throw ValidationError("converter bandwidth must be non-negative");
    if (dbp_steps_per_span < 1) throw ValidationError("channel.dbp_steps_per_span must be positive");
    if (!(span_km > 0.0)) throw ValidationError("channel.span_km must be positive");
    if (detectors.empty()) throw ValidationError("detector.types is empty");
    for (auto d : detectors) {
        if (is_linear(d) && channel != ChannelKind::fiber)
            throw ValidationError("detector '" + to_string(d) + "' requires channel.kind = fiber");
        if (d == DetectorKind::optimum && std::pow(static_cast<double>(M), N_b) > 1e5)
            throw ValidationError("detector 'optimum' requires M^N_b <= 1e5");
    }
    if (power_dbm.empty()) throw ValidationError("power.dbm is empty");
    if (max_bursts < 1 || batch < 1) throw ValidationError("monte_carlo.max_bursts and monte_carlo.batch must be positive");
    if (min_bursts > max_bursts) throw ValidationError("monte_carlo.min_bursts exceeds monte_carlo.max_bursts");
    if (calibration_bursts < 1) throw ValidationError("monte_carlo.calibration_bursts must be positive");
    if (!(convergence.rel_tol > 0.0) || convergence.window < 1 || convergence.max_sequences < 1)
        throw ValidationError("invalid analysis convergence settings");
    if (!(count_rel_halfwidth > 0.0)) throw ValidationError("analysis.count_rel_halfwidth must be positive");
    if (demo_prefix < 1 || demo_prefix >= demo_symbols) throw ValidationError("demo.prefix must lie in [1, demo.symbols)");
    if (workers < 1) throw ValidationError("workers must be positive");
    if (glme_tolerance < 0.0) throw ValidationError("modem.glme_tolerance must be non-negative");
    modem().validate();
}

FiberLink ExperimentConfig::link() const {
    auto l = FiberLink::from_engineering(beta2_ps2_per_km, gamma_per_w_km, alpha_db_per_km, length_km, eta_sp, carrier_thz);
    l.ase_polarizations = ase_polarizations;
    return l;
}

Normalization ExperimentConfig::normalization() const { return Normalization::from_link(link(), symbol_time_s() / 2.0); }

ModemConfig ExperimentConfig::modem() const {
    ModemConfig m;
    m.constellation = Constellation::qam(M);
    m.pulse.width_param = width_param;
    m.pulse.symbol_time = 2.0;
    m.pulse.support = 2.0;
    m.N_b = N_b;
    m.N_z = N_z;
    m.guard_lead = guard_lead;
    m.samples_per_symbol = samples_per_symbol;
    m.glme.tolerance = glme_tolerance;
    return m;
}

double ExperimentConfig::noise_psd_norm() const {
    const auto l = link();
    return normalization().psd_norm(l.ase_psd(l.length));
}

double ExperimentConfig::noise_sigma() const {
    return std::sqrt(noise_psd_norm() * samples_per_symbol / modem().symbol_time());
}

double ExperimentConfig::energy_per_symbol_norm(double dbm) const {
    const auto n = normalization();
    return 1e-3 * std::pow(10.0, dbm / 10.0) * symbol_time_s() / (n.P0 * n.T0);
}

double calibrated_gain(const ExperimentConfig& cfg, double dbm) {
    const auto m = cfg.modem();
    std::vector<Burst> bursts;
    for (std::size_t i = 0; i < cfg.calibration_bursts; ++i)
        bursts.push_back(random_burst(m, make_stream(cfg.seed, i, StreamTag::calibration)));
    return calibrate_gain(m, bursts, cfg.energy_per_symbol_norm(dbm));
}

SemianalyticResult semianalytic_for_power(const ExperimentConfig& cfg, std::size_t power_index) {
    cfg.validate();
    if (power_index >= cfg.power_dbm.size()) throw ValidationError("power index out of range");
    const auto ctx = make_context(cfg, power_index);
    const auto source = [&](std::size_t s) {
        return random_burst(ctx.rx, make_stream(cfg.seed, counter_of(power_index, s), StreamTag::sequences));
    };
    return pe_semianalytic(ctx.rx, cfg.noise_sigma(), source, cfg.convergence);
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ResultRow> rows;
    for (std::size_t p = 0; p < cfg.power_dbm.size(); ++p) {
        const auto start = std::chrono::steady_clock::now();
        const auto ctx = make_context(cfg, p);
        info("power " + std::to_string(cfg.power_dbm[p]) + " dBm, gain " + std::to_string(ctx.rx.gain));
        std::optional<BoundsResult> bounds;
        if (cfg.bounds) bounds = semianalytic(cfg, ctx);
        const auto tally = run_bursts(ctx, cfg.detectors, [&](const Tally& t) {
            for (const auto& d : t.totals)
                if (d.errors.symbol_errors < cfg.target_errors) return false;
            return true;
        });
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (std::size_t d = 0; d < cfg.detectors.size(); ++d)
            rows.push_back(make_row(cfg, cfg.detectors[d], cfg.power_dbm[p], tally, d, bounds ? &*bounds : nullptr, seconds));
    }
    return rows;
}

std::vector<BoundsRow> run_bounds(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<BoundsRow> rows;
    const std::vector<DetectorKind> genie{DetectorKind::genie_df};
    for (std::size_t p = 0; p < cfg.power_dbm.size(); ++p) {
        const auto start = std::chrono::steady_clock::now();
        const auto ctx = make_context(cfg, p);
        const auto bounds = semianalytic(cfg, ctx);
        bool counted = false;
        const auto tally = run_bursts(ctx, genie, [&](const Tally& t) {
            const auto errors = t.totals[0].errors.symbol_errors;
            if (errors == 0) return false;
            const std::size_t symbols = t.bursts * static_cast<std::size_t>(cfg.N_b);
            const auto ci = wilson_interval(errors, symbols);
            const double pe = static_cast<double>(errors) / static_cast<double>(symbols);
            counted = 0.5 * (ci.hi - ci.lo) <= cfg.count_rel_halfwidth * pe;
            return counted;
        });
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        BoundsRow b;
        b.row = make_row(cfg, DetectorKind::genie_df, cfg.power_dbm[p], tally, 0, &bounds, seconds);
        b.semianalytic_sequences = bounds.sequences;
        b.semianalytic_converged = bounds.converged;
        b.counting_bursts = tally.bursts;
        b.counting_converged = counted;
        info("power " + std::to_string(cfg.power_dbm[p]) + " dBm: semianalytic " + std::to_string(bounds.sequences) +
             " sequences, counting " + std::to_string(tally.bursts) + " bursts");
        rows.push_back(b);
    }
    return rows;
}

void write_csv_header(std::ostream& os) {
    os << "detector,channel_kind,N_b,N_z,eta,ps_dbm,n_bursts,n_symbol_errors,n_bit_errors,pe,pb,q_db,"
          "pe_upper,pe_approx,pe_lower,q_upper_db,q_approx_db,q_lower_db,seed,wall_time_s,q_evm_db";
}

void write_csv_row(std::ostream& os, const ResultRow& r) {
    os << r.detector << ',' << r.channel_kind << ',' << r.N_b << ',' << r.N_z << ',';
    for (double v : {r.eta, r.ps_dbm}) {
        write_double(os, v);
        os << ',';
    }
    os << r.n_bursts << ',' << r.n_symbol_errors << ',' << r.n_bit_errors << ',';
    for (double v : {r.pe, r.pb, r.q_db, r.pe_upper, r.pe_approx, r.pe_lower, r.q_upper_db, r.q_approx_db, r.q_lower_db}) {
        write_double(os, v);
        os << ',';
    }
    os << r.seed << ',';
    write_double(os, r.wall_time_s);
    os << ',';
    write_double(os, r.q_evm_db);
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    write_csv_header(os);
    os << '\n';
    for (const auto& r : rows) {
        write_csv_row(os, r);
        os << '\n';
    }
}

void write_bounds_csv(std::ostream& os, const std::vector<BoundsRow>& rows) {
    write_csv_header(os);
    os << ",semianalytic_sequences,semianalytic_converged,counting_bursts,counting_converged\n";
    for (const auto& b : rows) {
        write_csv_row(os, b.row);
        os << ',' << b.semianalytic_sequences << ',' << (b.semianalytic_converged ? 1 : 0) << ',' << b.counting_bursts
           << ',' << (b.counting_converged ? 1 : 0) << '\n';
    }
}

CausalityDemo causality_demo(const Burst& full, const Burst& prefix, int k, const ModemConfig& config) {
    ModemConfig cf = config;
    cf.N_b = full.N_b();
    cf.N_z = full.N_z;
    cf.precomp_length = 0.0;
    ModemConfig cp = cf;
    cp.N_b = prefix.N_b();
    cp.N_z = prefix.N_z;
    if (cf.total_samples() != cp.total_samples()) throw ValidationError("causality demo: bursts must share the grid");
    if (k < 1 || k > prefix.N_b()) throw ValidationError("causality demo: prefix length out of range");
    for (int i = 0; i < k; ++i)
        if (full.symbols[static_cast<std::size_t>(i)] != prefix.symbols[static_cast<std::size_t>(i)])
            throw ValidationError("causality demo: bursts do not share the prefix");
    const auto a = transmit(full, cf);
    const auto b = transmit(prefix, cp);
    CausalityDemo demo;
    demo.t_k = -cf.symbol_time() / 2.0 + k * cf.symbol_time();
    double nb = 0.0;
    double db = 0.0;
    double na = 0.0;
    double da = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a.time(i);
        demo.t.push_back(t);
        const double dev = std::norm(a.samples[i] - b.samples[i]);
        const double ref = std::norm(a.samples[i]);
        if (t < demo.t_k - 1e-9 * cf.dt()) {
            db += dev;
            nb += ref;
        } else {
            da += dev;
            na += ref;
        }
    }
    demo.full = a.samples;
    demo.prefix = b.samples;
    demo.deviation_before = nb > 0.0 ? std::sqrt(db / nb) : 0.0;
    demo.deviation_after = na > 0.0 ? std::sqrt(da / na) : 0.0;
    return demo;
}

CausalityDemo demo_causality(const ExperimentConfig& cfg) {
    cfg.validate();
    ModemConfig m = cfg.modem();
    m.N_b = cfg.demo_symbols;
    m.N_z = cfg.N_b + cfg.N_z - cfg.demo_symbols;
    if (m.N_z < m.guard_lead) throw ValidationError("demo.symbols exceeds modem.N_b + modem.N_z");
    const Burst full = random_burst(m, make_stream(cfg.seed, 0, StreamTag::symbols));
    m.gain = calibrate_gain(m, {full}, cfg.energy_per_symbol_norm(cfg.power_dbm.front()));
    Burst prefix;
    prefix.symbols.assign(full.symbols.begin(), full.symbols.begin() + cfg.demo_prefix);
    prefix.N_z = m.N_z + cfg.demo_symbols - cfg.demo_prefix;
    return causality_demo(full, prefix, cfg.demo_prefix, m);
}

void write_demo_csv(std::ostream& os, const CausalityDemo& demo, const Normalization& norm) {
    os << "t_ps,re_full,im_full,re_prefix,im_prefix\n";
    const double a = std::sqrt(norm.P0);
    for (std::size_t i = 0; i < demo.t.size(); ++i) {
        write_double(os, demo.t[i] * norm.T0 * 1e12);
        for (double v : {demo.full[i].real(), demo.full[i].imag(), demo.prefix[i].real(), demo.prefix[i].imag()}) {
            os << ',';
            write_double(os, v * a);
        }
        os << '\n';
    }
}

}  // namespace nfdm
