#include "nfdm/modem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nfdm {

Constellation Constellation::qam(int M) {
    if (M != 4 && M != 16 && M != 64) throw ValidationError("constellation size must be 4, 16 or 64");
    const int L = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
    const int b = static_cast<int>(std::lround(std::log2(static_cast<double>(L))));
    const double scale = std::sqrt(2.0 * (M - 1) / 3.0);
    Constellation c;
    c.bits_ = 2 * b;
    for (int i = 0; i < L; ++i) {
        for (int q = 0; q < L; ++q) {
            c.points_.emplace_back((2.0 * i - (L - 1)) / scale, (2.0 * q - (L - 1)) / scale);
            const unsigned gi = static_cast<unsigned>(i ^ (i >> 1));
            const unsigned gq = static_cast<unsigned>(q ^ (q >> 1));
            c.labels_.push_back((gi << b) | gq);
        }
    }
    return c;
}

int Constellation::index_of(cd x, double tol) const {
    for (int i = 0; i < size(); ++i)
        if (std::abs(points_[static_cast<std::size_t>(i)] - x) <= tol) return i;
    return -1;
}

int Constellation::nearest(cd y) const {
    int best = 0;
    double best_d = std::norm(y - points_[0]);
    for (int i = 1; i < size(); ++i) {
        const double d = std::norm(y - points_[static_cast<std::size_t>(i)]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

Burst Burst::from_indices(const Constellation& c, const std::vector<int>& idx, int N_z) {
    Burst b;
    b.N_z = N_z;
    for (int i : idx) {
        if (i < 0 || i >= c.size()) throw ValidationError("symbol index outside constellation");
        b.symbols.push_back(c.point(i));
    }
    return b;
}

double PulseShape::operator()(double t) const {
    if (t < -0.5 * support || t >= 0.5 * support) return 0.0;
    const double u = t / symbol_time;
    return std::exp(-width_param * u * u);
}

double PulseShape::leakage() const {
    return 1.0 - std::erf(std::sqrt(2.0 * width_param) * support / (2.0 * symbol_time));
}

void PulseShape::validate() const {
    if (!(symbol_time > 0.0)) throw ValidationError("pulse: symbol time must be positive");
    if (!(support > 0.0) || support > symbol_time * (1.0 + 1e-12))
        throw ValidationError("pulse: support must lie in (0, T_s]");
    if (!(width_param > 0.0)) throw ValidationError("pulse: width parameter must be positive");
    if (leakage() > 1e-3) throw ValidationError("pulse: more than 0.1% of the energy lies outside the support");
}

void ModemConfig::validate() const {
    pulse.validate();
    if (N_b < 1) throw ValidationError("N_b must be at least 1");
    if (N_z < 0) throw ValidationError("N_z must be non-negative");
    if (guard_lead < 0 || guard_lead > N_z) throw ValidationError("guard_lead must lie in [0, N_z]");
    if (samples_per_symbol < 2) throw ValidationError("samples per symbol must be at least 2");
    if (!is_power_of_two(total_samples()))
        throw ValidationError("(N_b + N_z) * samples_per_symbol must be a power of two");
    if (precomp_length < 0.0) throw ValidationError("precompensation length must be non-negative");
    if (sigma != 1 && sigma != -1) throw ValidationError("sigma must be +1 or -1");
    if (!(gain >= 0.0)) throw ValidationError("gain must be non-negative");
}

TimeGrid ModemConfig::grid() const {
    const double Ts = symbol_time();
    return {-0.5 * Ts - guard_lead * Ts, dt(), total_samples()};
}

std::size_t ModemConfig::window_start(int k) const {
    return static_cast<std::size_t>((guard_lead + k - 1) * samples_per_symbol);
}

std::vector<double> ModemConfig::window_pulse() const {
    std::vector<double> g(static_cast<std::size_t>(samples_per_symbol));
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = pulse(-0.5 * symbol_time() + static_cast<double>(j) * dt());
    return g;
}

LambdaGrid ModemConfig::lambda_grid() const {
    const std::size_t n = total_samples();
    const double df = 1.0 / (static_cast<double>(n) * dt());
    const double f_last = (static_cast<double>(n - 1) - static_cast<double>(n / 2)) * df;
    return {-std::numbers::pi * f_last, std::numbers::pi * df, n};
}

ComplexEnvelope build_qam_signal(const Burst& burst, const ModemConfig& config) {
    config.validate();
    if (burst.N_b() != config.N_b || burst.N_z != config.N_z)
        throw ValidationError("burst shape does not match the modem configuration");
    ComplexEnvelope s(config.grid(), UnitMode::normalized);
    const auto g = config.window_pulse();
    for (int k = 1; k <= burst.N_b(); ++k) {
        const cd x = burst.symbols[static_cast<std::size_t>(k - 1)];
        if (config.constellation.index_of(x) < 0) throw ValidationError("symbol not in constellation");
        const std::size_t start = config.window_start(k);
        for (std::size_t j = 0; j < g.size(); ++j) s.samples[start + j] = config.gain * x * g[j];
    }
    return s;
}

NonlinearSpectrum nis_map(const FrequencyEnvelope& spec_f, int sigma) {
    const std::size_t n = spec_f.size();
    NonlinearSpectrum out;
    out.sigma = sigma;
    out.dlambda = std::numbers::pi * spec_f.df;
    out.lambda0 = -std::numbers::pi * (spec_f.f0 + static_cast<double>(n - 1) * spec_f.df);
    out.rho.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.rho[i] = -spec_f.values[n - 1 - i];
    return out;
}

FrequencyEnvelope nis_unmap(const NonlinearSpectrum& spec, double t_origin) {
    const std::size_t n = spec.size();
    FrequencyEnvelope out;
    out.df = spec.dlambda / std::numbers::pi;
    out.f0 = -(spec.lambda0 + static_cast<double>(n - 1) * spec.dlambda) / std::numbers::pi;
    out.t_origin = t_origin;
    out.mode = UnitMode::normalized;
    out.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.values[k] = -spec.rho[n - 1 - k];
    return out;
}

NonlinearSpectrum burst_spectrum(const Burst& burst, const ModemConfig& config) {
    return nis_map(forward_ft(build_qam_signal(burst, config)), config.sigma);
}

ComplexEnvelope transmit(const Burst& burst, const ModemConfig& config) {
    const auto s = build_qam_signal(burst, config);
    const auto rho = spectral_rotation(nis_map(forward_ft(s), config.sigma), config.precomp_length,
                                       RotationDirection::pre);
    const auto g = s.grid();
    const TimeGrid x_grid{-g.back(), g.dt, g.size};
    return time_reverse(backward_nft(rho, x_grid, config.glme));
}

double calibrate_gain(const ModemConfig& config, const std::vector<Burst>& bursts, double energy_per_symbol) {
    if (bursts.empty()) throw ValidationError("calibrate_gain: no bursts");
    if (!(energy_per_symbol > 0.0)) throw ValidationError("calibrate_gain: target energy must be positive");
    ModemConfig unit = config;
    unit.gain = 1.0;
    std::vector<std::vector<double>> mag2;
    for (const auto& b : bursts) {
        const auto rho = burst_spectrum(b, unit);
        std::vector<double> m;
        m.reserve(rho.size());
        for (const auto& r : rho.rho) m.push_back(std::norm(r));
        mag2.push_back(std::move(m));
    }
    const double dl = unit.lambda_grid().dlambda;
    const double s = static_cast<double>(config.sigma);
    const double target = energy_per_symbol * config.N_b;
    auto energy = [&](double g2) {
        double total = 0.0;
        for (const auto& m : mag2) {
            double acc = 0.0;
            for (double v : m) {
                const double arg = 1.0 + s * g2 * v;
                if (!(arg > 0.0)) return std::numeric_limits<double>::infinity();
                acc += std::log(arg);
            }
            total += s * acc * dl / std::numbers::pi;
        }
        return total / static_cast<double>(mag2.size());
    };
    double lo = 0.0;
    double hi = 1.0;
    while (energy(hi) < target) {
        hi *= 4.0;
        if (hi > 1e30) throw Error("calibrate_gain: target energy unreachable");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (energy(mid) < target ? lo : hi) = mid;
    }
    return std::sqrt(0.5 * (lo + hi));
}

std::vector<cd> candidate_waveform(const CVector& prefix, cd candidate, int k, const ModemConfig& config) {
    if (k < 1 || k > config.N_b) throw ValidationError("candidate_waveform: k out of range");
    if (static_cast<int>(prefix.size()) != k - 1) throw ValidationError("candidate_waveform: prefix length must be k-1");
    Burst b;
    b.N_z = config.N_z;
    b.symbols = prefix;
    b.symbols.push_back(candidate);
    b.symbols.resize(static_cast<std::size_t>(config.N_b), config.constellation.point(0) * 0.0);
    ModemConfig rx = config;
    rx.precomp_length = 0.0;
    // zero padding is not a constellation point, so build the signal directly
    ComplexEnvelope s(rx.grid(), UnitMode::normalized);
    const auto g = rx.window_pulse();
    for (int j = 1; j <= k; ++j) {
        const cd x = b.symbols[static_cast<std::size_t>(j - 1)];
        if (rx.constellation.index_of(x) < 0) throw ValidationError("symbol not in constellation");
        for (std::size_t i = 0; i < g.size(); ++i) s.samples[rx.window_start(j) + i] = rx.gain * x * g[i];
    }
    const auto rho = nis_map(forward_ft(s), rx.sigma);
    const auto grid = s.grid();
    const auto q = time_reverse(backward_nft(rho, TimeGrid{-grid.back(), grid.dt, grid.size}, rx.glme));
    const auto start = static_cast<std::ptrdiff_t>(rx.window_start(k));
    return {q.samples.begin() + start, q.samples.begin() + start + rx.samples_per_symbol};
}

CausalSynthesizer::CausalSynthesizer(const ModemConfig& config)
    : rec_(2.0 * config.dt(), config.sigma), pulse_(config.window_pulse()), gain_(config.gain) {}

void CausalSynthesizer::push_zeros(std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) push(cd{});
}

CVector CausalSynthesizer::push_symbol(cd x) {
    CVector out(pulse_.size());
    for (std::size_t j = 0; j < pulse_.size(); ++j) out[j] = push(gain_ * x * pulse_[j]);
    return out;
}

CausalSynthesizer start_synthesizer(const ModemConfig& config) {
    config.validate();
    CausalSynthesizer syn(config);
    syn.push_zeros(config.window_start(1));
    return syn;
}

}  // namespace nfdm
