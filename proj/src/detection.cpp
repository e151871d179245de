#include "nfdm/detection.hpp"

#include "nfdm/channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace nfdm {

namespace {

double distance2(const CVector& a, const CVector& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::norm(a[i] - b[i]);
    return d;
}

int argmin(const std::vector<double>& d) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(d.size()); ++i)
        if (d[static_cast<std::size_t>(i)] < d[static_cast<std::size_t>(best)]) best = i;
    return best;
}

void check_windows(const ReceivedWindows& rx, const ModemConfig& config) {
    if (rx.N_b() != config.N_b) throw ValidationError("received windows do not match N_b");
    for (const auto& w : rx.windows)
        if (static_cast<int>(w.size()) != config.samples_per_symbol)
            throw ValidationError("received window length does not match samples per symbol");
}

DecisionTrace sequential_detect(const ReceivedWindows& rx, const ModemConfig& config, const Burst* truth) {
    check_windows(rx, config);
    const int M = config.constellation.size();
    DecisionTrace trace;
    auto base = start_synthesizer(config);
    std::vector<CausalSynthesizer> cand(static_cast<std::size_t>(M), base);
    for (int k = 0; k < config.N_b; ++k) {
        std::vector<double> d(static_cast<std::size_t>(M));
        for (int i = 0; i < M; ++i) {
            auto& c = cand[static_cast<std::size_t>(i)];
            c = base;
            d[static_cast<std::size_t>(i)] = distance2(rx.windows[static_cast<std::size_t>(k)], c.push_symbol(config.constellation.point(i)));
        }
        const int best = argmin(d);
        trace.decided.push_back(best);
        trace.per_step_distances.push_back(std::move(d));
        const int next = truth ? config.constellation.index_of(truth->symbols[static_cast<std::size_t>(k)]) : best;
        if (next < 0) throw ValidationError("symbol not in constellation");
        base = std::move(cand[static_cast<std::size_t>(next)]);
    }
    return trace;
}

}  // namespace

ReceivedWindows adc_front_end(const ComplexEnvelope& sig, int nu, double Ts, int N_b) {
    if (nu < 1 || N_b < 1 || !(Ts > 0.0)) throw ValidationError("adc_front_end: invalid parameters");
    const double target_dt = Ts / nu;
    const double ratio = target_dt / sig.dt;
    const auto D = static_cast<std::size_t>(std::llround(ratio));
    if (D < 1 || std::abs(ratio - static_cast<double>(D)) > 1e-6)
        throw ValidationError("adc_front_end: signal grid must be an integer refinement of nu samples per symbol");
    const double offset = (-0.5 * Ts - sig.t0) / sig.dt;
    const auto i0 = static_cast<long long>(std::llround(offset));
    if (i0 < 0 || std::abs(offset - static_cast<double>(i0)) > 1e-6)
        throw ValidationError("adc_front_end: grid does not contain t = -T_s/2");
    const std::size_t span = static_cast<std::size_t>(N_b) * static_cast<std::size_t>(nu) * D;
    if (static_cast<std::size_t>(i0) + span > sig.size()) throw Error("signal shorter than detection span");

    const ComplexEnvelope filtered = D > 1 ? lowpass(sig, nu / (2.0 * Ts)) : sig;
    ReceivedWindows rx;
    rx.windows.resize(static_cast<std::size_t>(N_b));
    std::size_t idx = static_cast<std::size_t>(i0);
    for (auto& w : rx.windows) {
        w.resize(static_cast<std::size_t>(nu));
        for (auto& v : w) {
            v = filtered.samples[idx];
            idx += D;
        }
    }
    for (; idx < filtered.size(); idx += D) rx.discarded_tail.push_back(filtered.samples[idx]);
    return rx;
}

DecisionTrace df_bnft_detect(const ReceivedWindows& rx, const ModemConfig& config) {
    return sequential_detect(rx, config, nullptr);
}

DecisionTrace genie_df_detect(const ReceivedWindows& rx, const ModemConfig& config, const Burst& truth) {
    if (truth.N_b() != config.N_b) throw ValidationError("truth burst does not match N_b");
    return sequential_detect(rx, config, &truth);
}

std::vector<std::vector<CVector>> true_prefix_candidates(const Burst& truth, const ModemConfig& config) {
    if (truth.N_b() != config.N_b) throw ValidationError("truth burst does not match N_b");
    const int M = config.constellation.size();
    std::vector<std::vector<CVector>> out(static_cast<std::size_t>(config.N_b));
    auto base = start_synthesizer(config);
    for (int k = 0; k < config.N_b; ++k) {
        const int t = config.constellation.index_of(truth.symbols[static_cast<std::size_t>(k)]);
        if (t < 0) throw ValidationError("symbol not in constellation");
        auto& row = out[static_cast<std::size_t>(k)];
        row.resize(static_cast<std::size_t>(M));
        std::optional<CausalSynthesizer> next;
        for (int i = 0; i < M; ++i) {
            auto c = base;
            row[static_cast<std::size_t>(i)] = c.push_symbol(config.constellation.point(i));
            if (i == t) next = std::move(c);
        }
        base = std::move(*next);
    }
    return out;
}

DecisionTrace genie_df_detect(const ReceivedWindows& rx, const std::vector<std::vector<CVector>>& candidates) {
    if (rx.windows.size() != candidates.size()) throw ValidationError("candidate table does not match N_b");
    DecisionTrace trace;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        std::vector<double> d;
        d.reserve(candidates[k].size());
        for (const auto& w : candidates[k]) d.push_back(distance2(rx.windows[k], w));
        trace.decided.push_back(argmin(d));
        trace.per_step_distances.push_back(std::move(d));
    }
    return trace;
}

CVector matched_filter(const ComplexEnvelope& s_hat, const ModemConfig& config) {
    const auto g = config.window_pulse();
    double eg = 0.0;
    for (double v : g) eg += v * v;
    if (!(config.gain > 0.0)) throw ValidationError("linear_detect: gain must be positive");
    CVector y(static_cast<std::size_t>(config.N_b));
    for (int k = 1; k <= config.N_b; ++k) {
        const std::size_t start = config.window_start(k);
        if (start + g.size() > s_hat.size()) throw Error("signal shorter than detection span");
        cd acc{};
        for (std::size_t j = 0; j < g.size(); ++j) acc += s_hat.samples[start + j] * g[j];
        y[static_cast<std::size_t>(k - 1)] = acc / (config.gain * eg);
    }
    return y;
}

DecisionTrace decide(const CVector& estimates, const Constellation& constellation) {
    const int M = constellation.size();
    DecisionTrace trace;
    for (const auto& v : estimates) {
        std::vector<double> d(static_cast<std::size_t>(M));
        for (int i = 0; i < M; ++i) d[static_cast<std::size_t>(i)] = std::norm(v - constellation.point(i));
        trace.decided.push_back(argmin(d));
        trace.per_step_distances.push_back(std::move(d));
    }
    return trace;
}

DecisionTrace linear_detect(const ComplexEnvelope& s_hat, const ModemConfig& config) {
    return decide(matched_filter(s_hat, config), config.constellation);
}

CVector fnft_symbol_estimates(const ComplexEnvelope& sig, const ModemConfig& config) {
    config.validate();
    require_mode(sig, UnitMode::normalized, "fnft_detect");
    const auto grid = config.grid();
    if (sig.size() != grid.size || std::abs(sig.dt - grid.dt) > 1e-9 * grid.dt || std::abs(sig.t0 - grid.t0) > 1e-9 * grid.dt)
        throw ValidationError("fnft_detect: signal must lie on the modem grid");
    ForwardNftOptions opts;
    opts.boundary_tolerance = std::numeric_limits<double>::infinity();
    const auto rho = forward_nft(time_reverse(sig), config.lambda_grid(), config.sigma, opts);
    return matched_filter(inverse_ft(nis_unmap(rho, grid.t0)), config);
}

DecisionTrace fnft_detect(const ComplexEnvelope& sig, const ModemConfig& config) {
    return decide(fnft_symbol_estimates(sig, config), config.constellation);
}

std::pair<ReceivedWindows, double> phase_offset_compensate(const ReceivedWindows& rx, const ReceivedWindows& reference) {
    if (reference.windows.empty()) throw ValidationError("phase reference unavailable");
    if (reference.windows.size() != rx.windows.size()) throw ValidationError("phase reference does not match windows");
    cd corr{};
    for (std::size_t k = 0; k < rx.windows.size(); ++k)
        for (std::size_t j = 0; j < rx.windows[k].size(); ++j) corr += rx.windows[k][j] * std::conj(reference.windows[k][j]);
    const double step = 1e-3;
    const auto n = static_cast<int>(std::floor(std::numbers::pi / step));
    double best_alpha = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = -n; i <= n; ++i) {
        const double alpha = i * step;
        const double v = (std::polar(1.0, -alpha) * corr).real();
        if (v > best) {
            best = v;
            best_alpha = alpha;
        }
    }
    ReceivedWindows out = rx;
    const cd rot = std::polar(1.0, -best_alpha);
    for (auto& w : out.windows)
        for (auto& v : w) v *= rot;
    for (auto& v : out.discarded_tail) v *= rot;
    return {std::move(out), best_alpha};
}

namespace {

struct SequenceSearch {
    const ReceivedWindows& rx;
    const ModemConfig& config;
    std::vector<int> path;
    std::vector<int> best_path;
    double best = std::numeric_limits<double>::infinity();

    void visit(const CausalSynthesizer& state, int k, double metric) {
        if (metric >= best) return;  // metric only grows along a path
        if (k == config.N_b) {
            best = metric;
            best_path = path;
            return;
        }
        for (int i = 0; i < config.constellation.size(); ++i) {
            auto child = state;
            const auto w = child.push_symbol(config.constellation.point(i));
            path.push_back(i);
            visit(child, k + 1, metric + distance2(rx.windows[static_cast<std::size_t>(k)], w));
            path.pop_back();
        }
    }
};

}  // namespace

Burst optimum_sequence_detect(const ReceivedWindows& rx, const ModemConfig& config) {
    check_windows(rx, config);
    const double space = std::pow(static_cast<double>(config.constellation.size()), config.N_b);
    if (space > 1e5) throw ValidationError("sequence space too large");
    SequenceSearch search{rx, config, {}, {}};
    search.visit(start_synthesizer(config), 0, 0.0);
    return Burst::from_indices(config.constellation, search.best_path, config.N_z);
}

ReceivedWindows noiseless_windows(const Burst& burst, const ModemConfig& config) {
    ModemConfig rx = config;
    rx.precomp_length = 0.0;
    const auto q = transmit(burst, rx);
    return adc_front_end(q, config.samples_per_symbol, config.symbol_time(), config.N_b);
}

}  // namespace nfdm
