#include <doctest.h>

#include "nfdm/channel.hpp"
#include "nfdm/detection.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace nfdm;

namespace {

ModemConfig config_for(int M, int N_b, int N_z, double gain) {
    ModemConfig c;
    c.constellation = Constellation::qam(M);
    c.N_b = N_b;
    c.N_z = N_z;
    c.gain = gain;
    return c;
}

Burst random_burst(const ModemConfig& c, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, c.constellation.size() - 1);
    std::vector<int> idx(static_cast<std::size_t>(c.N_b));
    for (auto& i : idx) i = pick(rng);
    return Burst::from_indices(c.constellation, idx, c.N_z);
}

std::vector<int> indices(const Burst& b, const Constellation& c) {
    std::vector<int> out;
    for (const auto& x : b.symbols) out.push_back(c.index_of(x));
    return out;
}

ComplexEnvelope noisy(const ComplexEnvelope& q, double N0, unsigned seed) {
    Rng rng(seed);
    return awgn_channel(q, N0, rng);
}

void check_row_minimum(const DecisionTrace& t) {
    for (std::size_t k = 0; k < t.decided.size(); ++k) {
        const auto& row = t.per_step_distances[k];
        CHECK(row[static_cast<std::size_t>(t.decided[k])] == *std::min_element(row.begin(), row.end()));
    }
}

}  // namespace

TEST_CASE("ADC front end") {
    auto c = config_for(16, 16, 16, 0.3);
    const auto b = random_burst(c, 1);
    const auto q = transmit(b, c);
    const auto rx = adc_front_end(q, c.samples_per_symbol, c.symbol_time(), c.N_b);
    CHECK(rx.N_b() == c.N_b);
    std::size_t total = 0;
    for (const auto& w : rx.windows) total += w.size();
    CHECK(total == static_cast<std::size_t>(c.N_b * c.samples_per_symbol));
    CHECK(rx.windows[0][0] == q.samples[c.window_start(1)]);
    CHECK(rx.discarded_tail.size() == q.size() - c.window_start(c.N_b + 1));

    // oversampled, band-limited input is sampled unchanged
    ComplexEnvelope fine(TimeGrid{q.t0, q.dt / 4, q.size() * 4}, UnitMode::normalized);
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const double t = fine.time(i);
        fine.samples[i] = std::exp(-0.05 * (t - 29.0) * (t - 29.0));
    }
    const auto rx2 = adc_front_end(fine, c.samples_per_symbol, c.symbol_time(), c.N_b);
    CHECK(std::abs(rx2.windows[3][2] - std::exp(-0.05 * std::pow(5.5 - 29.0, 2))) < 1e-9);

    CHECK_THROWS_AS(adc_front_end(q, c.samples_per_symbol, c.symbol_time(), 40), Error);
}

TEST_CASE("ADC noise variance is N0 nu / T_s") {
    const double Ts = 2.0;
    const int nu = 8;
    ComplexEnvelope zero(TimeGrid{-1.0, Ts / (4 * nu), 1 << 18}, UnitMode::normalized);
    Rng rng(5);
    const double N0 = 1e-3;
    const auto rx = adc_front_end(awgn_channel(zero, N0, rng), nu, Ts, (1 << 16) / nu - 1);
    double var = 0.0;
    std::size_t n = 0;
    for (const auto& w : rx.windows)
        for (const auto& v : w) {
            var += std::norm(v);
            ++n;
        }
    CHECK(var / static_cast<double>(n) == doctest::Approx(N0 * nu / Ts).epsilon(0.01));
}

TEST_CASE("noiseless detection recovers the burst") {
    auto c = config_for(16, 16, 16, 0.35);
    const auto b = random_burst(c, 2);
    const auto rx = noiseless_windows(b, c);
    const auto df = df_bnft_detect(rx, c);
    const auto genie = genie_df_detect(rx, c, b);
    CHECK(df.decided == indices(b, c.constellation));
    CHECK(genie.decided == df.decided);
    for (std::size_t k = 0; k < df.decided.size(); ++k)
        CHECK(df.per_step_distances[k][static_cast<std::size_t>(df.decided[k])] < 1e-20);
    check_row_minimum(df);

    c.precomp_length = 1.5;
    const auto fn = fnft_detect(transmit(b, [&] { auto cc = c; cc.precomp_length = 0; return cc; }()), c);
    CHECK(fn.decided == indices(b, c.constellation));
}

TEST_CASE("single-symbol detection is minimum distance over single pulses") {
    auto c = config_for(16, 1, 7, 0.5);
    const auto b = random_burst(c, 3);
    const auto q = noisy(transmit(b, c), 0.05, 9);
    const auto rx = adc_front_end(q, c.samples_per_symbol, c.symbol_time(), 1);
    const auto t = df_bnft_detect(rx, c);
    std::vector<double> d;
    for (const auto& x : c.constellation.points()) {
        const auto w = candidate_waveform({}, x, 1, c);
        double s = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) s += std::norm(rx.windows[0][j] - w[j]);
        d.push_back(s);
    }
    CHECK(t.decided[0] == std::min_element(d.begin(), d.end()) - d.begin());
}

TEST_CASE("genie and decision-feedback detection under noise") {
    auto c = config_for(16, 32, 32, 0.35);
    int df_err = 0;
    int genie_err = 0;
    for (unsigned s = 0; s < 20; ++s) {
        const auto b = random_burst(c, 100 + s);
        const auto rx = adc_front_end(noisy(transmit(b, c), 0.02, s), c.samples_per_symbol, c.symbol_time(), c.N_b);
        const auto df = df_bnft_detect(rx, c);
        const auto genie = genie_df_detect(rx, c, b);
        const auto table = genie_df_detect(rx, true_prefix_candidates(b, c));
        CHECK(table.decided == genie.decided);
        CHECK(df.decided[0] == genie.decided[0]);
        check_row_minimum(df);
        const auto truth = indices(b, c.constellation);
        bool df_clean = true;
        for (int k = 0; k < c.N_b; ++k) {
            df_err += df.decided[static_cast<std::size_t>(k)] != truth[static_cast<std::size_t>(k)];
            genie_err += genie.decided[static_cast<std::size_t>(k)] != truth[static_cast<std::size_t>(k)];
            df_clean = df_clean && df.decided[static_cast<std::size_t>(k)] == truth[static_cast<std::size_t>(k)];
        }
        if (df_clean) CHECK(genie.decided == df.decided);
    }
    CHECK(genie_err > 0);
    CHECK(genie_err <= df_err);
}

TEST_CASE("low-power FNFT detection equals the linear receiver") {
    auto c = config_for(16, 16, 16, 0.02);
    const auto b = random_burst(c, 4);
    const auto r = noisy(transmit(b, c), 2e-5, 11);
    const auto fn = fnft_detect(r, c);
    // r ~ sigma conj(s) at low power
    ComplexEnvelope s_hat = r;
    for (auto& v : s_hat.samples) v = static_cast<double>(c.sigma) * std::conj(v);
    const auto lin = linear_detect(s_hat, c);
    CHECK(fn.decided == lin.decided);
    int errors = 0;
    const auto truth = indices(b, c.constellation);
    for (std::size_t k = 0; k < truth.size(); ++k) errors += fn.decided[k] != truth[k];
    CHECK(errors > 0);
}

TEST_CASE("FNFT detection of a zero signal") {
    auto c = config_for(16, 8, 8, 0.3);
    ComplexEnvelope zero(c.grid(), UnitMode::normalized);
    const auto fn = fnft_detect(zero, c);
    for (int d : fn.decided) CHECK(d == c.constellation.nearest(cd{}));
}

TEST_CASE("phase offset compensation") {
    auto c = config_for(16, 8, 8, 0.35);
    const auto b = random_burst(c, 6);
    const auto ref = noiseless_windows(b, c);
    auto rotated = ref;
    for (auto& w : rotated.windows)
        for (auto& v : w) v *= std::polar(1.0, 0.3);
    const auto [fixed, alpha] = phase_offset_compensate(rotated, ref);
    CHECK(std::abs(alpha - 0.3) <= 1e-3);
    const auto [same, zero_alpha] = phase_offset_compensate(ref, ref);
    CHECK(zero_alpha == 0.0);
    CHECK_THROWS_AS(phase_offset_compensate(ref, ReceivedWindows{}), ValidationError);

    // compensation never increases the distance to the reference
    const auto q = noisy(transmit(b, c), 0.001, 3);
    auto rx = adc_front_end(q, c.samples_per_symbol, c.symbol_time(), c.N_b);
    for (auto& w : rx.windows)
        for (auto& v : w) v *= std::polar(1.0, -0.2);
    const auto [comp, a2] = phase_offset_compensate(rx, ref);
    auto dist = [&](const ReceivedWindows& x) {
        double d = 0.0;
        for (std::size_t k = 0; k < x.windows.size(); ++k)
            for (std::size_t j = 0; j < x.windows[k].size(); ++j) d += std::norm(x.windows[k][j] - ref.windows[k][j]);
        return d;
    };
    CHECK(dist(comp) <= dist(rx));
    CHECK(std::abs(a2 + 0.2) < 0.05);
}

TEST_CASE("optimum sequence detection") {
    auto c = config_for(4, 2, 6, 0.4);
    const auto b = random_burst(c, 7);
    CHECK(indices(optimum_sequence_detect(noiseless_windows(b, c), c), c.constellation) == indices(b, c.constellation));

    // brute force over all 16 compound waveforms
    const auto rx = adc_front_end(noisy(transmit(b, c), 0.3, 5), c.samples_per_symbol, c.symbol_time(), c.N_b);
    double best = 1e300;
    std::vector<int> best_idx;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const auto cand = noiseless_windows(Burst::from_indices(c.constellation, {i, j}, c.N_z), c);
            double d = 0.0;
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t s = 0; s < cand.windows[k].size(); ++s) d += std::norm(rx.windows[k][s] - cand.windows[k][s]);
            if (d < best) {
                best = d;
                best_idx = {i, j};
            }
        }
    CHECK(indices(optimum_sequence_detect(rx, c), c.constellation) == best_idx);

    auto big = config_for(16, 10, 6, 0.4);
    const auto rxb = noiseless_windows(random_burst(big, 1), big);
    CHECK_THROWS_WITH(optimum_sequence_detect(rxb, big), "sequence space too large");
}
