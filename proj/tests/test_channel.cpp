#include <doctest.h>

#include "nfdm/channel.hpp"
#include "nfdm/modem.hpp"
#include "nfdm/nft.hpp"

#include <cmath>
#include <numbers>

using namespace nfdm;

namespace {

FiberLink reference_link(double length_km) { return FiberLink::from_engineering(-20.39, 1.22, 0.2, length_km); }

ComplexEnvelope physical_pulse_train(std::size_t n, double dt, double peak_w) {
    ComplexEnvelope s(TimeGrid{-0.5 * n * dt, dt, n}, UnitMode::physical);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = s.time(i) / 20e-12;
        s.samples[i] = std::sqrt(peak_w) * (std::exp(-12.5 * (t - 0.3) * (t - 0.3)) + cd{0.0, 0.5} * std::exp(-12.5 * (t + 1.1) * (t + 1.1)));
    }
    return s;
}

}  // namespace

TEST_CASE("engineering units") {
    const auto l = reference_link(2000);
    CHECK(l.beta2 == doctest::Approx(-20.39e-27));
    CHECK(l.gamma == doctest::Approx(1.22e-3));
    CHECK(l.alpha_att == doctest::Approx(4.605170e-5).epsilon(1e-6));
    const auto n = Normalization::from_link(l, 10e-12);
    CHECK(n.P0 == doctest::Approx(0.16713).epsilon(1e-4));
    CHECK(n.Z0 == doctest::Approx(9809.7).epsilon(1e-4));
    CHECK(n.length_norm(2000e3) == doctest::Approx(203.88).epsilon(1e-4));
}

TEST_CASE("normalization round trip and soliton peak power") {
    const auto l = reference_link(100);
    const auto norm = Normalization::from_link(l, 10e-12);
    ComplexEnvelope q(TimeGrid{-10.0, 0.05, 400}, UnitMode::normalized);
    for (std::size_t i = 0; i < q.size(); ++i) q.samples[i] = 1.0 / std::cosh(q.time(i));
    const auto p = denormalize(q, norm);
    CHECK(p.mode == UnitMode::physical);
    double peak = 0.0;
    for (const auto& v : p.samples) peak = std::max(peak, std::norm(v));
    CHECK(peak == doctest::Approx(norm.P0).epsilon(1e-3));
    const auto back = normalize(p, norm);
    CHECK(relative_l2(back.samples, q.samples) < 1e-12);
    CHECK(back.t0 == doctest::Approx(q.t0));
    CHECK(back.dt == doctest::Approx(q.dt));
    CHECK_THROWS_AS(normalize(q, norm), ValidationError);
}

TEST_CASE("dispersion-only propagation matches the analytic filter") {
    auto l = reference_link(80);
    l.gamma = 0.0;
    const auto s = physical_pulse_train(256, 1.25e-12, 1e-3);
    Rng rng(1);
    const auto out = ssfm_propagate(s, l, 1e3, NoiseKind::none, rng);
    // oracle: direct DFT of the input, analytic phase, direct inverse sum
    const std::size_t n = s.size();
    CVector S(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = (static_cast<double>(k) - static_cast<double>(n / 2)) / (static_cast<double>(n) * s.dt);
        cd acc{};
        for (std::size_t i = 0; i < n; ++i) acc += s.samples[i] * std::polar(1.0, -2.0 * std::numbers::pi * f * s.time(i));
        const double w = 2.0 * std::numbers::pi * f;
        S[k] = acc * s.dt * std::polar(1.0, -0.5 * l.beta2 * w * w * l.length);
    }
    CVector expect(n);
    const double df = 1.0 / (static_cast<double>(n) * s.dt);
    for (std::size_t i = 0; i < n; ++i) {
        cd acc{};
        for (std::size_t k = 0; k < n; ++k) {
            const double f = (static_cast<double>(k) - static_cast<double>(n / 2)) * df;
            acc += S[k] * std::polar(1.0, 2.0 * std::numbers::pi * f * s.time(i));
        }
        expect[i] = acc * df;
    }
    CHECK(relative_l2(out.samples, expect) < 1e-9);
    CHECK(relative_l2(edc(out, l).samples, s.samples) < 1e-9);
}

TEST_CASE("SPM-only propagation rotates the phase") {
    auto l = reference_link(80);
    l.beta2 = 0.0;
    const auto s = physical_pulse_train(256, 1.25e-12, 20e-3);
    Rng rng(1);
    const auto out = ssfm_propagate(s, l, 0.5e3, NoiseKind::none, rng);
    CVector expect(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        expect[i] = s.samples[i] * std::polar(1.0, -l.gamma * std::norm(s.samples[i]) * l.length);
    CHECK(relative_l2(out.samples, expect) < 1e-9);
}

TEST_CASE("noiseless propagation conserves energy") {
    const auto l = reference_link(200);
    const auto s = physical_pulse_train(512, 1.25e-12, 30e-3);
    Rng rng(1);
    const auto out = ssfm_propagate(s, l, 1e3, NoiseKind::none, rng);
    CHECK(std::abs(signal_energy(out) / signal_energy(s) - 1.0) < 1e-6);
    CHECK_THROWS_AS(ssfm_propagate(s, l, 0.0, NoiseKind::none, rng), ValidationError);
    CHECK_THROWS_AS(ssfm_propagate(s, l, 0.7e3, NoiseKind::none, rng), ValidationError);
}

TEST_CASE("fundamental soliton keeps its shape") {
    const auto l = reference_link(1);
    const auto norm = Normalization::from_link(l, 10e-12);
    const std::size_t n = 1024;
    ComplexEnvelope q(TimeGrid{-25.6, 0.05, n}, UnitMode::normalized);
    for (std::size_t i = 0; i < n; ++i) q.samples[i] = 1.0 / std::cosh(q.time(i));
    const double period = std::numbers::pi / 4.0;  // normalized units of z
    auto link = l;
    link.length = 10.0 * period * norm.Z0;
    Rng rng(1);
    const auto out = normalize(ssfm_propagate(denormalize(q, norm), link, link.length / 1280.0, NoiseKind::none, rng), norm);
    CVector shape(n);
    CVector initial(n);
    for (std::size_t i = 0; i < n; ++i) {
        shape[i] = std::abs(out.samples[i]);
        initial[i] = std::abs(q.samples[i]);
    }
    CHECK(relative_l2(shape, initial) < 1e-4);
    // the field itself, including the exp(-jz) phase, at twice the step count
    const auto fine = normalize(ssfm_propagate(denormalize(q, norm), link, link.length / 2560.0, NoiseKind::none, rng), norm);
    CVector expect(n);
    for (std::size_t i = 0; i < n; ++i) expect[i] = q.samples[i] * std::polar(1.0, -10.0 * period);
    CHECK(relative_l2(fine.samples, expect) < 1e-4);
}

TEST_CASE("backpropagation inverts noiseless propagation") {
    const auto l = reference_link(500);
    const auto s = physical_pulse_train(1024, 1.25e-12, 1e-3);
    Rng rng(1);
    const auto out = ssfm_propagate(s, l, 100.0, NoiseKind::none, rng);
    const auto back = dbp(out, l, 100, 100e3);
    CHECK(relative_l2(back.samples, s.samples) < 1e-4);

    ComplexEnvelope zero(s.grid(), UnitMode::physical);
    for (const auto& v : dbp(zero, l, 10, 100e3).samples) CHECK(v == cd{});

    auto linear = l;
    linear.gamma = 0.0;
    CHECK(relative_l2(dbp(s, linear, 7, 100e3).samples, edc(s, linear).samples) < 1e-10);
}

TEST_CASE("EDC residual grows with launch power") {
    const auto l = reference_link(200);
    Rng rng(1);
    std::vector<double> err;
    for (double p : {1e-3, 10e-3}) {
        const auto s = physical_pulse_train(512, 1.25e-12, p);
        const auto out = ssfm_propagate(s, l, 1e3, NoiseKind::none, rng);
        err.push_back(relative_l2(edc(out, l).samples, s.samples));
    }
    CHECK(err[1] > 5.0 * err[0]);
}

TEST_CASE("distributed noise accumulates to eta_sp h f alpha L") {
    const auto l = reference_link(2000);
    const std::size_t n = 1024;
    ComplexEnvelope zero(TimeGrid{0.0, 2.5e-12, n}, UnitMode::physical);
    double acc = 0.0;
    for (int run = 0; run < 100; ++run) {
        auto rng = make_stream(42, static_cast<std::uint64_t>(run), StreamTag::noise);
        const auto out = ssfm_propagate(zero, l, 20e3, NoiseKind::distributed, rng);
        for (const auto& v : out.samples) acc += std::norm(v);
    }
    const double psd = acc / (100.0 * n) * zero.dt;
    CHECK(psd == doctest::Approx(l.ase_psd(l.length)).epsilon(0.02));
    CHECK(l.ase_psd(l.length) == doctest::Approx(4.722e-17).epsilon(1e-3));
}

TEST_CASE("AWGN channel variance and SNR") {
    ComplexEnvelope s(TimeGrid{0.0, 0.25, 1 << 17}, UnitMode::normalized);
    for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] = std::polar(0.5, 0.01 * static_cast<double>(i));
    Rng rng(3);
    CHECK(awgn_channel(s, 0.0, rng).samples == s.samples);
    const double N0 = 0.02;
    const auto out = awgn_channel(s, N0, rng);
    double var = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) var += std::norm(out.samples[i] - s.samples[i]);
    var /= static_cast<double>(s.size());
    CHECK(var == doctest::Approx(N0 / s.dt).epsilon(0.01));
    // symbol time of 8 samples: Es/(N0 Rs) = 0.25 * 2 / (0.02 / 2)... expressed per sample
    const double snr = 0.25 / var;
    CHECK(snr == doctest::Approx(0.25 * s.dt / N0).epsilon(0.01));
}

TEST_CASE("low-power propagation rotates the nonlinear spectrum by exp(-j4 lambda^2 L)") {
    const auto l = reference_link(20);
    const auto norm = Normalization::from_link(l, 10e-12);
    ModemConfig c;
    c.N_b = 8;
    c.N_z = 56;
    c.guard_lead = 28;
    std::vector<int> idx{1, 7, 3, 12, 0, 15, 9, 4};
    const auto b = Burst::from_indices(c.constellation, idx, c.N_z);
    // the high-power residual is the O(dt^2) discretization of the transforms
    for (auto [gain, tol] : {std::pair{0.01, 1e-4}, std::pair{0.3, 1e-2}}) {
        c.gain = gain;
        c.precomp_length = norm.length_norm(l.length);
        const auto q = transmit(b, c);
        Rng rng(1);
        const auto r = normalize(ssfm_propagate(denormalize(q, norm), l, 100.0, NoiseKind::none, rng), norm);
        c.precomp_length = 0.0;
        const auto expect = transmit(b, c);
        CHECK(relative_l2(r.samples, expect.samples) < tol);
    }
}
