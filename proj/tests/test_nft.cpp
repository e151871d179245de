#include <doctest.h>

#include "nfdm/nft.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace nfdm;

namespace {

CVector random_kernel(std::size_t n, double amp, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CVector f(n);
    for (auto& v : f) v = amp * cd{nd(rng), nd(rng)};
    return f;
}

// Spectrum on the lambda grid matched to a time grid of n samples with spacing dt.
NonlinearSpectrum smooth_spectrum(std::size_t n, double dt, double amp, int sigma = 1) {
    NonlinearSpectrum s;
    s.dlambda = std::numbers::pi / (static_cast<double>(n) * dt);
    s.lambda0 = -static_cast<double>(n / 2) * s.dlambda;
    s.sigma = sigma;
    s.rho.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double l = s.lambda(i);
        s.rho[i] = amp * std::exp(-l * l / 2.0) * std::polar(1.0, 3.0 * l) * cd{1.0, 0.4 * l};
    }
    return s;
}

TimeGrid centred_grid(std::size_t n, double dt) { return {-static_cast<double>(n / 2) * dt, dt, n}; }

}  // namespace

TEST_CASE("structured solver equals dense Nystrom") {
    for (int sigma : {1, -1}) {
        const auto f = random_kernel(40, sigma == 1 ? 0.3 : 0.1, 11);
        BackwardNftOptions dense;
        dense.method = GlmeMethod::dense;
        const auto ref = solve_glme(f, 0.5, sigma, dense);
        const auto fast = solve_glme(f, 0.5, sigma);
        CHECK(ref.residual < 1e-12);
        CHECK(fast.residual < 1e-12);
        CHECK(relative_l2(fast.K_diag, ref.K_diag) < 1e-12);
    }
}

TEST_CASE("streaming recursion reports the full-system residual") {
    const auto f = random_kernel(64, 0.4, 3);
    GlmeRecursion rec(0.25, 1);
    for (auto it = f.rbegin(); it != f.rend(); ++it) rec.push(*it);
    CHECK(rec.size() == 64);
    CHECK(rec.residual() < 1e-12);
}

TEST_CASE("residual above tolerance is reported") {
    const auto f = random_kernel(16, 0.3, 5);
    BackwardNftOptions opts;
    opts.tolerance = 0.0;
    CHECK_THROWS_AS(solve_glme(f, 0.5, 1, opts), Error);
}

TEST_CASE("zero spectrum gives zero signal") {
    auto s = smooth_spectrum(64, 0.25, 0.0);
    const auto r = backward_nft(s, centred_grid(64, 0.25));
    for (const auto& v : r.samples) CHECK(v == cd{});
    ComplexEnvelope zero(centred_grid(64, 0.25), UnitMode::normalized);
    const auto rho = forward_nft(zero, s.grid(), 1);
    for (const auto& v : rho.rho) CHECK(v == cd{});
}

TEST_CASE("kernel is linear and matches the band-limited closed form") {
    const std::size_t n = 512;
    const double dt = 0.1;
    auto s = smooth_spectrum(n, dt, 0.0);
    const double band = 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double l = s.lambda(i);
        if (std::abs(l) < band - 1e-9) s.rho[i] = 1.0;
        if (std::abs(std::abs(l) - band) < 1e-9) s.rho[i] = 0.5;
    }
    const TimeGrid y{-3.0, 0.2, 31};
    const auto F = kernel_from_spectrum(s, y);
    double worst = 0.0;
    for (std::size_t k = 0; k < y.size; ++k) {
        const double yy = y.at(k);
        const double exact = std::abs(yy) < 1e-12 ? band / std::numbers::pi : std::sin(band * yy) / (std::numbers::pi * yy);
        worst = std::max(worst, std::abs(F.F[k] - exact));
    }
    CHECK(worst < 2e-3);

    auto s2 = s;
    for (auto& v : s2.rho) v *= cd{0.0, 3.0};
    const auto F2 = kernel_from_spectrum(s2, y);
    for (std::size_t k = 0; k < y.size; ++k) CHECK(std::abs(F2.F[k] - cd{0.0, 3.0} * F.F[k]) < 1e-12);

    // FFT path agrees with direct summation
    const auto sm = smooth_spectrum(n, dt, 0.7);
    const TimeGrid fft_grid{-25.6, 2 * dt, n};
    const auto fast = kernel_from_spectrum(sm, fft_grid);
    const TimeGrid odd_grid{-25.6, 2 * dt * (1 + 1e-9), n};
    const auto slow = kernel_from_spectrum(sm, odd_grid);
    CHECK(relative_l2(fast.F, slow.F) < 1e-6);

    CHECK_THROWS_AS(kernel_from_spectrum(sm, TimeGrid{0.0, 1.0, 0}), ValidationError);
}

TEST_CASE("sech potential matches the analytic reflection coefficient") {
    const std::size_t n = 2048;
    const double dt = 1.0 / 32.0;
    ComplexEnvelope q(centred_grid(n, dt), UnitMode::normalized);
    for (std::size_t i = 0; i < n; ++i) q.samples[i] = 0.3 / std::cosh(q.time(i));
    for (auto scheme : {LayerPeelingScheme::split_kick, LayerPeelingScheme::piecewise_constant}) {
        // the piecewise-constant scheme carries a larger O((lambda dt)^2) error
        const LambdaGrid grid = scheme == LayerPeelingScheme::split_kick ? LambdaGrid{-3.0, 0.05, 121}
                                                                         : LambdaGrid{-2.0, 0.05, 81};
        ForwardNftOptions opts;
        opts.scheme = scheme;
        const auto rho = forward_nft(q, grid, 1, opts);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size; ++i) {
            const cd exact = oracle::sech_rho(0.3, grid.at(i));
            worst = std::max(worst, std::abs(rho.rho[i] - exact) / std::abs(exact));
        }
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("forward_nft rejects non-vanishing boundaries") {
    ComplexEnvelope q(centred_grid(64, 0.1), UnitMode::normalized);
    for (auto& v : q.samples) v = 0.1;
    CHECK_THROWS_WITH(forward_nft(q, LambdaGrid{-1.0, 0.1, 21}, 1), "forward_nft: non-vanishing boundary");
    ForwardNftOptions relaxed;
    relaxed.boundary_tolerance = std::numeric_limits<double>::infinity();
    CHECK_NOTHROW(forward_nft(q, LambdaGrid{-1.0, 0.1, 21}, 1, relaxed));
}

TEST_CASE("round trips") {
    const std::size_t n = 512;
    const double dt = 0.125;
    const auto grid = centred_grid(n, dt);
    for (int sigma : {1, -1}) {
        const auto s = smooth_spectrum(n, dt, sigma == 1 ? 0.8 : 0.4, sigma);
        const auto q = backward_nft(s, grid);
        const auto back = forward_nft(q, s.grid(), sigma);
        CHECK(relative_l2(back.rho, s.rho) < 1e-3);
        // energy identity
        CHECK(signal_energy(q) == doctest::Approx(nonlinear_energy(s)).epsilon(1e-3));
        const auto q2 = backward_nft(back, grid);
        CHECK(relative_l2(q2.samples, q.samples) < 1e-3);
    }
}

TEST_CASE("Born limit is approached quadratically") {
    const std::size_t n = 256;
    const double dt = 0.125;
    const auto grid = centred_grid(n, dt);
    const auto base = smooth_spectrum(n, dt, 1.0);
    std::vector<double> dev;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        auto s = base;
        for (auto& v : s.rho) v *= eps;
        const auto r = backward_nft(s, grid);
        const auto born = born_approximation(s, grid);
        const auto F = kernel_from_spectrum(s, TimeGrid{2 * grid.t0, 2 * dt, n});
        dev.push_back(relative_l2(r.samples, born.samples) * l2_norm(born.samples) / (2.0 * l2_norm(F.F)));
    }
    const double slope1 = std::log10(dev[0] / dev[1]);
    const double slope2 = std::log10(dev[1] / dev[2]);
    CHECK(slope1 == doctest::Approx(2.0).epsilon(0.1));
    CHECK(slope2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("output for t >= tau ignores F(y) for y < 2 tau") {
    const auto f = random_kernel(96, 0.3, 19);
    auto truncated = f;
    const std::size_t cut = 40;
    for (std::size_t m = 0; m < cut; ++m) truncated[m] = 0.0;
    const auto a = solve_glme(f, 0.25, 1);
    const auto b = solve_glme(truncated, 0.25, 1);
    for (std::size_t m = cut; m < f.size(); ++m) CHECK(std::abs(a.K_diag[m] - b.K_diag[m]) <= 1e-6 * std::abs(a.K_diag[m]));
}

TEST_CASE("defocusing with unit reflection is ill-conditioned") {
    auto s = smooth_spectrum(64, 0.25, 0.0, -1);
    for (auto& v : s.rho) v = 1.0;
    CHECK_THROWS_WITH(backward_nft(s, centred_grid(64, 0.25)), "GLME system ill-conditioned");
}

TEST_CASE("spectral rotation") {
    const auto s = smooth_spectrum(128, 0.25, 0.5);
    const auto same = spectral_rotation(s, 0.0, RotationDirection::pre);
    CHECK(same.rho == s.rho);
    const auto pre = spectral_rotation(s, 3.7, RotationDirection::pre);
    const auto back = spectral_rotation(pre, 3.7, RotationDirection::channel);
    CHECK(relative_l2(back.rho, s.rho) < 1e-15);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(pre.rho[i]) == doctest::Approx(std::abs(s.rho[i])));
    CHECK_THROWS(spectral_rotation(s, -1.0, RotationDirection::pre));
}
