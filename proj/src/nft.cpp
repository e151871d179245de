#include "nfdm/nft.hpp"

#include "nfdm/fft.hpp"
#include "nfdm/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nfdm {

void NonlinearSpectrum::validate() const {
    if (!(dlambda > 0.0)) throw ValidationError("NonlinearSpectrum: dlambda must be positive");
    if (sigma != 1 && sigma != -1) throw ValidationError("sigma must be +1 or -1");
    for (const auto& r : rho)
        if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
            throw ValidationError("NonlinearSpectrum: non-finite rho");
}

GlmeKernel kernel_from_spectrum(const NonlinearSpectrum& spec, const TimeGrid& y_grid) {
    if (y_grid.size == 0) throw ValidationError("kernel_from_spectrum: empty y grid");
    spec.validate();
    GlmeKernel out;
    out.y0 = y_grid.t0;
    out.dy = y_grid.dt;
    out.F.assign(y_grid.size, cd{});
    const std::size_t N = spec.size();
    if (N == 0) return out;

    double peak = 0.0;
    for (const auto& r : spec.rho) peak = std::max(peak, std::abs(r));
    if (peak > 0.0 && std::max(std::abs(spec.rho.front()), std::abs(spec.rho.back())) > 1e-3 * peak)
        warn_once("kernel_from_spectrum: spectrum does not decay toward the grid edges");

    const double scale = spec.dlambda / (2.0 * std::numbers::pi);
    const double cycles = spec.dlambda * y_grid.dt * static_cast<double>(N) / (2.0 * std::numbers::pi);
    if (std::abs(cycles - 1.0) < 1e-12) {
        // exp(j lambda_i y_n) = exp(j lambda0 y_n) exp(j i dlambda y0) exp(j 2 pi i n / N)
        CVector c(N);
        for (std::size_t i = 0; i < N; ++i)
            c[i] = spec.rho[i] * std::polar(1.0, static_cast<double>(i) * spec.dlambda * y_grid.t0);
        fft_backward(c);
        for (std::size_t n = 0; n < y_grid.size; ++n) {
            const double y = y_grid.at(n);
            out.F[n] = scale * c[n % N] * std::polar(1.0, spec.lambda0 * y);
        }
        return out;
    }
    for (std::size_t n = 0; n < y_grid.size; ++n) {
        const double y = y_grid.at(n);
        cd acc{};
        for (std::size_t i = 0; i < N; ++i) acc += spec.rho[i] * std::polar(1.0, spec.lambda(i) * y);
        out.F[n] = scale * acc;
    }
    return out;
}

BackwardNftResult backward_nft_detailed(const NonlinearSpectrum& spec, const TimeGrid& t_grid,
                                        const BackwardNftOptions& opts) {
    if (t_grid.size == 0) throw ValidationError("backward_nft: empty time grid");
    if (!(t_grid.dt > 0.0)) throw ValidationError("backward_nft: dt must be positive");
    const TimeGrid y_grid{2.0 * t_grid.t0, 2.0 * t_grid.dt, t_grid.size};
    const auto kernel = kernel_from_spectrum(spec, y_grid);
    BackwardNftResult out;
    out.solve = solve_glme(kernel.F, y_grid.dt, spec.sigma, opts);
    out.signal = ComplexEnvelope(t_grid, UnitMode::normalized);
    for (std::size_t i = 0; i < t_grid.size; ++i) out.signal.samples[i] = -2.0 * out.solve.K_diag[i];
    return out;
}

ComplexEnvelope backward_nft(const NonlinearSpectrum& spec, const TimeGrid& t_grid, const BackwardNftOptions& opts) {
    return backward_nft_detailed(spec, t_grid, opts).signal;
}

namespace {

void check_boundary(const ComplexEnvelope& sig, double tol) {
    if (!std::isfinite(tol)) return;
    double peak = 0.0;
    for (const auto& v : sig.samples) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return;
    const double edge = std::max(std::abs(sig.samples.front()), std::abs(sig.samples.back()));
    if (edge > tol * peak) throw Error("forward_nft: non-vanishing boundary");
}

// Interaction picture w = diag(e^{j lambda t}, e^{-j lambda t}) v, so a = w1 and
// b = w2 at the end of the grid.
cd peel_split(const ComplexEnvelope& sig, const CVector& c, const CVector& qs, double lambda, int sigma) {
    const double s = static_cast<double>(sigma);
    const std::size_t n = sig.size();
    cd w1{1.0, 0.0};
    cd w2{};
    const cd step = std::polar(1.0, 2.0 * lambda * sig.dt);
    cd z = std::polar(1.0, 2.0 * lambda * sig.t0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 256 == 0) z = std::polar(1.0, 2.0 * lambda * sig.time(i));
        const cd k12 = qs[i] * z;
        const cd k21 = -s * std::conj(k12);
        const cd n1 = c[i] * w1 + k12 * w2;
        const cd n2 = k21 * w1 + c[i] * w2;
        w1 = n1;
        w2 = n2;
        z *= step;
    }
    if (std::abs(w1) < 1e-12) throw Error("a(lambda) vanishes");
    return w2 / w1;
}

cd peel_piecewise(const ComplexEnvelope& sig, double lambda, int sigma) {
    const double s = static_cast<double>(sigma);
    const double dt = sig.dt;
    cd w1{1.0, 0.0};
    cd w2{};
    const cd ph = std::polar(1.0, lambda * dt);
    for (std::size_t i = 0; i < sig.size(); ++i) {
        const cd q = sig.samples[i];
        const double k2 = -lambda * lambda - s * std::norm(q);
        double C;
        double S;
        if (k2 > 0.0) {
            const double k = std::sqrt(k2);
            C = std::cosh(k * dt);
            S = std::sinh(k * dt) / k;
        } else if (k2 < 0.0) {
            const double k = std::sqrt(-k2);
            C = std::cos(k * dt);
            S = std::sin(k * dt) / k;
        } else {
            C = 1.0;
            S = dt;
        }
        const cd z = std::polar(1.0, 2.0 * lambda * sig.time(i));
        const cd m11 = (C - cd{0.0, lambda * S}) * ph;
        const cd m22 = (C + cd{0.0, lambda * S}) * std::conj(ph);
        const cd m12 = S * q * z;
        const cd m21 = -s * S * std::conj(q) * std::conj(z);
        const cd n1 = m11 * w1 + m12 * w2;
        const cd n2 = m21 * w1 + m22 * w2;
        w1 = n1;
        w2 = n2;
    }
    if (std::abs(w1) < 1e-12) throw Error("a(lambda) vanishes");
    return w2 / w1;
}

}  // namespace

NonlinearSpectrum forward_nft(const ComplexEnvelope& sig, const LambdaGrid& grid, int sigma,
                              const ForwardNftOptions& opts) {
    require_mode(sig, UnitMode::normalized, "forward_nft");
    if (sig.size() == 0) throw ValidationError("empty signal");
    if (sigma != 1 && sigma != -1) throw ValidationError("sigma must be +1 or -1");
    if (!(grid.dlambda > 0.0)) throw ValidationError("forward_nft: dlambda must be positive");
    check_boundary(sig, opts.boundary_tolerance);

    NonlinearSpectrum out;
    out.lambda0 = grid.lambda0;
    out.dlambda = grid.dlambda;
    out.sigma = sigma;
    out.rho.resize(grid.size);

    if (opts.scheme == LayerPeelingScheme::split_kick) {
        const std::size_t n = sig.size();
        CVector c(n);
        CVector qs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const cd Q = sig.samples[i] * sig.dt;
            const double aq = std::abs(Q);
            double cc;
            double sn;
            if (sigma == 1) {
                cc = std::cos(aq);
                sn = aq > 0.0 ? std::sin(aq) / aq : 1.0;
            } else {
                cc = std::cosh(aq);
                sn = aq > 0.0 ? std::sinh(aq) / aq : 1.0;
            }
            c[i] = cc;
            qs[i] = Q * sn;
        }
        for (std::size_t k = 0; k < grid.size; ++k) out.rho[k] = peel_split(sig, c, qs, grid.at(k), sigma);
    } else {
        for (std::size_t k = 0; k < grid.size; ++k) out.rho[k] = peel_piecewise(sig, grid.at(k), sigma);
    }
    return out;
}

NonlinearSpectrum spectral_rotation(const NonlinearSpectrum& spec, double L_norm, RotationDirection dir) {
    if (L_norm < 0.0) throw ValidationError("spectral_rotation: L must be non-negative");
    NonlinearSpectrum out = spec;
    const double sign = dir == RotationDirection::pre ? 1.0 : -1.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double lam = spec.lambda(i);
        out.rho[i] *= std::polar(1.0, sign * 4.0 * lam * lam * L_norm);
    }
    return out;
}

ComplexEnvelope born_approximation(const NonlinearSpectrum& spec, const TimeGrid& t_grid) {
    const TimeGrid y_grid{2.0 * t_grid.t0, 2.0 * t_grid.dt, t_grid.size};
    const auto kernel = kernel_from_spectrum(spec, y_grid);
    ComplexEnvelope out(t_grid, UnitMode::normalized);
    for (std::size_t i = 0; i < t_grid.size; ++i)
        out.samples[i] = -2.0 * static_cast<double>(spec.sigma) * std::conj(kernel.F[i]);
    return out;
}

double nonlinear_energy(const NonlinearSpectrum& spec) {
    const double s = static_cast<double>(spec.sigma);
    double acc = 0.0;
    for (const auto& r : spec.rho) {
        const double arg = 1.0 + s * std::norm(r);
        if (!(arg > 0.0)) throw Error("nonlinear_energy: |rho| >= 1 in defocusing regime");
        acc += std::log(arg);
    }
    return s * acc * spec.dlambda / std::numbers::pi;
}

}  // namespace nfdm
