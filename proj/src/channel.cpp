#include "nfdm/channel.hpp"

#include "nfdm/fft.hpp"

#include <cmath>
#include <numbers>

namespace nfdm {

FiberLink FiberLink::from_engineering(double beta2_ps2_per_km, double gamma_per_w_km, double alpha_db_per_km,
                                      double length_km, double eta_sp, double carrier_thz) {
    FiberLink l;
    l.beta2 = beta2_ps2_per_km * 1e-24 / 1e3;
    l.gamma = gamma_per_w_km / 1e3;
    l.alpha_att = alpha_db_per_km * std::log(10.0) / 10.0 / 1e3;
    l.length = length_km * 1e3;
    l.eta_sp = eta_sp;
    l.carrier_freq = carrier_thz * 1e12;
    return l;
}

void FiberLink::validate() const {
    if (!(length > 0.0)) throw ValidationError("fiber length must be positive");
    if (!(eta_sp >= 1.0)) throw ValidationError("eta_sp must be at least 1");
    if (!(alpha_att >= 0.0)) throw ValidationError("attenuation must be non-negative");
    if (!(carrier_freq > 0.0)) throw ValidationError("carrier frequency must be positive");
    if (ase_polarizations != 1 && ase_polarizations != 2) throw ValidationError("ase_polarizations must be 1 or 2");
    if (!std::isfinite(beta2) || !std::isfinite(gamma)) throw ValidationError("fiber parameters must be finite");
}

double FiberLink::ase_psd(double distance) const {
    return ase_polarizations * eta_sp * kPlanck * carrier_freq * alpha_att * distance;
}

Normalization Normalization::from_link(const FiberLink& link, double T0) {
    if (!(T0 > 0.0)) throw ValidationError("T0 must be positive");
    if (link.beta2 == 0.0 || link.gamma == 0.0) throw ValidationError("normalization needs nonzero beta2 and gamma");
    Normalization n;
    n.T0 = T0;
    n.Z0 = 2.0 * T0 * T0 / std::abs(link.beta2);
    n.P0 = std::abs(link.beta2) / (std::abs(link.gamma) * T0 * T0);
    return n;
}

ComplexEnvelope normalize(const ComplexEnvelope& sig, const Normalization& norm) {
    require_mode(sig, UnitMode::physical, "normalize");
    ComplexEnvelope out = sig;
    const double a = 1.0 / std::sqrt(norm.P0);
    for (auto& v : out.samples) v *= a;
    out.t0 = sig.t0 / norm.T0;
    out.dt = sig.dt / norm.T0;
    out.mode = UnitMode::normalized;
    return out;
}

ComplexEnvelope denormalize(const ComplexEnvelope& sig, const Normalization& norm) {
    require_mode(sig, UnitMode::normalized, "denormalize");
    ComplexEnvelope out = sig;
    const double a = std::sqrt(norm.P0);
    for (auto& v : out.samples) v *= a;
    out.t0 = sig.t0 * norm.T0;
    out.dt = sig.dt * norm.T0;
    out.mode = UnitMode::physical;
    return out;
}

namespace {

void add_noise(CVector& x, double variance, Rng& rng) {
    if (variance <= 0.0) return;
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * variance));
    for (auto& v : x) v += cd{nd(rng), nd(rng)};
}

CVector dispersion_phase(std::size_t n, double dt, double beta2, double dz) {
    const auto w = fft_angular_frequencies(n, dt);
    CVector h(n);
    for (std::size_t k = 0; k < n; ++k) h[k] = std::polar(1.0, -0.5 * beta2 * w[k] * w[k] * dz);
    return h;
}

void apply_linear(CVector& x, const CVector& h) {
    fft_forward(x);
    const double inv = 1.0 / static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] *= h[k] * inv;
    fft_backward(x);
}

CVector split_step(CVector x, double dt, double beta2, double gamma, double dz, std::size_t steps, double noise_var,
                   Rng* rng) {
    const auto half = dispersion_phase(x.size(), dt, beta2, 0.5 * dz);
    for (std::size_t s = 0; s < steps; ++s) {
        if (beta2 != 0.0) apply_linear(x, half);
        if (gamma != 0.0)
            for (auto& v : x) v *= std::polar(1.0, -gamma * std::norm(v) * dz);
        if (beta2 != 0.0) apply_linear(x, half);
        if (rng) add_noise(x, noise_var, *rng);
        if (s % 64 == 63 || s + 1 == steps) {
            for (const auto& v : x)
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error("step too large");
        }
    }
    return x;
}

std::size_t step_count(double length, double dz) {
    if (!(dz > 0.0)) throw ValidationError("dz must be positive");
    const double ratio = length / dz;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * ratio)
        throw ValidationError("dz must divide the fiber length");
    return steps;
}

}  // namespace

ComplexEnvelope ssfm_propagate(const ComplexEnvelope& sig, const FiberLink& link, double dz, NoiseKind noise,
                               Rng& rng) {
    require_mode(sig, UnitMode::physical, "ssfm_propagate");
    link.validate();
    if (!is_power_of_two(sig.size())) throw ValidationError("ssfm_propagate: length must be a power of two");
    const std::size_t steps = step_count(link.length, dz);
    const double step_dz = link.length / static_cast<double>(steps);
    const bool noisy = noise == NoiseKind::distributed;
    const double var = noisy ? link.ase_psd(step_dz) / sig.dt : 0.0;
    ComplexEnvelope out = sig;
    out.samples = split_step(sig.samples, sig.dt, link.beta2, link.gamma, step_dz, steps, var, noisy ? &rng : nullptr);
    return out;
}

ComplexEnvelope awgn_channel(const ComplexEnvelope& sig, double N0, Rng& rng) {
    if (!(N0 >= 0.0)) throw ValidationError("N0 must be non-negative");
    ComplexEnvelope out = sig;
    add_noise(out.samples, N0 / sig.dt, rng);
    return out;
}

ComplexEnvelope edc(const ComplexEnvelope& sig, const FiberLink& link) {
    require_mode(sig, UnitMode::physical, "edc");
    ComplexEnvelope out = sig;
    apply_linear(out.samples, dispersion_phase(sig.size(), sig.dt, -link.beta2, link.length));
    return out;
}

ComplexEnvelope dbp(const ComplexEnvelope& sig, const FiberLink& link, int steps_per_span, double span_length) {
    require_mode(sig, UnitMode::physical, "dbp");
    if (steps_per_span < 1) throw ValidationError("dbp: steps per span must be positive");
    if (!(span_length > 0.0)) throw ValidationError("dbp: span length must be positive");
    const auto spans = static_cast<std::size_t>(std::ceil(link.length / span_length - 1e-9));
    const std::size_t steps = spans * static_cast<std::size_t>(steps_per_span);
    const double dz = link.length / static_cast<double>(steps);
    ComplexEnvelope out = sig;
    out.samples = split_step(sig.samples, sig.dt, -link.beta2, -link.gamma, dz, steps, 0.0, nullptr);
    return out;
}

ComplexEnvelope lowpass(const ComplexEnvelope& sig, double cutoff) {
    ComplexEnvelope out = sig;
    CVector& x = out.samples;
    fft_forward(x);
    const auto w = fft_angular_frequencies(x.size(), sig.dt);
    const double inv = 1.0 / static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
        x[k] = std::abs(w[k]) <= 2.0 * std::numbers::pi * cutoff * (1.0 + 1e-12) ? x[k] * inv : cd{};
    fft_backward(x);
    return out;
}

}  // namespace nfdm
