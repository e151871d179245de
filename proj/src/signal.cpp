#include "nfdm/signal.hpp"

#include "nfdm/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nfdm {

const char* to_string(UnitMode mode) {
    return mode == UnitMode::physical ? "physical" : "normalized";
}

ComplexEnvelope::ComplexEnvelope(CVector s, double t0_, double dt_, UnitMode m)
    : samples(std::move(s)), t0(t0_), dt(dt_), mode(m) {
    if (!(dt > 0.0)) throw ValidationError("ComplexEnvelope: dt must be positive");
}

ComplexEnvelope::ComplexEnvelope(const TimeGrid& grid, UnitMode m)
    : ComplexEnvelope(CVector(grid.size), grid.t0, grid.dt, m) {}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void require_mode(const ComplexEnvelope& sig, UnitMode mode, const char* where) {
    if (sig.mode != mode) {
        throw ValidationError(std::string(where) + ": expected " + to_string(mode) +
                              " units, got " + to_string(sig.mode));
    }
}

FrequencyEnvelope forward_ft(const ComplexEnvelope& sig) {
    const std::size_t n = sig.size();
    if (n == 0) throw ValidationError("empty signal");
    if (!is_power_of_two(n)) throw ValidationError("forward_ft: length must be a power of two");
    CVector x = sig.samples;
    fft_forward(x);
    FrequencyEnvelope out;
    out.df = 1.0 / (static_cast<double>(n) * sig.dt);
    out.f0 = -static_cast<double>(n / 2) * out.df;
    out.t_origin = sig.t0;
    out.mode = sig.mode;
    out.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = (k + n - n / 2) % n;
        const double f = out.frequency(k);
        out.values[k] = sig.dt * x[src] * std::polar(1.0, -2.0 * std::numbers::pi * f * sig.t0);
    }
    return out;
}

ComplexEnvelope inverse_ft(const FrequencyEnvelope& spec) {
    const std::size_t n = spec.size();
    if (n == 0) throw ValidationError("empty signal");
    if (!is_power_of_two(n)) throw ValidationError("inverse_ft: length must be a power of two");
    const double dt = 1.0 / (static_cast<double>(n) * spec.df);
    // The time grid is tied to f_k = (k - N/2) df; f0 must sit on it.
    const long long offset = std::llround(spec.f0 / spec.df);
    CVector x(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = spec.frequency(k);
        const long long idx = static_cast<long long>(k) + offset;
        const auto dst = static_cast<std::size_t>(((idx % static_cast<long long>(n)) + static_cast<long long>(n)) %
                                                  static_cast<long long>(n));
        x[dst] = spec.values[k] * std::polar(1.0, 2.0 * std::numbers::pi * f * spec.t_origin);
    }
    fft_backward(x);
    for (auto& v : x) v *= spec.df;
    return ComplexEnvelope(std::move(x), spec.t_origin, dt, spec.mode);
}

double signal_energy(const ComplexEnvelope& sig) {
    double e = 0.0;
    for (const auto& v : sig.samples) e += std::norm(v);
    return e * sig.dt;
}

double spectrum_energy(const FrequencyEnvelope& spec) {
    double e = 0.0;
    for (const auto& v : spec.values) e += std::norm(v);
    return e * spec.df;
}

ComplexEnvelope time_reverse(const ComplexEnvelope& sig) {
    ComplexEnvelope out = sig;
    std::reverse(out.samples.begin(), out.samples.end());
    out.t0 = -(sig.t0 + static_cast<double>(sig.size() - 1) * sig.dt);
    return out;
}

ComplexEnvelope zero_pad(const ComplexEnvelope& sig, std::size_t new_size) {
    if (new_size < sig.size()) throw ValidationError("zero_pad: new size smaller than signal");
    ComplexEnvelope out = sig;
    out.samples.resize(new_size, cd{0.0, 0.0});
    return out;
}

double l2_norm(std::span<const cd> x) {
    double s = 0.0;
    for (const auto& v : x) s += std::norm(v);
    return std::sqrt(s);
}

double relative_l2(std::span<const cd> x, std::span<const cd> reference) {
    if (x.size() != reference.size()) throw ValidationError("relative_l2: size mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += std::norm(x[i] - reference[i]);
        den += std::norm(reference[i]);
    }
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num / den);
}

}  // namespace nfdm
