#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfdm {

using cd = std::complex<double>;
using CVector = std::vector<cd>;

// Numerical or physical failure inside a solver or channel model.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user input (bad configuration, bad arguments).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class UnitMode { physical, normalized };

const char* to_string(UnitMode mode);

struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    std::size_t size = 0;

    double at(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    double back() const { return at(size - 1); }
};

struct ComplexEnvelope {
    CVector samples;
    double t0 = 0.0;
    double dt = 1.0;
    UnitMode mode = UnitMode::normalized;

    ComplexEnvelope() = default;
    ComplexEnvelope(CVector s, double t0_, double dt_, UnitMode m);
    ComplexEnvelope(const TimeGrid& grid, UnitMode m);

    std::size_t size() const { return samples.size(); }
    double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    TimeGrid grid() const { return {t0, dt, samples.size()}; }
};

struct FrequencyEnvelope {
    CVector values;
    double f0 = 0.0;
    double df = 1.0;
    // Start time of the partner time grid, needed to undo the transform.
    double t_origin = 0.0;
    UnitMode mode = UnitMode::normalized;

    std::size_t size() const { return values.size(); }
    double frequency(std::size_t i) const { return f0 + static_cast<double>(i) * df; }
};

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

void require_mode(const ComplexEnvelope& sig, UnitMode mode, const char* where);

// S(f_k) = dt * sum_n s_n exp(-j 2 pi f_k t_n) on the centred grid f_k = (k - N/2) df.
FrequencyEnvelope forward_ft(const ComplexEnvelope& sig);
ComplexEnvelope inverse_ft(const FrequencyEnvelope& spec);

double signal_energy(const ComplexEnvelope& sig);
double spectrum_energy(const FrequencyEnvelope& spec);

ComplexEnvelope time_reverse(const ComplexEnvelope& sig);

// Appends zeros up to new_size samples.
ComplexEnvelope zero_pad(const ComplexEnvelope& sig, std::size_t new_size);

double l2_norm(std::span<const cd> x);
double relative_l2(std::span<const cd> x, std::span<const cd> reference);

}  // namespace nfdm
