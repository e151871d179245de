#pragma once

#include "nfdm/nft.hpp"
#include "nfdm/signal.hpp"

#include <vector>

namespace nfdm {

class Constellation {
public:
    // Square M-QAM with unit average energy and Gray labels, M in {4, 16, 64}.
    static Constellation qam(int M);

    int size() const { return static_cast<int>(points_.size()); }
    int bits_per_symbol() const { return bits_; }
    const CVector& points() const { return points_; }
    cd point(int i) const { return points_[static_cast<std::size_t>(i)]; }
    unsigned label(int i) const { return labels_[static_cast<std::size_t>(i)]; }

    // Index of an exact member, or -1.
    int index_of(cd x, double tol = 1e-9) const;
    // Minimum-distance decision; ties go to the lowest index.
    int nearest(cd y) const;

private:
    CVector points_;
    std::vector<unsigned> labels_;
    int bits_ = 0;
};

struct Burst {
    CVector symbols;
    int N_z = 0;

    int N_b() const { return static_cast<int>(symbols.size()); }
    static Burst from_indices(const Constellation& c, const std::vector<int>& idx, int N_z);
};

struct PulseShape {
    double width_param = 12.5;
    double symbol_time = 2.0;  // T_s in the units of the signal grid
    double support = 2.0;      // T <= T_s, pulse is zero outside [-T/2, T/2)

    double operator()(double t) const;
    // Fraction of the untruncated pulse energy outside the support.
    double leakage() const;
    void validate() const;
};

struct ModemConfig {
    Constellation constellation = Constellation::qam(16);
    PulseShape pulse;
    int N_b = 16;
    int N_z = 48;
    // Leading zero symbols placed before the burst; part of N_z.
    int guard_lead = 1;
    int samples_per_symbol = 8;
    // Precompensation length in normalized units.
    double precomp_length = 0.0;
    int sigma = 1;
    // Amplitude applied to the unit-energy constellation.
    double gain = 1.0;
    BackwardNftOptions glme;

    void validate() const;
    double symbol_time() const { return pulse.symbol_time; }
    double dt() const { return pulse.symbol_time / samples_per_symbol; }
    std::size_t total_samples() const { return static_cast<std::size_t>((N_b + N_z) * samples_per_symbol); }
    // Grid of s(t), starting at -T_s/2 - guard_lead T_s.
    TimeGrid grid() const;
    // First sample of the window [t_{k-1}, t_k), k is 1-based.
    std::size_t window_start(int k) const;
    // Pulse samples within one symbol window.
    std::vector<double> window_pulse() const;
    LambdaGrid lambda_grid() const;
};

ComplexEnvelope build_qam_signal(const Burst& burst, const ModemConfig& config);

// rho(lambda) = -S(-lambda/pi)
NonlinearSpectrum nis_map(const FrequencyEnvelope& spec_f, int sigma = 1);
FrequencyEnvelope nis_unmap(const NonlinearSpectrum& spec, double t_origin);

NonlinearSpectrum burst_spectrum(const Burst& burst, const ModemConfig& config);

ComplexEnvelope transmit(const Burst& burst, const ModemConfig& config);

// Scalar gain such that the mean nonlinear energy of the given bursts equals
// energy_per_symbol * N_b (normalized units).
double calibrate_gain(const ModemConfig& config, const std::vector<Burst>& bursts, double energy_per_symbol);

std::vector<cd> candidate_waveform(const CVector& prefix, cd candidate, int k, const ModemConfig& config);

// Streaming transmitter without precompensation: pushes samples of s(t) in
// time order and returns the matching samples of the noiseless received
// signal. Equivalent to transmit() with zero precompensation.
class CausalSynthesizer {
public:
    explicit CausalSynthesizer(const ModemConfig& config);

    cd push(cd s) { return -2.0 * rec_.push(-0.5 * s); }
    void push_zeros(std::size_t count);
    // Pushes one symbol cell of gain * x * g and returns the window.
    CVector push_symbol(cd x);
    std::size_t size() const { return rec_.size(); }

private:
    GlmeRecursion rec_;
    std::vector<double> pulse_;
    double gain_;
};

// Synthesizer positioned at the start of window 1.
CausalSynthesizer start_synthesizer(const ModemConfig& config);

}  // namespace nfdm
