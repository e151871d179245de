#pragma once

#include "nfdm/rng.hpp"
#include "nfdm/signal.hpp"

namespace nfdm {

constexpr double kPlanck = 6.62607015e-34;

// SI units throughout.
struct FiberLink {
    double beta2 = -20.39e-27;        // s^2/m
    double gamma = 1.22e-3;           // 1/(W m)
    double alpha_att = 0.0;           // 1/m (power)
    double length = 2000e3;           // m
    double eta_sp = 4.0;
    double carrier_freq = 193.4e12;   // Hz
    int ase_polarizations = 1;        // 1 or 2 noise modes in the ASE PSD

    static FiberLink from_engineering(double beta2_ps2_per_km, double gamma_per_w_km, double alpha_db_per_km,
                                      double length_km, double eta_sp = 4.0, double carrier_thz = 193.4);
    void validate() const;
    // Accumulated single-polarization ASE PSD over a distance, W/Hz.
    double ase_psd(double distance) const;
};

struct Normalization {
    double T0 = 1.0;
    double Z0 = 1.0;
    double P0 = 1.0;

    static Normalization from_link(const FiberLink& link, double T0);
    double length_norm(double length_m) const { return length_m / Z0; }
    // PSD (W/Hz) in normalized units.
    double psd_norm(double N0) const { return N0 / (P0 * T0); }
};

ComplexEnvelope normalize(const ComplexEnvelope& sig, const Normalization& norm);
ComplexEnvelope denormalize(const ComplexEnvelope& sig, const Normalization& norm);

enum class NoiseKind { none, distributed, awgn };

struct NoiseModel {
    NoiseKind kind = NoiseKind::none;
    double N0 = 0.0;
    std::uint64_t rng_seed = 0;
};

// Symmetric split-step solution of A_z = j(beta2/2) A_TT - j gamma |A|^2 A with
// loss balanced by ideal distributed gain. With NoiseKind::distributed, ASE
// noise of PSD eta_sp h f_c alpha dz is added after each step.
ComplexEnvelope ssfm_propagate(const ComplexEnvelope& sig, const FiberLink& link, double dz, NoiseKind noise,
                               Rng& rng);

// White circular Gaussian noise of PSD N0 over the grid bandwidth 1/dt.
ComplexEnvelope awgn_channel(const ComplexEnvelope& sig, double N0, Rng& rng);

// Exact inverse of linear propagation over the link length.
ComplexEnvelope edc(const ComplexEnvelope& sig, const FiberLink& link);

// Backward split-step propagation with negated beta2 and gamma.
ComplexEnvelope dbp(const ComplexEnvelope& sig, const FiberLink& link, int steps_per_span, double span_length);

// Ideal rectangular low-pass keeping |f| <= cutoff.
ComplexEnvelope lowpass(const ComplexEnvelope& sig, double cutoff);

}  // namespace nfdm
