#pragma once

#include "nfdm/signal.hpp"

#include <optional>

namespace nfdm {

struct LambdaGrid {
    double lambda0 = 0.0;
    double dlambda = 1.0;
    std::size_t size = 0;

    double at(std::size_t i) const { return lambda0 + static_cast<double>(i) * dlambda; }
};

struct NonlinearSpectrum {
    CVector rho;
    double lambda0 = 0.0;
    double dlambda = 1.0;
    int sigma = 1;

    std::size_t size() const { return rho.size(); }
    double lambda(std::size_t i) const { return lambda0 + static_cast<double>(i) * dlambda; }
    LambdaGrid grid() const { return {lambda0, dlambda, rho.size()}; }
    void validate() const;
};

struct GlmeKernel {
    CVector F;
    double y0 = 0.0;
    double dy = 1.0;
};

struct GlmeSolve {
    CVector K_diag;
    double residual = 0.0;
};

enum class GlmeMethod {
    // O(N^2) structured solver; same discrete system as `dense`.
    levinson,
    // One dense LU solve per output time, O(N^4) overall. Reference only.
    dense,
};

struct BackwardNftOptions {
    GlmeMethod method = GlmeMethod::levinson;
    // Bound on the relative residual of the discretized system.
    double tolerance = 1e-8;
    // Number of output times at which the residual is evaluated.
    std::size_t residual_probes = 8;
};

struct BackwardNftResult {
    ComplexEnvelope signal;
    GlmeSolve solve;
};

GlmeKernel kernel_from_spectrum(const NonlinearSpectrum& spec, const TimeGrid& y_grid);

BackwardNftResult backward_nft_detailed(const NonlinearSpectrum& spec, const TimeGrid& t_grid,
                                        const BackwardNftOptions& opts = {});
ComplexEnvelope backward_nft(const NonlinearSpectrum& spec, const TimeGrid& t_grid,
                             const BackwardNftOptions& opts = {});

// Solves the discretized GLME for K(x,x) given f[m] = F(2 x_m) on an ascending grid.
// h is the quadrature step in the integration variable (twice the x spacing).
GlmeSolve solve_glme(std::span<const cd> f, double h, int sigma, const BackwardNftOptions& opts = {});

enum class LayerPeelingScheme {
    // Strang splitting with the exact rotation of each potential sample.
    split_kick,
    // Matrix exponential of the piecewise-constant potential per sample.
    piecewise_constant,
};

struct ForwardNftOptions {
    LayerPeelingScheme scheme = LayerPeelingScheme::split_kick;
    // Relative edge amplitude above which the input is rejected. Use
    // +infinity to skip the check (e.g. for noisy received signals).
    double boundary_tolerance = 1e-6;
};

NonlinearSpectrum forward_nft(const ComplexEnvelope& sig, const LambdaGrid& grid, int sigma,
                              const ForwardNftOptions& opts = {});

enum class RotationDirection { pre, channel };

NonlinearSpectrum spectral_rotation(const NonlinearSpectrum& spec, double L_norm, RotationDirection dir);

// First-order solution of the GLME: r(t) = -2 sigma conj(F(2t)).
ComplexEnvelope born_approximation(const NonlinearSpectrum& spec, const TimeGrid& t_grid);

// (sigma/pi) * sum ln(1 + sigma |rho|^2) dlambda, the signal energy in normalized units.
double nonlinear_energy(const NonlinearSpectrum& spec);

// Streaming form of the structured GLME solver. Samples f = F(2x) are pushed
// in order of decreasing x; each push returns K(x,x) for the newest x, which
// depends only on samples already pushed.
class GlmeRecursion {
public:
    GlmeRecursion(double h, int sigma);

    cd push(cd f);
    std::size_t size() const { return hist_.size(); }

    // Relative residual of the full discrete system at the current size.
    double residual() const;

private:
    struct Solution {
        CVector u;
        CVector v;
    };
    Solution full_solution() const;
    cd corrected_diagonal() const;

    double h_;
    int sigma_;
    CVector hist_;  // hist_[j] = f of the j-th pushed sample
    CVector pu_;
    CVector pv_;
};

}  // namespace nfdm
