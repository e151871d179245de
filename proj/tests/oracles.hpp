#pragma once

#include <complex>
#include <numbers>

namespace oracle {

// Lanczos approximation (g = 7, n = 9) of log Gamma for complex arguments.
inline std::complex<double> lgamma(std::complex<double> z) {
    using std::numbers::pi;
    if (z.real() < 0.5) return std::log(pi / std::sin(pi * z)) - lgamma(1.0 - z);
    static const double c[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                               771.32342877765313,   -176.61502916214059,   12.507343278686905,
                               -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    z -= 1.0;
    std::complex<double> x = c[0];
    for (int i = 1; i < 9; ++i) x += c[i] / (z + static_cast<double>(i));
    const std::complex<double> t = z + 7.5;
    return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

// Reflection coefficient of q(t) = A sech(t) for v_t = [[-j l, q], [-q*, j l]] v.
inline std::complex<double> sech_rho(double A, double lambda) {
    using std::numbers::pi;
    const std::complex<double> z{0.5, -lambda};
    const auto log_a = 2.0 * lgamma(z) - lgamma(z + A) - lgamma(z - A);
    const double b = -std::sin(pi * A) / std::cosh(pi * lambda);
    return b / std::exp(log_a);
}

}  // namespace oracle
