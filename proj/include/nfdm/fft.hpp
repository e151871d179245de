#pragma once

#include "nfdm/signal.hpp"

namespace nfdm {

// Unnormalized in-place DFTs backed by cached FFTW plans. Safe to call from
// several threads.
void fft_forward(CVector& x);
void fft_backward(CVector& x);

// Angular frequencies matching fft ordering for a grid of spacing dt.
std::vector<double> fft_angular_frequencies(std::size_t n, double dt);

}  // namespace nfdm
