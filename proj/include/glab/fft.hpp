#pragma once

#include <complex>
#include <span>

namespace glab::fft {

/// Unnormalised forward DFT: out_k = sum_j in_j exp(-2*pi*i*j*k/n).
/// in and out may alias. Backed by FFTW with a per-thread plan cache, so
/// repeated transforms of the same length are cheap and thread safe.
void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

/// Inverse DFT normalised by 1/n, so inverse(forward(u)) == u up to roundoff.
void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

} // namespace glab::fft
