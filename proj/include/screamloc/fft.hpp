#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace screamloc::fft {

/// Forward DFT, unnormalized (e^{-j2πkn/N} kernel). Any length > 0.
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& data);

/// Inverse DFT, normalized by 1/N.
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& data);

std::size_t next_pow2(std::size_t n);

} // namespace screamloc::fft
