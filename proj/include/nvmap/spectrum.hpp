#pragma once

#include <vector>

namespace nvmap {

// One-sided unnormalized DFT, X_j = sum_{k=1..K} x_k exp(-i 2 pi k j / K) for j = 1..K/2.
// Backed by FFTW; plans are cached per length and executed on caller buffers.
void one_sided_dft(const std::vector<double>& x, std::vector<double>& re, std::vector<double>& im);

}  // namespace nvmap
