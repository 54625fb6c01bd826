#pragma once

#include <complex>
#include <span>
#include <vector>

#include "ebeam/trace.hpp"

namespace ebeam {

using cplx = std::complex<double>;

// Unnormalised X_j = sum_k x_k exp(sign * 2 pi i j k / N), any N >= 1.
std::vector<cplx> fft(std::vector<cplx> x, int sign);

Spectrum dft(const FieldTrace& trace);

// Explicit sample times; anything not uniform to 1e-9 relative is rejected.
Spectrum dft(std::span<const double> times, std::span<const double> values);

// Single bin with the same normalisation as dft().
cplx dft_bin(std::span<const double> values, double dt, double t_start, double omega);

}  // namespace ebeam
