#pragma once

#include <complex>
#include <vector>

namespace hwm {

// Thin wrapper around FFTW's complex-to-complex transforms.
//
// Conventions used everywhere in this project:
//   * forward carries the 1/prod(dims) factor, so the zero coefficient of a
//     real field is its mean;
//   * inverse carries no factor; inverse(forward(f)) == f to roundoff.
//
// Plans are created with FFTW_ESTIMATE (deterministic plan choice, no
// measurement noise) and cached per (dims, direction) behind a mutex, each
// cache entry owning private in/out buffers. Externally this behaves exactly
// as if a fresh plan were made per call; concurrent use is safe.
void dft(const std::vector<int>& dims, const std::complex<double>* in,
         std::complex<double>* out, bool forward);

} // namespace hwm
