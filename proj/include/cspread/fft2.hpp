#pragma once

#include "cspread/types.hpp"

namespace cspread {

// Unnormalized 2D DFTs on row-major n0 x n1 complex arrays (plans cached per
// shape/direction; safe for repeated use on different buffers).
void fft2_forward(int n0, int n1, const cplx* in, cplx* out);   // kernel e^{-i 2 pi k n / N}
void fft2_backward(int n0, int n1, const cplx* in, cplx* out);  // kernel e^{+i 2 pi k n / N}

void fft1_forward(int n, const cplx* in, cplx* out);
void fft1_backward(int n, const cplx* in, cplx* out);

} // namespace cspread
