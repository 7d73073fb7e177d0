#pragma once

#include <span>

#include "isac/types.hpp"

namespace isac::fft {

// Unitary DFT (1/sqrt(N) both ways). Forward uses exp(-j 2 pi pq / N).
// Plans are cached per length behind a mutex; execution is reentrant.

void transform(std::span<cd> data, bool inverse);

/// Unnormalized transform: forward sum_n x_n exp(-j2pi kn/N), inverse with +j.
void transform_raw(std::span<cd> data, bool inverse);

/// Transforms every column of m in place.
void columns(CMat& m, bool inverse);

/// Transforms every row of m in place.
void rows(CMat& m, bool inverse);

}  // namespace isac::fft
