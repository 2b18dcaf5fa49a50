#pragma once

#include <cstddef>

#include "fimex/types.hpp"

namespace fimex {

bool is_power_of_two(std::size_t n);

/// X_k = sum_j x_j exp(-2 pi i j k / n), unnormalized.
Vector fft_forward(const Vector& x);

/// x_j = (1/n) sum_k X_k exp(+2 pi i j k / n); inverts fft_forward.
Vector fft_inverse(const Vector& x);

}  // namespace fimex
