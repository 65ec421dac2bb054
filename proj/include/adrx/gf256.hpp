#pragma once

#include <cstdint>

#include "adrx/errors.hpp"

namespace adrx::fec {

// GF(2^8) under x^8 + x^4 + x^3 + x^2 + 1 (0x11D), generator alpha = 0x02.
inline constexpr int kGfPoly = 0x11D;

std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b);
std::uint8_t gf_inv(std::uint8_t a);  // throws ZeroInverse on a == 0
std::uint8_t gf_div(std::uint8_t a, std::uint8_t b);
std::uint8_t gf_pow(std::uint8_t base, int e);  // e may be negative, base != 0

// alpha^e for e in [0, 509]; alpha^255 = 1.
std::uint8_t gf_exp(int e);
// log_alpha(a) in [0, 254]; a != 0.
int gf_log(std::uint8_t a);

}  // namespace adrx::fec
