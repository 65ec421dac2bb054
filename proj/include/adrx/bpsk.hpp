#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace adrx::fec {

// Shared BPSK convention: bit 0 -> +1, bit 1 -> -1; hard decision maps
// value >= 0 -> bit 0 (ties to +1).
std::vector<double> bits_to_bpsk(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> bpsk_hard(std::span<const double> values);

// Bit packing is MSB-first within each code symbol.
std::vector<std::uint8_t> bits_to_symbols(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> symbols_to_bits(std::span<const std::uint8_t> symbols);

}  // namespace adrx::fec
