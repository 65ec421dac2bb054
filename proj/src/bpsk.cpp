#include "adrx/bpsk.hpp"

#include "adrx/errors.hpp"

namespace adrx::fec {

std::vector<double> bits_to_bpsk(std::span<const std::uint8_t> bits) {
  std::vector<double> out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) out[i] = bits[i] ? -1.0 : 1.0;
  return out;
}

std::vector<std::uint8_t> bpsk_hard(std::span<const double> values) {
  std::vector<std::uint8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] >= 0.0 ? 0 : 1;
  return out;
}

std::vector<std::uint8_t> bits_to_symbols(std::span<const std::uint8_t> bits) {
  if (bits.size() % 8 != 0) throw LengthMismatch("bits_to_symbols: length not a multiple of 8");
  std::vector<std::uint8_t> out(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    out[i / 8] = static_cast<std::uint8_t>(out[i / 8] << 1 | (bits[i] & 1));
  return out;
}

std::vector<std::uint8_t> symbols_to_bits(std::span<const std::uint8_t> symbols) {
  std::vector<std::uint8_t> out(symbols.size() * 8);
  for (std::size_t i = 0; i < symbols.size(); ++i)
    for (int b = 0; b < 8; ++b) out[i * 8 + b] = (symbols[i] >> (7 - b)) & 1;
  return out;
}

}  // namespace adrx::fec
