#include "adrx/gate.hpp"

#include "adrx/bpsk.hpp"

namespace adrx::fec {

GateResult self_supervision_gate(std::span<const double> detected, RsParams p,
                                 std::span<const std::uint8_t> hard_channel_bits, double eps) {
  const std::size_t nbits = static_cast<std::size_t>(p.n) * 8;
  if (detected.size() != nbits) throw LengthMismatch("gate: detected length != 8*n");
  if (hard_channel_bits.size() != nbits) throw LengthMismatch("gate: reference length != 8*n");

  const std::vector<std::uint8_t> bits = bpsk_hard(detected);
  const std::vector<std::uint8_t> word = bits_to_symbols(bits);
  const std::optional<RsDecodeResult> dec = rs_decode(word, p);

  GateResult out;
  if (!dec) {
    out.decode_failed = true;
    return out;
  }
  const std::vector<std::uint8_t> cw_bits = symbols_to_bits(rs_encode(dec->msg, p));
  std::size_t diff = 0;
  for (std::size_t i = 0; i < nbits; ++i) diff += cw_bits[i] != hard_channel_bits[i];
  out.normalized_distance = static_cast<double>(diff) / static_cast<double>(nbits);
  out.valid = out.normalized_distance <= eps;
  out.reencoded_symbols = bits_to_bpsk(cw_bits);
  return out;
}

}  // namespace adrx::fec
