#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adrx/reed_solomon.hpp"

namespace adrx::fec {

struct GateResult {
  bool valid = false;
  bool decode_failed = false;
  double normalized_distance = 1.0;
  // Re-encoded codeword as BPSK symbols, usable as training labels; present
  // whenever decoding succeeded (valid implies present).
  std::optional<std::vector<double>> reencoded_symbols;
};

// Self-supervision gate: demodulate the detected symbols, RS-decode, re-encode
// the decoded message, and accept the block for training only when decoding
// succeeded and the re-encoded word is within eps (normalized Hamming distance)
// of the hard-decided channel word.
GateResult self_supervision_gate(std::span<const double> detected, RsParams p,
                                 std::span<const std::uint8_t> hard_channel_bits, double eps);

}  // namespace adrx::fec
