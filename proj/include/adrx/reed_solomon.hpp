#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adrx/errors.hpp"

namespace adrx::fec {

// Shortened systematic Reed-Solomon code over GF(256).  The (n, k) code is the
// 255-symbol mother code with 255 - n leading message symbols pinned to zero;
// generator polynomial roots are alpha^1 .. alpha^(n-k).
struct RsParams {
  int n = 0;
  int k = 0;
  int t() const { return (n - k) / 2; }
  bool valid() const { return 0 < k && k < n && n <= 255 && t() >= 1; }
};

std::vector<std::uint8_t> rs_encode(std::span<const std::uint8_t> msg, RsParams p);

struct RsDecodeResult {
  std::vector<std::uint8_t> msg;
  int corrected = 0;
};

// nullopt signals an uncorrectable block (syndrome/locator inconsistency).
std::optional<RsDecodeResult> rs_decode(std::span<const std::uint8_t> recv, RsParams p);

}  // namespace adrx::fec
