#include "adrx/gf256.hpp"

#include <array>

namespace adrx::fec {
namespace {

struct Tables {
  // exp is duplicated over 510 entries so gf_mul never reduces mod 255.
  std::array<std::uint8_t, 512> exp{};
  std::array<int, 256> log{};

  Tables() {
    int x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = i;
      x <<= 1;
      if (x & 0x100) x ^= kGfPoly;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    log[0] = -1;
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const Tables& t = tables();
  return t.exp[t.log[a] + t.log[b]];
}

std::uint8_t gf_inv(std::uint8_t a) {
  if (a == 0) throw ZeroInverse();
  const Tables& t = tables();
  return t.exp[255 - t.log[a]];
}

std::uint8_t gf_div(std::uint8_t a, std::uint8_t b) {
  if (b == 0) throw ZeroInverse();
  if (a == 0) return 0;
  const Tables& t = tables();
  return t.exp[t.log[a] + 255 - t.log[b]];
}

std::uint8_t gf_pow(std::uint8_t base, int e) {
  if (base == 0) return e == 0 ? 1 : 0;
  const Tables& t = tables();
  int le = (t.log[base] * static_cast<long long>(e)) % 255;
  if (le < 0) le += 255;
  return t.exp[le];
}

std::uint8_t gf_exp(int e) { return tables().exp[e]; }

int gf_log(std::uint8_t a) {
  if (a == 0) throw ZeroInverse();
  return tables().log[a];
}

}  // namespace adrx::fec
