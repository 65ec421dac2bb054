#include "adrx/reed_solomon.hpp"

#include "adrx/gf256.hpp"

namespace adrx::fec {
namespace {

void check_params(RsParams p) {
  if (!p.valid()) throw LengthMismatch("bad RS parameters");
}

// Ascending coefficients of g(x) = prod_{i=1..r} (x + alpha^i); g[r] = 1.
std::vector<std::uint8_t> generator_poly(int r) {
  std::vector<std::uint8_t> g{1};
  for (int i = 1; i <= r; ++i) {
    const std::uint8_t a = gf_exp(i);
    std::vector<std::uint8_t> next(g.size() + 1, 0);
    for (std::size_t j = 0; j < g.size(); ++j) {
      next[j] ^= gf_mul(g[j], a);
      next[j + 1] ^= g[j];
    }
    g = std::move(next);
  }
  return g;
}

// Syndome S_j = C(alpha^j) with C(x) = sum_i recv[i] x^(n-1-i); Horner form.
std::uint8_t syndrome(std::span<const std::uint8_t> recv, int j) {
  const std::uint8_t aj = gf_exp(j);
  std::uint8_t s = 0;
  for (std::uint8_t c : recv) s = static_cast<std::uint8_t>(gf_mul(s, aj) ^ c);
  return s;
}

std::uint8_t poly_eval(std::span<const std::uint8_t> ascending, std::uint8_t x) {
  std::uint8_t acc = 0;
  for (std::size_t i = ascending.size(); i-- > 0;)
    acc = static_cast<std::uint8_t>(gf_mul(acc, x) ^ ascending[i]);
  return acc;
}

}  // namespace

std::vector<std::uint8_t> rs_encode(std::span<const std::uint8_t> msg, RsParams p) {
  check_params(p);
  if (static_cast<int>(msg.size()) != p.k) throw LengthMismatch("rs_encode: message length != k");
  const int r = p.n - p.k;
  const std::vector<std::uint8_t> g = generator_poly(r);

  std::vector<std::uint8_t> rem(r, 0);  // remainder of msg(x) * x^r by g, ascending
  for (std::uint8_t m : msg) {
    const std::uint8_t f = static_cast<std::uint8_t>(m ^ rem[r - 1]);
    for (int j = r - 1; j >= 1; --j)
      rem[j] = static_cast<std::uint8_t>(rem[j - 1] ^ gf_mul(f, g[j]));
    rem[0] = gf_mul(f, g[0]);
  }

  std::vector<std::uint8_t> cw(msg.begin(), msg.end());
  cw.resize(p.n);
  for (int i = 0; i < r; ++i) cw[p.k + i] = rem[r - 1 - i];
  return cw;
}

std::optional<RsDecodeResult> rs_decode(std::span<const std::uint8_t> recv, RsParams p) {
  check_params(p);
  if (static_cast<int>(recv.size()) != p.n) throw LengthMismatch("rs_decode: word length != n");
  const int r = p.n - p.k;

  std::vector<std::uint8_t> synd(r);
  bool clean = true;
  for (int j = 0; j < r; ++j) {
    synd[j] = syndrome(recv, j + 1);
    clean = clean && synd[j] == 0;
  }
  if (clean) return RsDecodeResult{{recv.begin(), recv.begin() + p.k}, 0};

  // Berlekamp-Massey for the error locator (ascending coefficients).
  std::vector<std::uint8_t> lambda{1}, prev{1};
  int L = 0, m = 1;
  std::uint8_t b = 1;
  for (int idx = 0; idx < r; ++idx) {
    std::uint8_t delta = synd[idx];
    for (int i = 1; i <= L && i < static_cast<int>(lambda.size()); ++i)
      delta ^= gf_mul(lambda[i], synd[idx - i]);
    if (delta == 0) {
      ++m;
      continue;
    }
    const std::vector<std::uint8_t> saved = lambda;
    const std::uint8_t scale = gf_div(delta, b);
    if (lambda.size() < prev.size() + m) lambda.resize(prev.size() + m, 0);
    for (std::size_t i = 0; i < prev.size(); ++i)
      lambda[i + m] ^= gf_mul(scale, prev[i]);
    if (2 * L <= idx) {
      L = idx + 1 - L;
      prev = saved;
      b = delta;
      m = 1;
    } else {
      ++m;
    }
  }
  if (L > p.t()) return std::nullopt;

  // Chien search restricted to real (non-padding) positions of the shortened code.
  std::vector<int> error_pos;  // indices into recv
  for (int d = 0; d < p.n; ++d) {
    if (poly_eval(lambda, gf_pow(gf_exp(1), -d)) == 0) error_pos.push_back(p.n - 1 - d);
  }
  if (static_cast<int>(error_pos.size()) != L) return std::nullopt;

  // Forney with first consecutive root alpha^1: e = Omega(Xinv) / Lambda'(Xinv).
  std::vector<std::uint8_t> omega(r, 0);  // S(x) * Lambda(x) mod x^r
  for (int i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < lambda.size() && j <= static_cast<std::size_t>(i); ++j)
      omega[i] ^= gf_mul(synd[i - j], lambda[j]);
  }

  std::vector<std::uint8_t> fixed(recv.begin(), recv.end());
  for (int pos : error_pos) {
    const int d = p.n - 1 - pos;
    const std::uint8_t x_inv = gf_pow(gf_exp(1), -d);
    std::uint8_t deriv = 0;  // Lambda'(x_inv), odd-degree terms only
    for (std::size_t i = 1; i < lambda.size(); i += 2)
      deriv ^= gf_mul(lambda[i], gf_pow(x_inv, static_cast<int>(i - 1)));
    if (deriv == 0) return std::nullopt;
    const std::uint8_t mag = gf_div(poly_eval(omega, x_inv), deriv);
    if (mag == 0) return std::nullopt;
    fixed[pos] ^= mag;
  }

  for (int j = 1; j <= r; ++j)
    if (syndrome(fixed, j) != 0) return std::nullopt;

  return RsDecodeResult{{fixed.begin(), fixed.begin() + p.k}, L};
}

}  // namespace adrx::fec
