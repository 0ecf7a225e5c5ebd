#include "tcrng/big_count.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace tcrng {

std::uint64_t big_to_u64(const BigCount& v) {
  if (v < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 64) {
    throw std::out_of_range("big_to_u64: value does not fit in 64 bits");
  }
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, v.get_mpz_t());
  return out;
}

std::uint64_t big_mod_u64(const BigCount& v, std::uint64_t m) {
  static_assert(sizeof(unsigned long) == sizeof(std::uint64_t));
  return mpz_fdiv_ui(v.get_mpz_t(), static_cast<unsigned long>(m));
}

long double big_log2(const BigCount& v) {
  if (v <= 0) throw std::domain_error("big_log2: nonpositive argument");
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, v.get_mpz_t());
  return std::log2(static_cast<long double>(mant)) + static_cast<long double>(exp);
}

std::string big_to_string(const BigCount& v) { return v.get_str(10); }

double big_to_double(const BigRational& v) {
  if (v == 0) return 0.0;
  const bool negative = v < 0;
  BigCount num = abs(v.get_num());
  BigCount den = v.get_den();
  // Scale so the integer quotient carries 55 or 56 bits.
  const long shift = 55 - (static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2)) -
                           static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2)));
  if (shift >= 0) {
    num <<= shift;
  } else {
    den <<= -shift;
  }
  BigCount quot, rem;
  mpz_tdiv_qr(quot.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  std::uint64_t q = big_to_u64(quot);
  const int extra = 64 - __builtin_clzll(q) - 53;
  const std::uint64_t dropped = q & ((std::uint64_t{1} << extra) - 1);
  const std::uint64_t half = std::uint64_t{1} << (extra - 1);
  q >>= extra;
  if (dropped > half || (dropped == half && (rem != 0 || (q & 1)))) ++q;
  const double out = std::ldexp(static_cast<double>(q), extra - static_cast<int>(shift));
  return negative ? -out : out;
}

BigCount big_from_string(const std::string& s) {
  BigCount out;
  if (s.empty() || out.set_str(s, 10) != 0 || out < 0) {
    throw std::invalid_argument("not a nonnegative decimal integer: '" + s + "'");
  }
  return out;
}

BigCount bareiss_determinant(std::vector<BigCount> m, std::size_t dim) {
  if (dim == 0) return 1;
  auto at = [&](std::size_t r, std::size_t c) -> BigCount& { return m[r * dim + c]; };
  int sign = 1;
  BigCount prev = 1;
  for (std::size_t p = 0; p + 1 < dim; ++p) {
    if (at(p, p) == 0) {
      std::size_t swap_row = p + 1;
      while (swap_row < dim && at(swap_row, p) == 0) ++swap_row;
      if (swap_row == dim) return 0;
      for (std::size_t c = 0; c < dim; ++c) std::swap(at(p, c), at(swap_row, c));
      sign = -sign;
    }
    for (std::size_t r = p + 1; r < dim; ++r) {
      for (std::size_t c = p + 1; c < dim; ++c) {
        BigCount v = at(r, c) * at(p, p) - at(r, p) * at(p, c);
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        at(r, c) = std::move(v);
      }
      at(r, p) = 0;
    }
    prev = at(p, p);
  }
  BigCount det = at(dim - 1, dim - 1);
  if (sign < 0) det = -det;
  return det;
}

}  // namespace tcrng
