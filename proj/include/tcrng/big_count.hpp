#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace tcrng {

// Exact nonnegative integer used for class sizes, ranks and dictionary sizes.
using BigCount = mpz_class;
using BigRational = mpq_class;

inline BigCount big_from_u64(std::uint64_t v) {
  BigCount out;
  mpz_import(out.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
  return out;
}

// Requires 0 <= v < 2^64.
std::uint64_t big_to_u64(const BigCount& v);

// v mod m for m >= 1.
std::uint64_t big_mod_u64(const BigCount& v, std::uint64_t m);

// log2(v) for v >= 1, accurate to long double precision even for huge v.
long double big_log2(const BigCount& v);

std::string big_to_string(const BigCount& v);

// Nearest double to v (ties to even); mpq_class::get_d truncates instead.
double big_to_double(const BigRational& v);
BigCount big_from_string(const std::string& s);

// Fraction-free (Bareiss) determinant of a dim x dim row-major integer matrix.
// The matrix is consumed.
BigCount bareiss_determinant(std::vector<BigCount> m, std::size_t dim);

}  // namespace tcrng
