#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tcrng/markov_model.hpp"
#include "tcrng/type_classes.hpp"

namespace tcrng::testing {

// "0110" -> {0,1,1,0}
inline SymbolSequence seq(const std::string& digits) {
  SymbolSequence x;
  for (char c : digits) x.push_back(c - '0');
  return x;
}

inline std::string str(const SymbolSequence& x) {
  std::string s;
  for (int a : x) s += static_cast<char>('0' + a);
  return s;
}

inline double h2(double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

// All sequences of length n over alpha symbols, x_1 varying fastest.
inline std::vector<SymbolSequence> all_sequences(int alpha, std::size_t n) {
  std::vector<SymbolSequence> out;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(alpha);
  for (std::uint64_t c = 0; c < total; ++c) {
    SymbolSequence x(n);
    std::uint64_t v = c;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<int>(v % static_cast<std::uint64_t>(alpha));
      v /= static_cast<std::uint64_t>(alpha);
    }
    out.push_back(std::move(x));
  }
  return out;
}

// Sort key for reverse-lexicographic order: x_n first.
inline SymbolSequence reversed(SymbolSequence x) {
  std::reverse(x.begin(), x.end());
  return x;
}

// Members of the class of x found by exhaustive search, sorted by the reverse key.
inline std::vector<SymbolSequence> class_by_search(const SymbolSequence& x, const ModelSpec& spec) {
  const TypeCounts t = counts_of(x, spec);
  std::vector<SymbolSequence> out;
  for (auto& y : all_sequences(spec.alpha(), x.size())) {
    if (counts_of(y, spec) == t) out.push_back(y);
  }
  std::sort(out.begin(), out.end(),
            [](const SymbolSequence& a, const SymbolSequence& b) { return reversed(a) < reversed(b); });
  return out;
}

}  // namespace tcrng::testing
