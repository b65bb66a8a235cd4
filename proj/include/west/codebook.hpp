#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "west/corpus.hpp"

namespace west {

enum class CodingKind { random, language, hybrid };

const char* coding_kind_name(CodingKind k);
CodingKind coding_kind_from_name(std::string_view name);

// Word -> symbol-sequence map. Symbols run 1..k_eff (0 is the pad symbol and
// never appears inside a code). Random codes all have length exactly n;
// language codes have length <= n; hybrid codes are the singleton (k + rank)
// for the top-t words and length-n random codes over [1,k] for the rest.
struct Codebook {
  CodingKind kind = CodingKind::random;
  int k = 0;
  int n = 0;
  int t = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> codes;

  int vocab_size() const { return static_cast<int>(codes.size()); }
  int k_eff() const { return kind == CodingKind::hybrid ? k + t : k; }
  int length(int w) const { return static_cast<int>(codes[w].size()); }
  // symbol at position i (0-based), 0 when past the end of the code
  int symbol(int w, int i) const {
    return i < length(w) ? codes[w][i] : 0;
  }

  bool operator==(const Codebook& o) const = default;
};

Codebook gen_random_code(int k, int n, int vocab_size, std::uint64_t seed);

// Codes are the greedy longest-match decomposition of each word's spelling.
// append_eow terminates every code with the alphabet's <eow> unit (the
// char-normalized head's convention); n then bounds the terminated length.
Codebook gen_language_code(const Vocabulary& vocab, const SubUnitAlphabet& alphabet, int n,
                           bool append_eow = false);

// Vocabulary order is frequency order, so rank = index + 1.
Codebook gen_hybrid_code(int k, int n, int t, int vocab_size, std::uint64_t seed);

// Cost of storing the codebook explicitly: V * n * ceil(log2 k_eff) bits.
std::int64_t codebook_storage_bits(const Codebook& cb);

// Parameter cost of the succinct form: V per-word seeds for random/hybrid
// codes, 0 for language codes (spellings live in the symbol table). A single
// global seed (the header-only file form) costs 1 instead of V.
std::int64_t codebook_succinct_params(const Codebook& cb);

// Text form: header "kind k n t V seed", then (explicit form) one
// whitespace-separated code per line in vocabulary order. Header-only files
// are regenerated on load for random/hybrid kinds.
std::string serialize_codebook(const Codebook& cb, bool explicit_codes);
Codebook deserialize_codebook(std::string_view text);

namespace detail {
// rejection cap exposed for fault-path tests; gen_random_code uses 1000
Codebook gen_random_codes_capped(int k, int n, int vocab_size, std::uint64_t seed, int retry_cap);
inline constexpr int kRetryCap = 1000;
} // namespace detail

} // namespace west
