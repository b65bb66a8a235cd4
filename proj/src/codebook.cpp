#include "west/codebook.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "west/rng.hpp"

namespace west {

namespace {

bool code_space_at_least(int k, int n, std::int64_t need) {
  std::int64_t space = 1;
  for (int i = 0; i < n; ++i) {
    space *= k;
    if (space >= need) return true;
  }
  return space >= need;
}

std::string code_key(const std::vector<int>& code) {
  std::string key;
  key.reserve(code.size() * sizeof(int));
  for (int s : code) key.append(reinterpret_cast<const char*>(&s), sizeof(int));
  return key;
}

// Draws the length-n code for (seed, word, retry). Rehashing the retry
// counter keeps every word's stream independent of earlier words' rejections.
std::vector<int> draw_code(int k, int n, std::uint64_t seed, int word, int retry) {
  SplitMix64 rng(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(word)),
                          static_cast<std::uint64_t>(retry)));
  std::vector<int> code(n);
  for (int i = 0; i < n; ++i) code[i] = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return code;
}

void fill_random_tail(Codebook& cb, int first_word, int k, int n, std::uint64_t seed,
                      int retry_cap) {
  std::unordered_set<std::string> seen;
  for (int w = first_word; w < cb.vocab_size(); ++w) {
    bool assigned = false;
    for (int r = 0; r < retry_cap; ++r) {
      std::vector<int> code = draw_code(k, n, seed, w, r);
      if (seen.insert(code_key(code)).second) {
        cb.codes[w] = std::move(code);
        assigned = true;
        break;
      }
    }
    if (!assigned) throw std::runtime_error("rejection sampling stalled");
  }
}

} // namespace

const char* coding_kind_name(CodingKind k) {
  switch (k) {
    case CodingKind::random: return "random";
    case CodingKind::language: return "language";
    case CodingKind::hybrid: return "hybrid";
  }
  return "?";
}

CodingKind coding_kind_from_name(std::string_view name) {
  if (name == "random") return CodingKind::random;
  if (name == "language") return CodingKind::language;
  if (name == "hybrid") return CodingKind::hybrid;
  throw std::runtime_error("unknown coding kind: " + std::string(name));
}

namespace detail {

Codebook gen_random_codes_capped(int k, int n, int vocab_size, std::uint64_t seed,
                                 int retry_cap) {
  if (k < 2) throw std::runtime_error("alphabet size k must be at least 2");
  if (n < 1) throw std::runtime_error("code length n must be at least 1");
  if (!code_space_at_least(k, n, vocab_size)) throw std::runtime_error("code space too small");
  Codebook cb;
  cb.kind = CodingKind::random;
  cb.k = k;
  cb.n = n;
  cb.t = 0;
  cb.seed = seed;
  cb.codes.resize(vocab_size);
  fill_random_tail(cb, 0, k, n, seed, retry_cap);
  return cb;
}

} // namespace detail

Codebook gen_random_code(int k, int n, int vocab_size, std::uint64_t seed) {
  return detail::gen_random_codes_capped(k, n, vocab_size, seed, detail::kRetryCap);
}

Codebook gen_language_code(const Vocabulary& vocab, const SubUnitAlphabet& alphabet, int n,
                           bool append_eow) {
  if (append_eow && !alphabet.has_eow())
    throw std::runtime_error("alphabet has no <eow> unit");
  Codebook cb;
  cb.kind = CodingKind::language;
  cb.k = alphabet.unit_count();
  cb.n = n;
  cb.codes.resize(vocab.size());
  std::unordered_set<std::string> seen;
  for (int w = 0; w < vocab.size(); ++w) {
    std::vector<int> code = decompose_word(alphabet, vocab.words[w]);
    if (append_eow) code.push_back(alphabet.eow_index);
    if (static_cast<int>(code.size()) > n)
      throw std::runtime_error("language code for word '" + vocab.words[w] +
                               "' exceeds code length bound " + std::to_string(n));
    if (!seen.insert(code_key(code)).second)
      throw std::runtime_error("codes not uniquely decodable");
    cb.codes[w] = std::move(code);
  }
  return cb;
}

Codebook gen_hybrid_code(int k, int n, int t, int vocab_size, std::uint64_t seed) {
  if (t < 0 || t > vocab_size) throw std::runtime_error("hybrid cutoff t out of range");
  if (k < 2) throw std::runtime_error("alphabet size k must be at least 2");
  if (n < 1) throw std::runtime_error("code length n must be at least 1");
  if (!code_space_at_least(k, n, static_cast<std::int64_t>(vocab_size) - t))
    throw std::runtime_error("code space too small");
  Codebook cb;
  cb.kind = CodingKind::hybrid;
  cb.k = k;
  cb.n = n;
  cb.t = t;
  cb.seed = seed;
  cb.codes.resize(vocab_size);
  for (int w = 0; w < t; ++w) cb.codes[w] = {k + w + 1}; // rank is 1-based
  fill_random_tail(cb, t, k, n, seed, detail::kRetryCap);
  return cb;
}

std::int64_t codebook_storage_bits(const Codebook& cb) {
  int bits_per_symbol = 0;
  while ((std::int64_t{1} << bits_per_symbol) < cb.k_eff()) ++bits_per_symbol;
  return static_cast<std::int64_t>(cb.vocab_size()) * cb.n * bits_per_symbol;
}

std::int64_t codebook_succinct_params(const Codebook& cb) {
  switch (cb.kind) {
    case CodingKind::language: return 0;
    case CodingKind::random:
    case CodingKind::hybrid: return cb.vocab_size();
  }
  return 0;
}

std::string serialize_codebook(const Codebook& cb, bool explicit_codes) {
  std::ostringstream os;
  os << coding_kind_name(cb.kind) << ' ' << cb.k << ' ' << cb.n << ' ' << cb.t << ' '
     << cb.vocab_size() << ' ' << cb.seed << '\n';
  if (explicit_codes) {
    for (const auto& code : cb.codes) {
      for (std::size_t i = 0; i < code.size(); ++i) os << (i ? " " : "") << code[i];
      os << '\n';
    }
  }
  return os.str();
}

Codebook deserialize_codebook(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("malformed codebook");
  std::istringstream hs(header);
  std::string kind_name;
  int k, n, t, v;
  std::uint64_t seed;
  if (!(hs >> kind_name >> k >> n >> t >> v >> seed))
    throw std::runtime_error("malformed codebook");
  CodingKind kind = coding_kind_from_name(kind_name);

  std::vector<std::vector<int>> codes;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<int> code;
    int sym;
    while (ls >> sym) code.push_back(sym);
    codes.push_back(std::move(code));
  }

  if (codes.empty()) {
    switch (kind) {
      case CodingKind::random: return gen_random_code(k, n, v, seed);
      case CodingKind::hybrid: return gen_hybrid_code(k, n, t, v, seed);
      case CodingKind::language:
        throw std::runtime_error("malformed codebook"); // not regenerable from a header
    }
  }
  if (static_cast<int>(codes.size()) != v) throw std::runtime_error("malformed codebook");

  Codebook cb;
  cb.kind = kind;
  cb.k = k;
  cb.n = n;
  cb.t = t;
  cb.seed = seed;
  cb.codes = std::move(codes);
  std::unordered_set<std::string> seen;
  for (const auto& code : cb.codes) {
    if (code.empty() || static_cast<int>(code.size()) > n)
      throw std::runtime_error("malformed codebook");
    for (int s : code)
      if (s < 1 || s > cb.k_eff()) throw std::runtime_error("codebook symbol out of range");
    if (!seen.insert(code_key(code)).second)
      throw std::runtime_error("codes not uniquely decodable");
  }
  return cb;
}

} // namespace west
