#include "west/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace west {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

template <typename LineFn>
void for_each_line(std::string_view text, LineFn&& fn) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < text.size()) fn(text.substr(pos));
      break;
    }
    fn(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
}

template <typename TokenFn>
void for_each_token(std::string_view line, TokenFn&& fn) {
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fn(line.substr(start, i - start));
  }
}

// Splits a UTF-8 string into code point substrings. An invalid byte is kept
// as a one-byte unit so the split is total and deterministic.
std::vector<std::string> utf8_units(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((b & 0x80u) == 0) len = 1;
    else if ((b & 0xe0u) == 0xc0u) len = 2;
    else if ((b & 0xf0u) == 0xe0u) len = 3;
    else if ((b & 0xf8u) == 0xf0u) len = 4;
    if (i + len > s.size()) len = 1;
    for (std::size_t j = 1; j < len; ++j) {
      if ((static_cast<unsigned char>(s[i + j]) & 0xc0u) != 0x80u) {
        len = 1;
        break;
      }
    }
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

void finalize_index(Vocabulary& v) {
  v.index_of.clear();
  for (int i = 0; i < v.size(); ++i) {
    if (!v.index_of.emplace(v.words[i], i).second)
      throw std::runtime_error("duplicate vocabulary token: " + v.words[i]);
  }
  auto eos = v.index_of.find(std::string(kEosToken));
  auto unk = v.index_of.find(std::string(kUnkToken));
  if (eos == v.index_of.end() || unk == v.index_of.end())
    throw std::runtime_error("vocabulary missing reserved tokens");
  v.eos_index = eos->second;
  v.unk_index = unk->second;
}

} // namespace

Vocabulary build_vocabulary(std::string_view corpus_text, int max_size) {
  if (max_size <= 0) throw std::runtime_error("max_size must be positive");
  std::unordered_map<std::string, std::int64_t> counts;
  bool any_token = false;
  for_each_line(corpus_text, [&](std::string_view line) {
    for_each_token(line, [&](std::string_view tok) {
      any_token = true;
      if (tok == kEosToken || tok == kUnkToken) return; // folded onto reserved entries
      ++counts[std::string(tok)];
    });
  });
  if (!any_token) throw std::runtime_error("empty corpus");

  std::vector<std::pair<std::string, std::int64_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(items.size()) > max_size) items.resize(max_size);

  Vocabulary v;
  v.words.reserve(items.size() + 2);
  for (auto& [w, c] : items) {
    v.words.push_back(std::move(w));
    v.frequencies.push_back(c);
  }
  v.words.emplace_back(kEosToken);
  v.frequencies.push_back(0);
  v.words.emplace_back(kUnkToken);
  v.frequencies.push_back(0);
  finalize_index(v);
  return v;
}

SubUnitAlphabet extract_characters(const Vocabulary& vocab, bool with_eow) {
  if (vocab.words.empty()) throw std::runtime_error("empty vocabulary");
  std::set<std::string> chars;
  for (const auto& w : vocab.words)
    for (auto& u : utf8_units(w)) chars.insert(u);
  return make_alphabet(std::vector<std::string>(chars.begin(), chars.end()), with_eow);
}

SubUnitAlphabet make_alphabet(const std::vector<std::string>& units, bool with_eow) {
  SubUnitAlphabet a;
  a.units.emplace_back(kPadUnit);
  for (const auto& u : units) {
    if (a.index_of.count(u)) throw std::runtime_error("duplicate sub-unit: " + u);
    a.index_of.emplace(u, static_cast<int>(a.units.size()));
    a.units.push_back(u);
  }
  if (with_eow) {
    a.eow_index = static_cast<int>(a.units.size());
    a.index_of.emplace(std::string(kEowUnit), a.eow_index);
    a.units.emplace_back(kEowUnit);
  }
  return a;
}

std::vector<int> encode_stream(const Vocabulary& vocab, std::string_view text) {
  std::vector<int> out;
  for_each_line(text, [&](std::string_view line) {
    for_each_token(line, [&](std::string_view tok) { out.push_back(vocab.lookup(tok)); });
    out.push_back(vocab.eos_index);
  });
  return out;
}

std::vector<int> decompose_word(const SubUnitAlphabet& alphabet, std::string_view word) {
  std::vector<int> code;
  std::size_t pos = 0;
  std::size_t longest = 0;
  for (const auto& u : alphabet.units) longest = std::max(longest, u.size());
  while (pos < word.size()) {
    int best = 0;
    std::size_t best_len = 0;
    std::size_t cap = std::min(longest, word.size() - pos);
    for (std::size_t len = cap; len >= 1; --len) {
      auto it = alphabet.index_of.find(std::string(word.substr(pos, len)));
      if (it != alphabet.index_of.end() && it->second != alphabet.eow_index) {
        best = it->second;
        best_len = len;
        break;
      }
    }
    if (best == 0)
      throw std::runtime_error("word not decomposable into sub-units: " + std::string(word));
    code.push_back(best);
    pos += best_len;
  }
  return code;
}

std::string serialize_vocabulary(const Vocabulary& vocab) {
  std::ostringstream os;
  os << "# west-vocab 1\n# tokens " << vocab.size() << "\n# counts";
  for (auto c : vocab.frequencies) os << ' ' << c;
  os << '\n';
  for (const auto& w : vocab.words) os << w << '\n';
  return os.str();
}

Vocabulary deserialize_vocabulary(std::string_view text) {
  Vocabulary v;
  std::vector<std::string> lines;
  for_each_line(text, [&](std::string_view l) { lines.emplace_back(l); });
  std::size_t i = 0;
  std::int64_t ntok = -1;
  for (; i < lines.size() && !lines[i].empty() && lines[i][0] == '#'; ++i) {
    std::istringstream is(lines[i]);
    std::string hash, key;
    is >> hash >> key;
    if (key == "tokens") is >> ntok;
    else if (key == "counts") {
      std::int64_t c;
      while (is >> c) v.frequencies.push_back(c);
    }
  }
  for (; i < lines.size(); ++i)
    if (!lines[i].empty()) v.words.emplace_back(lines[i]);
  if (ntok < 0 || static_cast<std::int64_t>(v.words.size()) != ntok ||
      v.frequencies.size() != v.words.size())
    throw std::runtime_error("malformed vocabulary file");
  finalize_index(v);
  return v;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

} // namespace west
