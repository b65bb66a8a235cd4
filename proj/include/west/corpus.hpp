#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace west {

// Word -> index map in descending-frequency order (ties broken
// lexicographically), with <eos> and <unk> appended after the real tokens.
// Reserved entries carry frequency 0 so the ordering invariant holds over the
// whole table; literal "<eos>"/"<unk>" tokens in a corpus are folded onto the
// reserved entries during encoding.
struct Vocabulary {
  std::vector<std::string> words;
  std::vector<std::int64_t> frequencies;
  std::unordered_map<std::string, int> index_of;
  int eos_index = -1;
  int unk_index = -1;

  int size() const { return static_cast<int>(words.size()); }

  int lookup(std::string_view token) const {
    auto it = index_of.find(std::string(token));
    return it == index_of.end() ? unk_index : it->second;
  }
};

inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kPadUnit = "<pad>";
inline constexpr std::string_view kEowUnit = "<eow>";

// Sub-unit inventory for language codes. Unit indices run 1..size(); index 0
// is the pad symbol and never appears in a spelling.
struct SubUnitAlphabet {
  std::vector<std::string> units; // units[0] is the pad symbol
  std::unordered_map<std::string, int> index_of;
  int eow_index = 0; // 0 when absent

  int unit_count() const { return static_cast<int>(units.size()) - 1; }
  bool has_eow() const { return eow_index != 0; }
};

Vocabulary build_vocabulary(std::string_view corpus_text, int max_size);

// Characters (code points) of every vocabulary entry, ordered by code point.
// Reserved tokens contribute the characters of their literal spelling.
// with_eow appends the <eow> unit used by the char-normalized head.
SubUnitAlphabet extract_characters(const Vocabulary& vocab, bool with_eow = false);

SubUnitAlphabet make_alphabet(const std::vector<std::string>& units, bool with_eow = false);

std::vector<int> encode_stream(const Vocabulary& vocab, std::string_view text);

// Greedy longest-match decomposition of a word into alphabet units.
// Throws when some prefix cannot be matched.
std::vector<int> decompose_word(const SubUnitAlphabet& alphabet, std::string_view word);

std::string serialize_vocabulary(const Vocabulary& vocab);
Vocabulary deserialize_vocabulary(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

} // namespace west
