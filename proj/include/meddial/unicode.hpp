#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace meddial {

// Byte length of the UTF-8 sequence starting at text[pos]. Invalid lead bytes
// are treated as single-byte sequences so scans always make progress.
std::size_t utf8_seq_len(std::string_view text, std::size_t pos);

// Decodes the codepoint starting at text[pos]; invalid bytes decode as U+FFFD.
char32_t utf8_decode(std::string_view text, std::size_t pos, std::size_t& seq_len);

std::vector<char32_t> utf8_codepoints(std::string_view text);

std::size_t codepoint_count(std::string_view text);

// CJK for tokenization purposes: ideographs, kana, CJK symbols/punctuation,
// fullwidth forms, and the supplementary ideographic planes. One codepoint,
// one token.
bool is_cjk(char32_t cp);

// ASCII whitespace plus U+3000 (ideographic space).
bool is_space_cp(char32_t cp);

// Trims ASCII whitespace and U+3000 from both ends.
std::string trim(std::string_view s);

} // namespace meddial
