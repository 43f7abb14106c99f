#include "meddial/unicode.hpp"

namespace meddial {

std::size_t utf8_seq_len(std::string_view text, std::size_t pos) {
    if (pos >= text.size()) return 0;
    const auto b = static_cast<unsigned char>(text[pos]);
    std::size_t len = 1;
    if ((b & 0x80u) == 0x00u) len = 1;
    else if ((b & 0xE0u) == 0xC0u) len = 2;
    else if ((b & 0xF0u) == 0xE0u) len = 3;
    else if ((b & 0xF8u) == 0xF0u) len = 4;
    else return 1; // stray continuation byte
    if (pos + len > text.size()) return 1;
    for (std::size_t i = 1; i < len; ++i) {
        if ((static_cast<unsigned char>(text[pos + i]) & 0xC0u) != 0x80u) return 1;
    }
    return len;
}

char32_t utf8_decode(std::string_view text, std::size_t pos, std::size_t& seq_len) {
    seq_len = utf8_seq_len(text, pos);
    if (seq_len == 0) return 0xFFFD;
    const auto b0 = static_cast<unsigned char>(text[pos]);
    switch (seq_len) {
    case 1:
        return (b0 & 0x80u) ? char32_t{0xFFFD} : char32_t{b0};
    case 2:
        return (char32_t(b0 & 0x1Fu) << 6) |
               char32_t(static_cast<unsigned char>(text[pos + 1]) & 0x3Fu);
    case 3:
        return (char32_t(b0 & 0x0Fu) << 12) |
               (char32_t(static_cast<unsigned char>(text[pos + 1]) & 0x3Fu) << 6) |
               char32_t(static_cast<unsigned char>(text[pos + 2]) & 0x3Fu);
    default:
        return (char32_t(b0 & 0x07u) << 18) |
               (char32_t(static_cast<unsigned char>(text[pos + 1]) & 0x3Fu) << 12) |
               (char32_t(static_cast<unsigned char>(text[pos + 2]) & 0x3Fu) << 6) |
               char32_t(static_cast<unsigned char>(text[pos + 3]) & 0x3Fu);
    }
}

std::vector<char32_t> utf8_codepoints(std::string_view text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        out.push_back(utf8_decode(text, pos, len));
        pos += len;
    }
    return out;
}

std::size_t codepoint_count(std::string_view text) {
    std::size_t n = 0, pos = 0;
    while (pos < text.size()) {
        pos += utf8_seq_len(text, pos);
        ++n;
    }
    return n;
}

bool is_cjk(char32_t cp) {
    return (cp >= 0x3000 && cp <= 0x303F)   // CJK symbols and punctuation
        || (cp >= 0x3040 && cp <= 0x30FF)   // kana
        || (cp >= 0x3400 && cp <= 0x4DBF)   // ext A
        || (cp >= 0x4E00 && cp <= 0x9FFF)   // unified ideographs
        || (cp >= 0xF900 && cp <= 0xFAFF)   // compatibility ideographs
        || (cp >= 0xFF00 && cp <= 0xFFEF)   // fullwidth / halfwidth forms
        || (cp >= 0x20000 && cp <= 0x2FFFF); // supplementary planes
}

bool is_space_cp(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
           cp == U'\f' || cp == U'\v' || cp == 0x3000;
}

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    while (begin < s.size()) {
        std::size_t len = 0;
        const char32_t cp = utf8_decode(s, begin, len);
        if (!is_space_cp(cp)) break;
        begin += len;
    }
    // Walk codepoints to find the last non-space boundary.
    std::size_t end = begin, pos = begin;
    while (pos < s.size()) {
        std::size_t len = 0;
        const char32_t cp = utf8_decode(s, pos, len);
        pos += len;
        if (!is_space_cp(cp)) end = pos;
    }
    return std::string(s.substr(begin, end - begin));
}

} // namespace meddial
