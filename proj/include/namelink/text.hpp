#pragma once

// Text normalization and UTF-8 helpers.

#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "namelink/error.hpp"

namespace namelink {

/// Decode UTF-8 into code points. Ill-formed sequences become U+FFFD.
inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    const int32_t n = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < n) {
        UChar32 c;
        U8_NEXT(p, i, n, c);
        out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
    }
    return out;
}

inline std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t c : s) {
        UChar32 cp = static_cast<UChar32>(c);
        if (cp > 0x10FFFF || U_IS_SURROGATE(cp)) cp = 0xFFFD;
        uint8_t buf[U8_MAX_LENGTH];
        int32_t len = 0;
        U8_APPEND_UNSAFE(buf, len, cp);
        out.append(reinterpret_cast<const char*>(buf), static_cast<size_t>(len));
    }
    return out;
}

namespace detail {

inline const icu::Normalizer2& nfd() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
    if (U_FAILURE(status) || n == nullptr)
        throw Error(std::string("ICU NFD normalizer unavailable: ") + u_errorName(status));
    return *n;
}

inline bool is_mark(UChar32 c) {
    const int8_t t = u_charType(c);
    return t == U_NON_SPACING_MARK || t == U_ENCLOSING_MARK || t == U_COMBINING_SPACING_MARK;
}

inline icu::UnicodeString decompose(const icu::UnicodeString& s) {
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString out = nfd().normalize(s, status);
    if (U_FAILURE(status)) throw Error(std::string("NFD failed: ") + u_errorName(status));
    return out;
}

inline std::string normalize_once(std::string_view raw) {
    icu::UnicodeString text = icu::UnicodeString::fromUTF8(
        icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
    text = decompose(text);
    text.toLower(icu::Locale::getRoot());
    text = decompose(text);

    icu::UnicodeString folded;
    bool pending_space = false;
    for (int32_t i = 0; i < text.length();) {
        const UChar32 c = text.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            pending_space = true;
            continue;
        }
        if (is_mark(c)) continue;
        if (pending_space && !folded.isEmpty()) folded.append(static_cast<UChar>(u' '));
        pending_space = false;
        // Vietnamese d-with-stroke has no canonical decomposition.
        folded.append(c == 0x0111 ? static_cast<UChar32>(u'd') : c);
    }
    std::string out;
    folded.toUTF8String(out);
    return out;
}

} // namespace detail

/// Canonical comparison form of free text: NFD, combining marks removed,
/// lowercased, whitespace runs collapsed to one space, trimmed.
/// Idempotent: normalize_text(normalize_text(s)) == normalize_text(s).
inline std::string normalize_text(std::string_view raw) {
    std::string cur = detail::normalize_once(raw);
    // Case mappings occasionally expose new marks; iterate to the fixpoint.
    for (int i = 0; i < 4; ++i) {
        std::string next = detail::normalize_once(cur);
        if (next == cur) break;
        cur = std::move(next);
    }
    return cur;
}

/// Split on ASCII whitespace, dropping empty pieces.
inline std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
        size_t j = i;
        while (j < s.size() && !(s[j] == ' ' || s[j] == '\t' || s[j] == '\n' || s[j] == '\r')) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

} // namespace namelink
