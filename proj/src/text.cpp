#include "ipeval/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <cctype>

namespace ipeval {

std::string unify_newlines(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\r') {
      if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
      out.push_back('\n');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string nfc_normalize(const std::string& utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return utf8;

  icu::UnicodeString us = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8));
  // fromUTF8 substitutes U+FFFD for invalid sequences; keep the original
  // bytes in that case so ingest stays lossless for non-UTF-8 inputs.
  std::string roundtrip;
  us.toUTF8String(roundtrip);
  if (roundtrip != utf8) return utf8;

  status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc->normalize(us, status);
  if (U_FAILURE(status)) return utf8;

  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string normalize_text(std::string_view raw) {
  return nfc_normalize(unify_newlines(raw));
}

namespace {

// Decodes one UTF-8 code point at i; advances i past it. Invalid bytes
// decode as themselves (treated as non-whitespace).
UChar32 decode_utf8(std::string_view s, size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  size_t len = 0;
  UChar32 cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return b0;
  }
  if (i + len > s.size()) {
    ++i;
    return b0;
  }
  for (size_t k = 1; k < len; ++k) {
    unsigned char b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

bool is_unicode_space(UChar32 cp) {
  if (cp < 0x80) {
    return std::isspace(static_cast<unsigned char>(cp)) != 0;
  }
  return u_isUWhiteSpace(cp) != 0;
}

}  // namespace

std::vector<TokenSpan> token_spans(std::string_view s) {
  std::vector<TokenSpan> spans;
  size_t i = 0;
  bool in_word = false;
  size_t word_begin = 0;
  while (i < s.size()) {
    size_t start = i;
    UChar32 cp = decode_utf8(s, i);
    bool space = is_unicode_space(cp);
    if (space && in_word) {
      spans.push_back({word_begin, start});
      in_word = false;
    } else if (!space && !in_word) {
      word_begin = start;
      in_word = true;
    }
  }
  if (in_word) spans.push_back({word_begin, s.size()});
  return spans;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (const TokenSpan& span : token_spans(s)) {
    out.emplace_back(s.substr(span.begin, span.end - span.begin));
  }
  return out;
}

size_t count_words(std::string_view s) {
  return token_spans(s).size();
}

std::vector<std::string> metric_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

}  // namespace ipeval
