#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ipeval {

// CRLF and lone CR become LF.
std::string unify_newlines(std::string_view s);

// Unicode NFC. Invalid UTF-8 passes through unchanged.
std::string nfc_normalize(const std::string& utf8);

// Canonical input normalization applied to every document on ingest.
std::string normalize_text(std::string_view raw);

// Byte span [begin, end) of one whitespace-delimited word.
struct TokenSpan {
  size_t begin = 0;
  size_t end = 0;
};

// Maximal runs of non-whitespace, with Unicode whitespace as delimiter.
std::vector<TokenSpan> token_spans(std::string_view s);
std::vector<std::string> whitespace_tokens(std::string_view s);
size_t count_words(std::string_view s);

// Tokenizer for the surface-overlap metrics: lowercased word tokens,
// punctuation stripped. ASCII letters are case-folded; non-ASCII bytes
// are kept verbatim.
std::vector<std::string> metric_tokens(std::string_view s);

}  // namespace ipeval
