#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 text utilities shared by the embedder and the keyword extractor.
//
// Tokenization approximates Unicode default word boundaries without tables:
//  - runs of letters/digits (ASCII, Latin-1, Latin Extended, Greek, Cyrillic,
//    Hebrew, Arabic, Hangul, fullwidth ASCII) form one token;
//  - every Han ideograph and every kana is a token of its own;
//  - whitespace, punctuation and symbol blocks separate tokens;
//  - malformed UTF-8 bytes act as separators.
// Tokens are lowercased (ASCII, Latin-1, Greek, Cyrillic) and fullwidth
// ASCII is folded to its halfwidth form.
namespace lexfuse::text {

std::vector<std::string> tokenize(std::string_view text);

// Strip leading/trailing whitespace (ASCII and U+3000).
std::string trim(std::string_view text);

// trim + replace every internal whitespace run with one ASCII space.
std::string collapse_whitespace(std::string_view text);

bool is_blank(std::string_view text);

// Longest prefix holding at most `max_code_points` complete code points.
std::string_view utf8_prefix(std::string_view text, std::size_t max_code_points);

}  // namespace lexfuse::text
