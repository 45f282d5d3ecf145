#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace zel::index {

struct TokenizerConfig {
  bool lowercase = true;
  std::size_t min_token_len = 1;
};

struct TokenSpan {
  std::string text;   // token text after case folding, if configured
  std::size_t begin;  // byte offsets into the original string
  std::size_t end;
};

// Splits on non-alphanumeric boundaries. ASCII letters and digits are token
// characters; bytes >= 0x80 are kept as token characters so multi-byte UTF-8
// words stay intact. Deterministic: identical input yields identical output.
std::vector<TokenSpan> tokenize_spans(std::string_view text, const TokenizerConfig& cfg);

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg);

// Case folding used across categorization and easy-mention detection:
// ASCII-lowercases and collapses whitespace runs to single spaces.
std::string fold_case(std::string_view text);

}  // namespace zel::index
