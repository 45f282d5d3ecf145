#include "zel/index/tokenizer.hpp"

#include <cctype>

namespace zel::index {

namespace {

bool is_token_char(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

std::vector<TokenSpan> tokenize_spans(std::string_view text, const TokenizerConfig& cfg) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && !is_token_char(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= n) break;
    std::size_t begin = i;
    while (i < n && is_token_char(static_cast<unsigned char>(text[i]))) ++i;
    if (i - begin < cfg.min_token_len) continue;
    std::string tok(text.substr(begin, i - begin));
    if (cfg.lowercase) {
      for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    out.push_back(TokenSpan{std::move(tok), begin, i});
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg) {
  std::vector<std::string> out;
  for (auto& span : tokenize_spans(text, cfg)) out.push_back(std::move(span.text));
  return out;
}

std::string fold_case(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace zel::index
