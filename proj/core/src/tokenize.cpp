#include <cctype>

#include "dkg/corpus.hpp"

namespace dkg {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      flush();
    } else if (std::ispunct(ch)) {
      flush();
      out.emplace_back(1, static_cast<char>(ch));
    } else {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  flush();
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

namespace {

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<TokenSpan> find_entity_mentions(std::span<const std::string> tokens,
                                            const std::string& entity_name) {
  const auto needle = tokenize(entity_name);
  std::vector<TokenSpan> out;
  if (needle.empty() || needle.size() > tokens.size()) return out;
  std::size_t i = 0;
  while (i + needle.size() <= tokens.size()) {
    bool match = true;
    for (std::size_t k = 0; k < needle.size() && match; ++k) match = iequals(tokens[i + k], needle[k]);
    if (match) {
      out.push_back({i, i + needle.size() - 1});
      i += needle.size();
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace dkg
