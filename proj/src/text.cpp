#include "usp/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace usp::text {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n\f\v");
  if (begin == std::string_view::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string normalize_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // swallow leading whitespace
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> tokenize_words(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

const std::unordered_set<std::string>& stopword_set() {
  static const std::unordered_set<std::string> kStopwords = {
      "the",   "a",    "an",    "is",    "are",   "was",   "were",  "be",
      "been",  "am",   "being", "have",  "has",   "had",   "do",    "does",
      "did",   "will", "would", "could", "should", "may",  "might", "can",
      "shall", "must", "and",   "or",    "but",   "nor",   "not",   "so",
      "yet",   "for",  "of",    "in",    "to",    "with",  "at",    "by",
      "from",  "on",   "as",    "if",    "that",  "this",  "these", "those",
      "it",    "its",  "he",    "she",   "they",  "them",  "we",    "us",
      "you",   "your", "yours", "their", "his",   "her",   "our",   "my",
      "me",    "i",    "who",   "whom",  "which", "what",  "where", "when",
      "why",   "how",  "all",   "each",  "every", "both",  "few",   "more",
      "most",  "other", "some", "such",  "than",  "too",   "very",  "just",
      "about", "into", "over",  "under", "again", "also",  "then",  "there",
      "here",  "out",  "up",    "down",  "no",    "only",  "own",   "same",
  };
  return kStopwords;
}

}  // namespace

bool is_stopword(const std::string& word) {
  return stopword_set().count(word) > 0;
}

std::vector<std::string> content_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& tok : tokenize_words(s)) {
    if (tok.size() < 2 || is_stopword(tok)) continue;
    out.push_back(std::move(tok));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t SplitMix64::next() {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double SplitMix64::next_double() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t SplitMix64::next_below(std::uint64_t bound) {
  return bound == 0 ? 0 : next() % bound;
}

}  // namespace usp::text
