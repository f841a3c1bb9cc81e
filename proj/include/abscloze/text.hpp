#pragma once

// Small text helpers shared by the lexical, augmentation and scoring code.

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace abscloze::text {

std::string to_lower(std::string_view s);

// Number of UTF-8 code points.
std::size_t char_length(std::string_view s);

bool is_stopword(std::string_view lowered);
const std::unordered_set<std::string>& stopwords();

// A whitespace-delimited word with its byte span in the source text.
struct WordSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string_view view(std::string_view source) const {
    return source.substr(begin, end - begin);
  }
};

std::vector<WordSpan> whitespace_words(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);

// Maximal alphanumeric runs, lowercased. Used for gloss and context bags.
std::vector<std::string> alnum_tokens(std::string_view s);

// Content words: alnum_tokens() minus stopwords.
std::vector<std::string> content_words(std::string_view s);

// Byte span of the alphabetic core of a word ("(dog)," -> "dog"). Empty when
// the word has no letters.
WordSpan alpha_core(std::string_view word);

// Sentence spans (byte ranges) split after '.', '!' or '?' followed by
// whitespace or end of text.
std::vector<WordSpan> sentences(std::string_view s);

std::string replace_all(std::string s, std::string_view from,
                        std::string_view to);

// Underscore-joined lemma form of a (possibly multiword) phrase.
std::string to_lemma(std::string_view phrase);
// Inverse of to_lemma for display: underscores become spaces.
std::string lemma_to_phrase(std::string_view lemma);

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace abscloze::text
