#pragma once

// Integrated Gradients over the backend's gradient projections, with the
// right Riemann rule: attribution_i = (1/n) sum_{k=1..n} g_i(k/n).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "abscloze/scorer.hpp"

namespace abscloze::attribution {

struct WordScore {
  std::string word;
  double score = 0.0;
  std::size_t position = 0;

  bool operator==(const WordScore&) const = default;
};

struct AttributionResult {
  std::vector<WordScore> word_scores;
  std::vector<WordScore> top10;  // score = normalized score
  scorer::TokenId target = 0;
  int n_steps = 25;
  double completeness_gap = 0.0;
};

std::vector<double> integrated_gradients(const scorer::ScorerBackend& backend,
                                         const scorer::TokenizedText& input,
                                         scorer::TokenId target_token, int n_steps = 25);

// Sums token scores into their words. `words` supplies the word strings and
// may be empty (words are then named by index).
std::vector<WordScore> aggregate_to_words(std::span<const double> token_scores,
                                          std::span<const std::size_t> word_offsets,
                                          std::span<const std::string> words = {});

// The ten highest scores (earlier position on ties), divided by their sum,
// or uniform when that sum is not positive.
std::vector<WordScore> top10_normalize(std::span<const WordScore> word_scores);

// |sum(token_attr) - (F(input) - F(baseline))|, baseline = pad everywhere
// except the mask.
double completeness_gap(const scorer::ScorerBackend& backend,
                        const scorer::TokenizedText& input, scorer::TokenId target_token,
                        std::span<const double> token_attr);

AttributionResult attribute(const scorer::ScorerBackend& backend,
                            const scorer::TokenizedText& input,
                            scorer::TokenId target_token, int n_steps = 25);

}  // namespace abscloze::attribution
