#include "abscloze/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "abscloze/error.hpp"

namespace abscloze::attribution {

std::vector<double> integrated_gradients(const scorer::ScorerBackend& backend,
                                         const scorer::TokenizedText& input,
                                         scorer::TokenId target_token, int n_steps) {
  if (!backend.capabilities().ig_grad_projection) {
    throw CapabilityError("backend does not provide gradient projections");
  }
  if (!input.mask_position) throw ShapeError("attribution input has no mask position");
  if (n_steps < 1) throw ConfigError("n_steps must be at least 1");
  std::vector<double> sum(input.size(), 0.0);
  for (int k = 1; k <= n_steps; ++k) {
    const double alpha = static_cast<double>(k) / n_steps;
    const auto g = backend.ig_grad_projection(
        {input.token_ids, *input.mask_position, target_token, alpha});
    if (g.size() != input.size()) {
      throw ShapeError("gradient projection has " + std::to_string(g.size()) +
                       " entries for " + std::to_string(input.size()) + " tokens");
    }
    for (std::size_t i = 0; i < g.size(); ++i) sum[i] += g[i];
  }
  for (double& s : sum) s /= n_steps;
  return sum;
}

std::vector<WordScore> aggregate_to_words(std::span<const double> token_scores,
                                          std::span<const std::size_t> word_offsets,
                                          std::span<const std::string> words) {
  if (token_scores.size() != word_offsets.size()) {
    throw ShapeError(std::to_string(token_scores.size()) + " token scores for " +
                     std::to_string(word_offsets.size()) + " offsets");
  }
  std::size_t n_words = words.size();
  for (const std::size_t w : word_offsets) n_words = std::max(n_words, w + 1);
  std::vector<WordScore> out(n_words);
  for (std::size_t w = 0; w < n_words; ++w) {
    out[w].position = w;
    out[w].word = w < words.size() ? words[w] : "#" + std::to_string(w);
  }
  for (std::size_t i = 0; i < token_scores.size(); ++i) {
    out[word_offsets[i]].score += token_scores[i];
  }
  return out;
}

std::vector<WordScore> top10_normalize(std::span<const WordScore> word_scores) {
  std::vector<WordScore> ranked(word_scores.begin(), word_scores.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const WordScore& a, const WordScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.position < b.position;
  });
  if (ranked.size() > 10) ranked.resize(10);
  double total = 0;
  for (const auto& w : ranked) total += w.score;
  for (auto& w : ranked) {
    w.score = total > 0 ? w.score / total : 1.0 / static_cast<double>(ranked.size());
  }
  return ranked;
}

double completeness_gap(const scorer::ScorerBackend& backend,
                        const scorer::TokenizedText& input, scorer::TokenId target_token,
                        std::span<const double> token_attr) {
  const std::size_t mask = *input.mask_position;
  const std::vector<scorer::TokenId> target{target_token};
  const double f_input = backend.vocab_scores({input.token_ids, mask, target}).at(0);
  std::vector<scorer::TokenId> baseline(input.size(), backend.pad_token_id());
  baseline[mask] = input.token_ids[mask];
  const double f_baseline = backend.vocab_scores({baseline, mask, target}).at(0);
  const double total = std::accumulate(token_attr.begin(), token_attr.end(), 0.0);
  return std::abs(total - (f_input - f_baseline));
}

AttributionResult attribute(const scorer::ScorerBackend& backend,
                            const scorer::TokenizedText& input,
                            scorer::TokenId target_token, int n_steps) {
  AttributionResult r;
  r.target = target_token;
  r.n_steps = n_steps;
  const auto tokens = integrated_gradients(backend, input, target_token, n_steps);
  r.word_scores = aggregate_to_words(tokens, input.word_offsets, input.words);
  r.top10 = top10_normalize(r.word_scores);
  r.completeness_gap = completeness_gap(backend, input, target_token, tokens);
  return r;
}

}  // namespace abscloze::attribution
