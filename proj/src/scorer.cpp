#include "abscloze/scorer.hpp"

#include <algorithm>
#include <cmath>

#include "abscloze/error.hpp"
#include "abscloze/text.hpp"

namespace abscloze::scorer {

std::vector<double> ScorerBackend::cls_embedding(std::span<const TokenId>) const {
  throw CapabilityError("backend does not provide sequence embeddings");
}

std::vector<double> ScorerBackend::ig_grad_projection(const IgGradRequest&) const {
  throw CapabilityError("backend does not provide gradient projections");
}

void check_invariants(const TokenizedText& t) {
  if (t.word_offsets.size() != t.token_ids.size()) {
    throw ShapeError("word_offsets has " + std::to_string(t.word_offsets.size()) +
                     " entries for " + std::to_string(t.token_ids.size()) + " tokens");
  }
  if (!std::is_sorted(t.word_offsets.begin(), t.word_offsets.end())) {
    throw ShapeError("word_offsets must be non-decreasing");
  }
  if (t.mask_position && *t.mask_position >= t.token_ids.size()) {
    throw ShapeError("mask position out of bounds");
  }
}

OptionArray softmax(const OptionArray& raw) {
  const double hi = *std::max_element(raw.begin(), raw.end());
  OptionArray out{};
  double sum = 0;
  for (std::size_t i = 0; i < kNumOptions; ++i) {
    out[i] = std::exp(raw[i] - hi);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

OptionScores from_raw(const OptionArray& raw, std::vector<std::string> trace) {
  return {raw, softmax(raw), std::move(trace)};
}

std::size_t argmax(const OptionArray& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

TokenizedText tokenize_question(const ScorerBackend& backend, std::string_view question) {
  const std::size_t placeholders = count_placeholders(question);
  if (placeholders != 1) {
    throw MalformedSampleError("question has " + std::to_string(placeholders) +
                               " placeholders, expected exactly 1");
  }
  const std::string literal = backend.mask_literal();
  // Keep the mask a separate word so punctuation glued to the placeholder
  // does not merge with it.
  const std::string text =
      text::replace_all(std::string(question), kPlaceholder, " " + literal + " ");
  TokenizedText q = backend.tokenize(text);
  const TokenId mask = backend.mask_token_id();
  std::optional<std::size_t> pos;
  for (std::size_t i = 0; i < q.token_ids.size(); ++i) {
    if (q.token_ids[i] != mask) continue;
    if (pos) throw MalformedSampleError("question tokenizes to more than one mask token");
    pos = i;
  }
  if (!pos) throw MalformedSampleError("placeholder did not tokenize to a mask token");
  q.mask_position = pos;
  return q;
}

TokenizedText concat(const TokenizedText& first, const TokenizedText& second) {
  TokenizedText out = first;
  const std::size_t token_shift = first.token_ids.size();
  const std::size_t word_shift = first.words.size();
  out.token_ids.insert(out.token_ids.end(), second.token_ids.begin(), second.token_ids.end());
  for (const std::size_t w : second.word_offsets) out.word_offsets.push_back(w + word_shift);
  out.words.insert(out.words.end(), second.words.begin(), second.words.end());
  if (!out.mask_position && second.mask_position) {
    out.mask_position = *second.mask_position + token_shift;
  }
  return out;
}

TokenizedText slice(const TokenizedText& t, std::size_t begin, std::size_t end) {
  end = std::min(end, t.token_ids.size());
  begin = std::min(begin, end);
  TokenizedText out;
  out.token_ids.assign(t.token_ids.begin() + begin, t.token_ids.begin() + end);
  if (begin == end) return out;
  const std::size_t first_word = t.word_offsets[begin];
  const std::size_t last_word = t.word_offsets[end - 1];
  for (std::size_t i = begin; i < end; ++i) out.word_offsets.push_back(t.word_offsets[i] - first_word);
  if (last_word < t.words.size()) {
    out.words.assign(t.words.begin() + first_word, t.words.begin() + last_word + 1);
  }
  if (t.mask_position && *t.mask_position >= begin && *t.mask_position < end) {
    out.mask_position = *t.mask_position - begin;
  }
  return out;
}

TokenizedText truncated_input(const TokenizedText& article, const TokenizedText& question,
                              std::size_t max_len, std::size_t special_tokens) {
  if (question.size() + special_tokens >= max_len) {
    throw QuestionOverflowError("question of " + std::to_string(question.size()) +
                                " tokens does not fit in " + std::to_string(max_len));
  }
  const std::size_t budget = max_len - question.size() - special_tokens;
  return concat(slice(article, 0, budget), question);
}

namespace {

struct OptionTokens {
  std::vector<TokenId> ids;
  std::vector<std::size_t> owner;
};

std::size_t require_mask(const TokenizedText& context) {
  if (!context.mask_position) throw ShapeError("context has no mask position");
  return *context.mask_position;
}

}  // namespace

double score_option(const ScorerBackend& backend, const TokenizedText& context,
                    std::string_view option) {
  const std::size_t mask = require_mask(context);
  const TokenizedText tokens = backend.tokenize(option);
  if (tokens.token_ids.empty()) {
    throw EmptyOptionError("option '" + std::string(option) + "' has no tokens");
  }
  const auto scores = backend.vocab_scores({context.token_ids, mask, tokens.token_ids});
  if (scores.size() != tokens.token_ids.size()) {
    throw ShapeError("backend returned " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(tokens.token_ids.size()) + " candidates");
  }
  double sum = 0;
  for (const double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

OptionArray score_options(const ScorerBackend& backend, const TokenizedText& context,
                          const std::array<std::string, kNumOptions>& options) {
  const std::size_t mask = require_mask(context);
  OptionTokens all;
  std::array<std::size_t, kNumOptions> counts{};
  for (std::size_t i = 0; i < kNumOptions; ++i) {
    const TokenizedText t = backend.tokenize(options[i]);
    if (t.token_ids.empty()) {
      throw EmptyOptionError("option '" + options[i] + "' has no tokens");
    }
    counts[i] = t.token_ids.size();
    for (const TokenId id : t.token_ids) {
      all.ids.push_back(id);
      all.owner.push_back(i);
    }
  }
  const auto scores = backend.vocab_scores({context.token_ids, mask, all.ids});
  if (scores.size() != all.ids.size()) {
    throw ShapeError("backend returned " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(all.ids.size()) + " candidates");
  }
  OptionArray raw{};
  for (std::size_t k = 0; k < scores.size(); ++k) raw[all.owner[k]] += scores[k];
  for (std::size_t i = 0; i < kNumOptions; ++i) raw[i] /= static_cast<double>(counts[i]);
  return raw;
}

OptionScores score_sample(const ScorerBackend& backend, const Sample& sample,
                          std::size_t max_len) {
  validate(sample);
  if (max_len == 0) max_len = backend.max_len();
  const TokenizedText question = tokenize_question(backend, sample.question);
  const TokenizedText article = backend.tokenize(sample.article);
  const TokenizedText input = truncated_input(article, question, max_len,
                                              backend.special_token_count());
  OptionScores out = from_raw(score_options(backend, input, sample.options));
  if (input.size() - question.size() < article.size()) out.trace.push_back("truncated");
  return out;
}

OptionScores ensemble_average(std::span<const OptionScores> per_backend) {
  if (per_backend.size() < 2) {
    throw ShapeError("ensemble needs at least two score sets, got " +
                     std::to_string(per_backend.size()));
  }
  OptionScores out;
  for (const auto& s : per_backend) {
    for (std::size_t i = 0; i < kNumOptions; ++i) {
      out.raw[i] += s.raw[i];
      out.probs[i] += s.probs[i];
    }
  }
  const double n = static_cast<double>(per_backend.size());
  double total = 0;
  for (std::size_t i = 0; i < kNumOptions; ++i) {
    out.raw[i] /= n;
    out.probs[i] /= n;
    total += out.probs[i];
  }
  // Guard against drift only; exact means stay bit-identical.
  if (std::abs(total - 1.0) > 1e-12) {
    for (double& p : out.probs) p /= total;
  }
  out.trace.push_back("ensemble:" + std::to_string(per_backend.size()));
  return out;
}

}  // namespace abscloze::scorer
