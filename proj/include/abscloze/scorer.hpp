#pragma once

// Masked-LM scoring contract. A backend tokenizes text, returns
// vocabulary-space scores at a mask position, sequence embeddings and
// Integrated-Gradients projections. Everything above this header is
// backend-agnostic.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abscloze/sample.hpp"

namespace abscloze::scorer {

using TokenId = std::int32_t;

struct TokenizedText {
  std::vector<TokenId> token_ids;
  // Index of the source word (whitespace-delimited) of each token;
  // non-decreasing.
  std::vector<std::size_t> word_offsets;
  std::optional<std::size_t> mask_position;
  // Source words, indexed by word_offsets.
  std::vector<std::string> words;

  std::size_t size() const { return token_ids.size(); }
  bool operator==(const TokenizedText&) const = default;
};

// Throws ShapeError when offsets are not one-per-token and non-decreasing or
// the mask position is out of bounds.
void check_invariants(const TokenizedText& t);

struct VocabScoreRequest {
  std::span<const TokenId> token_ids;
  std::size_t mask_position = 0;
  std::span<const TokenId> candidate_token_ids;
};

struct IgGradRequest {
  std::span<const TokenId> token_ids;
  std::size_t mask_position = 0;
  TokenId target_token_id = 0;
  double alpha = 1.0;
};

struct Capabilities {
  bool tokenize = true;
  bool vocab_scores = true;
  bool cls_embedding = false;
  bool ig_grad_projection = false;
};

class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  virtual Capabilities capabilities() const = 0;

  // Content tokens only; special framing is the backend's business, and
  // special_token_count() reports how many positions it needs for a pair.
  virtual TokenizedText tokenize(std::string_view text) const = 0;

  // One score per candidate id at mask_position.
  virtual std::vector<double> vocab_scores(const VocabScoreRequest& req) const = 0;

  virtual std::vector<double> cls_embedding(std::span<const TokenId> token_ids) const;

  // Per-token (x - baseline) . grad F at baseline + alpha (x - baseline),
  // F = score of the target token at the mask, baseline = padding.
  virtual std::vector<double> ig_grad_projection(const IgGradRequest& req) const;

  virtual std::size_t max_len() const = 0;
  virtual std::size_t special_token_count() const { return 3; }

  virtual TokenId mask_token_id() const = 0;
  virtual TokenId pad_token_id() const = 0;
  // Surface form substituted for the placeholder before tokenization.
  virtual std::string mask_literal() const { return "[MASK]"; }
};

using OptionArray = std::array<double, kNumOptions>;

struct OptionScores {
  OptionArray raw{};
  OptionArray probs{};
  std::vector<std::string> trace;

  bool operator==(const OptionScores&) const = default;
};

OptionArray softmax(const OptionArray& raw);
OptionScores from_raw(const OptionArray& raw, std::vector<std::string> trace = {});

// Index of the largest value; ties go to the lowest index.
std::size_t argmax(const OptionArray& v);

// Tokenizes the question with the placeholder replaced by the backend's mask
// literal. Throws MalformedSampleError unless exactly one placeholder yields
// exactly one mask token.
TokenizedText tokenize_question(const ScorerBackend& backend, std::string_view question);

// first ++ second, word offsets of `second` shifted past the words of
// `first`. The mask position comes from whichever side has one.
TokenizedText concat(const TokenizedText& first, const TokenizedText& second);

// Tokens [begin, end) with word offsets renumbered from the first word kept.
TokenizedText slice(const TokenizedText& t, std::size_t begin, std::size_t end);

// Article truncated from the tail so that (article, question) plus special
// tokens fits in max_len. Throws QuestionOverflowError when the question
// alone does not fit.
TokenizedText truncated_input(const TokenizedText& article, const TokenizedText& question,
                              std::size_t max_len, std::size_t special_tokens);

// Mean vocabulary score of the option's tokens at the context's mask.
double score_option(const ScorerBackend& backend, const TokenizedText& context,
                    std::string_view option);

// score_option() for all five options with a single backend request.
OptionArray score_options(const ScorerBackend& backend, const TokenizedText& context,
                          const std::array<std::string, kNumOptions>& options);

// Plain path: truncated (article, question), raw scores, softmax. max_len 0
// means the backend's own limit.
OptionScores score_sample(const ScorerBackend& backend, const Sample& sample,
                          std::size_t max_len = 0);

// Mean of raw and of probs across checkpoints; probs renormalized. Needs at
// least two inputs.
OptionScores ensemble_average(std::span<const OptionScores> per_backend);

}  // namespace abscloze::scorer
