#pragma once

// Deterministic corpus-statistics backend. It lets the whole engine run
// without a model server.
//
// Tokenization: whitespace words, each split into lowercased alphanumeric
// runs and single punctuation characters; "[MASK]" is the mask token.
// Vocabulary = corpus tokens (sorted) after [PAD], [UNK], [MASK].
//
// Score of candidate t at the mask:
//   F_t(x) = sum over non-mask positions i of log(1 + C(t, x_i))
// where C(t, c) counts corpus documents containing both t and c (t != c).
// F_t is linear in the one-hot token embeddings, so its gradient is constant
// and Integrated Gradients is exact for every step count.

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "abscloze/scorer.hpp"

namespace abscloze::scorer {

struct ToyScorerOptions {
  std::size_t max_len = 512;
  std::size_t special_tokens = 3;
};

class ToyScorer final : public ScorerBackend {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kMask = 2;

  // Throws ConfigError for an empty corpus.
  static std::shared_ptr<const ToyScorer> build(std::span<const std::string> corpus,
                                                ToyScorerOptions options = {});

  Capabilities capabilities() const override;
  TokenizedText tokenize(std::string_view text) const override;
  std::vector<double> vocab_scores(const VocabScoreRequest& req) const override;
  std::vector<double> cls_embedding(std::span<const TokenId> token_ids) const override;
  std::vector<double> ig_grad_projection(const IgGradRequest& req) const override;
  std::size_t max_len() const override { return options_.max_len; }
  std::size_t special_token_count() const override { return options_.special_tokens; }
  TokenId mask_token_id() const override { return kMask; }
  TokenId pad_token_id() const override { return kPad; }

  std::size_t vocab_size() const { return vocab_.size(); }
  TokenId token_id(std::string_view token) const;
  const std::string& token_string(TokenId id) const;

  // Per-position weight log(1 + C(target, token)).
  double weight(TokenId target, TokenId token) const;

 private:
  ToyScorer() = default;
  void check_request(std::span<const TokenId> ids, std::size_t mask) const;

  ToyScorerOptions options_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<std::unordered_map<TokenId, double>> weights_;
};

// Raw word pieces of the toy tokenizer, exposed for tests and corpus tools.
std::vector<std::string> toy_pieces(std::string_view word);

}  // namespace abscloze::scorer
