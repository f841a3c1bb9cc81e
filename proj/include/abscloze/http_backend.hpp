#pragma once

// Client for the masked-LM inference service.
//
//   GET  /health        -> {model, max_len, vocab_size}
//   POST /tokenize      {text} -> {token_ids, word_offsets, special_token_count}
//   POST /vocab_scores  {token_ids, mask_position, candidate_token_ids} -> {scores}
//   POST /embed         {token_ids} -> {vector}
//   POST /ig_grad       {token_ids, mask_position, target_token_id, alpha,
//                        baseline: "pad"} -> {per_token_projection}
//
// Errors carry {code, message}. Token ids sent to the server are content
// tokens; positions index into the array sent. Word offsets index the
// whitespace-delimited words of the tokenized text.

#include <chrono>
#include <string>

#include "abscloze/scorer.hpp"
#include "json.hpp"

namespace abscloze::scorer {

struct HttpBackendConfig {
  std::string base_url = "http://127.0.0.1:8000";
  int timeout_ms = 30000;
  int retries = 2;  // extra attempts on connection failures and 5xx
  std::string mask_literal = "[MASK]";
  std::string pad_literal = "[PAD]";
};

class HttpBackend final : public ScorerBackend {
 public:
  // Queries /health and resolves the mask and pad token ids. Throws
  // TransportError when the service is unreachable or misbehaves.
  static HttpBackend connect(HttpBackendConfig config);

  Capabilities capabilities() const override;
  TokenizedText tokenize(std::string_view text) const override;
  std::vector<double> vocab_scores(const VocabScoreRequest& req) const override;
  std::vector<double> cls_embedding(std::span<const TokenId> token_ids) const override;
  std::vector<double> ig_grad_projection(const IgGradRequest& req) const override;
  std::size_t max_len() const override { return max_len_; }
  std::size_t special_token_count() const override { return special_tokens_; }
  TokenId mask_token_id() const override { return mask_id_; }
  TokenId pad_token_id() const override { return pad_id_; }
  std::string mask_literal() const override { return config_.mask_literal; }

  const std::string& model_name() const { return model_; }
  std::size_t vocab_size() const { return vocab_size_; }

 private:
  explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

  nlohmann::json get(const std::string& path) const;
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  TokenId single_token(const std::string& literal) const;

  HttpBackendConfig config_;
  std::string model_;
  std::size_t max_len_ = 512;
  std::size_t vocab_size_ = 0;
  std::size_t special_tokens_ = 3;
  TokenId mask_id_ = 0;
  TokenId pad_id_ = 0;
};

}  // namespace abscloze::scorer
