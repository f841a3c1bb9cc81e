#include "abscloze/http_backend.hpp"

#include "abscloze/error.hpp"
#include "abscloze/text.hpp"
#include "httplib.h"

namespace abscloze::scorer {

using nlohmann::json;

namespace {

std::string describe(const httplib::Result& res) {
  if (!res) return httplib::to_string(res.error());
  std::string msg = "HTTP " + std::to_string(res->status);
  try {
    const auto body = json::parse(res->body);
    if (body.contains("message")) msg += ": " + body.at("message").get<std::string>();
  } catch (const json::exception&) {
  }
  return msg;
}

template <typename Fn>
json with_retries(const std::string& base, const std::string& path, int retries, Fn&& send) {
  std::string last;
  int status = 0;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    httplib::Result res = send();
    if (res && res->status >= 200 && res->status < 300) {
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw TransportError(base + path + ": invalid JSON response: " + e.what(), res->status);
      }
    }
    last = describe(res);
    status = res ? res->status : 0;
    // Client errors are deterministic; retrying cannot help.
    if (res && res->status < 500) break;
  }
  throw TransportError(base + path + ": " + last, status);
}

template <typename T>
T field(const json& body, const char* name, const std::string& path) {
  try {
    return body.at(name).get<T>();
  } catch (const json::exception& e) {
    throw TransportError(path + ": bad or missing field '" + name + "': " + e.what());
  }
}

}  // namespace

json HttpBackend::get(const std::string& path) const {
  return with_retries(config_.base_url, path, config_.retries, [&] {
    httplib::Client cli(config_.base_url);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    return cli.Get(path);
  });
}

json HttpBackend::post(const std::string& path, const json& body) const {
  const std::string payload = body.dump();
  return with_retries(config_.base_url, path, config_.retries, [&] {
    httplib::Client cli(config_.base_url);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    cli.set_write_timeout(timeout);
    return cli.Post(path, payload, "application/json");
  });
}

HttpBackend HttpBackend::connect(HttpBackendConfig config) {
  HttpBackend b(std::move(config));
  const json health = b.get("/health");
  b.model_ = field<std::string>(health, "model", "/health");
  b.max_len_ = field<std::size_t>(health, "max_len", "/health");
  b.vocab_size_ = field<std::size_t>(health, "vocab_size", "/health");
  // The special-token count is a model constant; read it once.
  const json probe = b.post("/tokenize", {{"text", b.config_.mask_literal}});
  b.special_tokens_ = field<std::size_t>(probe, "special_token_count", "/tokenize");
  b.mask_id_ = b.single_token(b.config_.mask_literal);
  b.pad_id_ = b.single_token(b.config_.pad_literal);
  return b;
}

TokenId HttpBackend::single_token(const std::string& literal) const {
  const TokenizedText t = tokenize(literal);
  if (t.token_ids.size() != 1) {
    throw TransportError("/tokenize: '" + literal + "' is not a single token (got " +
                         std::to_string(t.token_ids.size()) + ")");
  }
  return t.token_ids.front();
}

Capabilities HttpBackend::capabilities() const {
  return {true, true, true, true};
}

TokenizedText HttpBackend::tokenize(std::string_view input) const {
  const json body = post("/tokenize", {{"text", std::string(input)}});
  TokenizedText out;
  out.token_ids = field<std::vector<TokenId>>(body, "token_ids", "/tokenize");
  out.word_offsets = field<std::vector<std::size_t>>(body, "word_offsets", "/tokenize");
  out.words = text::split_whitespace(input);
  try {
    check_invariants(out);
  } catch (const ShapeError& e) {
    throw TransportError(std::string("/tokenize: ") + e.what());
  }
  return out;
}

std::vector<double> HttpBackend::vocab_scores(const VocabScoreRequest& req) const {
  const json body = post("/vocab_scores",
                         {{"token_ids", std::vector<TokenId>(req.token_ids.begin(), req.token_ids.end())},
                          {"mask_position", req.mask_position},
                          {"candidate_token_ids",
                           std::vector<TokenId>(req.candidate_token_ids.begin(),
                                                req.candidate_token_ids.end())}});
  auto scores = field<std::vector<double>>(body, "scores", "/vocab_scores");
  if (scores.size() != req.candidate_token_ids.size()) {
    throw TransportError("/vocab_scores: expected " + std::to_string(req.candidate_token_ids.size()) +
                         " scores, got " + std::to_string(scores.size()));
  }
  return scores;
}

std::vector<double> HttpBackend::cls_embedding(std::span<const TokenId> token_ids) const {
  const json body =
      post("/embed", {{"token_ids", std::vector<TokenId>(token_ids.begin(), token_ids.end())}});
  return field<std::vector<double>>(body, "vector", "/embed");
}

std::vector<double> HttpBackend::ig_grad_projection(const IgGradRequest& req) const {
  const json body = post("/ig_grad",
                         {{"token_ids", std::vector<TokenId>(req.token_ids.begin(), req.token_ids.end())},
                          {"mask_position", req.mask_position},
                          {"target_token_id", req.target_token_id},
                          {"alpha", req.alpha},
                          {"baseline", "pad"}});
  auto out = field<std::vector<double>>(body, "per_token_projection", "/ig_grad");
  if (out.size() != req.token_ids.size()) {
    throw TransportError("/ig_grad: expected " + std::to_string(req.token_ids.size()) +
                         " projections, got " + std::to_string(out.size()));
  }
  return out;
}

}  // namespace abscloze::scorer
