#include "abscloze/toy_scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "abscloze/error.hpp"
#include "abscloze/text.hpp"

namespace abscloze::scorer {

namespace {

constexpr std::string_view kMaskLiteral = "[MASK]";

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

}  // namespace

std::vector<std::string> toy_pieces(std::string_view word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    if (word.substr(i, kMaskLiteral.size()) == kMaskLiteral) {
      out.emplace_back(kMaskLiteral);
      i += kMaskLiteral.size();
    } else if (is_word_byte(word[i])) {
      std::size_t j = i;
      while (j < word.size() && is_word_byte(word[j]) &&
             word.substr(j, kMaskLiteral.size()) != kMaskLiteral) {
        ++j;
      }
      out.push_back(text::to_lower(word.substr(i, j - i)));
      i = j;
    } else {
      out.emplace_back(1, word[i]);
      ++i;
    }
  }
  return out;
}

std::shared_ptr<const ToyScorer> ToyScorer::build(std::span<const std::string> corpus,
                                                  ToyScorerOptions options) {
  if (corpus.empty()) throw ConfigError("toy scorer needs a non-empty corpus");
  std::shared_ptr<ToyScorer> s(new ToyScorer());
  s->options_ = options;

  std::vector<std::set<std::string>> docs;
  std::set<std::string> all;
  for (const auto& doc : corpus) {
    std::set<std::string> bag;
    for (const auto& w : text::split_whitespace(doc)) {
      for (auto& p : toy_pieces(w)) {
        if (p == kMaskLiteral) continue;
        bag.insert(p);
      }
    }
    all.insert(bag.begin(), bag.end());
    docs.push_back(std::move(bag));
  }

  s->vocab_ = {"[PAD]", "[UNK]", std::string(kMaskLiteral)};
  for (const auto& t : all) {
    if (t == "[PAD]" || t == "[UNK]") continue;
    s->vocab_.push_back(t);
  }
  for (std::size_t i = 0; i < s->vocab_.size(); ++i) {
    s->index_.emplace(s->vocab_[i], static_cast<TokenId>(i));
  }

  std::vector<std::unordered_map<TokenId, std::uint64_t>> counts(s->vocab_.size());
  for (const auto& bag : docs) {
    std::vector<TokenId> ids;
    for (const auto& t : bag) ids.push_back(s->index_.at(t));
    for (const TokenId a : ids) {
      for (const TokenId b : ids) {
        if (a != b) ++counts[a][b];
      }
    }
  }
  s->weights_.resize(s->vocab_.size());
  for (std::size_t t = 0; t < counts.size(); ++t) {
    for (const auto& [c, n] : counts[t]) {
      s->weights_[t][c] = std::log1p(static_cast<double>(n));
    }
  }
  return s;
}

Capabilities ToyScorer::capabilities() const {
  return {true, true, true, true};
}

TokenId ToyScorer::token_id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& ToyScorer::token_string(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) {
    throw LookupError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return vocab_[static_cast<std::size_t>(id)];
}

TokenizedText ToyScorer::tokenize(std::string_view input) const {
  TokenizedText out;
  out.words = text::split_whitespace(input);
  for (std::size_t w = 0; w < out.words.size(); ++w) {
    for (const auto& p : toy_pieces(out.words[w])) {
      out.token_ids.push_back(p == kMaskLiteral ? kMask : token_id(p));
      out.word_offsets.push_back(w);
    }
  }
  return out;
}

double ToyScorer::weight(TokenId target, TokenId token) const {
  if (target < 0 || static_cast<std::size_t>(target) >= weights_.size()) return 0.0;
  const auto& row = weights_[static_cast<std::size_t>(target)];
  auto it = row.find(token);
  return it == row.end() ? 0.0 : it->second;
}

void ToyScorer::check_request(std::span<const TokenId> ids, std::size_t mask) const {
  if (mask >= ids.size()) throw ShapeError("mask position out of bounds");
  if (ids.size() + options_.special_tokens > options_.max_len) {
    throw ShapeError("sequence of " + std::to_string(ids.size()) + " tokens exceeds max_len " +
                     std::to_string(options_.max_len));
  }
}

std::vector<double> ToyScorer::vocab_scores(const VocabScoreRequest& req) const {
  check_request(req.token_ids, req.mask_position);
  std::vector<double> out;
  out.reserve(req.candidate_token_ids.size());
  for (const TokenId t : req.candidate_token_ids) {
    double s = 0;
    for (std::size_t i = 0; i < req.token_ids.size(); ++i) {
      if (i != req.mask_position) s += weight(t, req.token_ids[i]);
    }
    out.push_back(s);
  }
  return out;
}

std::vector<double> ToyScorer::cls_embedding(std::span<const TokenId> token_ids) const {
  std::vector<double> v(vocab_.size(), 0.0);
  for (const TokenId t : token_ids) {
    if (t == kPad || t == kUnk || t == kMask) continue;
    if (t >= 0 && static_cast<std::size_t>(t) < v.size()) v[static_cast<std::size_t>(t)] += 1.0;
  }
  double norm = 0;
  for (const double x : v) norm += x * x;
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<double> ToyScorer::ig_grad_projection(const IgGradRequest& req) const {
  check_request(req.token_ids, req.mask_position);
  if (!(req.alpha > 0.0 && req.alpha <= 1.0)) throw ShapeError("alpha must be in (0, 1]");
  // The gradient of F_t with respect to position i's embedding is the weight
  // row of t at every alpha; projecting onto (x_i - pad) leaves
  // weight(t, x_i) - weight(t, pad).
  std::vector<double> out(req.token_ids.size(), 0.0);
  for (std::size_t i = 0; i < req.token_ids.size(); ++i) {
    if (i == req.mask_position) continue;
    out[i] = weight(req.target_token_id, req.token_ids[i]) - weight(req.target_token_id, kPad);
  }
  return out;
}

}  // namespace abscloze::scorer
