#include "abscloze/chunker.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "abscloze/error.hpp"

namespace abscloze::chunker {

std::size_t budget(std::size_t question_tokens, const ChunkParams& params) {
  if (question_tokens + params.special_tokens >= params.max_len) {
    throw QuestionOverflowError("question of " + std::to_string(question_tokens) +
                                " tokens leaves no room in max_len " +
                                std::to_string(params.max_len));
  }
  return params.max_len - question_tokens - params.special_tokens;
}

ChunkSet split(const TokenizedText& article, const TokenizedText& question,
               const ChunkParams& params) {
  const std::size_t b = budget(question.size(), params);
  const std::size_t n = article.size();
  ChunkSet out;
  if (n <= b) {
    out.chunks.push_back({0, n, article.token_ids, 0.0, 0.0});
    return out;
  }
  if (params.stride >= b) {
    throw ConfigError("stride " + std::to_string(params.stride) +
                      " must be smaller than the chunk budget " + std::to_string(b));
  }
  const std::size_t step = b - params.stride;
  for (std::size_t start = 0;; start += step) {
    const std::size_t end = std::min(start + b, n);
    Chunk c;
    c.start = start;
    c.end = end;
    c.tokens.assign(article.token_ids.begin() + static_cast<std::ptrdiff_t>(start),
                    article.token_ids.begin() + static_cast<std::ptrdiff_t>(end));
    out.chunks.push_back(std::move(c));
    if (end == n) break;
  }
  return out;
}

double weight_exact_match(const TokenizedText& question, const Chunk& chunk) {
  if (chunk.tokens.empty()) return 0.0;
  std::unordered_set<TokenId> q;
  for (std::size_t i = 0; i < question.token_ids.size(); ++i) {
    if (question.mask_position && i == *question.mask_position) continue;
    q.insert(question.token_ids[i]);
  }
  const std::unordered_set<TokenId> c(chunk.tokens.begin(), chunk.tokens.end());
  std::size_t common = 0;
  for (const TokenId t : c) common += q.count(t);
  return static_cast<double>(common) / static_cast<double>(c.size());
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) {
    throw ShapeError("embedding dimensions differ: " + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()));
  }
  double dot = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0 || vv == 0) return 0.0;
  return dot / (std::sqrt(uu) * std::sqrt(vv));
}

double weight_similarity(const ScorerBackend& backend, const TokenizedText& question,
                         const Chunk& chunk) {
  if (chunk.tokens.empty()) return 0.0;
  const auto u = backend.cls_embedding(question.token_ids);
  const auto v = backend.cls_embedding(chunk.tokens);
  return std::max(0.0, cosine(u, v));
}

void assign_weights(ChunkSet& chunks, const TokenizedText& question, Weighting weighting,
                    const ScorerBackend* backend) {
  if (weighting == Weighting::kSimilarity && backend == nullptr) {
    throw ConfigError("similarity weighting needs a backend");
  }
  for (std::size_t j = 0; j < chunks.size(); ++j) {
    Chunk& c = chunks.chunks[j];
    if (c.tokens.empty()) chunks.trace.push_back("empty-chunk:" + std::to_string(j));
    c.weight_raw = weighting == Weighting::kExact ? weight_exact_match(question, c)
                                                  : weight_similarity(*backend, question, c);
  }
}

ChunkSet normalize(ChunkSet chunks) {
  double total = 0;
  for (const auto& c : chunks.chunks) total += c.weight_raw;
  const double n = static_cast<double>(chunks.size());
  for (auto& c : chunks.chunks) c.weight_norm = total > 0 ? c.weight_raw / total : 1.0 / n;
  if (total <= 0 && !chunks.chunks.empty()) chunks.trace.push_back("uniform-weights");
  return chunks;
}

const Chunk& max_context_chunk(const ChunkSet& chunks) {
  if (chunks.chunks.empty()) throw ShapeError("no chunks");
  const Chunk* best = &chunks.chunks.front();
  for (const auto& c : chunks.chunks) {
    if (c.weight_raw > best->weight_raw) best = &c;
  }
  return *best;
}

}  // namespace abscloze::chunker
