#pragma once

// Overlapping article chunks for inputs longer than the model budget, with
// per-chunk voting weights.

#include <cstddef>
#include <string>
#include <vector>

#include "abscloze/scorer.hpp"

namespace abscloze::chunker {

using scorer::ScorerBackend;
using scorer::TokenId;
using scorer::TokenizedText;

struct ChunkParams {
  std::size_t max_len = 512;
  std::size_t stride = 128;  // tokens shared by consecutive chunks
  std::size_t special_tokens = 3;
};

struct Chunk {
  std::size_t start = 0;  // span over article tokens, [start, end)
  std::size_t end = 0;
  std::vector<TokenId> tokens;
  double weight_raw = 0.0;
  double weight_norm = 0.0;

  std::size_t size() const { return end - start; }
};

struct ChunkSet {
  std::vector<Chunk> chunks;
  std::vector<std::string> trace;

  std::size_t size() const { return chunks.size(); }
};

// Chunk token budget for a question of `question_tokens` tokens. Throws
// QuestionOverflowError when nothing is left for the article.
std::size_t budget(std::size_t question_tokens, const ChunkParams& params);

// Chunks start at 0, b - stride, 2(b - stride), ... and every article token
// lands in at least one chunk. An empty article gives one empty chunk.
// Throws ConfigError when the article needs several chunks but
// stride >= budget.
ChunkSet split(const TokenizedText& article, const TokenizedText& question,
               const ChunkParams& params = {});

// |Q n C| / |C| over token-id sets, the question's mask token excluded.
// Empty chunks weigh 0.
double weight_exact_match(const TokenizedText& question, const Chunk& chunk);

// Cosine of the backend's sequence embeddings, clamped at 0. Zero-norm
// embeddings weigh 0.
double weight_similarity(const ScorerBackend& backend, const TokenizedText& question,
                         const Chunk& chunk);

double cosine(const std::vector<double>& u, const std::vector<double>& v);

enum class Weighting { kExact, kSimilarity };

// Sets weight_raw on every chunk; empty chunks are noted in the trace.
void assign_weights(ChunkSet& chunks, const TokenizedText& question, Weighting weighting,
                    const ScorerBackend* backend = nullptr);

// weight_norm = weight_raw / sum, or 1/n when the sum is 0.
ChunkSet normalize(ChunkSet chunks);

// Largest weight_raw; ties go to the earliest chunk.
const Chunk& max_context_chunk(const ChunkSet& chunks);

}  // namespace abscloze::chunker
