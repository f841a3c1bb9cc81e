#pragma once

// Post-hoc improvement of model decisions: chunk vote aggregation,
// confidence triggers, the linguistic-feature flip and hyponym expansion.

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abscloze/chunker.hpp"
#include "abscloze/lexdb.hpp"
#include "abscloze/lingfeat.hpp"
#include "abscloze/scorer.hpp"

namespace abscloze::rerank {

using scorer::OptionArray;
using scorer::OptionScores;
using Options = std::array<std::string, kNumOptions>;

enum class Trigger { kDifference, kThreshold };

struct RerankConfig {
  double diff_threshold = 0.1;
  double prob_threshold = 0.5;
  int majority = 7;  // of the 13 embedding dimensions
  int hyponym_depth = 1;
  Trigger trigger = Trigger::kDifference;
};

// Throws ConfigError on out-of-range fields.
void validate(const RerankConfig& cfg);

struct Prediction {
  int chosen = 0;
  OptionArray probs{};
  std::vector<std::string> fired;
  std::optional<int> flipped_from;

  bool operator==(const Prediction&) const = default;
};

// raw = sum_j weight_norm_j * raw_j, probs = softmax(raw).
OptionScores vote_aggregate(std::span<const OptionScores> per_chunk,
                            const chunker::ChunkSet& weights);

// Top-1 and top-2 option indices by probability (ties: lower index first).
std::pair<int, int> top_two(const OptionArray& probs);

// Fires when the model is ambivalent: p_top1 - p_top2 < diff_threshold.
bool trigger_difference(const OptionArray& probs, const RerankConfig& cfg);
// Fires when max(probs) < prob_threshold.
bool trigger_threshold(const OptionArray& probs, const RerankConfig& cfg);
bool triggered(const OptionArray& probs, const RerankConfig& cfg);

// Flip decision between the top two options: true when the second option's
// embedding is below the first's in at least `majority` dimensions.
bool flip_to_second(const lingfeat::LinguisticEmbedding& first,
                    const lingfeat::LinguisticEmbedding& second, int majority);

// Linguistic-feature re-ranker, gated by cfg.trigger.
Prediction linguistic_method(const lexdb::LexicalDatabase& db, const OptionArray& probs,
                             const Options& options, const RerankConfig& cfg,
                             const lingfeat::FeatureConfig& feature_cfg = {});

// linguistic_method() with the difference trigger.
Prediction difference_method(const lexdb::LexicalDatabase& db, const OptionArray& probs,
                             const Options& options, const RerankConfig& cfg,
                             const lingfeat::FeatureConfig& feature_cfg = {});

// Scores one candidate word in the sample's context.
using CandidateScorer = std::function<double(std::string_view)>;

// {option} plus the hyponym lemmas (as phrases) of its noun senses, down to
// `depth` levels, in discovery order.
std::vector<std::string> hyponym_candidates(const lexdb::LexicalDatabase& db,
                                            std::string_view option, int depth);

// Hyponym-options re-ranker, gated by cfg.trigger. Each option's new score is
// the max candidate score; the chosen option is the argmax of those.
Prediction hyponym_options_method(const lexdb::LexicalDatabase& db,
                                  const CandidateScorer& score, const Options& options,
                                  const OptionArray& probs, const RerankConfig& cfg);

Prediction hyponym_options_method(const lexdb::LexicalDatabase& db,
                                  const scorer::ScorerBackend& backend,
                                  const scorer::TokenizedText& context,
                                  const Options& options, const OptionArray& probs,
                                  const RerankConfig& cfg);

// Prediction for the unmodified model output.
Prediction keep(const OptionArray& probs);

}  // namespace abscloze::rerank
