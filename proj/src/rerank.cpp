#include "abscloze/rerank.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "abscloze/error.hpp"
#include "abscloze/text.hpp"

namespace abscloze::rerank {

void validate(const RerankConfig& cfg) {
  if (cfg.majority < 1 || cfg.majority > static_cast<int>(lingfeat::kDims)) {
    throw ConfigError("majority must be in [1, 13]");
  }
  if (cfg.diff_threshold < 0 || cfg.diff_threshold > 1) {
    throw ConfigError("diff threshold must be in [0, 1]");
  }
  if (cfg.prob_threshold < 0 || cfg.prob_threshold > 1) {
    throw ConfigError("prob threshold must be in [0, 1]");
  }
  if (cfg.hyponym_depth < 1) throw ConfigError("hyponym depth must be at least 1");
}

OptionScores vote_aggregate(std::span<const OptionScores> per_chunk,
                            const chunker::ChunkSet& weights) {
  if (per_chunk.size() != weights.size()) {
    throw ShapeError(std::to_string(per_chunk.size()) + " score sets for " +
                     std::to_string(weights.size()) + " chunks");
  }
  if (per_chunk.empty()) throw ShapeError("no chunks to aggregate");
  OptionArray raw{};
  for (std::size_t j = 0; j < per_chunk.size(); ++j) {
    const double w = weights.chunks[j].weight_norm;
    for (std::size_t i = 0; i < kNumOptions; ++i) raw[i] += w * per_chunk[j].raw[i];
  }
  return scorer::from_raw(raw, {"vote:" + std::to_string(per_chunk.size())});
}

std::pair<int, int> top_two(const OptionArray& probs) {
  std::array<int, kNumOptions> order{};
  for (std::size_t i = 0; i < kNumOptions; ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });
  return {order[0], order[1]};
}

bool trigger_difference(const OptionArray& probs, const RerankConfig& cfg) {
  const auto [first, second] = top_two(probs);
  return probs[first] - probs[second] < cfg.diff_threshold;
}

bool trigger_threshold(const OptionArray& probs, const RerankConfig& cfg) {
  return *std::max_element(probs.begin(), probs.end()) < cfg.prob_threshold;
}

bool triggered(const OptionArray& probs, const RerankConfig& cfg) {
  return cfg.trigger == Trigger::kDifference ? trigger_difference(probs, cfg)
                                             : trigger_threshold(probs, cfg);
}

namespace {

const char* trigger_tag(Trigger t) {
  return t == Trigger::kDifference ? "trigger:difference" : "trigger:threshold";
}

}  // namespace

Prediction keep(const OptionArray& probs) {
  Prediction p;
  p.probs = probs;
  p.chosen = static_cast<int>(scorer::argmax(probs));
  return p;
}

bool flip_to_second(const lingfeat::LinguisticEmbedding& first,
                    const lingfeat::LinguisticEmbedding& second, int majority) {
  return lingfeat::concreteness_vote(first, second) >= majority;
}

Prediction linguistic_method(const lexdb::LexicalDatabase& db, const OptionArray& probs,
                             const Options& options, const RerankConfig& cfg,
                             const lingfeat::FeatureConfig& feature_cfg) {
  Prediction p = keep(probs);
  if (!triggered(probs, cfg)) return p;
  p.fired.emplace_back(trigger_tag(cfg.trigger));
  const auto [first, second] = top_two(probs);
  p.chosen = first;
  const auto a = lingfeat::embed_option(db, options[first], feature_cfg);
  const auto b = lingfeat::embed_option(db, options[second], feature_cfg);
  if (flip_to_second(a, b, cfg.majority)) {
    p.chosen = second;
    p.flipped_from = first;
    p.fired.emplace_back("linguistic:flip");
  } else {
    p.fired.emplace_back("linguistic:keep");
  }
  return p;
}

Prediction difference_method(const lexdb::LexicalDatabase& db, const OptionArray& probs,
                             const Options& options, const RerankConfig& cfg,
                             const lingfeat::FeatureConfig& feature_cfg) {
  RerankConfig c = cfg;
  c.trigger = Trigger::kDifference;
  return linguistic_method(db, probs, options, c, feature_cfg);
}

std::vector<std::string> hyponym_candidates(const lexdb::LexicalDatabase& db,
                                            std::string_view option, int depth) {
  std::vector<std::string> out{std::string(option)};
  std::set<std::string> seen{text::to_lemma(option)};
  std::set<lexdb::SynsetId> visited;
  std::deque<std::pair<lexdb::SynsetId, int>> queue;
  for (const auto* s : db.senses(option, lexdb::PartOfSpeech::kNoun)) {
    if (visited.insert(s->id).second) queue.emplace_back(s->id, 0);
  }
  while (!queue.empty()) {
    const auto [id, level] = queue.front();
    queue.pop_front();
    if (level >= depth) continue;
    for (const auto* h : db.hyponyms(id)) {
      for (const auto& lemma : h->lemmas) {
        if (seen.insert(lemma).second) out.push_back(text::lemma_to_phrase(lemma));
      }
      if (visited.insert(h->id).second) queue.emplace_back(h->id, level + 1);
    }
  }
  return out;
}

Prediction hyponym_options_method(const lexdb::LexicalDatabase& db,
                                  const CandidateScorer& score, const Options& options,
                                  const OptionArray& probs, const RerankConfig& cfg) {
  Prediction p = keep(probs);
  if (!triggered(probs, cfg)) return p;
  p.fired.emplace_back(trigger_tag(cfg.trigger));
  const int before = p.chosen;
  OptionArray expanded{};
  for (std::size_t i = 0; i < kNumOptions; ++i) {
    const auto candidates = hyponym_candidates(db, options[i], cfg.hyponym_depth);
    double best = score(candidates.front());
    for (std::size_t k = 1; k < candidates.size(); ++k) {
      try {
        best = std::max(best, score(candidates[k]));
      } catch (const EmptyOptionError&) {
        // Lemmas the tokenizer drops entirely contribute nothing.
      }
    }
    expanded[i] = best;
  }
  p.probs = scorer::softmax(expanded);
  p.chosen = static_cast<int>(scorer::argmax(expanded));
  p.fired.emplace_back("hyponym:expand");
  if (p.chosen != before) p.flipped_from = before;
  return p;
}

Prediction hyponym_options_method(const lexdb::LexicalDatabase& db,
                                  const scorer::ScorerBackend& backend,
                                  const scorer::TokenizedText& context,
                                  const Options& options, const OptionArray& probs,
                                  const RerankConfig& cfg) {
  return hyponym_options_method(
      db, [&](std::string_view word) { return scorer::score_option(backend, context, word); },
      options, probs, cfg);
}

}  // namespace abscloze::rerank
