#pragma once

// 13-dimensional concreteness-oriented embedding of a word built from
// lexical-database statistics. Every emitted dimension grows with the
// concreteness of the word: features that fall with concreteness are
// emitted as C - min(f, C), the others as min(f, C).

#include <array>
#include <cstddef>
#include <string_view>

#include "abscloze/lexdb.hpp"

namespace abscloze::lingfeat {

inline constexpr std::size_t kDims = 13;

enum Dim : std::size_t {
  kLength = 0,       // inverted
  kFrequency,
  kNumSenses,        // inverted
  kHyponymsMcs,      // inverted
  kHyponymsAvg,      // inverted
  kPosMcs,           // inverted
  kNegMcs,           // inverted
  kObjMcs,
  kPosAvg,           // inverted
  kNegAvg,           // inverted
  kObjAvg,
  kDepthMcs,
  kDepthAvg,
};

// True for the dimensions emitted as C - min(f, C).
bool is_inverted(std::size_t dim);

enum class OovPolicy {
  kOrientRaw,  // orient the (mostly zero) raw features like any other word
  kConstant,   // every dimension = FeatureConfig::oov_value
};

struct FeatureConfig {
  double large_value = 100.0;
  OovPolicy oov = OovPolicy::kOrientRaw;
  double oov_value = 50.0;
};

using RawFeatures = std::array<double, kDims>;

struct LinguisticEmbedding {
  std::array<double, kDims> values{};
  bool operator==(const LinguisticEmbedding&) const = default;
};

// Pre-orientation features in Dim order. Sense count pools every part of
// speech; the sense-derived statistics use the noun senses when the word has
// any, otherwise the pooled senses. Unknown words get zeros past kLength.
RawFeatures raw_features(const lexdb::LexicalDatabase& db, std::string_view word);

LinguisticEmbedding orient(const RawFeatures& raw, const FeatureConfig& config);

LinguisticEmbedding embed(const lexdb::LexicalDatabase& db, std::string_view word,
                          const FeatureConfig& config = {});

// Embedding of an answer option. Multiword options use their final word.
LinguisticEmbedding embed_option(const lexdb::LexicalDatabase& db,
                                 std::string_view option,
                                 const FeatureConfig& config = {});

// Number of dimensions where b is strictly below a.
int concreteness_vote(const LinguisticEmbedding& a, const LinguisticEmbedding& b);

}  // namespace abscloze::lingfeat
