#include "abscloze/lingfeat.hpp"

#include <algorithm>

#include "abscloze/text.hpp"

namespace abscloze::lingfeat {

using lexdb::PartOfSpeech;

bool is_inverted(std::size_t dim) {
  switch (dim) {
    case kLength:
    case kNumSenses:
    case kHyponymsMcs:
    case kHyponymsAvg:
    case kPosMcs:
    case kNegMcs:
    case kPosAvg:
    case kNegAvg:
      return true;
    default:
      return false;
  }
}

RawFeatures raw_features(const lexdb::LexicalDatabase& db, std::string_view word) {
  RawFeatures f{};
  f[kLength] = static_cast<double>(text::char_length(word));
  f[kFrequency] = static_cast<double>(db.frequency(word));
  if (const auto lemma = db.base_form(word, PartOfSpeech::kNoun);
      lemma && f[kFrequency] == 0) {
    f[kFrequency] = static_cast<double>(db.frequency(*lemma));
  }
  f[kNumSenses] = static_cast<double>(db.sense_count(word));

  auto senses = db.senses(word, PartOfSpeech::kNoun);
  if (senses.empty()) {
    for (const PartOfSpeech pos : lexdb::kAllPartsOfSpeech) {
      for (const auto* s : db.senses(word, pos)) senses.push_back(s);
    }
  }
  if (senses.empty()) return f;

  const auto& mcs = *senses.front();
  const auto mcs_senti = db.senti(mcs.id);
  f[kHyponymsMcs] = static_cast<double>(mcs.hyponym_ids.size());
  f[kPosMcs] = mcs_senti.pos;
  f[kNegMcs] = mcs_senti.neg;
  f[kObjMcs] = mcs_senti.obj;
  f[kDepthMcs] = db.depth(mcs.id);

  double hyponyms = 0, pos = 0, neg = 0, obj = 0, depth = 0;
  for (const auto* s : senses) {
    const auto sc = db.senti(s->id);
    hyponyms += static_cast<double>(s->hyponym_ids.size());
    pos += sc.pos;
    neg += sc.neg;
    obj += sc.obj;
    depth += db.depth(s->id);
  }
  const double n = static_cast<double>(senses.size());
  f[kHyponymsAvg] = hyponyms / n;
  f[kPosAvg] = pos / n;
  f[kNegAvg] = neg / n;
  f[kObjAvg] = obj / n;
  f[kDepthAvg] = depth / n;
  return f;
}

LinguisticEmbedding orient(const RawFeatures& raw, const FeatureConfig& config) {
  const double c = config.large_value;
  LinguisticEmbedding e;
  for (std::size_t d = 0; d < kDims; ++d) {
    const double clipped = std::clamp(raw[d], 0.0, c);
    e.values[d] = is_inverted(d) ? c - clipped : clipped;
  }
  return e;
}

LinguisticEmbedding embed(const lexdb::LexicalDatabase& db, std::string_view word,
                          const FeatureConfig& config) {
  if (config.oov == OovPolicy::kConstant && db.sense_count(word) == 0) {
    LinguisticEmbedding e;
    e.values.fill(std::clamp(config.oov_value, 0.0, config.large_value));
    return e;
  }
  return orient(raw_features(db, word), config);
}

LinguisticEmbedding embed_option(const lexdb::LexicalDatabase& db,
                                 std::string_view option,
                                 const FeatureConfig& config) {
  const auto words = text::split_whitespace(option);
  if (words.empty()) return embed(db, option, config);
  return embed(db, text::to_lower(words.back()), config);
}

int concreteness_vote(const LinguisticEmbedding& a, const LinguisticEmbedding& b) {
  int count = 0;
  for (std::size_t d = 0; d < kDims; ++d) {
    if (b.values[d] < a.values[d]) ++count;
  }
  return count;
}

}  // namespace abscloze::lingfeat
