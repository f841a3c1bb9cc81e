#pragma once

// In-memory lexical graph loaded from WordNet-style database files plus an
// optional SentiWordNet score file and an optional lemma frequency table.
//
// The database is immutable after load(); every query is const and may be
// called from any number of threads.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace abscloze::lexdb {

enum class PartOfSpeech : char {
  kNoun = 'n',
  kVerb = 'v',
  kAdjective = 'a',
  kAdverb = 'r',
};

inline constexpr PartOfSpeech kAllPartsOfSpeech[] = {
    PartOfSpeech::kNoun, PartOfSpeech::kVerb, PartOfSpeech::kAdjective,
    PartOfSpeech::kAdverb};

// Parses 'n', 'v', 'a', 's' (satellite, folded into adjective) and 'r'.
std::optional<PartOfSpeech> parse_pos(char c);

struct SynsetId {
  PartOfSpeech pos = PartOfSpeech::kNoun;
  std::uint32_t offset = 0;

  auto operator<=>(const SynsetId&) const = default;

  // "n02084071"
  std::string str() const;
};

struct SynsetIdHash {
  std::size_t operator()(const SynsetId& id) const noexcept {
    return std::hash<std::uint64_t>{}(
        (static_cast<std::uint64_t>(static_cast<unsigned char>(id.pos)) << 32) |
        id.offset);
  }
};

struct Synset {
  SynsetId id;
  std::vector<std::string> lemmas;  // lowercased, multiword joined with '_'
  std::string gloss;                // definition plus example sentences
  std::vector<SynsetId> hypernym_ids;
  std::vector<SynsetId> hyponym_ids;
  std::map<std::string, std::uint64_t> tag_count_per_lemma;

  bool operator==(const Synset&) const = default;
};

struct SentiScores {
  double pos = 0.0;
  double neg = 0.0;
  double obj = 1.0;

  bool operator==(const SentiScores&) const = default;
};

class LexicalDatabase {
 public:
  // Reads index.<pos>/data.<pos> for every part of speech present in
  // wordnet_dir (the noun pair is required), index.sense when present, the
  // SentiWordNet file and the frequency table. Throws ParseError on a
  // malformed line, LinkError on a dangling pointer, IoError on a missing
  // required file.
  static LexicalDatabase load(
      const std::filesystem::path& wordnet_dir,
      const std::optional<std::filesystem::path>& senti_file = std::nullopt,
      const std::optional<std::filesystem::path>& freq_file = std::nullopt);

  // Senses in database order (most common first). Empty for unknown words.
  std::vector<const Synset*> senses(std::string_view word,
                                    PartOfSpeech pos) const;

  // Total number of senses across all parts of speech.
  std::size_t sense_count(std::string_view word) const;

  bool has_noun_sense(std::string_view word) const;

  // Lemma form under which `word` is indexed for `pos`: the lowercased word
  // itself, or the first hit of the noun/verb suffix-stripping rules, or
  // nullopt when nothing matches.
  std::optional<std::string> base_form(std::string_view word,
                                       PartOfSpeech pos) const;

  const Synset& synset(const SynsetId& id) const;
  bool contains(const SynsetId& id) const;

  std::vector<const Synset*> hypernyms(const SynsetId& id) const;
  std::vector<const Synset*> hyponyms(const SynsetId& id) const;

  // Shortest hypernym-path length to any root; roots have depth 0.
  int depth(const SynsetId& id) const;

  // Missing rows read as (0, 0, 1).
  SentiScores senti(const SynsetId& id) const;

  std::uint64_t frequency(std::string_view lemma) const;

  // Gloss-overlap Lesk over the noun senses of `word`. Throws NoSenseError
  // when the word has none.
  const Synset& lesk_disambiguate(std::string_view word,
                                  std::span<const std::string> context) const;

  // Overlap between a synset's gloss bag and a context bag, as used by
  // lesk_disambiguate().
  std::size_t gloss_overlap(const Synset& s,
                            std::span<const std::string> context) const;

  std::size_t size() const { return synsets_.size(); }

  // Synset ids in ascending order.
  std::vector<SynsetId> ids() const;

  bool operator==(const LexicalDatabase&) const = default;

 private:
  using LemmaKey = std::pair<std::string, PartOfSpeech>;
  struct LemmaKeyHash {
    std::size_t operator()(const LemmaKey& k) const noexcept {
      return std::hash<std::string>{}(k.first) ^
             (static_cast<std::size_t>(k.second) << 1);
    }
  };

  void link_and_validate();
  void compute_depths();

  std::unordered_map<SynsetId, Synset, SynsetIdHash> synsets_;
  std::unordered_map<LemmaKey, std::vector<SynsetId>, LemmaKeyHash> lemma_index_;
  std::unordered_map<SynsetId, SentiScores, SynsetIdHash> senti_;
  std::unordered_map<std::string, std::uint64_t> frequency_;
  std::unordered_map<SynsetId, int, SynsetIdHash> depth_;
};

}  // namespace abscloze::lexdb
