#pragma once

// Hypernym-augmented article variants and masked-LM training records.
//
// n nouns are sampled from the article, each is disambiguated with Lesk in
// its sentence, one direct hypernym of that sense is drawn uniformly, and
// one variant is emitted per subset of the substitutions (2^k variants, the
// empty subset being the article itself).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abscloze/lexdb.hpp"

namespace abscloze::augment {

inline constexpr int kMaxNouns = 10;

struct AugmentConfig {
  int n = 3;  // clamped to [0, kMaxNouns]
  double mask_rate = 0.15;
  std::uint64_t seed = 0;
};

struct SelectedNoun {
  std::size_t position = 0;  // whitespace-word index in the article
  std::string noun;          // lowercased surface core

  bool operator==(const SelectedNoun&) const = default;
};

struct Substitution {
  std::size_t position = 0;       // word index in the original article
  std::size_t variant_offset = 0; // byte offset of the replacement in the variant
  std::string original;           // replaced surface text
  std::string replacement;        // hypernym phrase written in its place
  lexdb::SynsetId sense;          // Lesk sense of the original noun
  lexdb::SynsetId hypernym;

  bool operator==(const Substitution&) const = default;
};

struct AugmentedSample {
  std::string text;
  std::uint32_t subset = 0;  // bit i set = i-th kept noun substituted
  std::vector<Substitution> substitutions;
  std::vector<std::size_t> mask_positions;  // word indices, filled on emission

  bool operator==(const AugmentedSample&) const = default;
};

// Up to n distinct positions whose word has a noun sense and is not a
// stopword, sampled uniformly with the seed; sorted by position.
std::vector<SelectedNoun> select_nouns(const lexdb::LexicalDatabase& db,
                                       std::string_view article, int n,
                                       std::uint64_t seed);

// The 2^k variants, in subset order (variant 0 is the article). Nouns whose
// Lesk sense has no hypernym are dropped before expansion.
std::vector<AugmentedSample> substitute(const lexdb::LexicalDatabase& db,
                                        std::string_view article,
                                        std::span<const SelectedNoun> selected,
                                        std::uint64_t seed);

// select_nouns() then substitute(), both driven by cfg.seed.
std::vector<AugmentedSample> augment(const lexdb::LexicalDatabase& db,
                                     std::string_view article, const AugmentConfig& cfg);

// Draws mask positions independently per word at cfg.mask_rate and writes
// one "text<TAB>i,j,k" record per variant. Returns the record count.
std::size_t emit_mlm_records(std::span<AugmentedSample> variants, const AugmentConfig& cfg,
                             std::ostream& out);

// File form of emit_mlm_records(); throws IoError when the file cannot be
// written.
std::size_t emit_mlm_file(std::span<AugmentedSample> variants, const AugmentConfig& cfg,
                          const std::filesystem::path& out);

}  // namespace abscloze::augment
