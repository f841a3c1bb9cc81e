#include "abscloze/augment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <ostream>

#include "abscloze/error.hpp"
#include "abscloze/rng.hpp"
#include "abscloze/text.hpp"

namespace abscloze::augment {

namespace {

constexpr std::uint64_t kSelectStream = 1;
constexpr std::uint64_t kHypernymStream = 2;
constexpr std::uint64_t kMaskStream = 3;

int clamp_n(int n) { return std::clamp(n, 0, kMaxNouns); }

struct Candidate {
  std::size_t position;
  text::WordSpan core;  // absolute byte span of the replaced text
  std::string noun;
};

std::vector<Candidate> candidates(const lexdb::LexicalDatabase& db, std::string_view article) {
  std::vector<Candidate> out;
  const auto words = text::whitespace_words(article);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string_view word = words[i].view(article);
    const text::WordSpan core = text::alpha_core(word);
    if (core.end == core.begin) continue;
    const std::string noun = text::to_lower(core.view(word));
    if (text::is_stopword(noun) || !db.has_noun_sense(noun)) continue;
    out.push_back({i, {words[i].begin + core.begin, words[i].begin + core.end}, noun});
  }
  return out;
}

std::string sentence_of(std::string_view article, std::size_t byte) {
  for (const auto& s : text::sentences(article)) {
    if (byte >= s.begin && byte < s.end) return std::string(s.view(article));
  }
  return std::string(article);
}

}  // namespace

std::vector<SelectedNoun> select_nouns(const lexdb::LexicalDatabase& db,
                                       std::string_view article, int n,
                                       std::uint64_t seed) {
  auto pool = candidates(db, article);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(clamp_n(n)), pool.size());
  rng::Rng rng(rng::derive(seed, kSelectStream));
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<SelectedNoun> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({pool[i].position, pool[i].noun});
  std::sort(out.begin(), out.end(),
            [](const SelectedNoun& a, const SelectedNoun& b) { return a.position < b.position; });
  return out;
}

std::vector<AugmentedSample> substitute(const lexdb::LexicalDatabase& db,
                                        std::string_view article,
                                        std::span<const SelectedNoun> selected,
                                        std::uint64_t seed) {
  const auto words = text::whitespace_words(article);
  rng::Rng rng(rng::derive(seed, kHypernymStream));

  struct Planned {
    text::WordSpan span;
    Substitution sub;
  };
  std::vector<Planned> plan;
  std::vector<SelectedNoun> ordered(selected.begin(), selected.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const SelectedNoun& a, const SelectedNoun& b) { return a.position < b.position; });
  for (const SelectedNoun& sel : ordered) {
    if (sel.position >= words.size()) continue;
    const std::string_view word = words[sel.position].view(article);
    const text::WordSpan core = text::alpha_core(word);
    if (core.end == core.begin) continue;
    const text::WordSpan span{words[sel.position].begin + core.begin,
                              words[sel.position].begin + core.end};
    const std::vector<std::string> context{sentence_of(article, span.begin)};
    const lexdb::Synset* sense = nullptr;
    try {
      sense = &db.lesk_disambiguate(sel.noun, context);
    } catch (const NoSenseError&) {
      continue;
    }
    const auto hypers = db.hypernyms(sense->id);
    if (hypers.empty()) continue;
    const lexdb::Synset* hyper = hypers[rng.uniform_index(hypers.size())];

    Substitution sub;
    sub.position = sel.position;
    sub.original = std::string(span.view(article));
    sub.replacement = text::lemma_to_phrase(hyper->lemmas.front());
    if (!sub.original.empty() && std::isupper(static_cast<unsigned char>(sub.original[0]))) {
      sub.replacement[0] =
          static_cast<char>(std::toupper(static_cast<unsigned char>(sub.replacement[0])));
    }
    sub.sense = sense->id;
    sub.hypernym = hyper->id;
    plan.push_back({span, std::move(sub)});
  }

  const std::uint32_t count = 1u << plan.size();
  std::vector<AugmentedSample> out;
  out.reserve(count);
  for (std::uint32_t subset = 0; subset < count; ++subset) {
    AugmentedSample v;
    v.subset = subset;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      if (!(subset & (1u << i))) continue;
      const auto& p = plan[i];
      v.text.append(article.substr(cursor, p.span.begin - cursor));
      Substitution sub = p.sub;
      sub.variant_offset = v.text.size();
      v.text.append(sub.replacement);
      v.substitutions.push_back(std::move(sub));
      cursor = p.span.end;
    }
    v.text.append(article.substr(cursor));
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<AugmentedSample> augment(const lexdb::LexicalDatabase& db,
                                     std::string_view article, const AugmentConfig& cfg) {
  const auto selected = select_nouns(db, article, cfg.n, cfg.seed);
  return substitute(db, article, selected, cfg.seed);
}

std::size_t emit_mlm_records(std::span<AugmentedSample> variants, const AugmentConfig& cfg,
                             std::ostream& out) {
  for (std::size_t k = 0; k < variants.size(); ++k) {
    AugmentedSample& v = variants[k];
    rng::Rng rng(rng::derive(rng::derive(cfg.seed, kMaskStream), k));
    const auto words = text::whitespace_words(v.text);
    v.mask_positions.clear();
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (rng.bernoulli(cfg.mask_rate)) v.mask_positions.push_back(i);
    }
    std::string line = v.text;
    std::replace_if(line.begin(), line.end(),
                    [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    out << line << '\t';
    for (std::size_t i = 0; i < v.mask_positions.size(); ++i) {
      if (i) out << ',';
      out << v.mask_positions[i];
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing MLM records");
  return variants.size();
}

std::size_t emit_mlm_file(std::span<AugmentedSample> variants, const AugmentConfig& cfg,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::size_t n = emit_mlm_records(variants, cfg, out);
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
  return n;
}

}  // namespace abscloze::augment
