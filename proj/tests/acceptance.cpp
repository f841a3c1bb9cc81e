// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails. Everything runs against the toy scorer and the
// checked-in fixtures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "abscloze/attribution.hpp"
#include "abscloze/augment.hpp"
#include "abscloze/chunker.hpp"
#include "abscloze/error.hpp"
#include "abscloze/lexdb.hpp"
#include "abscloze/lingfeat.hpp"
#include "abscloze/pipeline.hpp"
#include "abscloze/rerank.hpp"
#include "abscloze/text.hpp"
#include "abscloze/toy_scorer.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace abscloze;
namespace fs = std::filesystem;
using scorer::TokenId;
using scorer::TokenizedText;

namespace {

class Outcome {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::size_t checks() const { return checks_; }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::size_t checks_ = 0;
  std::vector<std::string> failures_;
};

struct Criterion {
  std::string name;
  double limit_seconds;  // 0: no limit
  std::function<void(Outcome&)> run;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- toy data

struct ToyFixture {
  std::vector<std::string> corpus;
  std::shared_ptr<const scorer::ToyScorer> backend;
  std::vector<Sample> samples;
  lexdb::LexicalDatabase db;
};

const ToyFixture& toy_fixture() {
  static const ToyFixture fx = [] {
    ToyFixture f;
    std::ifstream in(testing::toy_dir() / "corpus.txt");
    if (!in) throw IoError("toy corpus missing");
    for (std::string line; std::getline(in, line);) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) f.corpus.push_back(line);
    }
    f.backend = scorer::ToyScorer::build(f.corpus, {64, 3});
    auto r = pipeline::ingest(testing::toy_dir() / "samples.jsonl");
    if (!r.rejected.empty()) throw MalformedSampleError("toy samples rejected");
    f.samples = std::move(r.samples);
    f.db = lexdb::LexicalDatabase::load(testing::toy_dir() / "wn");
    return f;
  }();
  return fx;
}

pipeline::PipelineConfig toy_config(pipeline::Strategy s,
                                    pipeline::Improver i = pipeline::Improver::kNone) {
  pipeline::PipelineConfig cfg;
  cfg.strategy = s;
  cfg.improver = i;
  cfg.max_len = 64;
  cfg.stride = 16;
  return cfg;
}

// String-level reimplementation of the toy scorer used as the exhaustive
// scoring reference: its own tokenizer, document co-occurrence counts,
// chunk layout, overlap weights and weighted vote.
class ToyOracle {
 public:
  static constexpr const char* kMask = "[MASK]";
  static constexpr const char* kUnk = "[UNK]";

  explicit ToyOracle(const std::vector<std::string>& corpus) {
    for (const auto& doc : corpus) {
      std::set<std::string> bag;
      for (const auto& p : raw_pieces(doc)) {
        if (p != kMask) bag.insert(p);
      }
      vocab_.insert(bag.begin(), bag.end());
      docs_.push_back(std::move(bag));
    }
  }

  std::vector<std::string> pieces(const std::string& text) const {
    std::vector<std::string> out;
    for (auto& p : raw_pieces(text)) {
      out.push_back(p == kMask || vocab_.count(p) ? p : kUnk);
    }
    return out;
  }

  double count(const std::string& t, const std::string& c) const {
    if (t == c) return 0;
    double n = 0;
    for (const auto& d : docs_) n += d.count(t) && d.count(c) ? 1 : 0;
    return n;
  }

  // Mean over option pieces of sum_{i != mask} log1p(C(t, x_i)).
  double score(const std::vector<std::string>& seq, std::size_t mask,
               const std::string& option) const {
    const auto ts = pieces(option);
    double total = 0;
    for (const auto& t : ts) {
      double s = 0;
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i != mask) s += std::log1p(count(t, seq[i]));
      }
      total += s;
    }
    return total / static_cast<double>(ts.size());
  }

  struct Decision {
    int plain = 0;
    int voting = 0;
    std::size_t chunks = 0;
  };

  Decision decide(const Sample& s, std::size_t max_len, std::size_t stride) const {
    std::string q = s.question;
    q.replace(q.find(kPlaceholder), kPlaceholder.size(), kMask);
    const auto question = pieces(q);
    const std::size_t qmask =
        static_cast<std::size_t>(std::find(question.begin(), question.end(), kMask) - question.begin());
    const auto article = pieces(s.article);
    const std::size_t b = max_len - question.size() - 3;

    auto pair_scores = [&](std::size_t begin, std::size_t end) {
      std::vector<std::string> seq(article.begin() + static_cast<std::ptrdiff_t>(begin),
                                   article.begin() + static_cast<std::ptrdiff_t>(end));
      const std::size_t mask = seq.size() + qmask;
      seq.insert(seq.end(), question.begin(), question.end());
      std::vector<double> out;
      for (const auto& o : s.options) out.push_back(score(seq, mask, o));
      return out;
    };
    auto first_max = [](const std::vector<double>& v) {
      return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    };

    Decision d;
    d.plain = first_max(pair_scores(0, std::min(b, article.size())));

    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t start = 0;; start += b - stride) {
      const std::size_t end = std::min(start + b, article.size());
      spans.emplace_back(start, end);
      if (end == article.size()) break;
    }
    d.chunks = spans.size();
    std::set<std::string> qset;
    for (std::size_t i = 0; i < question.size(); ++i) {
      if (i != qmask) qset.insert(question[i]);
    }
    std::vector<double> weights;
    for (const auto& [begin, end] : spans) {
      std::set<std::string> cset(article.begin() + static_cast<std::ptrdiff_t>(begin),
                                 article.begin() + static_cast<std::ptrdiff_t>(end));
      double shared = 0;
      for (const auto& t : cset) shared += qset.count(t);
      weights.push_back(cset.empty() ? 0.0 : shared / static_cast<double>(cset.size()));
    }
    double total = 0;
    for (const double w : weights) total += w;
    std::vector<double> raw(kNumOptions, 0.0);
    for (std::size_t j = 0; j < spans.size(); ++j) {
      const double w = total > 0 ? weights[j] / total : 1.0 / static_cast<double>(spans.size());
      const auto sc = pair_scores(spans[j].first, spans[j].second);
      for (std::size_t i = 0; i < kNumOptions; ++i) raw[i] += w * sc[i];
    }
    d.voting = first_max(raw);
    return d;
  }

 private:
  static std::vector<std::string> raw_pieces(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream words(text);
    for (std::string w; words >> w;) {
      std::size_t i = 0;
      while (i < w.size()) {
        if (w.compare(i, 6, kMask) == 0) {
          out.emplace_back(kMask);
          i += 6;
          continue;
        }
        const auto u = static_cast<unsigned char>(w[i]);
        if (u >= 0x80 || std::isalnum(u)) {
          std::string run;
          while (i < w.size() && w.compare(i, 6, kMask) != 0 &&
                 (static_cast<unsigned char>(w[i]) >= 0x80 ||
                  std::isalnum(static_cast<unsigned char>(w[i])))) {
            run += static_cast<char>(std::tolower(static_cast<unsigned char>(w[i])));
            ++i;
          }
          out.push_back(run);
        } else {
          out.emplace_back(1, w[i]);
          ++i;
        }
      }
    }
    return out;
  }

  std::vector<std::set<std::string>> docs_;
  std::set<std::string> vocab_;
};

TokenizedText ids(std::vector<TokenId> v, std::optional<std::size_t> mask = std::nullopt) {
  TokenizedText t;
  t.token_ids = std::move(v);
  for (std::size_t i = 0; i < t.token_ids.size(); ++i) t.word_offsets.push_back(i);
  t.mask_position = mask;
  return t;
}

// ---------------------------------------------------------------- criteria

void exact_match_weights(Outcome& out) {
  std::mt19937_64 rng(1001);
  constexpr TokenId kMaskId = 2;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t vocab = 4 + rng() % 40;
    auto draw = [&] { return static_cast<TokenId>(3 + rng() % vocab); };
    std::vector<TokenId> q(1 + rng() % 15);
    for (auto& t : q) t = draw();
    const std::size_t mask = rng() % q.size();
    q[mask] = kMaskId;
    const auto question = ids(q, mask);

    chunker::ChunkSet set;
    const std::size_t n_chunks = 1 + rng() % 6;
    for (std::size_t k = 0; k < n_chunks; ++k) {
      chunker::Chunk c;
      c.tokens.resize(rng() % 25);
      for (auto& t : c.tokens) t = draw();
      c.end = c.tokens.size();
      set.chunks.push_back(std::move(c));
    }
    chunker::assign_weights(set, question, chunker::Weighting::kExact);

    // Brute force: distinct chunk tokens, each looked up in the question by
    // scanning, the masked slot skipped.
    std::vector<double> expected;
    for (const auto& c : set.chunks) {
      std::size_t distinct = 0, shared = 0;
      for (std::size_t i = 0; i < c.tokens.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) seen = seen || c.tokens[j] == c.tokens[i];
        if (seen) continue;
        ++distinct;
        bool in_q = false;
        for (std::size_t j = 0; j < q.size(); ++j) in_q = in_q || (j != mask && q[j] == c.tokens[i]);
        shared += in_q;
      }
      expected.push_back(distinct == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(distinct));
    }
    double total = 0;
    for (std::size_t k = 0; k < n_chunks; ++k) {
      const double got = set.chunks[k].weight_raw;
      out.expect(std::abs(got - expected[k]) <= 1e-12,
                 "trial " + std::to_string(trial) + " chunk " + std::to_string(k) + ": weight " +
                     fmt(got) + " vs oracle " + fmt(expected[k]));
      total += expected[k];
    }
    const auto normed = chunker::normalize(set);
    double sum = 0;
    for (std::size_t k = 0; k < n_chunks; ++k) {
      const double want = total > 0 ? expected[k] / total : 1.0 / static_cast<double>(n_chunks);
      out.expect(std::abs(normed.chunks[k].weight_norm - want) <= 1e-12,
                 "trial " + std::to_string(trial) + ": normalized weight " +
                     fmt(normed.chunks[k].weight_norm) + " vs " + fmt(want));
      sum += normed.chunks[k].weight_norm;
    }
    out.expect(std::abs(sum - 1.0) <= 1e-9, "normalized weights sum to " + fmt(sum));
  }
}

void chunk_coverage(Outcome& out) {
  std::mt19937_64 rng(2002);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t b = 2 + rng() % 300;
    const std::size_t stride = rng() % b;
    const std::size_t n = rng() % 2000;
    const std::size_t qlen = 1 + rng() % 30;
    const chunker::ChunkParams params{qlen + b + 3, stride, 3};
    std::vector<TokenId> article(n);
    for (std::size_t i = 0; i < n; ++i) article[i] = static_cast<TokenId>(10 + i);
    const auto set = chunker::split(ids(article), ids(std::vector<TokenId>(qlen, 7)), params);
    const std::string tag = "n=" + std::to_string(n) + " b=" + std::to_string(b) +
                            " stride=" + std::to_string(stride);
    out.expect(chunker::budget(qlen, params) == b, tag + ": budget");
    std::vector<char> covered(n, 0);
    bool layout_ok = true;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const auto& c = set.chunks[k];
      layout_ok = layout_ok && c.size() <= b && c.tokens.size() == c.size();
      for (std::size_t t = c.start; t < c.end && t < n; ++t) {
        covered[t] = 1;
        layout_ok = layout_ok && c.tokens[t - c.start] == article[t];
      }
      if (k + 1 < set.size()) {
        const std::size_t overlap = c.end - set.chunks[k + 1].start;
        out.expect(overlap == stride,
                   tag + ": overlap " + std::to_string(overlap) + " after chunk " + std::to_string(k));
      }
    }
    out.expect(layout_ok, tag + ": chunk contents");
    out.expect(std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; }),
               tag + ": uncovered token");
    out.expect(!set.chunks.empty() && set.chunks.back().end == n, tag + ": last chunk end");
  }
}

void mini_lexical_database(Outcome& out) {
  testing::ScratchDir tmp;
  testing::LeskFixture lesk;
  lesk.write(tmp.path() / "lesk");
  const auto lesk_db = lexdb::LexicalDatabase::load(tmp.path() / "lesk");
  const auto mini = testing::load_mini();
  const auto& toy = toy_fixture().db;

  const std::vector<std::pair<std::string, const lexdb::LexicalDatabase*>> dbs = {
      {"mini", &mini}, {"lesk", &lesk_db}, {"toy", &toy}};
  for (const auto& [name, db] : dbs) {
    out.expect(testing::links_symmetric(*db), name + ": link symmetry");
    out.expect(testing::hypernyms_acyclic(*db), name + ": acyclic");
    const auto depth = testing::depth_bfs(*db);
    for (const auto& id : db->ids()) {
      out.expect(depth.count(id) && depth.at(id) == db->depth(id),
                 name + ": depth of " + id.str() + " = " + std::to_string(db->depth(id)));
    }
  }

  // A hypernym cycle is refused at load time.
  testing::WordNetWriter w;
  const int a = w.add({"alpha"}, "first");
  const int b = w.add({"beta"}, "second", {a});
  w.node(a).parents.push_back(b);
  w.write(tmp.path() / "cycle");
  bool refused = false;
  try {
    (void)lexdb::LexicalDatabase::load(tmp.path() / "cycle");
  } catch (const Error&) {
    refused = true;
  }
  out.expect(refused, "cyclic database accepted");

  const auto cases = lesk.cases();
  out.expect(cases.size() >= 10, "fewer than 10 Lesk cases");
  for (const auto& c : cases) {
    const auto& chosen = lesk_db.lesk_disambiguate(c.word, c.context);
    const auto senses = lesk_db.senses(c.word, lexdb::PartOfSpeech::kNoun);
    std::size_t best = 0, best_overlap = 0;
    for (std::size_t i = 0; i < senses.size(); ++i) {
      const std::size_t o = testing::overlap_oracle(senses[i]->gloss, c.context);
      out.expect(lesk_db.gloss_overlap(*senses[i], c.context) == o,
                 c.word + ": overlap count for " + senses[i]->id.str());
      if (o > best_overlap) {
        best = i;
        best_overlap = o;
      }
    }
    out.expect(!senses.empty() && chosen.id == senses[best]->id,
               c.word + " in '" + c.context.front() + "': oracle sense differs");
    out.expect(chosen.id == testing::WordNetWriter::sid(c.expected),
               c.word + " in '" + c.context.front() + "': expected sense differs");
  }
}

void linguistic_embedding(Outcome& out) {
  const auto mini = testing::load_mini();
  const auto& toy = toy_fixture().db;
  std::mt19937_64 rng(4004);

  for (const double cap : {100.0, 5.0}) {
    lingfeat::FeatureConfig cfg;
    cfg.large_value = cap;
    for (const auto* db : {&mini, &toy}) {
      for (const auto& id : db->ids()) {
        for (const auto& lemma : db->synset(id).lemmas) {
          const auto e = lingfeat::embed(*db, lemma, cfg);
          out.expect(e.values.size() == 13, "dimension count");
          for (const double v : e.values) {
            out.expect(v >= 0 && v <= cap, lemma + ": value " + fmt(v) + " outside [0, " + fmt(cap) + "]");
          }
        }
      }
    }
    std::uniform_real_distribution<double> u(0, 3 * cap);
    for (int i = 0; i < 1000; ++i) {
      lingfeat::RawFeatures raw{};
      for (auto& r : raw) r = u(rng);
      const auto e = lingfeat::orient(raw, cfg);
      for (const double v : e.values) out.expect(v >= 0 && v <= cap, "oriented value " + fmt(v));
      auto longer = raw;
      longer[lingfeat::kLength] += 1 + std::floor(u(rng));
      const auto e2 = lingfeat::orient(longer, cfg);
      out.expect(e2.values[lingfeat::kLength] <= e.values[lingfeat::kLength],
                 "longer word raised the length dimension");
    }
  }
  out.expect(lingfeat::embed(mini, "terrier").values[lingfeat::kLength] <=
                 lingfeat::embed(mini, "dog").values[lingfeat::kLength],
             "terrier vs dog length dimension");

  std::uniform_int_distribution<int> level(0, 4);
  for (int i = 0; i < 1000; ++i) {
    lingfeat::LinguisticEmbedding a, b;
    for (std::size_t d = 0; d < lingfeat::kDims; ++d) {
      a.values[d] = 25.0 * level(rng);
      b.values[d] = 25.0 * level(rng);
    }
    int less = 0, greater = 0, equal = 0;
    for (std::size_t d = 0; d < lingfeat::kDims; ++d) {
      less += b.values[d] < a.values[d];
      greater += b.values[d] > a.values[d];
      equal += b.values[d] == a.values[d];
    }
    const int ab = lingfeat::concreteness_vote(a, b);
    const int ba = lingfeat::concreteness_vote(b, a);
    out.expect(ab == less, "vote(a, b) = " + std::to_string(ab) + ", counter " + std::to_string(less));
    out.expect(ba == greater, "vote(b, a) = " + std::to_string(ba));
    out.expect(ab + ba == 13 - equal && ab + ba <= 13, "antisymmetry bound");
    out.expect(rerank::flip_to_second(a, b, 7) == (less >= 7),
               "flip rule with " + std::to_string(less) + " strictly lower dimensions");
  }
}

void voting_equivalences(Outcome& out) {
  const auto& fx = toy_fixture();
  const scorer::ScorerBackend* backends[] = {fx.backend.get()};

  // Articles that fit one chunk.
  std::size_t single = 0;
  std::mt19937_64 rng(5005);
  std::vector<Sample> short_samples;
  for (const auto& s : fx.samples) {
    if (fx.backend->tokenize(s.article).size() + 20 < 64) short_samples.push_back(s);
  }
  for (int i = 0; i < 30; ++i) {
    Sample s = fx.samples[rng() % fx.samples.size()];
    const auto words = text::split_whitespace(s.article);
    std::string article;
    for (std::size_t k = 0, n = rng() % 20; k < n && k < words.size(); ++k) {
      article += words[rng() % words.size()] + " ";
    }
    s.article = article;
    short_samples.push_back(s);
  }
  for (const auto& s : short_samples) {
    const auto plain = pipeline::predict(s, toy_config(pipeline::Strategy::kPlain), backends, nullptr);
    for (const auto st : {pipeline::Strategy::kVotingExact, pipeline::Strategy::kVotingSimilarity}) {
      const auto voted = pipeline::predict(s, toy_config(st), backends, nullptr);
      out.expect(voted.probs == plain.probs && voted.chosen == plain.chosen,
                 s.id + ": single-chunk " + pipeline::to_string(st) + " differs from plain");
    }
    ++single;
  }
  out.expect(single >= 30, "too few single-chunk samples");

  // One-hot weights reproduce the chosen chunk.
  std::size_t multi = 0;
  for (const auto& s : fx.samples) {
    const auto question = scorer::tokenize_question(*fx.backend, s.question);
    const auto article = fx.backend->tokenize(s.article);
    const auto set = chunker::split(article, question, {64, 16, 3});
    if (set.size() < 2) continue;
    ++multi;
    std::vector<scorer::OptionScores> per_chunk;
    for (const auto& c : set.chunks) {
      const auto input = scorer::concat(scorer::slice(article, c.start, c.end), question);
      per_chunk.push_back(scorer::from_raw(scorer::score_options(*fx.backend, input, s.options)));
    }
    for (std::size_t j = 0; j < set.size(); ++j) {
      auto onehot = set;
      for (std::size_t k = 0; k < onehot.size(); ++k) onehot.chunks[k].weight_norm = k == j ? 1.0 : 0.0;
      const auto agg = rerank::vote_aggregate(per_chunk, onehot);
      out.expect(agg.raw == per_chunk[j].raw && agg.probs == per_chunk[j].probs,
                 s.id + ": one-hot chunk " + std::to_string(j));
    }
  }
  out.expect(multi >= 10, "fixture has " + std::to_string(multi) + " multi-chunk samples");

  // Fixture accuracy, checked against the string-level oracle.
  const ToyOracle oracle(fx.corpus);
  const auto plain = pipeline::evaluate(fx.samples, toy_config(pipeline::Strategy::kPlain), backends, nullptr);
  const auto voting =
      pipeline::evaluate(fx.samples, toy_config(pipeline::Strategy::kVotingExact), backends, nullptr);
  std::size_t oracle_plain = 0, oracle_voting = 0;
  for (std::size_t i = 0; i < fx.samples.size(); ++i) {
    const auto& s = fx.samples[i];
    const auto d = oracle.decide(s, 64, 16);
    out.expect(d.plain == plain.records[i].chosen,
               s.id + ": plain choice " + std::to_string(plain.records[i].chosen) + " vs oracle " +
                   std::to_string(d.plain));
    out.expect(d.voting == voting.records[i].chosen,
               s.id + ": voting choice " + std::to_string(voting.records[i].chosen) + " vs oracle " +
                   std::to_string(d.voting));
    oracle_plain += d.plain == *s.label;
    oracle_voting += d.voting == *s.label;
  }
  out.expect(fx.samples.size() == 20, "fixture size " + std::to_string(fx.samples.size()));
  out.expect(oracle_plain == plain.n_correct && oracle_voting == voting.n_correct,
             "oracle accuracy differs from the pipeline");
  out.expect(voting.accuracy > plain.accuracy,
             "voting " + fmt(voting.accuracy) + " not above plain " + fmt(plain.accuracy));
}

void hyponym_monotonicity(Outcome& out) {
  const auto& fx = toy_fixture();
  const scorer::ScorerBackend* backends[] = {fx.backend.get()};
  std::size_t strictly_better = 0, checked = 0;
  for (const auto st : {pipeline::Strategy::kPlain, pipeline::Strategy::kVotingExact,
                        pipeline::Strategy::kMaxContext}) {
    for (const int depth : {1, 2}) {
      auto cfg = toy_config(st, pipeline::Improver::kHyponymDifference);
      cfg.rerank.hyponym_depth = depth;
      cfg.rerank.diff_threshold = 1.0;
      for (const auto& s : fx.samples) {
        const auto base = pipeline::score_base(s, cfg, backends);
        scorer::OptionArray post{};
        for (std::size_t i = 0; i < kNumOptions; ++i) {
          const auto cands = rerank::hyponym_candidates(fx.db, s.options[i], depth);
          out.expect(!cands.empty() && cands.front() == s.options[i], s.id + ": option not first candidate");
          const double pre = base.candidate(s.options[i]);
          out.expect(std::abs(pre - base.scores.raw[i]) <= 1e-12,
                     s.id + ": candidate scorer disagrees with base score");
          double best = pre;
          for (const auto& c : cands) {
            try {
              best = std::max(best, base.candidate(c));
            } catch (const EmptyOptionError&) {
            }
          }
          post[i] = best;
          out.expect(post[i] >= pre, s.id + ": option " + std::to_string(i) + " lost score");
          strictly_better += post[i] > pre;
          ++checked;
        }
        const auto p = pipeline::improve(s, base, cfg, &fx.db);
        const auto want = scorer::softmax(post);
        bool same = p.chosen == static_cast<int>(scorer::argmax(post));
        for (std::size_t i = 0; i < kNumOptions; ++i) same = same && std::abs(p.probs[i] - want[i]) <= 1e-12;
        out.expect(same, s.id + ": expansion result differs from max over candidates");
      }
    }
  }
  out.expect(strictly_better > 0, "no option gained from expansion");
  out.expect(checked == 3 * 2 * 20 * kNumOptions, "option count");
}

void augmentation(Outcome& out) {
  const auto mini = testing::load_mini();
  const std::vector<std::string> articles = {
      "The dog barked all night. A terrier joined the animal.",
      "Dogs, terriers and a drink.",
      "No nouns live here at all.",
      "A drink for the dog, a drink for the terrier, an animal in the house.",
      "",
  };
  for (const auto& article : articles) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      for (const int n : {0, 1, 2, 3, 4}) {
        const augment::AugmentConfig cfg{n, 0.15, seed};
        auto variants = augment::augment(mini, article, cfg);
        const std::size_t k = variants.back().substitutions.size();
        const std::string tag = "'" + article + "' seed " + std::to_string(seed) + " n " + std::to_string(n);
        out.expect(variants.size() == (std::size_t{1} << k), tag + ": variant count");
        out.expect(variants.front().text == article && variants.front().substitutions.empty(),
                   tag + ": empty subset changed the article");
        for (const auto& v : variants) {
          std::string text = v.text;
          for (auto it = v.substitutions.rbegin(); it != v.substitutions.rend(); ++it) {
            if (text.compare(it->variant_offset, it->replacement.size(), it->replacement) != 0) break;
            text.replace(it->variant_offset, it->replacement.size(), it->original);
          }
          out.expect(text == article, tag + ": substitution not reversible");
        }
        auto again = augment::augment(mini, article, cfg);
        std::ostringstream a, b;
        augment::emit_mlm_records(variants, cfg, a);
        augment::emit_mlm_records(again, cfg, b);
        out.expect(a.str() == b.str(), tag + ": rerun not byte-identical");
      }
    }
  }

  testing::ScratchDir tmp;
  testing::WordNetWriter w;
  const int x = w.add({"vehicle"}, "a conveyance that moves people or things");
  const int y = w.add({"toy"}, "an object for children to play with");
  const int z = w.add({"gift"}, "something given away");
  w.add({"kite"}, "a light frame covered with paper flown in the wind", {x, y, z});
  w.write(tmp.path());
  const auto db = lexdb::LexicalDatabase::load(tmp.path());
  std::map<std::string, int> counts;
  constexpr int kSeeds = 3000;
  for (int seed = 0; seed < kSeeds; ++seed) {
    const auto v = augment::augment(db, "the kite rose", {1, 0.15, static_cast<std::uint64_t>(seed)});
    if (v.size() == 2) ++counts[v[1].substitutions.at(0).replacement];
  }
  out.expect(counts.size() == 3, "hypernyms drawn: " + std::to_string(counts.size()));
  for (const auto& [h, c] : counts) {
    const double f = static_cast<double>(c) / kSeeds;
    out.expect(std::abs(f - 1.0 / 3) <= 0.05, h + " drawn with frequency " + fmt(f));
  }
}

void ig_completeness(Outcome& out) {
  const auto& fx = toy_fixture();
  const auto& toy = *fx.backend;
  for (const auto& s : fx.samples) {
    const auto question = scorer::tokenize_question(toy, s.question);
    const auto input = scorer::truncated_input(toy.tokenize(s.article), question, 64, 3);
    for (const auto& option : s.options) {
      const TokenId target = toy.tokenize(option).token_ids.at(0);
      const auto a25 = attribution::integrated_gradients(toy, input, target, 25);
      const auto a50 = attribution::integrated_gradients(toy, input, target, 50);
      const double gap = attribution::completeness_gap(toy, input, target, a25);
      out.expect(gap < 1e-9, s.id + "/" + option + ": completeness gap " + fmt(gap));
      double drift = 0;
      for (std::size_t i = 0; i < a25.size(); ++i) drift = std::max(drift, std::abs(a25[i] - a50[i]));
      out.expect(drift < 1e-6, s.id + "/" + option + ": step doubling moved " + fmt(drift));
      const auto words = attribution::aggregate_to_words(a25, input.word_offsets, input.words);
      double wt = 0, tt = 0, mag = 0;
      for (const auto& w : words) wt += w.score;
      for (const double v : a25) {
        tt += v;
        mag += std::abs(v);
      }
      out.expect(std::abs(wt - tt) <= 1e-12 * (1 + mag), s.id + ": word totals drift");
    }
  }
  // Dyadic scores make every partial sum exact, so conservation must hold
  // bit for bit.
  std::mt19937_64 rng(8008);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> scores(1 + rng() % 60);
    std::vector<std::size_t> offsets(scores.size());
    std::size_t word = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      scores[i] = std::ldexp(static_cast<double>(static_cast<int>(rng() % 2001) - 1000), -10);
      if (i > 0 && rng() % 3 == 0) ++word;
      offsets[i] = word;
    }
    double tt = 0, wt = 0;
    for (const double v : scores) tt += v;
    for (const auto& w : attribution::aggregate_to_words(scores, offsets)) wt += w.score;
    out.expect(tt == wt, "aggregation lost attribution mass");
  }
}

std::string evaluate_report(const pipeline::PipelineConfig& cfg) {
  const auto& fx = toy_fixture();
  const scorer::ScorerBackend* backends[] = {fx.backend.get()};
  const auto report = pipeline::evaluate(fx.samples, cfg, backends, &fx.db);
  std::ostringstream os;
  pipeline::write_records(report, os);
  pipeline::write_summary(report, os);
  return os.str();
}

void end_to_end_determinism(Outcome& out) {
  for (const auto st : {pipeline::Strategy::kPlain, pipeline::Strategy::kVotingExact,
                        pipeline::Strategy::kVotingSimilarity, pipeline::Strategy::kMaxContext}) {
    auto cfg = toy_config(st, pipeline::Improver::kHyponymDifference);
    cfg.rerank.diff_threshold = 0.5;
    cfg.jobs = 4;
    const std::string first = evaluate_report(cfg);
    const std::string second = evaluate_report(cfg);
    out.expect(!first.empty() && first == second, pipeline::strategy_name(cfg) + ": reports differ");
  }

#ifdef ABSCLOZE_CLI
  testing::ScratchDir tmp;
  const fs::path toy = testing::toy_dir();
  std::string outputs[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path rec = tmp.path() / ("run" + std::to_string(run) + ".jsonl");
    const fs::path sum = tmp.path() / ("run" + std::to_string(run) + ".txt");
    const std::string cmd = std::string("\"") + ABSCLOZE_CLI + "\" evaluate --data \"" +
                            (toy / "samples.jsonl").string() + "\" --toy-corpus \"" +
                            (toy / "corpus.txt").string() + "\" --wordnet-dir \"" +
                            (toy / "wn").string() +
                            "\" --max-len 64 --stride 16 --strategy voting --improver hyponym"
                            " --method difference --diff-threshold 0.5 --jobs 4 --out \"" +
                            rec.string() + "\" --summary-out \"" + sum.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    out.expect(rc == 0, "CLI run " + std::to_string(run) + " exited with " + std::to_string(rc));
    outputs[run] = testing::slurp(rec) + testing::slurp(sum);
  }
  out.expect(!outputs[0].empty() && outputs[0] == outputs[1], "CLI reports differ");
#endif
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"exact-match chunk weights vs set-intersection oracle", 1.0, exact_match_weights},
      {"chunk coverage and overlap", 1.0, chunk_coverage},
      {"mini lexical database: symmetry, acyclicity, depth, Lesk", 1.0, mini_lexical_database},
      {"13-dim linguistic embedding and flip rule", 0.0, linguistic_embedding},
      {"voting equivalences and toy-fixture voting gain", 0.0, voting_equivalences},
      {"hyponym expansion monotonicity", 0.0, hyponym_monotonicity},
      {"hypernym augmentation", 5.0, augmentation},
      {"integrated gradients completeness", 0.0, ig_completeness},
      {"end-to-end determinism", 0.0, end_to_end_determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      out.expect(false, "took " + fmt(secs) + " s, limit " + fmt(c.limit_seconds) + " s");
    }
    char timing[64];
    std::snprintf(timing, sizeof(timing), "%.1f ms, %zu checks", 1000 * secs, out.checks());
    if (out.ok()) {
      std::cout << "PASS  " << c.name << "  (" << timing << ")\n";
    } else {
      ++failed;
      std::cout << "FAIL  " << c.name << "  (" << timing << "): " << out.failures().front();
      if (out.failures().size() > 1) std::cout << " [+" << out.failures().size() - 1 << " more]";
      std::cout << '\n';
    }
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
