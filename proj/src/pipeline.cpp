#include "abscloze/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "abscloze/error.hpp"
#include "json.hpp"

namespace abscloze::pipeline {

using scorer::OptionScores;
using scorer::ScorerBackend;
using scorer::TokenizedText;

namespace {

constexpr std::pair<Strategy, std::string_view> kStrategyNames[] = {
    {Strategy::kPlain, "plain"},
    {Strategy::kVotingExact, "voting-exact"},
    {Strategy::kVotingSimilarity, "voting-similarity"},
    {Strategy::kMaxContext, "max-context"},
};

constexpr std::pair<Improver, std::string_view> kImproverNames[] = {
    {Improver::kNone, "none"},
    {Improver::kLinguisticDifference, "linguistic-difference"},
    {Improver::kLinguisticThreshold, "linguistic-threshold"},
    {Improver::kHyponymDifference, "hyponym-difference"},
    {Improver::kHyponymThreshold, "hyponym-threshold"},
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// by index is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Weighted model inputs for one backend: the plain path has one input of
// weight 1, voting has one per chunk.
struct BackendContext {
  const ScorerBackend* backend = nullptr;
  std::vector<TokenizedText> inputs;
  std::vector<double> weights;
};

struct CandidateCache {
  std::vector<BackendContext> contexts;
  std::mutex mu;
  std::map<std::string, double, std::less<>> memo;

  double score(std::string_view word) {
    std::lock_guard lock(mu);
    if (auto it = memo.find(word); it != memo.end()) return it->second;
    double total = 0;
    for (const auto& ctx : contexts) {
      double s = 0;
      for (std::size_t j = 0; j < ctx.inputs.size(); ++j) {
        s += ctx.weights[j] * scorer::score_option(*ctx.backend, ctx.inputs[j], word);
      }
      total += s;
    }
    const double mean = total / static_cast<double>(contexts.size());
    memo.emplace(std::string(word), mean);
    return mean;
  }
};

std::pair<OptionScores, BackendContext> score_with(const ScorerBackend& backend,
                                                   const Sample& sample,
                                                   const PipelineConfig& cfg) {
  const std::size_t max_len = std::min(cfg.max_len, backend.max_len());
  const TokenizedText question = scorer::tokenize_question(backend, sample.question);
  const TokenizedText article = backend.tokenize(sample.article);
  BackendContext ctx;
  ctx.backend = &backend;

  if (cfg.strategy == Strategy::kPlain) {
    TokenizedText input =
        scorer::truncated_input(article, question, max_len, backend.special_token_count());
    OptionScores s = scorer::from_raw(scorer::score_options(backend, input, sample.options),
                                      {"strategy:plain"});
    if (input.size() - question.size() < article.size()) s.trace.push_back("truncated");
    ctx.inputs.push_back(std::move(input));
    ctx.weights.push_back(1.0);
    return {std::move(s), std::move(ctx)};
  }

  const chunker::ChunkParams params{max_len, cfg.stride, backend.special_token_count()};
  chunker::ChunkSet chunks = chunker::split(article, question, params);
  const auto weighting = cfg.strategy == Strategy::kVotingSimilarity
                             ? chunker::Weighting::kSimilarity
                             : chunker::Weighting::kExact;
  chunker::assign_weights(chunks, question, weighting, &backend);
  auto pair_input = [&](const chunker::Chunk& c) {
    return scorer::concat(scorer::slice(article, c.start, c.end), question);
  };

  if (cfg.strategy == Strategy::kMaxContext) {
    const chunker::Chunk& best = chunker::max_context_chunk(chunks);
    TokenizedText input = pair_input(best);
    OptionScores s = scorer::from_raw(scorer::score_options(backend, input, sample.options),
                                      {"strategy:max-context"});
    s.trace.push_back("chunk:" + std::to_string(&best - chunks.chunks.data()) + "/" +
                      std::to_string(chunks.size()));
    ctx.inputs.push_back(std::move(input));
    ctx.weights.push_back(1.0);
    return {std::move(s), std::move(ctx)};
  }

  chunks = chunker::normalize(std::move(chunks));
  std::vector<OptionScores> per_chunk;
  per_chunk.reserve(chunks.size());
  for (const auto& c : chunks.chunks) {
    TokenizedText input = pair_input(c);
    per_chunk.push_back(scorer::from_raw(scorer::score_options(backend, input, sample.options)));
    ctx.inputs.push_back(std::move(input));
    ctx.weights.push_back(c.weight_norm);
  }
  OptionScores s = rerank::vote_aggregate(per_chunk, chunks);
  s.trace.insert(s.trace.begin(), "strategy:" + to_string(cfg.strategy));
  s.trace.insert(s.trace.end(), chunks.trace.begin(), chunks.trace.end());
  return {std::move(s), std::move(ctx)};
}

}  // namespace

std::string to_string(Strategy s) {
  for (const auto& [k, v] : kStrategyNames) {
    if (k == s) return std::string(v);
  }
  return "?";
}

std::string to_string(Improver i) {
  for (const auto& [k, v] : kImproverNames) {
    if (k == i) return std::string(v);
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (const auto& [k, v] : kStrategyNames) {
    if (v == name) return k;
  }
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

Improver parse_improver(std::string_view name) {
  for (const auto& [k, v] : kImproverNames) {
    if (v == name) return k;
  }
  throw ConfigError("unknown improver '" + std::string(name) + "'");
}

std::string strategy_name(const PipelineConfig& cfg) {
  std::string name = to_string(cfg.strategy);
  if (cfg.improver != Improver::kNone) name += "+" + to_string(cfg.improver);
  if (cfg.ensemble) name += "+ensemble";
  return name;
}

IngestResult ingest(std::istream& in) {
  IngestResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      if (!obj.is_object()) throw MalformedSampleError("record is not an object");
      auto str = [&](const char* key) {
        if (!obj.contains(key) || !obj.at(key).is_string()) {
          throw MalformedSampleError(std::string("missing string field '") + key + "'");
        }
        return obj.at(key).get<std::string>();
      };
      Sample s;
      s.article = str("article");
      s.question = str("question");
      for (std::size_t i = 0; i < kNumOptions; ++i) {
        s.options[i] = str(("option_" + std::to_string(i)).c_str());
      }
      if (obj.contains("label") && !obj.at("label").is_null()) {
        if (!obj.at("label").is_number_integer()) {
          throw MalformedSampleError("label is not an integer");
        }
        s.label = obj.at("label").get<int>();
      }
      if (obj.contains("id") && obj.at("id").is_string()) {
        s.id = obj.at("id").get<std::string>();
      } else if (obj.contains("id") && obj.at("id").is_number_integer()) {
        s.id = std::to_string(obj.at("id").get<long long>());
      } else {
        s.id = "line-" + std::to_string(line_no);
      }
      validate(s);
      out.samples.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      out.rejected.push_back({line_no, std::string("invalid JSON: ") + e.what()});
    } catch (const MalformedSampleError& e) {
      out.rejected.push_back({line_no, e.what()});
    }
  }
  if (out.samples.empty() && out.rejected.empty()) out.warnings.emplace_back("no samples in input");
  return out;
}

IngestResult ingest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return ingest(in);
}

BaseScores score_base(const Sample& sample, const PipelineConfig& cfg, Backends backends) {
  validate(sample);
  if (backends.empty()) throw ConfigError("no scoring backend configured");
  if (cfg.ensemble && backends.size() < 2) {
    throw ConfigError("ensemble needs at least two backends");
  }
  const std::size_t used = cfg.ensemble ? backends.size() : 1;
  auto cache = std::make_shared<CandidateCache>();
  std::vector<OptionScores> per_backend;
  for (std::size_t b = 0; b < used; ++b) {
    auto [scores, ctx] = score_with(*backends[b], sample, cfg);
    per_backend.push_back(std::move(scores));
    cache->contexts.push_back(std::move(ctx));
  }
  BaseScores base;
  if (cfg.ensemble) {
    base.scores = scorer::ensemble_average(per_backend);
    base.scores.trace.insert(base.scores.trace.begin(), per_backend.front().trace.begin(),
                             per_backend.front().trace.end());
  } else {
    base.scores = std::move(per_backend.front());
  }
  base.candidate = [cache](std::string_view word) { return cache->score(word); };
  return base;
}

rerank::Prediction improve(const Sample& sample, const BaseScores& base,
                           const PipelineConfig& cfg, const lexdb::LexicalDatabase* db) {
  if (cfg.improver == Improver::kNone) return rerank::keep(base.scores.probs);
  if (db == nullptr) throw ConfigError("improver " + to_string(cfg.improver) + " needs a lexical database");
  rerank::RerankConfig rc = cfg.rerank;
  switch (cfg.improver) {
    case Improver::kLinguisticDifference:
    case Improver::kHyponymDifference:
      rc.trigger = rerank::Trigger::kDifference;
      break;
    default:
      rc.trigger = rerank::Trigger::kThreshold;
      break;
  }
  if (cfg.improver == Improver::kLinguisticDifference ||
      cfg.improver == Improver::kLinguisticThreshold) {
    return rerank::linguistic_method(*db, base.scores.probs, sample.options, rc, cfg.features);
  }
  return rerank::hyponym_options_method(*db, base.candidate, sample.options, base.scores.probs, rc);
}

rerank::Prediction predict(const Sample& sample, const PipelineConfig& cfg, Backends backends,
                           const lexdb::LexicalDatabase* db) {
  return improve(sample, score_base(sample, cfg, backends), cfg, db);
}

std::vector<rerank::Prediction> predict_all(std::span<const Sample> samples,
                                            const PipelineConfig& cfg, Backends backends,
                                            const lexdb::LexicalDatabase* db) {
  std::vector<rerank::Prediction> out(samples.size());
  parallel_for(samples.size(), cfg.jobs,
               [&](std::size_t i) { out[i] = predict(samples[i], cfg, backends, db); });
  return out;
}

namespace {

void require_labels(std::span<const Sample> samples) {
  std::string missing;
  for (const auto& s : samples) {
    if (s.label) continue;
    if (!missing.empty()) missing += ", ";
    missing += s.id;
  }
  if (!missing.empty()) throw EvaluationError("unlabeled samples: " + missing);
}

EvalReport make_report(std::span<const Sample> samples,
                       std::span<const rerank::Prediction> predictions, std::string strategy) {
  EvalReport r;
  r.strategy = std::move(strategy);
  r.n_samples = samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& p = predictions[i];
    SampleRecord rec{samples[i].id, p.chosen, samples[i].label, p.fired, p.flipped_from, p.probs};
    if (rec.gold && *rec.gold == rec.chosen) ++r.n_correct;
    r.records.push_back(std::move(rec));
  }
  r.accuracy = r.n_samples ? static_cast<double>(r.n_correct) / static_cast<double>(r.n_samples) : 0.0;
  return r;
}

}  // namespace

EvalReport evaluate(std::span<const Sample> samples, const PipelineConfig& cfg,
                    Backends backends, const lexdb::LexicalDatabase* db) {
  require_labels(samples);
  const auto predictions = predict_all(samples, cfg, backends, db);
  return make_report(samples, predictions, strategy_name(cfg));
}

SweepResult sweep_threshold(std::span<const Sample> samples, const PipelineConfig& cfg,
                            Backends backends, const lexdb::LexicalDatabase* db,
                            std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("threshold grid is empty");
  if (cfg.improver == Improver::kNone) throw ConfigError("sweep needs an improver");
  require_labels(samples);
  std::vector<BaseScores> bases(samples.size());
  parallel_for(samples.size(), cfg.jobs,
               [&](std::size_t i) { bases[i] = score_base(samples[i], cfg, backends); });

  const bool difference = cfg.improver == Improver::kLinguisticDifference ||
                          cfg.improver == Improver::kHyponymDifference;
  SweepResult out;
  bool first = true;
  for (const double t : grid) {
    PipelineConfig point = cfg;
    (difference ? point.rerank.diff_threshold : point.rerank.prob_threshold) = t;
    std::vector<rerank::Prediction> predictions(samples.size());
    parallel_for(samples.size(), cfg.jobs, [&](std::size_t i) {
      predictions[i] = improve(samples[i], bases[i], point, db);
    });
    const double acc = make_report(samples, predictions, "").accuracy;
    out.points.push_back({t, acc});
    if (first || acc > out.best_accuracy || (acc == out.best_accuracy && t < out.best_threshold)) {
      out.best_accuracy = acc;
      out.best_threshold = t;
      first = false;
    }
  }
  return out;
}

}  // namespace abscloze::pipeline
