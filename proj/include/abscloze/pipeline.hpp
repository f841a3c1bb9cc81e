#pragma once

// Dataset ingestion, per-sample prediction across strategies, evaluation
// and threshold sweeps.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abscloze/chunker.hpp"
#include "abscloze/lexdb.hpp"
#include "abscloze/lingfeat.hpp"
#include "abscloze/rerank.hpp"
#include "abscloze/sample.hpp"
#include "abscloze/scorer.hpp"

namespace abscloze::pipeline {

enum class Strategy { kPlain, kVotingExact, kVotingSimilarity, kMaxContext };

enum class Improver {
  kNone,
  kLinguisticDifference,
  kLinguisticThreshold,
  kHyponymDifference,
  kHyponymThreshold,
};

std::string to_string(Strategy s);
std::string to_string(Improver i);
// Accept the names produced by to_string(); throw ConfigError otherwise.
Strategy parse_strategy(std::string_view name);
Improver parse_improver(std::string_view name);

struct PipelineConfig {
  Strategy strategy = Strategy::kPlain;
  Improver improver = Improver::kNone;
  bool ensemble = false;
  std::size_t max_len = 512;
  std::size_t stride = 128;
  rerank::RerankConfig rerank;
  lingfeat::FeatureConfig features;
  std::size_t jobs = 1;
};

// "plain", "voting-exact+hyponym-difference+ensemble", ...
std::string strategy_name(const PipelineConfig& cfg);

using Backends = std::span<const scorer::ScorerBackend* const>;

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct IngestResult {
  std::vector<Sample> samples;
  std::vector<Rejection> rejected;
  std::vector<std::string> warnings;
};

// One JSON object per line: article, question, option_0..option_4, optional
// label and id. Invalid lines are rejected with their line number.
IngestResult ingest(std::istream& in);
// Throws IoError when the file cannot be read.
IngestResult ingest(const std::filesystem::path& path);

// Model output for a sample before any improver runs, with a memoizing
// scorer for extra candidate words in the same contexts.
struct BaseScores {
  scorer::OptionScores scores;
  rerank::CandidateScorer candidate;
};

BaseScores score_base(const Sample& sample, const PipelineConfig& cfg, Backends backends);

rerank::Prediction improve(const Sample& sample, const BaseScores& base,
                           const PipelineConfig& cfg, const lexdb::LexicalDatabase* db);

// score_base() then improve(). The lexical database is required whenever an
// improver is configured.
rerank::Prediction predict(const Sample& sample, const PipelineConfig& cfg, Backends backends,
                           const lexdb::LexicalDatabase* db);

struct SampleRecord {
  std::string id;
  int chosen = 0;
  std::optional<int> gold;
  std::vector<std::string> fired;
  std::optional<int> flipped_from;
  scorer::OptionArray probs{};
};

struct EvalReport {
  std::string strategy;
  std::size_t n_samples = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  std::vector<SampleRecord> records;
};

// Predictions for every sample, in input order, using cfg.jobs workers.
std::vector<rerank::Prediction> predict_all(std::span<const Sample> samples,
                                            const PipelineConfig& cfg, Backends backends,
                                            const lexdb::LexicalDatabase* db);

// Throws EvaluationError listing unlabeled sample ids.
EvalReport evaluate(std::span<const Sample> samples, const PipelineConfig& cfg,
                    Backends backends, const lexdb::LexicalDatabase* db);

struct SweepPoint {
  double threshold = 0.0;
  double accuracy = 0.0;
};

struct SweepResult {
  double best_threshold = 0.0;
  double best_accuracy = 0.0;
  std::vector<SweepPoint> points;
};

// Evaluates the configured improver at each threshold (the difference or
// probability threshold, following the improver's trigger). Ties go to the
// smallest threshold.
SweepResult sweep_threshold(std::span<const Sample> samples, const PipelineConfig& cfg,
                            Backends backends, const lexdb::LexicalDatabase* db,
                            std::span<const double> grid);

// One JSON record per sample.
void write_records(const EvalReport& report, std::ostream& out);
// Fixed-width summary table.
void write_summary(const EvalReport& report, std::ostream& out);
void write_sweep(const SweepResult& sweep, std::ostream& out);

}  // namespace abscloze::pipeline
