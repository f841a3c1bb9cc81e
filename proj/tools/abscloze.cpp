// abscloze: command-line front end.
//
//   abscloze predict   --data dev.jsonl --toy-corpus corpus.txt ...
//   abscloze evaluate  --data dev.jsonl --strategy voting --weighting exact ...
//   abscloze sweep     --data dev.jsonl --improver hyponym --method difference --grid 0,0.05,0.1
//   abscloze augment   --in train.jsonl --out augmented/ --n 3 --mask-rate 0.15 --seed 7
//   abscloze features  words.txt
//   abscloze attribute --data dev.jsonl --sample-id 42 --n-steps 25
//
// Every option may come from --config (key = value lines) or from an
// ABSCLOZE_<KEY> environment variable; command-line flags win over the
// environment, which wins over the config file.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "abscloze/attribution.hpp"
#include "abscloze/augment.hpp"
#include "abscloze/error.hpp"
#include "abscloze/http_backend.hpp"
#include "abscloze/lexdb.hpp"
#include "abscloze/lingfeat.hpp"
#include "abscloze/pipeline.hpp"
#include "abscloze/text.hpp"
#include "abscloze/toy_scorer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace abscloze;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;

struct Options {
  std::string data;
  std::string wordnet_dir;
  std::string senti_file;
  std::string freq_file;

  std::vector<std::string> backend_urls;
  int timeout_ms = 30000;
  int retries = 2;
  std::string mask_token = "[MASK]";
  std::string pad_token = "[PAD]";
  std::vector<std::string> toy_corpora;

  std::string strategy = "plain";
  std::string weighting = "exact";
  std::size_t max_len = 512;
  std::size_t stride = 128;
  std::string method = "none";
  std::string improver = "linguistic";
  double diff_threshold = 0.1;
  double prob_threshold = 0.5;
  int majority = 7;
  int hyponym_depth = 1;
  std::string ensemble = "off";
  double large_value = 100.0;
  std::size_t jobs = 1;
  bool strict = false;

  // subcommand-specific
  std::string out;
  std::string summary_out;
  std::string grid = "0,0.05,0.1,0.15,0.2,0.25,0.3";
  std::string augment_in;
  int n = 3;
  double mask_rate = 0.15;
  std::uint64_t seed = 0;
  std::string wordlist;
  std::string sample_id;
  int n_steps = 25;
};

std::string env_name(const std::string& flag) {
  std::string name = "ABSCLOZE_";
  for (const char c : flag) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

// Drops file entries whose ABSCLOZE_<KEY> variable is set; CLI11 would
// otherwise let the file win over the environment.
class EnvFirstConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    std::erase_if(items, [](const CLI::ConfigItem& item) {
      const char* v = std::getenv(env_name(item.name).c_str());
      return v != nullptr && *v != '\0';
    });
    return items;
  }
};

// CLI11 drops an environment value that fails validation and keeps the
// default; treat that as an error instead.
void reject_invalid_env(CLI::App& app) {
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_envname();
    if (name.empty() || opt->count() > 0) continue;
    const char* v = std::getenv(name.c_str());
    if (v != nullptr && *v != '\0') {
      throw ConfigError(name + ": invalid value '" + v + "' for " + opt->get_name());
    }
  }
  for (CLI::App* sub : app.get_subcommands()) reject_invalid_env(*sub);
}

template <typename T>
CLI::Option* add(CLI::App& app, const std::string& flag, T& value, const std::string& help) {
  return app.add_option("--" + flag, value, help)->envname(env_name(flag))->capture_default_str();
}

pipeline::PipelineConfig pipeline_config(const Options& o) {
  pipeline::PipelineConfig cfg;
  if (o.strategy == "plain") {
    cfg.strategy = pipeline::Strategy::kPlain;
  } else if (o.strategy == "voting") {
    cfg.strategy = o.weighting == "similarity" ? pipeline::Strategy::kVotingSimilarity
                                               : pipeline::Strategy::kVotingExact;
  } else if (o.strategy == "max-context") {
    cfg.strategy = pipeline::Strategy::kMaxContext;
  } else {
    throw ConfigError("unknown strategy '" + o.strategy + "'");
  }
  if (o.method == "none") {
    cfg.improver = pipeline::Improver::kNone;
  } else {
    cfg.improver = pipeline::parse_improver(o.improver + "-" + o.method);
  }
  cfg.ensemble = o.ensemble == "on";
  cfg.max_len = o.max_len;
  cfg.stride = o.stride;
  cfg.rerank.diff_threshold = o.diff_threshold;
  cfg.rerank.prob_threshold = o.prob_threshold;
  cfg.rerank.majority = o.majority;
  cfg.rerank.hyponym_depth = o.hyponym_depth;
  cfg.features.large_value = o.large_value;
  cfg.jobs = o.jobs;
  rerank::validate(cfg.rerank);
  return cfg;
}

std::optional<lexdb::LexicalDatabase> load_db(const Options& o, bool required) {
  if (o.wordnet_dir.empty()) {
    if (required) throw ConfigError("--wordnet-dir is required for this command");
    return std::nullopt;
  }
  std::optional<fs::path> senti, freq;
  if (!o.senti_file.empty()) senti = o.senti_file;
  if (!o.freq_file.empty()) freq = o.freq_file;
  return lexdb::LexicalDatabase::load(o.wordnet_dir, senti, freq);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

struct BackendSet {
  std::vector<std::shared_ptr<const scorer::ScorerBackend>> owned;
  std::vector<const scorer::ScorerBackend*> views;
};

BackendSet make_backends(const Options& o) {
  BackendSet set;
  for (const auto& corpus : o.toy_corpora) {
    const auto docs = read_lines(corpus);
    set.owned.push_back(scorer::ToyScorer::build(docs, {o.max_len, 3}));
  }
  for (const auto& url : o.backend_urls) {
    scorer::HttpBackendConfig hc;
    hc.base_url = url;
    hc.timeout_ms = o.timeout_ms;
    hc.retries = o.retries;
    hc.mask_literal = o.mask_token;
    hc.pad_literal = o.pad_token;
    set.owned.push_back(std::make_shared<scorer::HttpBackend>(scorer::HttpBackend::connect(hc)));
  }
  if (set.owned.empty()) throw ConfigError("configure a backend with --toy-corpus or --backend-url");
  for (const auto& b : set.owned) set.views.push_back(b.get());
  return set;
}

std::vector<Sample> load_samples(const std::string& path, bool strict) {
  if (path.empty()) throw ConfigError("--data is required");
  auto result = pipeline::ingest(fs::path(path));
  for (const auto& w : result.warnings) std::cerr << "warning: " << path << ": " << w << "\n";
  for (const auto& r : result.rejected) {
    std::cerr << "rejected: " << path << ":" << r.line << ": " << r.reason << "\n";
  }
  if (strict && !result.rejected.empty()) {
    throw MalformedSampleError(std::to_string(result.rejected.size()) + " invalid records");
  }
  return std::move(result.samples);
}

// Opens --out or falls back to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw IoError("cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

int run_predict(const Options& o) {
  const auto cfg = pipeline_config(o);
  const auto db = load_db(o, cfg.improver != pipeline::Improver::kNone);
  const auto backends = make_backends(o);
  const auto samples = load_samples(o.data, o.strict);
  const auto predictions = pipeline::predict_all(samples, cfg, backends.views, db ? &*db : nullptr);
  Output out(o.out);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& p = predictions[i];
    nlohmann::ordered_json j;
    j["id"] = samples[i].id;
    j["chosen"] = p.chosen;
    j["option"] = samples[i].options[static_cast<std::size_t>(p.chosen)];
    j["probs"] = p.probs;
    j["fired"] = p.fired;
    out.stream() << j.dump() << '\n';
  }
  return 0;
}

int run_evaluate(const Options& o) {
  const auto cfg = pipeline_config(o);
  const auto db = load_db(o, cfg.improver != pipeline::Improver::kNone);
  const auto backends = make_backends(o);
  const auto samples = load_samples(o.data, o.strict);
  const auto report = pipeline::evaluate(samples, cfg, backends.views, db ? &*db : nullptr);
  {
    Output out(o.out);
    pipeline::write_records(report, out.stream());
  }
  if (!o.summary_out.empty()) {
    Output summary(o.summary_out);
    pipeline::write_summary(report, summary.stream());
  }
  pipeline::write_summary(report, o.out.empty() ? std::cerr : std::cout);
  return 0;
}

int run_sweep(const Options& o) {
  const auto cfg = pipeline_config(o);
  if (cfg.improver == pipeline::Improver::kNone) throw ConfigError("sweep needs --method difference|threshold");
  const auto db = load_db(o, true);
  const auto backends = make_backends(o);
  const auto samples = load_samples(o.data, o.strict);
  std::vector<double> grid;
  for (const auto& item : text::split(o.grid, ',')) {
    try {
      grid.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad grid value '" + item + "'");
    }
  }
  const auto sweep = pipeline::sweep_threshold(samples, cfg, backends.views, &*db, grid);
  Output out(o.out);
  pipeline::write_sweep(sweep, out.stream());
  return 0;
}

int run_augment(const Options& o) {
  if (o.augment_in.empty() || o.out.empty()) throw ConfigError("augment needs --in and --out");
  const auto db = load_db(o, true);
  const auto samples = load_samples(o.augment_in, o.strict);
  fs::create_directories(o.out);
  std::ofstream mlm(fs::path(o.out) / "mlm.tsv", std::ios::binary);
  std::ofstream variants(fs::path(o.out) / "variants.jsonl", std::ios::binary);
  if (!mlm || !variants) throw IoError("cannot write into " + o.out);
  std::size_t records = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    augment::AugmentConfig cfg{o.n, o.mask_rate, o.seed ^ static_cast<std::uint64_t>(i)};
    auto out = augment::augment(*db, samples[i].article, cfg);
    records += augment::emit_mlm_records(out, cfg, mlm);
    for (const auto& v : out) {
      nlohmann::ordered_json j;
      j["id"] = samples[i].id;
      j["subset"] = v.subset;
      j["text"] = v.text;
      auto subs = nlohmann::ordered_json::array();
      for (const auto& s : v.substitutions) {
        subs.push_back({{"position", s.position},
                        {"original", s.original},
                        {"replacement", s.replacement},
                        {"sense", s.sense.str()},
                        {"hypernym", s.hypernym.str()}});
      }
      j["substitutions"] = subs;
      j["mask_positions"] = v.mask_positions;
      variants << j.dump() << '\n';
    }
  }
  std::cerr << records << " MLM records written to " << (fs::path(o.out) / "mlm.tsv").string() << "\n";
  return 0;
}

int run_features(const Options& o) {
  const auto db = load_db(o, true);
  lingfeat::FeatureConfig fc;
  fc.large_value = o.large_value;
  Output out(o.out);
  for (const auto& word : read_lines(o.wordlist)) {
    const auto e = lingfeat::embed_option(*db, word, fc);
    out.stream() << word;
    for (const double v : e.values) out.stream() << '\t' << format_double(v);
    out.stream() << '\n';
  }
  return 0;
}

int run_attribute(const Options& o) {
  const auto cfg = pipeline_config(o);
  const auto db = load_db(o, cfg.improver != pipeline::Improver::kNone);
  const auto backends = make_backends(o);
  const auto samples = load_samples(o.data, o.strict);
  const Sample* sample = nullptr;
  for (const auto& s : samples) {
    if (s.id == o.sample_id) sample = &s;
  }
  if (!sample) throw ConfigError("no sample with id '" + o.sample_id + "'");
  const auto& backend = *backends.views.front();
  const auto prediction = pipeline::predict(*sample, cfg, backends.views, db ? &*db : nullptr);
  const auto question = scorer::tokenize_question(backend, sample->question);
  const auto article = backend.tokenize(sample->article);
  const auto input = scorer::truncated_input(article, question, std::min(cfg.max_len, backend.max_len()),
                                             backend.special_token_count());
  const auto option = backend.tokenize(sample->options[static_cast<std::size_t>(prediction.chosen)]);
  if (option.token_ids.empty()) throw EmptyOptionError("predicted option has no tokens");
  const auto result = attribution::attribute(backend, input, option.token_ids.front(), o.n_steps);

  std::vector<double> normalized(result.word_scores.size(), 0.0);
  std::vector<bool> top(result.word_scores.size(), false);
  for (const auto& w : result.top10) {
    normalized[w.position] = w.score;
    top[w.position] = true;
  }
  Output out(o.out);
  for (const auto& w : result.word_scores) {
    nlohmann::ordered_json j;
    j["position"] = w.position;
    j["word"] = w.word;
    j["score"] = w.score;
    j["top10"] = static_cast<bool>(top[w.position]);
    j["normalized"] = normalized[w.position];
    out.stream() << j.dump() << '\n';
  }
  std::cerr << "sample " << sample->id << ": predicted option " << prediction.chosen << " ('"
            << sample->options[static_cast<std::size_t>(prediction.chosen)]
            << "'), completeness gap " << result.completeness_gap << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abstract-meaning cloze answering engine"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value configuration file");
  app.get_config_ptr()->envname("ABSCLOZE_CONFIG");
  app.config_formatter(std::make_shared<EnvFirstConfig>());

  Options o;
  add(app, "data", o.data, "sample file, one JSON object per line");
  add(app, "wordnet-dir", o.wordnet_dir, "directory holding index.<pos>/data.<pos>");
  add(app, "senti-file", o.senti_file, "SentiWordNet score file");
  add(app, "freq-file", o.freq_file, "lemma<TAB>count frequency table");
  add(app, "backend-url", o.backend_urls, "inference service base URL (repeatable)");
  add(app, "timeout-ms", o.timeout_ms, "per-request timeout");
  add(app, "retries", o.retries, "extra attempts on transport failure");
  add(app, "mask-token", o.mask_token, "mask literal of the service tokenizer");
  add(app, "pad-token", o.pad_token, "padding literal of the service tokenizer");
  add(app, "toy-corpus", o.toy_corpora, "corpus file for the built-in scorer (repeatable)");
  add(app, "strategy", o.strategy, "plain|voting|max-context")
      ->check(CLI::IsMember({"plain", "voting", "max-context"}));
  add(app, "weighting", o.weighting, "exact|similarity")->check(CLI::IsMember({"exact", "similarity"}));
  add(app, "max-len", o.max_len, "model input length");
  add(app, "stride", o.stride, "overlap between consecutive chunks");
  add(app, "method", o.method, "none|difference|threshold")
      ->check(CLI::IsMember({"none", "difference", "threshold"}));
  add(app, "improver", o.improver, "linguistic|hyponym")->check(CLI::IsMember({"linguistic", "hyponym"}));
  add(app, "diff-threshold", o.diff_threshold, "top-2 probability gap threshold");
  add(app, "prob-threshold", o.prob_threshold, "top-1 probability threshold");
  add(app, "majority", o.majority, "dimensions needed to flip")->check(CLI::Range(1, 13));
  add(app, "hyponym-depth", o.hyponym_depth, "hyponym levels to expand")->check(CLI::PositiveNumber);
  add(app, "ensemble", o.ensemble, "off|on")->check(CLI::IsMember({"off", "on"}));
  add(app, "large-value", o.large_value, "inversion constant of the linguistic embedding");
  add(app, "jobs", o.jobs, "samples scored in parallel")->check(CLI::PositiveNumber);
  app.add_flag("--strict", o.strict, "fail when any input record is invalid")->envname("ABSCLOZE_STRICT");

  auto* predict = app.add_subcommand("predict", "predict the option for every sample");
  add(*predict, "out", o.out, "prediction records (default stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "accuracy over labeled samples");
  add(*evaluate, "out", o.out, "per-sample records (default stdout)");
  add(*evaluate, "summary-out", o.summary_out, "summary table file");

  auto* sweep = app.add_subcommand("sweep", "tune the improver threshold");
  add(*sweep, "grid", o.grid, "comma-separated thresholds");
  add(*sweep, "out", o.out, "sweep table (default stdout)");

  auto* aug = app.add_subcommand("augment", "hypernym-augmented MLM data");
  add(*aug, "in", o.augment_in, "sample file")->required();
  add(*aug, "out", o.out, "output directory")->required();
  add(*aug, "n", o.n, "nouns substituted per article")->check(CLI::Range(0, augment::kMaxNouns));
  add(*aug, "mask-rate", o.mask_rate, "per-word mask probability")->check(CLI::Range(0.0, 1.0));
  add(*aug, "seed", o.seed, "random seed");

  auto* features = app.add_subcommand("features", "13-dimensional linguistic embeddings");
  features->add_option("wordlist", o.wordlist, "one word per line")->required();
  add(*features, "out", o.out, "output file (default stdout)");

  auto* attribute = app.add_subcommand("attribute", "Integrated Gradients word attributions");
  add(*attribute, "sample-id", o.sample_id, "sample to explain")->required();
  add(*attribute, "n-steps", o.n_steps, "Riemann steps")->check(CLI::PositiveNumber);
  add(*attribute, "out", o.out, "word records (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    reject_invalid_env(app);
    if (predict->parsed()) return run_predict(o);
    if (evaluate->parsed()) return run_evaluate(o);
    if (sweep->parsed()) return run_sweep(o);
    if (aug->parsed()) return run_augment(o);
    if (features->parsed()) return run_features(o);
    if (attribute->parsed()) return run_attribute(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const MalformedSampleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EvaluationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const QuestionOverflowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
