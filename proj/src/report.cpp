#include <cstdio>
#include <ostream>

#include "abscloze/pipeline.hpp"
#include "json.hpp"

namespace abscloze::pipeline {

void write_records(const EvalReport& report, std::ostream& out) {
  for (const auto& r : report.records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["chosen"] = r.chosen;
    j["gold"] = r.gold ? nlohmann::ordered_json(*r.gold) : nlohmann::ordered_json(nullptr);
    j["correct"] = r.gold && *r.gold == r.chosen;
    j["fired"] = r.fired;
    j["flipped_from"] =
        r.flipped_from ? nlohmann::ordered_json(*r.flipped_from) : nlohmann::ordered_json(nullptr);
    j["probs"] = r.probs;
    out << j.dump() << '\n';
  }
}

void write_summary(const EvalReport& report, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-48s %9s %9s %9s\n", "strategy", "samples", "correct",
                "accuracy");
  out << line;
  std::snprintf(line, sizeof(line), "%-48s %9zu %9zu %8.2f%%\n", report.strategy.c_str(),
                report.n_samples, report.n_correct, 100.0 * report.accuracy);
  out << line;
}

void write_sweep(const SweepResult& sweep, std::ostream& out) {
  char line[128];
  out << "threshold  accuracy\n";
  for (const auto& p : sweep.points) {
    std::snprintf(line, sizeof(line), "%9.4f  %7.2f%%\n", p.threshold, 100.0 * p.accuracy);
    out << line;
  }
  std::snprintf(line, sizeof(line), "best %.4f (%.2f%%)\n", sweep.best_threshold,
                100.0 * sweep.best_accuracy);
  out << line;
}

}  // namespace abscloze::pipeline
