#include "abscloze/lexdb.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <unordered_set>

#include "abscloze/error.hpp"
#include "abscloze/text.hpp"

namespace abscloze::lexdb {

namespace fs = std::filesystem;

std::optional<PartOfSpeech> parse_pos(char c) {
  switch (c) {
    case 'n': return PartOfSpeech::kNoun;
    case 'v': return PartOfSpeech::kVerb;
    case 'a':
    case 's': return PartOfSpeech::kAdjective;
    case 'r': return PartOfSpeech::kAdverb;
    default: return std::nullopt;
  }
}

std::string SynsetId::str() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%08u", static_cast<char>(pos),
                static_cast<unsigned>(offset));
  return buf;
}

namespace {

const char* file_suffix(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::kNoun: return "noun";
    case PartOfSpeech::kVerb: return "verb";
    case PartOfSpeech::kAdjective: return "adj";
    case PartOfSpeech::kAdverb: return "adv";
  }
  return "";
}

// Reads a file line by line. WordNet data files open with a license block
// whose lines start with two spaces; those are skipped by the callers.
class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path.string()), in_(path) {
    if (!in_) throw IoError("cannot open " + path_);
  }

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_, line_no_, what);
  }

  const std::string& path() const { return path_; }
  std::size_t line_no() const { return line_no_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

template <typename T>
bool parse_number(std::string_view s, T& out, int base = 10) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out, base);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_license_line(const std::string& line) {
  return line.empty() || line.rfind("  ", 0) == 0;
}

// "able(a)" -> "able"; adjective lemmas carry a syntactic marker.
std::string clean_lemma(std::string_view raw) {
  if (const auto paren = raw.find('('); paren != std::string_view::npos &&
                                        raw.back() == ')') {
    raw = raw.substr(0, paren);
  }
  return text::to_lower(raw);
}

struct RawPointer {
  bool hypernym = false;
  SynsetId target;
  std::size_t line = 0;
};

void append_unique(std::vector<SynsetId>& v, const SynsetId& id) {
  if (std::find(v.begin(), v.end(), id) == v.end()) v.push_back(id);
}

struct SuffixRule {
  std::string_view suffix;
  std::string_view replacement;
};

std::span<const SuffixRule> suffix_rules(PartOfSpeech pos) {
  static constexpr SuffixRule kNoun[] = {
      {"s", ""},     {"ses", "s"},   {"xes", "x"}, {"zes", "z"},
      {"ches", "ch"}, {"shes", "sh"}, {"men", "man"}, {"ies", "y"}};
  static constexpr SuffixRule kVerb[] = {
      {"s", ""}, {"ies", "y"}, {"es", "e"},  {"es", ""},
      {"ed", "e"}, {"ed", ""}, {"ing", "e"}, {"ing", ""}};
  static constexpr SuffixRule kAdj[] = {
      {"er", ""}, {"est", ""}, {"er", "e"}, {"est", "e"}};
  switch (pos) {
    case PartOfSpeech::kNoun: return kNoun;
    case PartOfSpeech::kVerb: return kVerb;
    case PartOfSpeech::kAdjective: return kAdj;
    case PartOfSpeech::kAdverb: return {};
  }
  return {};
}

}  // namespace

LexicalDatabase LexicalDatabase::load(const fs::path& wordnet_dir,
                                      const std::optional<fs::path>& senti_file,
                                      const std::optional<fs::path>& freq_file) {
  LexicalDatabase db;
  std::unordered_map<SynsetId, std::vector<RawPointer>, SynsetIdHash> pointers;
  std::unordered_map<SynsetId, std::string, SynsetIdHash> origin;

  if (!fs::exists(wordnet_dir / "data.noun") ||
      !fs::exists(wordnet_dir / "index.noun")) {
    throw IoError("missing data.noun/index.noun in " + wordnet_dir.string());
  }

  for (const PartOfSpeech pos : kAllPartsOfSpeech) {
    const fs::path data_path = wordnet_dir / (std::string("data.") + file_suffix(pos));
    if (!fs::exists(data_path)) continue;
    LineReader in(data_path);
    std::string line;
    while (in.next(line)) {
      if (is_license_line(line)) continue;
      const auto bar = line.find('|');
      std::string_view head(line);
      std::string gloss;
      if (bar != std::string::npos) {
        head = head.substr(0, bar);
        std::string_view g = std::string_view(line).substr(bar + 1);
        while (!g.empty() && g.front() == ' ') g.remove_prefix(1);
        while (!g.empty() && g.back() == ' ') g.remove_suffix(1);
        gloss = std::string(g);
      }
      const auto tok = split_spaces(head);
      if (tok.size() < 4) in.fail("truncated synset record");

      Synset s;
      if (!parse_number(tok[0], s.id.offset)) in.fail("bad synset offset '" + std::string(tok[0]) + "'");
      if (tok[2].size() != 1 || !parse_pos(tok[2][0])) in.fail("bad synset type '" + std::string(tok[2]) + "'");
      s.id.pos = *parse_pos(tok[2][0]);
      if (s.id.pos != pos) in.fail("synset type does not match file");

      std::size_t word_count = 0;
      if (!parse_number(tok[3], word_count, 16) || word_count == 0) in.fail("bad word count");
      std::size_t i = 4;
      if (tok.size() < i + 2 * word_count + 1) in.fail("truncated word list");
      for (std::size_t w = 0; w < word_count; ++w, i += 2) {
        std::string lemma = clean_lemma(tok[i]);
        if (lemma.empty()) in.fail("empty lemma");
        s.lemmas.push_back(std::move(lemma));
      }

      std::size_t pointer_count = 0;
      if (!parse_number(tok[i], pointer_count)) in.fail("bad pointer count '" + std::string(tok[i]) + "'");
      ++i;
      if (tok.size() < i + 4 * pointer_count) {
        in.fail("truncated pointer list: expected " + std::to_string(pointer_count) + " pointers");
      }
      auto& ptrs = pointers[s.id];
      for (std::size_t p = 0; p < pointer_count; ++p, i += 4) {
        const std::string_view symbol = tok[i];
        if (symbol != "@" && symbol != "~") continue;
        RawPointer rp;
        rp.hypernym = symbol == "@";
        rp.line = in.line_no();
        if (!parse_number(tok[i + 1], rp.target.offset)) in.fail("bad pointer offset");
        if (tok[i + 2].size() != 1 || !parse_pos(tok[i + 2][0])) in.fail("bad pointer part of speech");
        rp.target.pos = *parse_pos(tok[i + 2][0]);
        ptrs.push_back(rp);
      }

      s.gloss = std::move(gloss);
      const SynsetId id = s.id;
      if (!db.synsets_.emplace(id, std::move(s)).second) in.fail("duplicate synset " + id.str());
      origin[id] = in.path() + ":" + std::to_string(in.line_no());
    }
  }

  // Pointers: link, then enforce symmetry by mirroring each edge.
  std::vector<SynsetId> sources;
  sources.reserve(pointers.size());
  for (const auto& [id, _] : pointers) sources.push_back(id);
  std::sort(sources.begin(), sources.end());
  for (const SynsetId& src : sources) {
    for (const RawPointer& rp : pointers[src]) {
      auto it = db.synsets_.find(rp.target);
      if (it == db.synsets_.end()) {
        throw LinkError("dangling pointer " + src.str() + " -> " + rp.target.str() +
                        " (" + origin[src] + ")");
      }
      Synset& from = db.synsets_.at(src);
      Synset& to = it->second;
      if (rp.hypernym) {
        append_unique(from.hypernym_ids, to.id);
        append_unique(to.hyponym_ids, from.id);
      } else {
        append_unique(from.hyponym_ids, to.id);
        append_unique(to.hypernym_ids, from.id);
      }
    }
  }

  for (const PartOfSpeech pos : kAllPartsOfSpeech) {
    const fs::path index_path = wordnet_dir / (std::string("index.") + file_suffix(pos));
    if (!fs::exists(index_path)) continue;
    LineReader in(index_path);
    std::string line;
    while (in.next(line)) {
      if (is_license_line(line)) continue;
      const auto tok = split_spaces(line);
      if (tok.size() < 4) in.fail("truncated index record");
      std::size_t synset_count = 0;
      std::size_t pointer_count = 0;
      if (!parse_number(tok[2], synset_count)) in.fail("bad synset count");
      if (!parse_number(tok[3], pointer_count)) in.fail("bad pointer count");
      const std::size_t first = 4 + pointer_count + 2;
      if (tok.size() < first + synset_count) in.fail("truncated sense list");
      std::string lemma = text::to_lower(tok[0]);
      auto& senses = db.lemma_index_[{lemma, pos}];
      for (std::size_t k = 0; k < synset_count; ++k) {
        SynsetId id{pos, 0};
        if (!parse_number(tok[first + k], id.offset)) in.fail("bad sense offset");
        if (!db.synsets_.count(id)) {
          throw LinkError("index entry '" + lemma + "' -> " + id.str() +
                          " has no synset (" + in.path() + ":" +
                          std::to_string(in.line_no()) + ")");
        }
        senses.push_back(id);
      }
    }
  }

  if (const fs::path sense_path = wordnet_dir / "index.sense"; fs::exists(sense_path)) {
    LineReader in(sense_path);
    std::string line;
    while (in.next(line)) {
      if (line.empty()) continue;
      const auto tok = split_spaces(line);
      if (tok.size() < 4) in.fail("truncated sense index record");
      const std::string_view key = tok[0];
      const auto pct = key.find('%');
      if (pct == std::string_view::npos || pct + 1 >= key.size()) in.fail("bad sense key");
      static constexpr char kTypes[] = {'n', 'v', 'a', 'r', 's'};
      const int ss_type = key[pct + 1] - '1';
      if (ss_type < 0 || ss_type > 4) in.fail("bad sense key type");
      SynsetId id{*parse_pos(kTypes[ss_type]), 0};
      std::uint64_t count = 0;
      if (!parse_number(tok[1], id.offset) || !parse_number(tok[3], count)) {
        in.fail("bad sense index numbers");
      }
      auto it = db.synsets_.find(id);
      if (it == db.synsets_.end()) continue;  // part of speech not loaded
      it->second.tag_count_per_lemma[text::to_lower(key.substr(0, pct))] = count;
    }
  }

  if (senti_file) {
    LineReader in(*senti_file);
    std::string line;
    while (in.next(line)) {
      if (line.empty() || line.front() == '#') continue;
      const auto cols = text::split(line, '\t');
      if (cols.size() < 4) in.fail("expected at least 4 tab-separated columns");
      if (cols[0].empty()) continue;  // trailing blank rows
      if (cols[0].size() != 1 || !parse_pos(cols[0][0])) in.fail("bad part of speech '" + cols[0] + "'");
      SynsetId id{*parse_pos(cols[0][0]), 0};
      if (!parse_number(std::string_view(cols[1]), id.offset)) in.fail("bad synset id '" + cols[1] + "'");
      SentiScores sc;
      try {
        std::size_t used = 0;
        sc.pos = std::stod(cols[2], &used);
        if (used != cols[2].size()) throw std::invalid_argument("trailing");
        sc.neg = std::stod(cols[3], &used);
        if (used != cols[3].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        in.fail("bad score column");
      }
      if (sc.pos < 0 || sc.neg < 0 || sc.pos + sc.neg > 1.0 + 1e-9) {
        in.fail("scores outside the probability simplex");
      }
      sc.obj = std::max(0.0, 1.0 - sc.pos - sc.neg);
      db.senti_[id] = sc;
    }
  }

  if (freq_file) {
    LineReader in(*freq_file);
    std::string line;
    while (in.next(line)) {
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) in.fail("expected lemma<TAB>count");
      std::uint64_t count = 0;
      if (!parse_number(std::string_view(line).substr(tab + 1), count)) in.fail("bad count");
      db.frequency_[text::to_lemma(std::string_view(line).substr(0, tab))] += count;
    }
  } else {
    for (const auto& [_, s] : db.synsets_) {
      for (const auto& [lemma, count] : s.tag_count_per_lemma) db.frequency_[lemma] += count;
    }
  }

  db.link_and_validate();
  db.compute_depths();
  return db;
}

void LexicalDatabase::link_and_validate() {
  // Noun hypernymy must be acyclic (iterative three-colour DFS).
  enum Colour : char { kWhite, kGrey, kBlack };
  std::unordered_map<SynsetId, Colour, SynsetIdHash> colour;
  for (const auto& [id, _] : synsets_) {
    if (id.pos == PartOfSpeech::kNoun) colour[id] = kWhite;
  }
  for (const SynsetId& root : ids()) {
    if (root.pos != PartOfSpeech::kNoun || colour[root] != kWhite) continue;
    std::vector<std::pair<SynsetId, std::size_t>> stack{{root, 0}};
    colour[root] = kGrey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& parents = synsets_.at(node).hypernym_ids;
      if (next == parents.size()) {
        colour[node] = kBlack;
        stack.pop_back();
        continue;
      }
      const SynsetId parent = parents[next++];
      if (parent.pos != PartOfSpeech::kNoun) continue;
      if (colour[parent] == kGrey) {
        throw LinkError("noun hypernym cycle through " + node.str() + " -> " + parent.str());
      }
      if (colour[parent] == kWhite) {
        colour[parent] = kGrey;
        stack.emplace_back(parent, 0);
      }
    }
  }
}

void LexicalDatabase::compute_depths() {
  // Multi-source BFS from the roots down the hyponym edges.
  std::deque<SynsetId> queue;
  for (const SynsetId& id : ids()) {
    if (synsets_.at(id).hypernym_ids.empty()) {
      depth_[id] = 0;
      queue.push_back(id);
    }
  }
  while (!queue.empty()) {
    const SynsetId id = queue.front();
    queue.pop_front();
    const int d = depth_.at(id);
    for (const SynsetId& child : synsets_.at(id).hyponym_ids) {
      if (depth_.emplace(child, d + 1).second) queue.push_back(child);
    }
  }
  // Rootless verb cycles exist in some WordNet releases; treat their members
  // as roots. Noun cycles were rejected above.
  for (const auto& [id, _] : synsets_) depth_.emplace(id, 0);
}

std::optional<std::string> LexicalDatabase::base_form(std::string_view word,
                                                      PartOfSpeech pos) const {
  const std::string lemma = text::to_lemma(word);
  if (lemma.empty()) return std::nullopt;
  if (lemma_index_.count({lemma, pos})) return lemma;
  for (const SuffixRule& rule : suffix_rules(pos)) {
    if (lemma.size() <= rule.suffix.size() ||
        !lemma.ends_with(rule.suffix)) {
      continue;
    }
    std::string candidate = lemma.substr(0, lemma.size() - rule.suffix.size());
    candidate += rule.replacement;
    if (lemma_index_.count({candidate, pos})) return candidate;
  }
  return std::nullopt;
}

std::vector<const Synset*> LexicalDatabase::senses(std::string_view word,
                                                   PartOfSpeech pos) const {
  std::vector<const Synset*> out;
  const auto lemma = base_form(word, pos);
  if (!lemma) return out;
  for (const SynsetId& id : lemma_index_.at({*lemma, pos})) {
    out.push_back(&synsets_.at(id));
  }
  return out;
}

std::size_t LexicalDatabase::sense_count(std::string_view word) const {
  std::size_t n = 0;
  for (const PartOfSpeech pos : kAllPartsOfSpeech) n += senses(word, pos).size();
  return n;
}

bool LexicalDatabase::has_noun_sense(std::string_view word) const {
  return base_form(word, PartOfSpeech::kNoun).has_value();
}

const Synset& LexicalDatabase::synset(const SynsetId& id) const {
  auto it = synsets_.find(id);
  if (it == synsets_.end()) throw LookupError("unknown synset " + id.str());
  return it->second;
}

bool LexicalDatabase::contains(const SynsetId& id) const {
  return synsets_.count(id) > 0;
}

std::vector<const Synset*> LexicalDatabase::hypernyms(const SynsetId& id) const {
  std::vector<const Synset*> out;
  for (const SynsetId& h : synset(id).hypernym_ids) out.push_back(&synsets_.at(h));
  return out;
}

std::vector<const Synset*> LexicalDatabase::hyponyms(const SynsetId& id) const {
  std::vector<const Synset*> out;
  for (const SynsetId& h : synset(id).hyponym_ids) out.push_back(&synsets_.at(h));
  return out;
}

int LexicalDatabase::depth(const SynsetId& id) const {
  auto it = depth_.find(id);
  if (it == depth_.end()) throw LookupError("unknown synset " + id.str());
  return it->second;
}

SentiScores LexicalDatabase::senti(const SynsetId& id) const {
  auto it = senti_.find(id);
  return it == senti_.end() ? SentiScores{} : it->second;
}

std::uint64_t LexicalDatabase::frequency(std::string_view lemma) const {
  auto it = frequency_.find(text::to_lemma(lemma));
  return it == frequency_.end() ? 0 : it->second;
}

std::size_t LexicalDatabase::gloss_overlap(const Synset& s,
                                           std::span<const std::string> context) const {
  std::unordered_set<std::string> bag;
  for (const auto& c : context) {
    for (auto& w : text::content_words(c)) bag.insert(std::move(w));
  }
  std::size_t overlap = 0;
  std::unordered_set<std::string> seen;
  for (auto& w : text::content_words(s.gloss)) {
    if (bag.count(w) && seen.insert(w).second) ++overlap;
  }
  return overlap;
}

const Synset& LexicalDatabase::lesk_disambiguate(
    std::string_view word, std::span<const std::string> context) const {
  const auto candidates = senses(word, PartOfSpeech::kNoun);
  if (candidates.empty()) {
    throw NoSenseError("no noun sense for '" + std::string(word) + "'");
  }
  const Synset* best = candidates.front();
  std::size_t best_overlap = gloss_overlap(*best, context);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const std::size_t o = gloss_overlap(*candidates[i], context);
    if (o > best_overlap) {
      best = candidates[i];
      best_overlap = o;
    }
  }
  return *best;
}

std::vector<SynsetId> LexicalDatabase::ids() const {
  std::vector<SynsetId> out;
  out.reserve(synsets_.size());
  for (const auto& [id, _] : synsets_) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace abscloze::lexdb
