#pragma once

// Helpers shared by the test binaries: scratch directories, a writer for
// small WordNet-format databases, and paths to the checked-in fixtures.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "abscloze/lexdb.hpp"

namespace abscloze::testing {

inline std::filesystem::path data_dir() { return ABSCLOZE_TEST_DATA; }
inline std::filesystem::path mini_wordnet_dir() { return data_dir() / "miniwn"; }
inline std::filesystem::path toy_dir() { return data_dir() / "toy"; }

inline lexdb::LexicalDatabase load_mini() {
  const auto dir = mini_wordnet_dir();
  return lexdb::LexicalDatabase::load(dir, dir / "senti.tsv", dir / "freq.tsv");
}

// Removed on destruction.
class ScratchDir {
 public:
  ScratchDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("abscloze-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& body) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Builds noun-only WordNet files. Synsets are numbered from 1 in insertion
// order; the sense order of a lemma is the order in which synsets naming it
// were added.
class WordNetWriter {
 public:
  struct Node {
    std::vector<std::string> lemmas;
    std::string gloss;
    std::vector<int> parents;
    std::vector<int> extra_pointers;  // written as '~' without a mirror
  };

  int add(std::vector<std::string> lemmas, std::string gloss, std::vector<int> parents = {}) {
    nodes_.push_back({std::move(lemmas), std::move(gloss), std::move(parents), {}});
    return static_cast<int>(nodes_.size());
  }

  Node& node(int id) { return nodes_.at(static_cast<std::size_t>(id - 1)); }

  static std::uint32_t offset(int id) { return static_cast<std::uint32_t>(id) * 100; }
  static lexdb::SynsetId sid(int id) { return {lexdb::PartOfSpeech::kNoun, offset(id)}; }

  // Each edge is written from both ends, as WordNet does.
  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::map<int, std::vector<int>> children;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      for (int p : nodes_[i].parents) children[p].push_back(static_cast<int>(i + 1));
    }
    std::ofstream data(dir / "data.noun", std::ios::binary);
    data << "  1 generated test database\n";
    std::map<std::string, std::vector<int>> index;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const int id = static_cast<int>(i + 1);
      const Node& n = nodes_[i];
      std::vector<std::string> ptrs;
      for (int p : n.parents) ptrs.push_back("@ " + pad(offset(p)) + " n 0000");
      for (int c : children[id]) ptrs.push_back("~ " + pad(offset(c)) + " n 0000");
      for (int e : n.extra_pointers) ptrs.push_back("~ " + pad(offset(e)) + " n 0000");
      char head[64];
      std::snprintf(head, sizeof(head), "%s 05 n %02zx", pad(offset(id)).c_str(), n.lemmas.size());
      data << head;
      for (const auto& l : n.lemmas) {
        data << ' ' << l << " 0";
        index[l].push_back(id);
      }
      char count[8];
      std::snprintf(count, sizeof(count), " %03zu", ptrs.size());
      data << count;
      for (const auto& p : ptrs) data << ' ' << p;
      data << " | " << n.gloss << "  \n";
    }
    std::ofstream idx(dir / "index.noun", std::ios::binary);
    idx << "  1 generated test index\n";
    for (const auto& [lemma, ids] : index) {
      idx << lemma << " n " << ids.size() << " 0 " << ids.size() << " 0";
      for (int id : ids) idx << ' ' << pad(offset(id));
      idx << "  \n";
    }
  }

 private:
  static std::string pad(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08u", v);
    return buf;
  }
  std::vector<Node> nodes_;
};

}  // namespace abscloze::testing
