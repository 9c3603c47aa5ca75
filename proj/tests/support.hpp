// Shared helpers for the unit and acceptance suites: a fixed ASCII tagset,
// compact corpus builders, a seeded random-instance generator, and small
// filesystem utilities.  Everything here is deterministic given the seed.
#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lv/corpus.hpp"
#include "lv/util.hpp"

#ifndef LV_SOURCE_DIR
#define LV_SOURCE_DIR "."
#endif

namespace lvtest {

inline const char* tagset_path() { return LV_SOURCE_DIR "/data/tagset.txt"; }
inline const char* demo_corpus_path() {
  return LV_SOURCE_DIR "/data/demo_corpus.tsv";
}

// A 14-tag set with ASCII names for readable test fixtures.  The boundary
// tag "." sits at code 4, matching the shipped tagset's layout.
inline lv::TagSet make_test_tagset() {
  lv::TagSet tagset;
  tagset.names = {"num",  "head",    "headcmpl", ".",       "noun",
                  "qual", "adj",     "conj-w",   "prep",    "unit",
                  "pass", "prepnoun", "cognate", "conj-o"};
  tagset.boundary = tagset.code(".");
  return tagset;
}

inline lv::Token tok(std::string surface, int pos, int state) {
  return lv::Token{std::move(surface), pos, state};
}

// Builds a padded sentence from interior tokens.
inline lv::Sentence sent(const lv::TagSet& tagset,
                         std::initializer_list<lv::Token> interior) {
  lv::Sentence s;
  s.tokens.assign(interior.begin(), interior.end());
  return lv::pad_sentence(std::move(s), tagset);
}

inline lv::Corpus make_corpus(const lv::TagSet& tagset,
                              std::vector<lv::Sentence> sentences) {
  lv::Corpus corpus;
  corpus.tagset = tagset;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    lv::Sentence padded = lv::pad_sentence(std::move(sentences[i]), tagset);
    lv::validate_sentence(padded, tagset,
                          "test sentence " + std::to_string(i));
    corpus.sentences.push_back(std::move(padded));
  }
  lv::rebuild_vocabulary(corpus);
  return corpus;
}

// One random training corpus plus one query sentence, sized so that the
// exhaustive-search reference stays fast: interior lengths 1..4 (padded
// length <= 6), vocabulary at most 12 surfaces, all 14 tags available.
struct RandomInstance {
  lv::Corpus corpus;
  lv::Sentence query;
};

inline RandomInstance make_random_instance(lv::Rng& rng) {
  static const std::vector<std::string> kPool = {
      "ماء", "سكر", "ملح",  "زيت", "دقيق", "خبز",
      "wa7", "wb8", "wc9", "wd10", "we11", "wf12"};
  static const std::vector<std::string> kUnseen = {"غريب", "qq1", "zz2",
                                                   "ششش"};
  const lv::TagSet tagset = make_test_tagset();

  const std::size_t vocab_size = 3 + rng.next_below(10);  // 3..12
  auto random_surface = [&]() -> const std::string& {
    return kPool[rng.next_below(vocab_size)];
  };
  auto random_tag = [&]() -> int {
    int t = 1 + static_cast<int>(rng.next_below(lv::kNumTags));
    return t == tagset.boundary ? 5 : t;
  };
  auto random_interior = [&]() {
    lv::Sentence s;
    const std::size_t len = 1 + rng.next_below(4);
    for (std::size_t i = 0; i < len; ++i) {
      s.tokens.push_back(lv::Token{random_surface(), random_tag(),
                                   static_cast<int>(rng.next_below(4))});
    }
    return s;
  };

  RandomInstance inst;
  inst.corpus.tagset = tagset;
  const std::size_t n_sent = 3 + rng.next_below(6);  // 3..8
  for (std::size_t i = 0; i < n_sent; ++i) {
    inst.corpus.sentences.push_back(
        lv::pad_sentence(random_interior(), tagset));
  }
  lv::rebuild_vocabulary(inst.corpus);

  lv::Sentence query = random_interior();
  for (lv::Token& t : query.tokens) {
    if (rng.next_below(4) == 0) {  // ~25% unseen surfaces
      t.surface = kUnseen[rng.next_below(kUnseen.size())];
    }
  }
  inst.query = lv::pad_sentence(std::move(query), tagset);
  return inst;
}

// Like make_random_instance, but interior state sequences follow the
// annotation grammar (non-ingredient 0s; ingredient runs 1 / 1,2 / 1,2,3,
// 3...), the shape real recipe annotations take.
inline RandomInstance make_recipe_instance(lv::Rng& rng) {
  static const std::vector<std::string> kPool = {
      "ماء", "سكر", "ملح",  "زيت", "دقيق", "خبز",
      "wa7", "wb8", "wc9", "wd10", "we11", "wf12"};
  static const std::vector<std::string> kUnseen = {"غريب", "qq1", "zz2",
                                                   "ششش"};
  const lv::TagSet tagset = make_test_tagset();

  const std::size_t vocab_size = 3 + rng.next_below(10);
  auto random_tag = [&]() -> int {
    int t = 1 + static_cast<int>(rng.next_below(lv::kNumTags));
    return t == tagset.boundary ? 5 : t;
  };
  auto recipe_interior = [&]() {
    lv::Sentence s;
    const std::size_t len = 1 + rng.next_below(4);
    std::size_t i = 0;
    while (i < len) {
      if (rng.next_below(2) == 0) {  // non-ingredient token
        s.tokens.push_back(
            lv::Token{kPool[rng.next_below(vocab_size)], random_tag(), 0});
        ++i;
        continue;
      }
      int state = 1;  // ingredient run: 1, then 2, then 3s
      while (i < len) {
        s.tokens.push_back(
            lv::Token{kPool[rng.next_below(vocab_size)], random_tag(), state});
        ++i;
        if (rng.next_below(2) == 0) break;
        state = state == 1 ? 2 : 3;
      }
    }
    return s;
  };

  RandomInstance inst;
  inst.corpus.tagset = tagset;
  const std::size_t n_sent = 3 + rng.next_below(6);
  for (std::size_t i = 0; i < n_sent; ++i) {
    inst.corpus.sentences.push_back(
        lv::pad_sentence(recipe_interior(), tagset));
  }
  lv::rebuild_vocabulary(inst.corpus);

  lv::Sentence query = recipe_interior();
  for (lv::Token& t : query.tokens) {
    if (rng.next_below(8) == 0) {  // occasional unseen surface
      t.surface = kUnseen[rng.next_below(kUnseen.size())];
    }
  }
  inst.query = lv::pad_sentence(std::move(query), tagset);
  return inst;
}

inline std::filesystem::path make_temp_dir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("lv_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw lv::Error("test helper: cannot write " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lv::Error("test helper: cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace lvtest
