#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "lv/corpus.hpp"
#include "support.hpp"

using namespace lv;
using namespace lvtest;

TEST_CASE("load_tagset reads the shipped tagset") {
  TagSet tagset = load_tagset(tagset_path());
  CHECK(tagset.names.size() == 14);
  CHECK(tagset.boundary == 4);
  CHECK(tagset.code(".") == 4);
  CHECK(tagset.name(4) == ".");
  CHECK(tagset.code("إسم معرف") == 2);
  CHECK(tagset.code("no-such-tag") == 0);
  CHECK_THROWS_AS(tagset.name(0), Error);
  CHECK_THROWS_AS(tagset.name(15), Error);
}

TEST_CASE("load_tagset validates shape") {
  auto dir = make_temp_dir("tagset");

  auto path = dir / "short.txt";
  write_text_file(path, "a\nb\n.\n");
  CHECK_THROWS_AS(load_tagset(path.string()), Error);

  path = dir / "dup.txt";
  std::string dup;
  for (int i = 0; i < 12; ++i) dup += "t" + std::to_string(i) + "\n";
  dup += ".\nt0\n";  // 14 lines but t0 repeats
  write_text_file(path, dup);
  CHECK_THROWS_AS(load_tagset(path.string()), Error);

  path = dir / "noboundary.txt";
  std::string nb;
  for (int i = 0; i < 14; ++i) nb += "t" + std::to_string(i) + "\n";
  write_text_file(path, nb);
  CHECK_THROWS_AS(load_tagset(path.string()), Error);

  CHECK_THROWS_AS(load_tagset((dir / "missing.txt").string()), Error);

  // Comments and blank lines are skipped; CRLF is tolerated.
  path = dir / "ok.txt";
  std::string ok = "# comment\n\n";
  for (int i = 0; i < 13; ++i) ok += "t" + std::to_string(i) + "\r\n";
  ok += ".\n";
  write_text_file(path, ok);
  TagSet tagset = load_tagset(path.string());
  CHECK(tagset.boundary == 14);
  CHECK(tagset.code("t0") == 1);
}

TEST_CASE("tagset hash distinguishes order and content") {
  TagSet a = make_test_tagset();
  TagSet b = a;
  CHECK(a.hash() == b.hash());
  std::swap(b.names[0], b.names[1]);
  CHECK(a.hash() != b.hash());
  TagSet c = a;
  c.names[5] = "changed";
  CHECK(a.hash() != c.hash());
}

TEST_CASE("pad_sentence adds boundaries once") {
  TagSet tagset = make_test_tagset();
  Sentence raw;
  raw.tokens = {tok("ماء", 5, 1)};
  Sentence padded = pad_sentence(raw, tagset);
  REQUIRE(padded.tokens.size() == 3);
  CHECK(padded.tokens.front().surface == ".");
  CHECK(padded.tokens.front().pos == tagset.boundary);
  CHECK(padded.tokens.front().state == 0);
  CHECK(padded.tokens.back().surface == ".");

  Sentence again = pad_sentence(padded, tagset);
  CHECK(again.tokens.size() == 3);  // idempotent

  Sentence empty;
  CHECK_THROWS_AS(pad_sentence(empty, tagset), Error);
}

TEST_CASE("validate_sentence rejects structural defects") {
  TagSet tagset = make_test_tagset();
  Sentence good = sent(tagset, {tok("ماء", 5, 1), tok("بارد", 7, 2)});
  CHECK_NOTHROW(validate_sentence(good, tagset, "good"));

  Sentence bad = good;
  bad.tokens[1].pos = tagset.boundary;  // boundary tag inside the sentence
  CHECK_THROWS_AS(validate_sentence(bad, tagset, "t"), Error);

  bad = good;
  bad.tokens[0].state = 1;  // boundary token must carry state 0
  CHECK_THROWS_AS(validate_sentence(bad, tagset, "t"), Error);

  bad = good;
  bad.tokens[1].state = 4;  // state out of range
  CHECK_THROWS_AS(validate_sentence(bad, tagset, "t"), Error);

  bad = good;
  bad.tokens[1].pos = 15;  // tag code out of range
  CHECK_THROWS_AS(validate_sentence(bad, tagset, "t"), Error);

  bad = good;
  bad.tokens[1].surface = "";  // empty surface
  CHECK_THROWS_AS(validate_sentence(bad, tagset, "t"), Error);

  bad = good;
  bad.tokens[1].surface = "a\tb";  // tab would corrupt the TSV format
  CHECK_THROWS_AS(validate_sentence(bad, tagset, "t"), Error);

  bad = good;
  bad.tokens.back().pos = 5;  // edge is not a boundary token
  CHECK_THROWS_AS(validate_sentence(bad, tagset, "t"), Error);

  Sentence tiny;
  tiny.tokens = {tok(".", tagset.boundary, 0)};
  CHECK_THROWS_AS(validate_sentence(tiny, tagset, "t"), Error);
}

TEST_CASE("load_corpus parses the shipped demo corpus") {
  TagSet tagset = load_tagset(tagset_path());
  Corpus corpus = load_corpus(demo_corpus_path(), tagset);
  REQUIRE(corpus.sentences.size() == 14);

  // First worked sentence: oil phrase, padded to 7 tokens.
  const Sentence& oil = corpus.sentences[0];
  REQUIRE(oil.tokens.size() == 7);
  std::vector<int> states, tags;
  for (const Token& t : oil.tokens) {
    states.push_back(t.state);
    tags.push_back(t.pos);
  }
  CHECK(states == std::vector<int>{0, 1, 2, 0, 0, 0, 0});
  CHECK(tags == std::vector<int>{4, 2, 3, 9, 6, 7, 4});
  CHECK(oil.tokens[1].surface == "زيت");
  CHECK(oil.tokens[2].surface == "زيتون");

  // Second worked sentence: yeast phrase.
  const Sentence& yeast = corpus.sentences[1];
  REQUIRE(yeast.tokens.size() == 7);
  states.clear();
  tags.clear();
  for (const Token& t : yeast.tokens) {
    states.push_back(t.state);
    tags.push_back(t.pos);
  }
  CHECK(states == std::vector<int>{0, 0, 0, 1, 2, 0, 0});
  CHECK(tags == std::vector<int>{4, 1, 10, 6, 7, 12, 4});
  CHECK(yeast.tokens[5].surface == "للخبز");

  // Every sentence is padded and valid.
  for (const Sentence& s : corpus.sentences) {
    CHECK(s.tokens.front().pos == tagset.boundary);
    CHECK(s.tokens.back().pos == tagset.boundary);
  }

  // Vocabulary counts are a multiset over padded tokens: 14 sentences
  // contribute two boundary tokens each.
  CHECK(corpus.vocabulary.at(".") == 28);
  CHECK(corpus.vocabulary.at("زيت") == 2);   // sentences 0 and 3
  CHECK(corpus.vocabulary.at("من") == 4);    // sentences 0, 3, 4, 12
  CHECK(corpus.vocabulary.count("غائب") == 0);
}

TEST_CASE("load_corpus reports malformed rows with line numbers") {
  TagSet tagset = make_test_tagset();
  auto dir = make_temp_dir("corpus");

  auto path = dir / "badfields.tsv";
  write_text_file(path, "ماء\tnoun\n");
  CHECK_THROWS_WITH_AS(load_corpus(path.string(), tagset),
                       doctest::Contains(":1:"), Error);

  path = dir / "badtag.tsv";
  write_text_file(path, "ماء\tnada\t1\n");
  CHECK_THROWS_WITH_AS(load_corpus(path.string(), tagset),
                       doctest::Contains("unknown tag name"), Error);

  path = dir / "badstate.tsv";
  write_text_file(path, "ماء\tnoun\t7\n");
  CHECK_THROWS_AS(load_corpus(path.string(), tagset), Error);

  path = dir / "empty.tsv";
  write_text_file(path, "# only a comment\n\n");
  CHECK_THROWS_AS(load_corpus(path.string(), tagset), Error);

  CHECK_THROWS_AS(load_corpus((dir / "missing.tsv").string(), tagset), Error);
}

TEST_CASE("save_corpus and load_corpus round-trip") {
  TagSet tagset = load_tagset(tagset_path());
  Corpus corpus = load_corpus(demo_corpus_path(), tagset);

  auto dir = make_temp_dir("roundtrip");
  auto path = dir / "saved.tsv";
  save_corpus(corpus, path.string());
  Corpus reloaded = load_corpus(path.string(), tagset);

  REQUIRE(reloaded.sentences.size() == corpus.sentences.size());
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    const auto& a = corpus.sentences[i].tokens;
    const auto& b = reloaded.sentences[i].tokens;
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      CHECK(a[j].surface == b[j].surface);
      CHECK(a[j].pos == b[j].pos);
      CHECK(a[j].state == b[j].state);
    }
  }
  CHECK(reloaded.vocabulary == corpus.vocabulary);

  // Saving the reload reproduces the file byte for byte.
  auto path2 = dir / "saved2.tsv";
  save_corpus(reloaded, path2.string());
  CHECK(read_text_file(path) == read_text_file(path2));
}

TEST_CASE("parse_sentence_tsv pads and validates") {
  TagSet tagset = make_test_tagset();
  Sentence s = parse_sentence_tsv("ماء\tnoun\t1\nبارد\tadj\t2\n", tagset, "arg");
  REQUIRE(s.tokens.size() == 4);
  CHECK(s.tokens[0].pos == tagset.boundary);
  CHECK(s.tokens[1].surface == "ماء");
  CHECK(s.tokens[2].state == 2);

  CHECK_THROWS_AS(parse_sentence_tsv("", tagset, "arg"), Error);
  CHECK_THROWS_AS(parse_sentence_tsv("x\tnada\t0\n", tagset, "arg"), Error);
  CHECK_THROWS_AS(parse_sentence_tsv("x\tnoun\t9\n", tagset, "arg"), Error);
}

TEST_CASE("augment appends one sentence and refreshes the vocabulary") {
  TagSet tagset = make_test_tagset();
  Corpus corpus = make_corpus(
      tagset, {sent(tagset, {tok("ماء", 5, 1)}),
               sent(tagset, {tok("سكر", 5, 1), tok("ناعم", 7, 2)})});

  Sentence extra;
  extra.tokens = {tok("ملح", 5, 1)};
  Corpus grown = augment(corpus, extra, tagset);
  CHECK(grown.sentences.size() == 3);
  CHECK(corpus.sentences.size() == 2);  // input untouched
  CHECK(grown.vocabulary.at("ملح") == 1);
  CHECK(grown.vocabulary.at(".") == 6);

  TagSet other = tagset;
  other.names[0] = "different";
  CHECK_THROWS_AS(augment(corpus, extra, other), Error);
}

TEST_CASE("split_holdout is deterministic and partitions the corpus") {
  TagSet tagset = load_tagset(tagset_path());
  Corpus corpus = load_corpus(demo_corpus_path(), tagset);   // 14 sentences

  auto [train, test] = split_holdout(corpus, 0.2, 42);
  CHECK(test.sentences.size() == 3);  // llround(0.2 * 14)
  CHECK(train.sentences.size() == 11);

  auto [train2, test2] = split_holdout(corpus, 0.2, 42);
  REQUIRE(train2.sentences.size() == train.sentences.size());
  for (std::size_t i = 0; i < train.sentences.size(); ++i) {
    CHECK(train.sentences[i].tokens[1].surface ==
          train2.sentences[i].tokens[1].surface);
  }

  // Each part keeps the original corpus order: surfaces of first interior
  // tokens must appear as a subsequence of the full corpus's.
  auto first_interior = [](const Corpus& c) {
    std::vector<std::string> out;
    for (const Sentence& s : c.sentences) out.push_back(s.tokens[1].surface);
    return out;
  };
  std::vector<std::string> all = first_interior(corpus);
  for (const auto& part : {first_interior(train), first_interior(test)}) {
    std::size_t cursor = 0;
    for (const std::string& surface : part) {
      while (cursor < all.size() && all[cursor] != surface) ++cursor;
      REQUIRE(cursor < all.size());
      ++cursor;
    }
  }

  // Sizes partition the corpus, and vocabularies reflect each part.
  CHECK(train.sentences.size() + test.sentences.size() ==
        corpus.sentences.size());
  std::size_t train_tokens = 0, test_tokens = 0;
  for (const auto& [surface, count] : train.vocabulary) train_tokens += count;
  for (const auto& [surface, count] : test.vocabulary) test_tokens += count;
  std::size_t all_tokens = 0;
  for (const Sentence& s : corpus.sentences) all_tokens += s.tokens.size();
  CHECK(train_tokens + test_tokens == all_tokens);

  // A different seed gives a different membership (14 choose 3 is large; a
  // collision would be a red flag for seed plumbing).
  auto [train3, test3] = split_holdout(corpus, 0.2, 43);
  CHECK(first_interior(test3) != first_interior(test));

  CHECK_THROWS_AS(split_holdout(corpus, 0.0, 1), Error);
  CHECK_THROWS_AS(split_holdout(corpus, 1.0, 1), Error);
  CHECK_THROWS_AS(split_holdout(corpus, 0.01, 1), Error);  // empty test part
}

TEST_CASE("is_boundary_position marks exactly the padded edges") {
  TagSet tagset = make_test_tagset();
  Sentence s = sent(tagset, {tok("ماء", 5, 1), tok("بارد", 7, 2)});
  CHECK(is_boundary_position(s, 0));
  CHECK_FALSE(is_boundary_position(s, 1));
  CHECK_FALSE(is_boundary_position(s, 2));
  CHECK(is_boundary_position(s, 3));
}
