#include "lv/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lv {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t end = line.find('\t', start);
    if (end == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
}

// Strips one trailing '\r' so corpora written on Windows still parse.
void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_boundary_token(const Token& t, const TagSet& tagset) {
  return t.pos == tagset.boundary;
}

Token make_boundary(const TagSet& tagset) {
  return Token{kBoundarySurface, tagset.boundary, 0};
}

int parse_state_field(const std::string& field, const std::string& where) {
  if (field.size() != 1 || field[0] < '0' || field[0] > '3') {
    throw Error(where + ": ingredient state must be 0..3, got '" + field + "'");
  }
  return field[0] - '0';
}

}  // namespace

int TagSet::code(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i) + 1;
  }
  return 0;
}

const std::string& TagSet::name(int code) const {
  if (code < 1 || code > static_cast<int>(names.size())) {
    throw Error("tag code out of range: " + std::to_string(code));
  }
  return names[static_cast<std::size_t>(code - 1)];
}

std::uint64_t TagSet::hash() const {
  // FNV-1a over names with a separator byte, so permutations hash apart.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const std::string& name : names) {
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ULL;
    }
    h ^= 0xFFU;
    h *= 0x100000001B3ULL;
  }
  return h;
}

TagSet load_tagset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open tagset file: " + path);
  TagSet tagset;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.find('\t') != std::string::npos) {
      throw Error(path + ":" + std::to_string(line_no) +
                  ": tag name contains a tab");
    }
    tagset.names.push_back(line);
  }
  if (tagset.names.size() != static_cast<std::size_t>(kNumTags)) {
    throw Error(path + ": expected exactly " + std::to_string(kNumTags) +
                " tag names, found " + std::to_string(tagset.names.size()));
  }
  std::set<std::string> unique(tagset.names.begin(), tagset.names.end());
  if (unique.size() != tagset.names.size()) {
    throw Error(path + ": duplicate tag names");
  }
  tagset.boundary = tagset.code(kBoundarySurface);
  if (tagset.boundary == 0) {
    throw Error(path + ": tagset must contain the boundary tag \".\"");
  }
  return tagset;
}

Sentence pad_sentence(Sentence sentence, const TagSet& tagset) {
  if (sentence.tokens.empty()) {
    throw Error("cannot pad an empty sentence");
  }
  if (!is_boundary_token(sentence.tokens.front(), tagset)) {
    sentence.tokens.insert(sentence.tokens.begin(), make_boundary(tagset));
  }
  if (!is_boundary_token(sentence.tokens.back(), tagset)) {
    sentence.tokens.push_back(make_boundary(tagset));
  }
  return sentence;
}

void validate_sentence(const Sentence& sentence, const TagSet& tagset,
                       const std::string& where) {
  const auto& tokens = sentence.tokens;
  if (tokens.size() < 2) {
    throw Error(where + ": padded sentence must have at least 2 tokens");
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    std::string at = where + " token " + std::to_string(i + 1);
    if (t.surface.empty()) throw Error(at + ": empty surface");
    if (t.surface.find('\t') != std::string::npos ||
        t.surface.find('\n') != std::string::npos) {
      throw Error(at + ": surface contains tab or newline");
    }
    if (t.pos < 1 || t.pos > kNumTags) {
      throw Error(at + ": tag code out of range: " + std::to_string(t.pos));
    }
    if (t.state < 0 || t.state >= kNumStates) {
      throw Error(at + ": state out of range: " + std::to_string(t.state));
    }
    bool at_edge = (i == 0 || i + 1 == tokens.size());
    if (is_boundary_token(t, tagset)) {
      if (!at_edge) {
        throw Error(at + ": boundary tag inside sentence");
      }
      if (t.state != 0) {
        throw Error(at + ": boundary token must have state 0");
      }
    } else if (at_edge) {
      throw Error(at + ": sentence edge is not a boundary token");
    }
  }
}

Corpus load_corpus(const std::string& path, const TagSet& tagset) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);

  Corpus corpus;
  corpus.tagset = tagset;

  Sentence current;
  std::string line;
  std::size_t line_no = 0;
  std::size_t sentence_start_line = 0;

  auto flush_sentence = [&]() {
    if (current.tokens.empty()) return;
    Sentence padded = pad_sentence(std::move(current), tagset);
    validate_sentence(padded, tagset,
                      path + " sentence starting at line " +
                          std::to_string(sentence_start_line));
    corpus.sentences.push_back(std::move(padded));
    current = Sentence{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      flush_sentence();
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> fields = split_tabs(line);
    const std::string at = path + ":" + std::to_string(line_no);
    if (fields.size() != 3) {
      throw Error(at + ": expected 3 tab-separated fields, got " +
                  std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw Error(at + ": empty surface");
    int code = tagset.code(fields[1]);
    if (code == 0) throw Error(at + ": unknown tag name '" + fields[1] + "'");
    int state = parse_state_field(fields[2], at);
    if (current.tokens.empty()) sentence_start_line = line_no;
    current.tokens.push_back(Token{fields[0], code, state});
  }
  flush_sentence();

  if (corpus.sentences.empty()) {
    throw Error(path + ": corpus contains no sentences");
  }
  rebuild_vocabulary(corpus);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  for (std::size_t s = 0; s < corpus.sentences.size(); ++s) {
    if (s > 0) out << "\n";
    for (const Token& t : corpus.sentences[s].tokens) {
      out << t.surface << '\t' << corpus.tagset.name(t.pos) << '\t' << t.state
          << "\n";
    }
  }
  if (!out) throw Error("write failed: " + path);
}

Sentence parse_sentence_tsv(const std::string& text, const TagSet& tagset,
                            const std::string& where) {
  Sentence sentence;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_tabs(line);
    const std::string at = where + ":" + std::to_string(line_no);
    if (fields.size() != 3) {
      throw Error(at + ": expected 3 tab-separated fields, got " +
                  std::to_string(fields.size()));
    }
    int code = tagset.code(fields[1]);
    if (code == 0) throw Error(at + ": unknown tag name '" + fields[1] + "'");
    int state = parse_state_field(fields[2], at);
    sentence.tokens.push_back(Token{fields[0], code, state});
  }
  if (sentence.tokens.empty()) {
    throw Error(where + ": no tokens");
  }
  Sentence padded = pad_sentence(std::move(sentence), tagset);
  validate_sentence(padded, tagset, where);
  return padded;
}

void rebuild_vocabulary(Corpus& corpus) {
  corpus.vocabulary.clear();
  for (const Sentence& s : corpus.sentences) {
    for (const Token& t : s.tokens) {
      ++corpus.vocabulary[t.surface];
    }
  }
}

Corpus augment(const Corpus& corpus, const Sentence& sentence,
               const TagSet& sentence_tagset) {
  if (!(sentence_tagset == corpus.tagset)) {
    throw Error("augment: sentence tagset does not match corpus tagset");
  }
  Sentence padded = pad_sentence(sentence, corpus.tagset);
  validate_sentence(padded, corpus.tagset, "augment sentence");
  Corpus out = corpus;
  out.sentences.push_back(std::move(padded));
  rebuild_vocabulary(out);
  return out;
}

std::pair<Corpus, Corpus> split_holdout(const Corpus& corpus,
                                        double test_fraction,
                                        std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error("split_holdout: test_fraction must be in (0, 1)");
  }
  const std::size_t n = corpus.sentences.size();
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    throw Error("split_holdout: degenerate split (" + std::to_string(n_test) +
                " of " + std::to_string(n) + " sentences in test)");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::size_t> test_idx(order.begin(),
                                    order.begin() + static_cast<long>(n_test));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(n_test),
                                     order.end());
  // Keep the original corpus order inside each part; the randomness decides
  // membership only.
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());

  Corpus train, test;
  train.tagset = corpus.tagset;
  test.tagset = corpus.tagset;
  for (std::size_t i : train_idx) train.sentences.push_back(corpus.sentences[i]);
  for (std::size_t i : test_idx) test.sentences.push_back(corpus.sentences[i]);
  rebuild_vocabulary(train);
  rebuild_vocabulary(test);
  return {std::move(train), std::move(test)};
}

}  // namespace lv
