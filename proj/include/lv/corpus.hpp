#ifndef LV_CORPUS_HPP_
#define LV_CORPUS_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lv/util.hpp"

namespace lv {

// Ingredient states: 0 = not part of an ingredient, 1 = single-word
// ingredient or first word of a multi-word one, 2 = second word,
// 3 = continuation beyond the second word.
inline constexpr int kNumStates = 4;

// The part-of-speech tagset always has exactly 14 tags, one of which is the
// boundary tag "." used to pad every sentence.
inline constexpr int kNumTags = 14;

inline constexpr const char* kBoundarySurface = ".";

// Fixed-size tag alphabet. Tags are addressed by 1-based codes 1..14.
struct TagSet {
  std::vector<std::string> names;  // size kNumTags; names[i] has code i+1.
  int boundary = 0;                // code of the "." tag.

  // 1-based code for a tag name; 0 when the name is not in the set.
  int code(const std::string& name) const;
  const std::string& name(int code) const;  // throws Error on bad code

  // FNV-1a over the ordered names; identifies the tagset in model files.
  std::uint64_t hash() const;

  bool operator==(const TagSet& other) const { return names == other.names; }
};

// Reads a tagset file: one tag name per line, exactly 14 non-empty unique
// lines, one of which must be ".".
TagSet load_tagset(const std::string& path);

struct Token {
  std::string surface;
  int pos = 0;    // 1-based tag code
  int state = 0;  // ingredient state 0..3
};

struct Sentence {
  std::vector<Token> tokens;  // padded: boundary tokens at both ends
};

struct Corpus {
  TagSet tagset;
  std::vector<Sentence> sentences;
  // Multiset of surfaces over all (padded) sentences; defines which decode
  // surfaces count as known words.
  std::map<std::string, std::size_t> vocabulary;
};

// Adds boundary tokens at both ends unless already present; idempotent.
Sentence pad_sentence(Sentence sentence, const TagSet& tagset);

// Structural checks shared by load/augment: non-empty surfaces, tag codes in
// range, states in 0..3, boundary tokens exactly at both ends with state 0.
// `where` prefixes error messages (e.g. "corpus.tsv sentence 3").
void validate_sentence(const Sentence& sentence, const TagSet& tagset,
                       const std::string& where);

// Loads a TSV corpus: one token per line as surface<TAB>pos_name<TAB>state,
// blank lines separate sentences, '#' starts a comment line. Sentences are
// padded on load (never double-padded). Errors carry 1-based line numbers.
Corpus load_corpus(const std::string& path, const TagSet& tagset);

// Writes the corpus back in the same TSV format (padded tokens included).
void save_corpus(const Corpus& corpus, const std::string& path);

// Parses one sentence from TSV text (same row format, no blank-line
// separators). Used for one-off inputs such as the sensitivity tool's
// "similar sentence" file.
Sentence parse_sentence_tsv(const std::string& text, const TagSet& tagset,
                            const std::string& where);

// Recomputes corpus.vocabulary from its sentences.
void rebuild_vocabulary(Corpus& corpus);

// Returns a copy of the corpus with `sentence` appended (after padding and
// validation). `sentence_tagset` must equal the corpus tagset.
Corpus augment(const Corpus& corpus, const Sentence& sentence,
               const TagSet& sentence_tagset);

// Deterministic sentence-level holdout split. test size =
// llround(test_fraction * n); both parts keep the original sentence order and
// get rebuilt vocabularies. Throws Error when either part would be empty.
std::pair<Corpus, Corpus> split_holdout(const Corpus& corpus,
                                        double test_fraction,
                                        std::uint64_t seed);

// True for the positions excluded from evaluation and diagnostics summaries:
// the first and last (boundary) token of a padded sentence.
inline bool is_boundary_position(const Sentence& s, std::size_t index) {
  return index == 0 || index + 1 == s.tokens.size();
}

}  // namespace lv

#endif  // LV_CORPUS_HPP_
