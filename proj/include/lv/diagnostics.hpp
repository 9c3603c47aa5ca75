#ifndef LV_DIAGNOSTICS_HPP_
#define LV_DIAGNOSTICS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lv/decoder.hpp"

namespace lv {

// A probability term is a parasite when any binding it conditions on claims a
// value that contradicts the gold annotation at that binding's position.
// Hypothesis bindings are exempt: exploring a state is the cell's job, not a
// defect. Selected-state and structural-tag bindings are judged.
struct TermJudgment {
  bool parasite = false;
  std::vector<std::size_t> offending_bindings;  // indices into term.bindings

  bool operator==(const TermJudgment& other) const {
    return parasite == other.parasite &&
           offending_bindings == other.offending_bindings;
  }
};

TermJudgment classify_term(const ScoredTerm& term,
                           const std::vector<int>& gold_states,
                           const std::vector<int>& gold_tags);

// One audit cell judged against gold, in score-rank order.
struct RankedCell {
  int hypothesis = 0;
  double score = 0.0;
  int parasite_terms = 0;                // terms with at least one bad binding
  std::vector<TermJudgment> judgments;   // parallel to the cell's terms
};

struct ParasiteSummary {
  int position = 0;
  int top_k = 0;
  int total_parasites = 0;     // parasite terms summed over the ranked cells,
                               // counted once per occurrence
  std::vector<RankedCell> cells;
};

// Ranks the position's four hypothesis cells by score (descending; ties keep
// the lowest hypothesis state first) and judges every term of the best
// `top_k` of them against the sentence's gold states and tags.
ParasiteSummary count_parasites(const DecodeTrace& trace, const Sentence& gold,
                                int position, int top_k);

// Human-readable rendering of the ranked audit cells at one position. Every
// binding prints as Var=value@position[origin]; bindings that contradict gold
// are wrapped in ~tildes~. Columns are aligned by codepoint count so Arabic
// surfaces line up.
std::string build_situations_table(const DecodeTrace& trace,
                                   const Sentence& gold, int position,
                                   int top_k = kNumStates);

// ------------------------------------------------------------------------
// Sensitivity protocol: retrain under controlled corpus edits and watch how
// the audit scores and parasite counts at one target token move.
// ------------------------------------------------------------------------

enum class Condition {
  base,          // corpus unchanged
  add_similar,   // one provided look-alike sentence appended
  duplicate,     // the target sentence appended a second time
  unknown_word,  // every token with the target's surface deleted from
                 // training, so the target becomes out-of-vocabulary
};

const char* condition_name(Condition c);
std::optional<Condition> condition_from_name(const std::string& name);

// Builds the edited training corpus for a condition. `sentence_index` and
// `position` locate the target token in `corpus` (`position` must be an
// interior position of the padded sentence). `similar` is required by
// add_similar. For unknown_word, sentences whose interior becomes empty are
// dropped.
Corpus apply_condition(const Corpus& corpus, Condition condition,
                       int sentence_index, int position,
                       const std::optional<Sentence>& similar);

struct HypothesisScore {
  int hypothesis = 0;
  double score = 0.0;
  int parasite_terms = 0;

  bool operator==(const HypothesisScore& other) const {
    return hypothesis == other.hypothesis && score == other.score &&
           parasite_terms == other.parasite_terms;
  }
};

struct SensitivityRow {
  Condition condition = Condition::base;
  Variant variant = Variant::mono_first;
  std::vector<HypothesisScore> top;  // rank order, size = top_k
  int total_parasites = 0;

  bool operator==(const SensitivityRow& other) const {
    return condition == other.condition && variant == other.variant &&
           top == other.top && total_parasites == other.total_parasites;
  }
};

struct SensitivityReport {
  int sentence_index = -1;
  int position = -1;
  std::string surface;                // target token
  std::vector<SensitivityRow> rows;   // condition-major, variant-minor
};

struct SensitivityOptions {
  std::vector<Condition> conditions;  // empty = all four, in enum order
  std::vector<Variant> variants;      // empty = all four, in enum order
  int top_k = 3;
  FirstLayerMode first_layer = FirstLayerMode::gold;
  TrainOptions train;
  std::optional<Sentence> similar;    // needed when add_similar runs
};

// Retrains per condition and decodes/audits the target sentence with each
// variant. The decoded sentence is always the original (gold-annotated) one;
// only the training corpus changes.
SensitivityReport sensitivity_report(const Corpus& corpus, int sentence_index,
                                     int position,
                                     const SensitivityOptions& options);

// CSV with one line per (condition, variant, hypothesis): columns
// condition,variant,hypothesis,score,parasite_count with scores at 17
// significant digits; a comment line documents the counting convention.
std::string sensitivity_csv(const SensitivityReport& report);

// Parses sensitivity_csv output back into rows (the header fields that do
// not appear in the CSV stay at their defaults). Round-trips exactly.
SensitivityReport parse_sensitivity_csv(const std::string& text);

}  // namespace lv

#endif  // LV_DIAGNOSTICS_HPP_
