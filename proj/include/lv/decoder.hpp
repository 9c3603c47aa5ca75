#ifndef LV_DECODER_HPP_
#define LV_DECODER_HPP_

#include <optional>
#include <string>
#include <vector>

#include "lv/model.hpp"

namespace lv {

// The four decoding strategies.
//
//   mono_first     first-order HMM over ingredient states only.
//   mono_second    second-order HMM over ingredient states only.
//   double_simple  two-layer decoding where the transition into position l is
//                  conditioned on the CURRENT token's first-layer tag. That
//                  row choice claims the previous position carries this
//                  token's tag — the structural defect the diagnostics
//                  surface as parasite probabilities.
//   double_transfer same, but the transition is conditioned on the previous
//                  position's first-layer tag, so the knowledge transferred
//                  from the first layer is attached to the position it
//                  belongs to.
//
// Both double variants score the lexical term with the current token's tag
// row and weight its log by lambda_max (positions >= 1; the initial position
// scores log pi + unweighted lexical).
enum class Variant { mono_first, mono_second, double_simple, double_transfer };

const char* variant_name(Variant v);                    // CLI spelling
std::optional<Variant> variant_from_name(const std::string& name);

enum class FirstLayerMode { gold, hmm };

// --------------------------------------------------------------------------
// Traced score terms.
// --------------------------------------------------------------------------

enum class TermKind { initial, transition, lexical };

// How a binding's value was chosen when the term was scored:
//   hypothesis       the audited cell's own coordinates — exempt from
//                    parasite checks (the cell is *supposed* to explore it);
//   argmax_selected  a value chosen by a Viterbi argmax;
//   structural       a value forced by the variant's indexing rule
//                    (first-layer tag rows).
enum class BindingOrigin { hypothesis, argmax_selected, structural };

// The random variables a probability term conditions on or predicts.
enum class Var { gamma_r, gamma_r1, gamma_r2, t_r, t_r1 };

const char* var_name(Var v);  // "Gr", "Gr-1", "Gr-2", "Tr", "Tr-1"

struct Binding {
  Var var;
  int value;              // state value 0..3 or tag code 1..14
  BindingOrigin origin;
  int position;           // 0-based token position the binding refers to
};

struct ScoredTerm {
  TermKind kind = TermKind::transition;
  double log_value = 0.0;      // contribution to the score (lambda included
                               // when lambda_applied is true)
  bool lambda_applied = false;
  std::vector<Binding> bindings;
};

// Diagnostic decomposition of one hypothesis at one position: the carried-in
// chart value plus the probability terms of the most-probable-cell
// calculation. score == base + sum of term log_values.
struct AuditCell {
  int position = 0;       // token position the hypothesis is about
  int hypothesis = 0;     // hypothesized ingredient state at `position`
  int cell_position = 0;  // position of the chart cell that realizes it
  int cell_row = 0;       // 0-based row in that cell's matrix
  int cell_col = 0;       // 0-based column
  double base = 0.0;
  double score = 0.0;
  std::vector<ScoredTerm> terms;
};

// One position's chart: rows x cols log scores plus backpointers.
struct StateMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> delta;
  std::vector<int> psi;

  double delta_at(int r, int c) const {
    return delta[static_cast<std::size_t>(r * cols + c)];
  }
  int psi_at(int r, int c) const {
    return psi[static_cast<std::size_t>(r * cols + c)];
  }
};

struct DecodeTrace {
  Variant variant = Variant::mono_first;
  std::vector<int> first_layer;        // tag codes per position
  std::vector<StateMatrix> lattice;    // one matrix per position
  std::vector<int> path;               // decoded states per position
  double total = 0.0;                  // joint log score of `path`
  std::vector<ScoredTerm> path_terms;  // initial + per-position terms;
                                       // their log_values sum to `total`
  // audits[p][h] = decomposition of hypothesis h at position p
  // (present when DecodeOptions.with_audits).
  std::vector<std::vector<AuditCell>> audits;
};

struct DecodeOptions {
  FirstLayerMode first_layer = FirstLayerMode::gold;
  bool with_audits = true;
};

// --------------------------------------------------------------------------
// Operations.
// --------------------------------------------------------------------------

// First-layer tags for a sentence: gold mode returns the annotated tags
// verbatim; hmm mode runs the model's first-order POS Viterbi (lowest tag
// code on ties).
std::vector<int> first_layer_tags(const Sentence& sentence,
                                  const ModelParams& params,
                                  FirstLayerMode mode);

// Viterbi decoding. Every argmax breaks ties toward the lowest index, which
// makes the decoded path the one minimizing (s_L, ..., s_1) among score-tied
// optima. L >= 2 (padded sentences).
DecodeTrace decode(const Sentence& sentence, const ModelParams& params,
                   Variant variant, const DecodeOptions& options = {});

// Joint log score of an arbitrary state path under a variant's exact
// per-term rule (the quantity decode() maximizes). `tags` must have the
// sentence's length for the double variants; mono variants ignore it.
double score_path(const Sentence& sentence, const std::vector<int>& tags,
                  const ModelParams& params, Variant variant,
                  const std::vector<int>& path);

struct OracleResult {
  std::vector<int> path;
  double score = 0.0;
};

// Exhaustive reference decoder: enumerates every state sequence over all
// positions (the exact space decode() searches), scores each with
// score_path, and breaks score ties exactly like decode() (reversed-tuple
// order). Guarded to sentences of at most `max_length` tokens.
OracleResult brute_force_oracle(const Sentence& sentence,
                                const std::vector<int>& tags,
                                const ModelParams& params, Variant variant,
                                int max_length = 8);

// Sum of the parts of one most-probable-cell calculation. `lambda_applied`
// says the lexical argument is already lambda-scaled; otherwise it is
// multiplied by `lambda_max` here.
double combine_cell(double prev_best, double transition, double lexical,
                    bool lambda_applied,
                    std::optional<double> extra_transition = std::nullopt,
                    double lambda_max = 1.0);

}  // namespace lv

#endif  // LV_DECODER_HPP_
