#ifndef LV_MODEL_HPP_
#define LV_MODEL_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lv/corpus.hpp"

namespace lv {

struct SmoothingConfig {
  // Additive smoothing: entry = (count + alpha) / (total + alpha * K) where
  // K is the context's target cardinality (4 for state targets, 14 for tag
  // targets, observed support size for open targets).
  double alpha = 0.01;
  // Substituted for log(0) / absent entries so scores never reach -inf.
  double log_floor = -50.0;
};

// Sparse conditional probability table. Context and target are string keys:
// integer codes joined by ',' for contexts (e.g. "7,0" = tag 7, state 0),
// and either a code, a surface, or a prefix for targets. Only observed
// contexts are materialized; default behavior for missing rows lives in the
// ModelParams accessors, which know alpha and the target cardinality.
class CondTable {
 public:
  void add_count(const std::string& context, const std::string& target,
                 std::size_t count = 1);

  // Converts counts to probabilities. `closed_targets` non-empty means the
  // target space is closed (states/tags): with alpha > 0 every target is
  // materialized for each observed context; with alpha == 0 only targets with
  // nonzero counts are kept. Empty `closed_targets` means an open target
  // space (surfaces/prefixes): the context's observed support plays the role
  // of the target universe.
  void finalize(double alpha, const std::vector<std::string>& closed_targets);

  // Probability if the entry is materialized.
  std::optional<double> prob(const std::string& context,
                             const std::string& target) const;
  bool has_context(const std::string& context) const;

  // Deterministic (sorted) iteration for serialization and normalization
  // checks.
  void for_each(const std::function<void(const std::string& context,
                                         const std::string& target,
                                         double prob)>& fn) const;

  // Direct row access (normalization tests sum these).
  const std::map<std::string, std::map<std::string, double>>& rows() const {
    return rows_;
  }

  void set(const std::string& context, const std::string& target, double prob);
  bool operator==(const CondTable& other) const { return rows_ == other.rows_; }

 private:
  std::map<std::string, std::map<std::string, double>> rows_;
  std::map<std::string, std::map<std::string, std::size_t>> counts_;
};

// Which lexical (and matching prefix) model a probability is drawn from.
enum class LexModel {
  mono_first,   // P(v | state)
  mono_second,  // P(v | prev state, state)
  pos_cond,     // P(v | tag, state)
};

struct TrainOptions {
  SmoothingConfig smoothing;
  int prefix_len = 2;      // codepoints used by the unknown-word tables
  double lambda_max = 4.0; // lexical weight of the double-agent decoders
};

struct ModelParams {
  TagSet tagset;
  SmoothingConfig smoothing;
  int prefix_len = 2;
  double lambda_max = 4.0;

  std::array<double, kNumStates> pi{};  // initial ingredient-state distribution

  CondTable trans_first;   // ctx "j"   -> state k : P(k | prev j)
  CondTable trans_second;  // ctx "i,j" -> state k : P(k | prev2 i, prev j)
  CondTable trans_pos;     // ctx "t,j" -> state k : P(k | prev tag t, prev j)

  CondTable lex_mono1;     // ctx "k"   -> surface
  CondTable lex_mono2;     // ctx "j,k" -> surface
  CondTable lex_pos;       // ctx "t,k" -> surface
  CondTable unk_mono1;     // same contexts -> prefix
  CondTable unk_mono2;
  CondTable unk_pos;

  // First-order HMM over (tag, surface) for the optional decoded first layer.
  std::array<double, kNumTags> pos_pi{};
  CondTable pos_trans;     // ctx "t" -> tag u
  CondTable pos_emit;      // ctx "t" -> surface
  CondTable pos_unk;       // ctx "t" -> prefix

  std::set<std::string> vocabulary;  // training surfaces (known-word test)

  bool known(const std::string& surface) const {
    return vocabulary.count(surface) > 0;
  }

  double log_pi(int state) const;
  double log_trans_first(int prev, int next) const;
  double log_trans_second(int prev2, int prev, int next) const;
  double log_trans_pos(int tag, int prev, int next) const;

  // Lexical log-probability with the known/unknown switch: known surfaces
  // read the lexical table; unknown surfaces read the prefix table through
  // their first prefix_len codepoints. Raw value — callers apply lambda.
  // mono_first ignores `a`; mono_second passes a=prev state; pos_cond passes
  // a=tag code. `b` is always the current state.
  double lexical_log_prob(LexModel model, int a, int b,
                          const std::string& surface, bool is_known) const;

  double log_pos_pi(int tag) const;
  double log_pos_trans(int prev_tag, int tag) const;
  double log_pos_emit(int tag, const std::string& surface) const;

  bool operator==(const ModelParams& other) const;
};

// Count-based training over a padded corpus. Every table row of an observed
// context sums to 1 (within rounding); see CondTable::finalize for the
// alpha = 0 / alpha > 0 materialization rule.
ModelParams train(const Corpus& corpus, const TrainOptions& options = {});

// Versioned, self-describing text model format; numbers at 17 significant
// digits so serialize -> parse -> serialize is byte-identical.
void save_model(const ModelParams& params, const std::string& path);
std::string serialize_model(const ModelParams& params);
ModelParams load_model(const std::string& path);
ModelParams parse_model(const std::string& text, const std::string& where);

}  // namespace lv

#endif  // LV_MODEL_HPP_
