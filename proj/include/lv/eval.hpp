#ifndef LV_EVAL_HPP_
#define LV_EVAL_HPP_

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lv/decoder.hpp"

namespace lv {

// Gold state (row) vs predicted state (column) over evaluated positions.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumStates>, kNumStates> counts{};

  std::size_t total() const;
  bool operator==(const ConfusionMatrix& other) const {
    return counts == other.counts;
  }
};

// Evaluation ignores the boundary padding: only interior positions count.
// Tokens are "known" when their surface occurred in the training vocabulary.
// Every ratio with a zero denominator is reported as 0.
struct Metrics {
  double accuracy = 0.0;     // (correct known + correct unknown) / evaluated
  double f1_macro = 0.0;     // mean one-vs-rest F1 over classes present in gold
  double f1_weighted = 0.0;  // same F1s weighted by gold class frequency
  double acc_known = 0.0;
  double acc_unknown = 0.0;
  std::size_t n_known = 0;
  std::size_t n_unknown = 0;
  ConfusionMatrix confusion;
};

Metrics score_predictions(const std::vector<Sentence>& gold,
                          const std::vector<std::vector<int>>& predicted,
                          const std::set<std::string>& train_vocabulary);

// Decodes every sentence of `test` with one variant and scores the result.
Metrics evaluate(const ModelParams& params, const Corpus& test,
                 Variant variant,
                 FirstLayerMode first_layer = FirstLayerMode::gold);

struct EvalOptions {
  TrainOptions train;
  FirstLayerMode first_layer = FirstLayerMode::gold;
  double test_fraction = 0.2;
  int folds = 10;
  std::uint64_t seed = 0;
};

struct FoldScore {
  int fold = 0;
  Variant variant = Variant::mono_first;
  Metrics metrics;
};

struct XvalResult {
  std::vector<FoldScore> rows;  // fold-major, variant-minor
};

// Repeated random holdouts: fold f draws its own split with seed
// mix_seed(seed, f), trains on the large part and scores the small part.
// Folds are independent (sentences may recur across test sets).
XvalResult cross_validate(const Corpus& corpus,
                          const std::vector<Variant>& variants,
                          const EvalOptions& options);

// Column means over a variant's folds (counts averaged as doubles), the
// Avg row of the cross-validation table.
struct MetricsSummary {
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double acc_known = 0.0;
  double acc_unknown = 0.0;
  double n_known = 0.0;
  double n_unknown = 0.0;
};

MetricsSummary average_metrics(const XvalResult& result, Variant variant);

struct CompareRow {
  Variant variant = Variant::mono_first;
  Metrics metrics;
};

// All requested variants trained and scored on ONE shared holdout split
// (drawn directly from options.seed), so the numbers are comparable.
std::vector<CompareRow> compare_methods(const Corpus& corpus,
                                        const std::vector<Variant>& variants,
                                        const EvalOptions& options);

// CSV: fold,variant,accuracy,f1,acc_known,acc_unknown,n_known,n_unknown —
// one row per fold x variant plus one Avg row per variant.
std::string xval_csv(const XvalResult& result);

// CSV: variant,known,unknown,overall,f1 — one row per variant.
std::string compare_csv(const std::vector<CompareRow>& rows);

// Single-evaluation text: a metrics CSV header + row, then the weighted F1
// and the 4x4 confusion matrix as '#' comment lines.
std::string eval_report(const Metrics& metrics);

}  // namespace lv

#endif  // LV_EVAL_HPP_
