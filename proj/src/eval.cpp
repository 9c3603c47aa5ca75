#include "lv/eval.hpp"

#include <algorithm>
#include <string>

#include "lv/util.hpp"

namespace lv {

namespace {

double ratio(std::size_t numerator, std::size_t denominator) {
  if (denominator == 0) return 0.0;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

// One-vs-rest F1 for one state from the confusion matrix.
double f1_for_class(const ConfusionMatrix& confusion, int c) {
  std::size_t tp = confusion.counts[static_cast<std::size_t>(c)]
                                   [static_cast<std::size_t>(c)];
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (int other = 0; other < kNumStates; ++other) {
    if (other == c) continue;
    fp += confusion.counts[static_cast<std::size_t>(other)]
                          [static_cast<std::size_t>(c)];
    fn += confusion.counts[static_cast<std::size_t>(c)]
                          [static_cast<std::size_t>(other)];
  }
  const double precision = ratio(tp, tp + fp);
  const double recall = ratio(tp, tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<Variant> all_variants() {
  return {Variant::mono_first, Variant::mono_second, Variant::double_simple,
          Variant::double_transfer};
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (std::size_t c : row) n += c;
  }
  return n;
}

Metrics score_predictions(const std::vector<Sentence>& gold,
                          const std::vector<std::vector<int>>& predicted,
                          const std::set<std::string>& train_vocabulary) {
  if (gold.size() != predicted.size()) {
    throw Error("score_predictions: gold/predicted sentence counts differ");
  }
  Metrics m;
  std::size_t correct_known = 0;
  std::size_t correct_unknown = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const Sentence& sentence = gold[s];
    if (sentence.tokens.size() != predicted[s].size()) {
      throw Error("score_predictions: predicted path length mismatch at sentence " +
                  std::to_string(s));
    }
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      if (is_boundary_position(sentence, i)) continue;
      const Token& token = sentence.tokens[i];
      const int pred = predicted[s][i];
      if (pred < 0 || pred >= kNumStates) {
        throw Error("score_predictions: predicted state out of range");
      }
      const bool known = train_vocabulary.count(token.surface) > 0;
      const bool correct = (pred == token.state);
      if (known) {
        ++m.n_known;
        if (correct) ++correct_known;
      } else {
        ++m.n_unknown;
        if (correct) ++correct_unknown;
      }
      ++m.confusion.counts[static_cast<std::size_t>(token.state)]
                          [static_cast<std::size_t>(pred)];
    }
  }
  m.accuracy = ratio(correct_known + correct_unknown, m.n_known + m.n_unknown);
  m.acc_known = ratio(correct_known, m.n_known);
  m.acc_unknown = ratio(correct_unknown, m.n_unknown);

  // Macro / weighted F1 over the classes that actually occur in gold.
  double f1_sum = 0.0;
  double weighted_sum = 0.0;
  std::size_t present = 0;
  std::size_t gold_total = 0;
  std::array<std::size_t, kNumStates> gold_counts{};
  for (int c = 0; c < kNumStates; ++c) {
    for (int p = 0; p < kNumStates; ++p) {
      gold_counts[static_cast<std::size_t>(c)] +=
          m.confusion.counts[static_cast<std::size_t>(c)]
                            [static_cast<std::size_t>(p)];
    }
    gold_total += gold_counts[static_cast<std::size_t>(c)];
  }
  for (int c = 0; c < kNumStates; ++c) {
    if (gold_counts[static_cast<std::size_t>(c)] == 0) continue;
    const double f1 = f1_for_class(m.confusion, c);
    f1_sum += f1;
    weighted_sum +=
        f1 * static_cast<double>(gold_counts[static_cast<std::size_t>(c)]);
    ++present;
  }
  m.f1_macro = present == 0 ? 0.0 : f1_sum / static_cast<double>(present);
  m.f1_weighted =
      gold_total == 0 ? 0.0 : weighted_sum / static_cast<double>(gold_total);
  return m;
}

Metrics evaluate(const ModelParams& params, const Corpus& test,
                 Variant variant, FirstLayerMode first_layer) {
  DecodeOptions options;
  options.first_layer = first_layer;
  options.with_audits = false;
  std::vector<std::vector<int>> predicted;
  predicted.reserve(test.sentences.size());
  for (const Sentence& sentence : test.sentences) {
    predicted.push_back(decode(sentence, params, variant, options).path);
  }
  return score_predictions(test.sentences, predicted, params.vocabulary);
}

XvalResult cross_validate(const Corpus& corpus,
                          const std::vector<Variant>& variants,
                          const EvalOptions& options) {
  if (options.folds < 1) throw Error("cross_validate: folds must be >= 1");
  const std::vector<Variant> use =
      variants.empty() ? all_variants() : variants;
  XvalResult result;
  for (int fold = 0; fold < options.folds; ++fold) {
    const std::uint64_t fold_seed =
        mix_seed(options.seed, static_cast<std::uint64_t>(fold));
    auto [train_part, test_part] =
        split_holdout(corpus, options.test_fraction, fold_seed);
    const ModelParams params = train(train_part, options.train);
    log_info("xval: fold " + std::to_string(fold) + " trained on " +
             std::to_string(train_part.sentences.size()) + " sentences");
    for (Variant variant : use) {
      FoldScore row;
      row.fold = fold;
      row.variant = variant;
      row.metrics = evaluate(params, test_part, variant, options.first_layer);
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

MetricsSummary average_metrics(const XvalResult& result, Variant variant) {
  MetricsSummary summary;
  std::size_t n = 0;
  for (const FoldScore& row : result.rows) {
    if (row.variant != variant) continue;
    summary.accuracy += row.metrics.accuracy;
    summary.f1_macro += row.metrics.f1_macro;
    summary.acc_known += row.metrics.acc_known;
    summary.acc_unknown += row.metrics.acc_unknown;
    summary.n_known += static_cast<double>(row.metrics.n_known);
    summary.n_unknown += static_cast<double>(row.metrics.n_unknown);
    ++n;
  }
  if (n == 0) throw Error("average_metrics: no folds for the variant");
  const double d = static_cast<double>(n);
  summary.accuracy /= d;
  summary.f1_macro /= d;
  summary.acc_known /= d;
  summary.acc_unknown /= d;
  summary.n_known /= d;
  summary.n_unknown /= d;
  return summary;
}

std::vector<CompareRow> compare_methods(const Corpus& corpus,
                                        const std::vector<Variant>& variants,
                                        const EvalOptions& options) {
  const std::vector<Variant> use =
      variants.empty() ? all_variants() : variants;
  auto [train_part, test_part] =
      split_holdout(corpus, options.test_fraction, options.seed);
  const ModelParams params = train(train_part, options.train);
  std::vector<CompareRow> rows;
  for (Variant variant : use) {
    CompareRow row;
    row.variant = variant;
    row.metrics = evaluate(params, test_part, variant, options.first_layer);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string xval_csv(const XvalResult& result) {
  std::string out = "fold,variant,accuracy,f1,acc_known,acc_unknown,n_known,n_unknown\n";
  std::vector<Variant> seen;
  for (const FoldScore& row : result.rows) {
    out += std::to_string(row.fold);
    out += ',';
    out += variant_name(row.variant);
    out += ',';
    out += format_g17(row.metrics.accuracy);
    out += ',';
    out += format_g17(row.metrics.f1_macro);
    out += ',';
    out += format_g17(row.metrics.acc_known);
    out += ',';
    out += format_g17(row.metrics.acc_unknown);
    out += ',';
    out += std::to_string(row.metrics.n_known);
    out += ',';
    out += std::to_string(row.metrics.n_unknown);
    out += '\n';
    if (std::find(seen.begin(), seen.end(), row.variant) == seen.end()) {
      seen.push_back(row.variant);
    }
  }
  for (Variant variant : seen) {
    const MetricsSummary avg = average_metrics(result, variant);
    out += "Avg,";
    out += variant_name(variant);
    out += ',';
    out += format_g17(avg.accuracy);
    out += ',';
    out += format_g17(avg.f1_macro);
    out += ',';
    out += format_g17(avg.acc_known);
    out += ',';
    out += format_g17(avg.acc_unknown);
    out += ',';
    out += format_g17(avg.n_known);
    out += ',';
    out += format_g17(avg.n_unknown);
    out += '\n';
  }
  return out;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::string out = "variant,known,unknown,overall,f1\n";
  for (const CompareRow& row : rows) {
    out += variant_name(row.variant);
    out += ',';
    out += format_g17(row.metrics.acc_known);
    out += ',';
    out += format_g17(row.metrics.acc_unknown);
    out += ',';
    out += format_g17(row.metrics.accuracy);
    out += ',';
    out += format_g17(row.metrics.f1_macro);
    out += '\n';
  }
  return out;
}

std::string eval_report(const Metrics& metrics) {
  std::string out = "accuracy,f1,acc_known,acc_unknown,n_known,n_unknown\n";
  out += format_g17(metrics.accuracy);
  out += ',';
  out += format_g17(metrics.f1_macro);
  out += ',';
  out += format_g17(metrics.acc_known);
  out += ',';
  out += format_g17(metrics.acc_unknown);
  out += ',';
  out += std::to_string(metrics.n_known);
  out += ',';
  out += std::to_string(metrics.n_unknown);
  out += '\n';
  out += "# f1_weighted," + format_g17(metrics.f1_weighted) + "\n";
  out += "# confusion,gold\\pred,0,1,2,3\n";
  for (int c = 0; c < kNumStates; ++c) {
    out += "# confusion," + std::to_string(c);
    for (int p = 0; p < kNumStates; ++p) {
      out += ',';
      out += std::to_string(metrics.confusion.counts[static_cast<std::size_t>(c)]
                                                    [static_cast<std::size_t>(p)]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace lv
