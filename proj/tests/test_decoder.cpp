#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "lv/corpus.hpp"
#include "lv/decoder.hpp"
#include "lv/model.hpp"
#include "support.hpp"

using namespace lv;
using namespace lvtest;

namespace {

const std::array<Variant, 4> kAllVariants = {
    Variant::mono_first, Variant::mono_second, Variant::double_simple,
    Variant::double_transfer};

// Exhaustive first-order tagger over all 14^L tag sequences, with the same
// reversed-tuple tie preference the Viterbi backtrack realizes. Only usable
// for very short sentences.
std::vector<int> brute_force_tagger(const Sentence& sentence,
                                    const ModelParams& params) {
  const int length = static_cast<int>(sentence.tokens.size());
  REQUIRE(length <= 4);
  auto score_tags = [&](const std::vector<int>& tags) {
    double score = params.log_pos_pi(tags[0]) +
                   params.log_pos_emit(tags[0], sentence.tokens[0].surface);
    for (int pos = 1; pos < length; ++pos) {
      score += params.log_pos_trans(tags[static_cast<std::size_t>(pos - 1)],
                                    tags[static_cast<std::size_t>(pos)]);
      score += params.log_pos_emit(
          tags[static_cast<std::size_t>(pos)],
          sentence.tokens[static_cast<std::size_t>(pos)].surface);
    }
    return score;
  };
  auto prefer = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (int pos = length - 1; pos >= 0; --pos) {
      if (a[static_cast<std::size_t>(pos)] != b[static_cast<std::size_t>(pos)])
        return a[static_cast<std::size_t>(pos)] < b[static_cast<std::size_t>(pos)];
    }
    return false;
  };

  std::vector<int> best;
  double best_score = 0.0;
  std::vector<int> tags(static_cast<std::size_t>(length), 1);
  std::uint64_t combos = 1;
  for (int i = 0; i < length; ++i) combos *= kNumTags;
  for (std::uint64_t code = 0; code < combos; ++code) {
    std::uint64_t c = code;
    for (int i = 0; i < length; ++i) {
      tags[static_cast<std::size_t>(i)] = static_cast<int>(c % kNumTags) + 1;
      c /= kNumTags;
    }
    double score = score_tags(tags);
    if (best.empty() || score > best_score ||
        (score == best_score && prefer(tags, best))) {
      best_score = score;
      best = tags;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("variant names round-trip") {
  for (Variant v : kAllVariants) {
    auto back = variant_from_name(variant_name(v));
    REQUIRE(back.has_value());
    CHECK(*back == v);
  }
  CHECK(variant_name(Variant::double_simple) == std::string("double"));
  CHECK(variant_name(Variant::double_transfer) == std::string("transfer"));
  CHECK_FALSE(variant_from_name("viterbi").has_value());
  CHECK(var_name(Var::gamma_r1) == std::string("Gr-1"));
  CHECK(var_name(Var::t_r) == std::string("Tr"));
}

TEST_CASE("combine_cell sums its parts") {
  CHECK(combine_cell(-1.0, -2.0, -3.0, true) == -6.0);
  CHECK(combine_cell(-1.0, -2.0, -3.0, true, -4.0) == -10.0);
  // Unapplied lexical terms get scaled by lambda_max.
  CHECK(combine_cell(-1.0, -2.0, -3.0, false, std::nullopt, 4.0) == -15.0);
  CHECK(combine_cell(-1.0, -2.0, -3.0, false, -0.5, 2.0) == -9.5);
}

TEST_CASE("decode matches the exhaustive reference on random instances") {
  // Tie-sensitive: paths must match exactly, including when several paths
  // share the optimum.
  int checked = 0;
  for (int i = 0; i < 40; ++i) {
    Rng rng(mix_seed(7777, static_cast<std::uint64_t>(i)));
    RandomInstance inst = make_random_instance(rng);
    ModelParams params = train(inst.corpus);
    for (Variant variant : kAllVariants) {
      DecodeOptions options;
      options.with_audits = false;
      // Alternate the first-layer source for the double variants.
      options.first_layer =
          (i % 2 == 0) ? FirstLayerMode::gold : FirstLayerMode::hmm;
      DecodeTrace trace = decode(inst.query, params, variant, options);
      OracleResult oracle =
          brute_force_oracle(inst.query, trace.first_layer, params, variant);
      CAPTURE(i);
      CAPTURE(variant_name(variant));
      REQUIRE(trace.path == oracle.path);
      REQUIRE(trace.total == oracle.score);
      ++checked;
    }
  }
  CHECK(checked == 160);
}

TEST_CASE("decode handles a boundary-only sentence") {
  TagSet tagset = make_test_tagset();
  Corpus corpus = make_corpus(tagset, {sent(tagset, {tok("ماء", 5, 1)})});
  ModelParams params = train(corpus);
  Sentence two;
  two.tokens = {tok(".", tagset.boundary, 0), tok(".", tagset.boundary, 0)};
  for (Variant variant : kAllVariants) {
    DecodeTrace trace = decode(two, params, variant);
    OracleResult oracle =
        brute_force_oracle(two, trace.first_layer, params, variant);
    CHECK(trace.path == oracle.path);
    CHECK(trace.total == oracle.score);
    CHECK(trace.audits.size() == 2);
  }
}

TEST_CASE("trace internals are mutually consistent") {
  for (int i = 0; i < 12; ++i) {
    Rng rng(mix_seed(31337, static_cast<std::uint64_t>(i)));
    RandomInstance inst = make_random_instance(rng);
    ModelParams params = train(inst.corpus);
    const int length = static_cast<int>(inst.query.tokens.size());
    for (Variant variant : kAllVariants) {
      CAPTURE(i);
      CAPTURE(variant_name(variant));
      DecodeTrace trace = decode(inst.query, params, variant);
      const std::vector<int>& tags = trace.first_layer;

      // Lattice shape: one matrix per position, row count per variant.
      REQUIRE(static_cast<int>(trace.lattice.size()) == length);
      const int expect_rows = variant == Variant::mono_first ? 1
                              : variant == Variant::mono_second
                                  ? kNumStates
                                  : kNumTags;
      for (const StateMatrix& m : trace.lattice) {
        CHECK(m.rows == expect_rows);
        CHECK(m.cols == kNumStates);
      }

      // The itemized path terms sum exactly to the decode total.
      double sum = 0.0;
      for (const ScoredTerm& t : trace.path_terms) sum += t.log_value;
      CHECK(sum == trace.total);

      // score_path reproduces the total bit-for-bit on the decoded path.
      CHECK(score_path(inst.query, tags, params, variant, trace.path) ==
            trace.total);

      // Audits cover every position and hypothesis.
      REQUIRE(static_cast<int>(trace.audits.size()) == length);
      for (int pos = 0; pos < length; ++pos) {
        REQUIRE(trace.audits[static_cast<std::size_t>(pos)].size() ==
                static_cast<std::size_t>(kNumStates));
        for (int h = 0; h < kNumStates; ++h) {
          const AuditCell& cell =
              trace.audits[static_cast<std::size_t>(pos)]
                          [static_cast<std::size_t>(h)];
          CHECK(cell.position == pos);
          CHECK(cell.hypothesis == h);

          double rebuilt = cell.base;
          for (const ScoredTerm& t : cell.terms) rebuilt += t.log_value;
          CHECK(rebuilt == cell.score);

          // Each audit must agree with the chart cell it points at.
          const StateMatrix& m =
              trace.lattice[static_cast<std::size_t>(cell.cell_position)];
          double expected = m.delta_at(cell.cell_row, cell.cell_col);
          if (variant == Variant::mono_first && pos < length - 1) {
            expected += params.log_trans_first(
                h, trace.path[static_cast<std::size_t>(pos + 1)]);
          } else if ((variant == Variant::double_simple ||
                      variant == Variant::double_transfer) &&
                     pos < length - 1) {
            expected += params.log_trans_pos(
                tags[static_cast<std::size_t>(pos)], h,
                trace.path[static_cast<std::size_t>(pos + 1)]);
          }
          CHECK(cell.score == expected);

          if (variant == Variant::double_simple ||
              variant == Variant::double_transfer) {
            CHECK(cell.cell_row == tags[static_cast<std::size_t>(pos)] - 1);
          }
        }
      }

      // Double-variant charts broadcast the inner maximization: backpointers
      // must not depend on the row.
      if (variant == Variant::double_simple ||
          variant == Variant::double_transfer) {
        for (const StateMatrix& m : trace.lattice) {
          for (int k = 0; k < m.cols; ++k) {
            for (int r = 1; r < m.rows; ++r) {
              CHECK(m.psi_at(r, k) == m.psi_at(0, k));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("double-variant path terms mark the lambda-weighted lexicals") {
  Rng rng(mix_seed(5150, 0));
  RandomInstance inst = make_random_instance(rng);
  ModelParams params = train(inst.corpus);
  const int length = static_cast<int>(inst.query.tokens.size());

  DecodeTrace trace = decode(inst.query, params, Variant::double_simple);
  // Layout: initial, lexical(pos 0), then (transition, lexical) per position.
  REQUIRE(static_cast<int>(trace.path_terms.size()) == 2 + 2 * (length - 1));
  CHECK(trace.path_terms[0].kind == TermKind::initial);
  CHECK(trace.path_terms[1].kind == TermKind::lexical);
  CHECK_FALSE(trace.path_terms[1].lambda_applied);
  for (int pos = 1; pos < length; ++pos) {
    const ScoredTerm& trans =
        trace.path_terms[static_cast<std::size_t>(2 * pos)];
    const ScoredTerm& lexical =
        trace.path_terms[static_cast<std::size_t>(2 * pos + 1)];
    CHECK(trans.kind == TermKind::transition);
    CHECK_FALSE(trans.lambda_applied);
    CHECK(lexical.kind == TermKind::lexical);
    CHECK(lexical.lambda_applied);
  }

  // The mono decoders never scale lexicals.
  DecodeTrace mono = decode(inst.query, params, Variant::mono_first);
  for (const ScoredTerm& t : mono.path_terms) CHECK_FALSE(t.lambda_applied);
}

TEST_CASE("argmax ties resolve toward the lowest state") {
  // Training makes states 1 and 2 exactly symmetric; an unknown middle token
  // with an unseen prefix erases the lexical difference. The decoded state
  // must then be 1, matching the exhaustive reference's tuple order.
  TagSet tagset = make_test_tagset();
  Corpus corpus = make_corpus(tagset, {sent(tagset, {tok("الف", 5, 1)}),
                                       sent(tagset, {tok("باء", 5, 2)})});
  ModelParams params = train(corpus);
  Sentence query = sent(tagset, {tok("مجهول", 5, 0)});

  for (Variant variant :
       {Variant::mono_first, Variant::double_simple, Variant::double_transfer}) {
    CAPTURE(variant_name(variant));
    DecodeTrace trace = decode(query, params, variant);
    OracleResult oracle =
        brute_force_oracle(query, trace.first_layer, params, variant);
    CHECK(trace.path == std::vector<int>{0, 1, 0});
    CHECK(oracle.path == trace.path);
    CHECK(oracle.score == trace.total);
  }
}

TEST_CASE("gold first layer returns the annotated tags") {
  TagSet tagset = load_tagset(tagset_path());
  Corpus corpus = load_corpus(demo_corpus_path(), tagset);
  ModelParams params = train(corpus);
  std::vector<int> tags =
      first_layer_tags(corpus.sentences[0], params, FirstLayerMode::gold);
  CHECK(tags == std::vector<int>{4, 2, 3, 9, 6, 7, 4});

  // The mono variants always carry gold tags in the trace.
  DecodeTrace trace = decode(corpus.sentences[0], params, Variant::mono_first,
                             {FirstLayerMode::hmm, false});
  CHECK(trace.first_layer == tags);
}

TEST_CASE("decoded first layer matches an exhaustive tagger") {
  for (int i = 0; i < 8; ++i) {
    Rng rng(mix_seed(90210, static_cast<std::uint64_t>(i)));
    RandomInstance inst = make_random_instance(rng);
    ModelParams params = train(inst.corpus);
    // Keep the query short enough for 14^L enumeration.
    Sentence query = inst.query;
    while (query.tokens.size() > 4) {
      query.tokens.erase(query.tokens.end() - 2);
    }
    std::vector<int> viterbi =
        first_layer_tags(query, params, FirstLayerMode::hmm);
    std::vector<int> exhaustive = brute_force_tagger(query, params);
    CAPTURE(i);
    CHECK(viterbi == exhaustive);
  }
}

TEST_CASE("decoded first layer recovers training tags on the demo corpus") {
  TagSet tagset = load_tagset(tagset_path());
  Corpus corpus = load_corpus(demo_corpus_path(), tagset);
  ModelParams params = train(corpus);
  const Sentence& oil = corpus.sentences[0];
  std::vector<int> hmm = first_layer_tags(oil, params, FirstLayerMode::hmm);
  std::vector<int> gold = first_layer_tags(oil, params, FirstLayerMode::gold);
  CHECK(hmm == gold);
}

TEST_CASE("decode and helpers validate their inputs") {
  TagSet tagset = make_test_tagset();
  Corpus corpus = make_corpus(tagset, {sent(tagset, {tok("ماء", 5, 1)})});
  ModelParams params = train(corpus);
  Sentence query = sent(tagset, {tok("ماء", 5, 0)});

  Sentence too_short;
  too_short.tokens = {tok(".", tagset.boundary, 0)};
  CHECK_THROWS_AS(decode(too_short, params, Variant::mono_first), Error);

  std::vector<int> tags = first_layer_tags(query, params, FirstLayerMode::gold);
  CHECK_THROWS_AS(
      score_path(query, tags, params, Variant::mono_first, {0, 1}), Error);
  CHECK_THROWS_AS(
      score_path(query, tags, params, Variant::mono_first, {0, 4, 0}), Error);
  CHECK_THROWS_AS(
      score_path(query, {4, 5}, params, Variant::double_simple, {0, 1, 0}),
      Error);

  Sentence long_sentence = sent(
      tagset, {tok("a", 5, 0), tok("b", 5, 0), tok("c", 5, 0), tok("d", 5, 0),
               tok("e", 5, 0), tok("f", 5, 0), tok("g", 5, 0)});
  REQUIRE(long_sentence.tokens.size() == 9);
  CHECK_THROWS_AS(
      brute_force_oracle(long_sentence, {}, params, Variant::mono_first),
      Error);
}
