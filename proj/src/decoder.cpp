#include "lv/decoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "lv/util.hpp"

namespace lv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool is_double_variant(Variant v) {
  return v == Variant::double_simple || v == Variant::double_transfer;
}

std::vector<int> gold_tags(const Sentence& sentence) {
  std::vector<int> tags;
  tags.reserve(sentence.tokens.size());
  for (const Token& t : sentence.tokens) tags.push_back(t.pos);
  return tags;
}

// Which first-layer tag row conditions the transition into `pos`. This is
// the single point where the two double variants differ.
int transition_row(Variant v, const std::vector<int>& tags, int pos) {
  return v == Variant::double_simple ? tags[pos] : tags[pos - 1];
}

// Memoizes the per-token known/unknown decision and hides the lexical-table
// plumbing from the DP loops.
struct Lexicals {
  const ModelParams& params;
  const Sentence& sentence;
  std::vector<bool> known;

  Lexicals(const ModelParams& p, const Sentence& s) : params(p), sentence(s) {
    known.reserve(s.tokens.size());
    for (const Token& t : s.tokens) known.push_back(p.known(t.surface));
  }

  double mono1(int state, int pos) const {
    return params.lexical_log_prob(LexModel::mono_first, 0, state,
                                   sentence.tokens[pos].surface, known[pos]);
  }
  double mono2(int prev, int state, int pos) const {
    return params.lexical_log_prob(LexModel::mono_second, prev, state,
                                   sentence.tokens[pos].surface, known[pos]);
  }
  double pos_cond(int tag, int state, int pos) const {
    return params.lexical_log_prob(LexModel::pos_cond, tag, state,
                                   sentence.tokens[pos].surface, known[pos]);
  }
};

StateMatrix make_matrix(int rows, int cols) {
  StateMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.delta.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  m.psi.assign(static_cast<std::size_t>(rows) * cols, 0);
  return m;
}

ScoredTerm make_term(TermKind kind, double log_value, bool lambda_applied,
                     std::vector<Binding> bindings) {
  ScoredTerm t;
  t.kind = kind;
  t.log_value = log_value;
  t.lambda_applied = lambda_applied;
  t.bindings = std::move(bindings);
  return t;
}

// Lowest-index argmax over the 4 ingredient states.
template <typename Score>
std::pair<int, double> argmax_state(const Score& score) {
  int best_index = 0;
  double best = kNegInf;
  for (int k = 0; k < kNumStates; ++k) {
    double s = score(k);
    if (s > best) {
      best = s;
      best_index = k;
    }
  }
  return {best_index, best};
}

// ---------------------------------------------------------------------- //
// DP cores: fill trace.lattice / trace.path / trace.total.
// ---------------------------------------------------------------------- //

void run_mono_first(DecodeTrace& trace, const ModelParams& params,
                    const Lexicals& lex, int length) {
  std::array<double, kNumStates> chain{};
  StateMatrix m0 = make_matrix(1, kNumStates);
  for (int k = 0; k < kNumStates; ++k) {
    chain[k] = params.log_pi(k) + lex.mono1(k, 0);
    m0.delta[static_cast<std::size_t>(k)] = chain[k];
  }
  trace.lattice.push_back(std::move(m0));

  for (int pos = 1; pos < length; ++pos) {
    StateMatrix m = make_matrix(1, kNumStates);
    std::array<double, kNumStates> next{};
    for (int k = 0; k < kNumStates; ++k) {
      auto [best_j, best] = argmax_state(
          [&](int j) { return chain[j] + params.log_trans_first(j, k); });
      next[k] = best + lex.mono1(k, pos);
      m.delta[static_cast<std::size_t>(k)] = next[k];
      m.psi[static_cast<std::size_t>(k)] = best_j;
    }
    chain = next;
    trace.lattice.push_back(std::move(m));
  }

  auto [best_k, best] = argmax_state([&](int k) { return chain[k]; });
  trace.total = best;
  trace.path.assign(static_cast<std::size_t>(length), 0);
  trace.path[static_cast<std::size_t>(length - 1)] = best_k;
  for (int pos = length - 1; pos >= 1; --pos) {
    trace.path[static_cast<std::size_t>(pos - 1)] =
        trace.lattice[static_cast<std::size_t>(pos)].psi_at(
            0, trace.path[static_cast<std::size_t>(pos)]);
  }
}

void run_double(DecodeTrace& trace, const ModelParams& params,
                const Lexicals& lex, const std::vector<int>& tags,
                Variant variant, int length) {
  const double lambda = params.lambda_max;
  std::vector<std::array<double, kNumStates>> chain(
      static_cast<std::size_t>(length));

  // Position 0: log pi + unweighted lexical, materialized on every tag row.
  StateMatrix m0 = make_matrix(kNumTags, kNumStates);
  for (int i = 0; i < kNumTags; ++i) {
    for (int k = 0; k < kNumStates; ++k) {
      m0.delta[static_cast<std::size_t>(i * kNumStates + k)] =
          params.log_pi(k) + lex.pos_cond(i + 1, k, 0);
    }
  }
  for (int k = 0; k < kNumStates; ++k) {
    chain[0][static_cast<std::size_t>(k)] = m0.delta_at(tags[0] - 1, k);
  }
  trace.lattice.push_back(std::move(m0));

  for (int pos = 1; pos < length; ++pos) {
    const int row_in = transition_row(variant, tags, pos);
    std::array<double, kNumStates> inner{};
    std::array<int, kNumStates> arg{};
    for (int k = 0; k < kNumStates; ++k) {
      auto [best_j, best] = argmax_state([&](int j) {
        return chain[static_cast<std::size_t>(pos - 1)][j] +
               params.log_trans_pos(row_in, j, k);
      });
      inner[k] = best;
      arg[k] = best_j;
    }
    // Broadcast materialization: the inner maximization is shared by every
    // row; rows differ only in which tag scores the lexical term.
    StateMatrix m = make_matrix(kNumTags, kNumStates);
    for (int i = 0; i < kNumTags; ++i) {
      for (int k = 0; k < kNumStates; ++k) {
        m.delta[static_cast<std::size_t>(i * kNumStates + k)] =
            inner[k] + lambda * lex.pos_cond(i + 1, k, pos);
        m.psi[static_cast<std::size_t>(i * kNumStates + k)] = arg[k];
      }
    }
    for (int k = 0; k < kNumStates; ++k) {
      chain[static_cast<std::size_t>(pos)][static_cast<std::size_t>(k)] =
          m.delta_at(tags[pos] - 1, k);
    }
    trace.lattice.push_back(std::move(m));
  }

  auto [best_k, best] = argmax_state(
      [&](int k) { return chain[static_cast<std::size_t>(length - 1)][k]; });
  trace.total = best;
  trace.path.assign(static_cast<std::size_t>(length), 0);
  trace.path[static_cast<std::size_t>(length - 1)] = best_k;
  for (int pos = length - 1; pos >= 1; --pos) {
    trace.path[static_cast<std::size_t>(pos - 1)] =
        trace.lattice[static_cast<std::size_t>(pos)].psi_at(
            0, trace.path[static_cast<std::size_t>(pos)]);
  }
}

void run_mono_second(DecodeTrace& trace, const ModelParams& params,
                     const Lexicals& lex, int length) {
  // Position 0: the unary start values, broadcast across rows so the lattice
  // keeps a uniform 4x4 shape. Cell (j, k) at later positions means
  // state j at pos-1, state k at pos.
  std::array<double, kNumStates> start{};
  StateMatrix m0 = make_matrix(kNumStates, kNumStates);
  for (int k = 0; k < kNumStates; ++k) {
    start[k] = params.log_pi(k) + lex.mono1(k, 0);
  }
  for (int j = 0; j < kNumStates; ++j) {
    for (int k = 0; k < kNumStates; ++k) {
      m0.delta[static_cast<std::size_t>(j * kNumStates + k)] = start[k];
    }
  }
  trace.lattice.push_back(std::move(m0));

  // Position 1: pair initialization; no inner maximization yet.
  StateMatrix m1 = make_matrix(kNumStates, kNumStates);
  for (int j = 0; j < kNumStates; ++j) {
    for (int k = 0; k < kNumStates; ++k) {
      m1.delta[static_cast<std::size_t>(j * kNumStates + k)] =
          start[j] + params.log_trans_first(j, k) + lex.mono2(j, k, 1);
    }
  }
  trace.lattice.push_back(std::move(m1));

  for (int pos = 2; pos < length; ++pos) {
    const StateMatrix& prev = trace.lattice.back();
    StateMatrix m = make_matrix(kNumStates, kNumStates);
    for (int j = 0; j < kNumStates; ++j) {
      for (int k = 0; k < kNumStates; ++k) {
        auto [best_i, best] = argmax_state([&](int i) {
          return prev.delta_at(i, j) + params.log_trans_second(i, j, k);
        });
        m.delta[static_cast<std::size_t>(j * kNumStates + k)] =
            best + lex.mono2(j, k, pos);
        m.psi[static_cast<std::size_t>(j * kNumStates + k)] = best_i;
      }
    }
    trace.lattice.push_back(std::move(m));
  }

  // Termination: best final pair, preferring the lowest last state and then
  // the lowest previous state on ties.
  const StateMatrix& last = trace.lattice.back();
  double best = kNegInf;
  int best_j = 0;
  int best_k = 0;
  for (int k = 0; k < kNumStates; ++k) {
    for (int j = 0; j < kNumStates; ++j) {
      if (last.delta_at(j, k) > best) {
        best = last.delta_at(j, k);
        best_j = j;
        best_k = k;
      }
    }
  }
  trace.total = best;
  trace.path.assign(static_cast<std::size_t>(length), 0);
  trace.path[static_cast<std::size_t>(length - 1)] = best_k;
  trace.path[static_cast<std::size_t>(length - 2)] = best_j;
  for (int pos = length - 1; pos >= 2; --pos) {
    trace.path[static_cast<std::size_t>(pos - 2)] =
        trace.lattice[static_cast<std::size_t>(pos)].psi_at(
            trace.path[static_cast<std::size_t>(pos - 1)],
            trace.path[static_cast<std::size_t>(pos)]);
  }
}

// ---------------------------------------------------------------------- //
// Path terms: the decoded path's score, itemized. Appended in accumulation
// order so the log_values sum exactly to trace.total.
// ---------------------------------------------------------------------- //

void build_path_terms(DecodeTrace& trace, const ModelParams& params,
                      const Lexicals& lex, const std::vector<int>& tags,
                      Variant variant, int length) {
  const std::vector<int>& s = trace.path;
  auto sel = [&](Var var, int pos) {
    return Binding{var, s[static_cast<std::size_t>(pos)],
                   BindingOrigin::argmax_selected, pos};
  };
  auto tag_claim = [&](Var var, int value, int pos) {
    return Binding{var, value, BindingOrigin::structural, pos};
  };

  trace.path_terms.push_back(make_term(TermKind::initial, params.log_pi(s[0]),
                                       false, {sel(Var::gamma_r, 0)}));
  switch (variant) {
    case Variant::mono_first:
    case Variant::mono_second:
      trace.path_terms.push_back(make_term(TermKind::lexical,
                                           lex.mono1(s[0], 0), false,
                                           {sel(Var::gamma_r, 0)}));
      break;
    case Variant::double_simple:
    case Variant::double_transfer:
      trace.path_terms.push_back(
          make_term(TermKind::lexical, lex.pos_cond(tags[0], s[0], 0), false,
                    {sel(Var::gamma_r, 0), tag_claim(Var::t_r, tags[0], 0)}));
      break;
  }

  for (int pos = 1; pos < length; ++pos) {
    switch (variant) {
      case Variant::mono_first:
        trace.path_terms.push_back(make_term(
            TermKind::transition, params.log_trans_first(s[pos - 1], s[pos]),
            false, {sel(Var::gamma_r1, pos - 1), sel(Var::gamma_r, pos)}));
        trace.path_terms.push_back(make_term(TermKind::lexical,
                                             lex.mono1(s[pos], pos), false,
                                             {sel(Var::gamma_r, pos)}));
        break;
      case Variant::mono_second:
        if (pos == 1) {
          trace.path_terms.push_back(make_term(
              TermKind::transition, params.log_trans_first(s[0], s[1]), false,
              {sel(Var::gamma_r1, 0), sel(Var::gamma_r, 1)}));
        } else {
          trace.path_terms.push_back(make_term(
              TermKind::transition,
              params.log_trans_second(s[pos - 2], s[pos - 1], s[pos]), false,
              {sel(Var::gamma_r2, pos - 2), sel(Var::gamma_r1, pos - 1),
               sel(Var::gamma_r, pos)}));
        }
        trace.path_terms.push_back(
            make_term(TermKind::lexical, lex.mono2(s[pos - 1], s[pos], pos),
                      false, {sel(Var::gamma_r1, pos - 1), sel(Var::gamma_r, pos)}));
        break;
      case Variant::double_simple:
      case Variant::double_transfer: {
        const int row = transition_row(variant, tags, pos);
        trace.path_terms.push_back(make_term(
            TermKind::transition, params.log_trans_pos(row, s[pos - 1], s[pos]),
            false,
            {sel(Var::gamma_r1, pos - 1), sel(Var::gamma_r, pos),
             tag_claim(Var::t_r1, row, pos - 1)}));
        trace.path_terms.push_back(make_term(
            TermKind::lexical,
            params.lambda_max * lex.pos_cond(tags[pos], s[pos], pos), true,
            {sel(Var::gamma_r, pos), tag_claim(Var::t_r, tags[pos], pos)}));
        break;
      }
    }
  }
}

// ---------------------------------------------------------------------- //
// Audit cells: per token position, per hypothesized state, the itemized
// most-probable-cell calculation the diagnostics inspect.
// ---------------------------------------------------------------------- //

double finish_cell(AuditCell& cell) {
  double score = cell.base;
  for (const ScoredTerm& t : cell.terms) score += t.log_value;
  cell.score = score;
  return score;
}

AuditCell audit_mono_first(const DecodeTrace& trace, const ModelParams& params,
                           const Lexicals& lex, int length, int pos, int h) {
  AuditCell cell;
  cell.position = pos;
  cell.hypothesis = h;
  cell.cell_position = pos;
  cell.cell_row = 0;
  cell.cell_col = h;
  auto hyp = [&](Var var, int value, int at) {
    return Binding{var, value, BindingOrigin::hypothesis, at};
  };
  if (pos == 0) {
    cell.base = 0.0;
    cell.terms.push_back(make_term(TermKind::initial, params.log_pi(h), false,
                                   {hyp(Var::gamma_r, h, 0)}));
    cell.terms.push_back(make_term(TermKind::lexical, lex.mono1(h, 0), false,
                                   {hyp(Var::gamma_r, h, 0)}));
    if (length > 1) {
      const int next = trace.path[1];
      cell.terms.push_back(
          make_term(TermKind::transition, params.log_trans_first(h, next),
                    false, {hyp(Var::gamma_r1, h, 0), hyp(Var::gamma_r, next, 1)}));
    }
  } else {
    const int j_star =
        trace.lattice[static_cast<std::size_t>(pos)].psi_at(0, h);
    cell.base = trace.lattice[static_cast<std::size_t>(pos - 1)].delta_at(
        0, j_star);
    cell.terms.push_back(make_term(
        TermKind::transition, params.log_trans_first(j_star, h), false,
        {Binding{Var::gamma_r1, j_star, BindingOrigin::argmax_selected,
                 pos - 1},
         hyp(Var::gamma_r, h, pos)}));
    cell.terms.push_back(make_term(TermKind::lexical, lex.mono1(h, pos), false,
                                   {hyp(Var::gamma_r, h, pos)}));
    if (pos < length - 1) {
      const int next = trace.path[static_cast<std::size_t>(pos + 1)];
      cell.terms.push_back(make_term(
          TermKind::transition, params.log_trans_first(h, next), false,
          {hyp(Var::gamma_r1, h, pos), hyp(Var::gamma_r, next, pos + 1)}));
    }
  }
  finish_cell(cell);
  return cell;
}

AuditCell audit_double(const DecodeTrace& trace, const ModelParams& params,
                       const Lexicals& lex, const std::vector<int>& tags,
                       Variant variant, int length, int pos, int h) {
  const double lambda = params.lambda_max;
  AuditCell cell;
  cell.position = pos;
  cell.hypothesis = h;
  cell.cell_position = pos;
  cell.cell_row = tags[static_cast<std::size_t>(pos)] - 1;
  cell.cell_col = h;
  auto hyp = [&](Var var, int value, int at) {
    return Binding{var, value, BindingOrigin::hypothesis, at};
  };
  auto tag_claim = [&](Var var, int value, int at) {
    return Binding{var, value, BindingOrigin::structural, at};
  };
  if (pos == 0) {
    cell.base = 0.0;
    cell.terms.push_back(make_term(TermKind::initial, params.log_pi(h), false,
                                   {hyp(Var::gamma_r, h, 0)}));
    cell.terms.push_back(
        make_term(TermKind::lexical, lex.pos_cond(tags[0], h, 0), false,
                  {hyp(Var::gamma_r, h, 0), tag_claim(Var::t_r, tags[0], 0)}));
    if (length > 1) {
      const int next = trace.path[1];
      cell.terms.push_back(
          make_term(TermKind::transition, params.log_trans_pos(tags[0], h, next),
                    false,
                    {hyp(Var::gamma_r1, h, 0), hyp(Var::gamma_r, next, 1),
                     tag_claim(Var::t_r1, tags[0], 0)}));
    }
  } else {
    const int row_in = transition_row(variant, tags, pos);
    const int j_star =
        trace.lattice[static_cast<std::size_t>(pos)].psi_at(0, h);
    cell.base = trace.lattice[static_cast<std::size_t>(pos - 1)].delta_at(
        tags[static_cast<std::size_t>(pos - 1)] - 1, j_star);
    cell.terms.push_back(make_term(
        TermKind::transition, params.log_trans_pos(row_in, j_star, h), false,
        {Binding{Var::gamma_r1, j_star, BindingOrigin::argmax_selected,
                 pos - 1},
         hyp(Var::gamma_r, h, pos), tag_claim(Var::t_r1, row_in, pos - 1)}));
    cell.terms.push_back(make_term(
        TermKind::lexical, lambda * lex.pos_cond(tags[pos], h, pos), true,
        {hyp(Var::gamma_r, h, pos), tag_claim(Var::t_r, tags[pos], pos)}));
    if (pos < length - 1) {
      const int next = trace.path[static_cast<std::size_t>(pos + 1)];
      cell.terms.push_back(make_term(
          TermKind::transition, params.log_trans_pos(tags[pos], h, next),
          false,
          {hyp(Var::gamma_r1, h, pos), hyp(Var::gamma_r, next, pos + 1),
           tag_claim(Var::t_r1, tags[pos], pos)}));
    }
  }
  finish_cell(cell);
  return cell;
}

AuditCell audit_mono_second(const DecodeTrace& trace, const ModelParams& params,
                            const Lexicals& lex, int length, int pos, int h) {
  AuditCell cell;
  cell.position = pos;
  cell.hypothesis = h;
  auto hyp = [&](Var var, int value, int at) {
    return Binding{var, value, BindingOrigin::hypothesis, at};
  };
  auto sel = [&](Var var, int value, int at) {
    return Binding{var, value, BindingOrigin::argmax_selected, at};
  };
  if (pos == length - 1) {
    const int j_prev = trace.path[static_cast<std::size_t>(length - 2)];
    cell.cell_position = length - 1;
    cell.cell_row = j_prev;
    cell.cell_col = h;
    if (length == 2) {
      cell.base = params.log_pi(j_prev) + lex.mono1(j_prev, 0);
      cell.terms.push_back(
          make_term(TermKind::transition, params.log_trans_first(j_prev, h),
                    false, {sel(Var::gamma_r1, j_prev, 0), hyp(Var::gamma_r, h, 1)}));
      cell.terms.push_back(
          make_term(TermKind::lexical, lex.mono2(j_prev, h, 1), false,
                    {sel(Var::gamma_r1, j_prev, 0), hyp(Var::gamma_r, h, 1)}));
    } else {
      const int i_star =
          trace.lattice[static_cast<std::size_t>(length - 1)].psi_at(j_prev, h);
      cell.base = trace.lattice[static_cast<std::size_t>(length - 2)].delta_at(
          i_star, j_prev);
      cell.terms.push_back(make_term(
          TermKind::transition, params.log_trans_second(i_star, j_prev, h),
          false,
          {sel(Var::gamma_r2, i_star, length - 3),
           sel(Var::gamma_r1, j_prev, length - 2), hyp(Var::gamma_r, h, length - 1)}));
      cell.terms.push_back(
          make_term(TermKind::lexical, lex.mono2(j_prev, h, length - 1), false,
                    {sel(Var::gamma_r1, j_prev, length - 2),
                     hyp(Var::gamma_r, h, length - 1)}));
    }
  } else {
    const int k_star = trace.path[static_cast<std::size_t>(pos + 1)];
    cell.cell_position = pos + 1;
    cell.cell_row = h;
    cell.cell_col = k_star;
    if (pos == 0) {
      cell.base = params.log_pi(h) + lex.mono1(h, 0);
      cell.terms.push_back(
          make_term(TermKind::transition, params.log_trans_first(h, k_star),
                    false, {hyp(Var::gamma_r1, h, 0), hyp(Var::gamma_r, k_star, 1)}));
      cell.terms.push_back(
          make_term(TermKind::lexical, lex.mono2(h, k_star, 1), false,
                    {hyp(Var::gamma_r1, h, 0), hyp(Var::gamma_r, k_star, 1)}));
    } else {
      const int i_star =
          trace.lattice[static_cast<std::size_t>(pos + 1)].psi_at(h, k_star);
      cell.base =
          trace.lattice[static_cast<std::size_t>(pos)].delta_at(i_star, h);
      cell.terms.push_back(make_term(
          TermKind::transition, params.log_trans_second(i_star, h, k_star),
          false,
          {sel(Var::gamma_r2, i_star, pos - 1), hyp(Var::gamma_r1, h, pos),
           hyp(Var::gamma_r, k_star, pos + 1)}));
      cell.terms.push_back(
          make_term(TermKind::lexical, lex.mono2(h, k_star, pos + 1), false,
                    {hyp(Var::gamma_r1, h, pos), hyp(Var::gamma_r, k_star, pos + 1)}));
    }
  }
  finish_cell(cell);
  return cell;
}

void build_audits(DecodeTrace& trace, const ModelParams& params,
                  const Lexicals& lex, const std::vector<int>& tags,
                  Variant variant, int length) {
  trace.audits.assign(static_cast<std::size_t>(length), {});
  for (int pos = 0; pos < length; ++pos) {
    auto& cells = trace.audits[static_cast<std::size_t>(pos)];
    cells.reserve(kNumStates);
    for (int h = 0; h < kNumStates; ++h) {
      switch (variant) {
        case Variant::mono_first:
          cells.push_back(audit_mono_first(trace, params, lex, length, pos, h));
          break;
        case Variant::mono_second:
          cells.push_back(audit_mono_second(trace, params, lex, length, pos, h));
          break;
        case Variant::double_simple:
        case Variant::double_transfer:
          cells.push_back(
              audit_double(trace, params, lex, tags, variant, length, pos, h));
          break;
      }
    }
  }
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::mono_first:
      return "mono1";
    case Variant::mono_second:
      return "mono2";
    case Variant::double_simple:
      return "double";
    case Variant::double_transfer:
      return "transfer";
  }
  return "mono1";
}

std::optional<Variant> variant_from_name(const std::string& name) {
  if (name == "mono1") return Variant::mono_first;
  if (name == "mono2") return Variant::mono_second;
  if (name == "double") return Variant::double_simple;
  if (name == "transfer") return Variant::double_transfer;
  return std::nullopt;
}

const char* var_name(Var v) {
  switch (v) {
    case Var::gamma_r:
      return "Gr";
    case Var::gamma_r1:
      return "Gr-1";
    case Var::gamma_r2:
      return "Gr-2";
    case Var::t_r:
      return "Tr";
    case Var::t_r1:
      return "Tr-1";
  }
  return "Gr";
}

std::vector<int> first_layer_tags(const Sentence& sentence,
                                  const ModelParams& params,
                                  FirstLayerMode mode) {
  const int length = static_cast<int>(sentence.tokens.size());
  if (length == 0) throw Error("first_layer_tags: empty sentence");
  if (mode == FirstLayerMode::gold) return gold_tags(sentence);

  // First-order Viterbi over the 14 tags (lowest tag code on ties).
  std::vector<std::array<double, kNumTags>> delta(
      static_cast<std::size_t>(length));
  std::vector<std::array<int, kNumTags>> psi(static_cast<std::size_t>(length));
  for (int t = 0; t < kNumTags; ++t) {
    delta[0][static_cast<std::size_t>(t)] =
        params.log_pos_pi(t + 1) +
        params.log_pos_emit(t + 1, sentence.tokens[0].surface);
  }
  for (int pos = 1; pos < length; ++pos) {
    for (int u = 0; u < kNumTags; ++u) {
      double best = kNegInf;
      int best_t = 0;
      for (int t = 0; t < kNumTags; ++t) {
        double c = delta[static_cast<std::size_t>(pos - 1)]
                        [static_cast<std::size_t>(t)] +
                   params.log_pos_trans(t + 1, u + 1);
        if (c > best) {
          best = c;
          best_t = t;
        }
      }
      delta[static_cast<std::size_t>(pos)][static_cast<std::size_t>(u)] =
          best + params.log_pos_emit(
                     u + 1, sentence.tokens[static_cast<std::size_t>(pos)].surface);
      psi[static_cast<std::size_t>(pos)][static_cast<std::size_t>(u)] = best_t;
    }
  }
  double best = kNegInf;
  int best_u = 0;
  for (int u = 0; u < kNumTags; ++u) {
    if (delta[static_cast<std::size_t>(length - 1)][static_cast<std::size_t>(u)] >
        best) {
      best = delta[static_cast<std::size_t>(length - 1)]
                  [static_cast<std::size_t>(u)];
      best_u = u;
    }
  }
  std::vector<int> tags(static_cast<std::size_t>(length), 0);
  tags[static_cast<std::size_t>(length - 1)] = best_u + 1;
  for (int pos = length - 1; pos >= 1; --pos) {
    tags[static_cast<std::size_t>(pos - 1)] =
        psi[static_cast<std::size_t>(pos)]
           [static_cast<std::size_t>(tags[static_cast<std::size_t>(pos)] - 1)] +
        1;
  }
  return tags;
}

DecodeTrace decode(const Sentence& sentence, const ModelParams& params,
                   Variant variant, const DecodeOptions& options) {
  const int length = static_cast<int>(sentence.tokens.size());
  if (length < 2) throw Error("decode: sentence must be padded to length >= 2");

  DecodeTrace trace;
  trace.variant = variant;
  trace.first_layer = is_double_variant(variant)
                          ? first_layer_tags(sentence, params, options.first_layer)
                          : gold_tags(sentence);
  const std::vector<int>& tags = trace.first_layer;
  Lexicals lex(params, sentence);

  switch (variant) {
    case Variant::mono_first:
      run_mono_first(trace, params, lex, length);
      break;
    case Variant::mono_second:
      run_mono_second(trace, params, lex, length);
      break;
    case Variant::double_simple:
    case Variant::double_transfer:
      run_double(trace, params, lex, tags, variant, length);
      break;
  }

  build_path_terms(trace, params, lex, tags, variant, length);
  if (options.with_audits) {
    build_audits(trace, params, lex, tags, variant, length);
  }
  return trace;
}

double score_path(const Sentence& sentence, const std::vector<int>& tags,
                  const ModelParams& params, Variant variant,
                  const std::vector<int>& path) {
  const int length = static_cast<int>(sentence.tokens.size());
  if (length < 2) throw Error("score_path: sentence must be padded to length >= 2");
  if (static_cast<int>(path.size()) != length) {
    throw Error("score_path: path length does not match the sentence");
  }
  for (int s : path) {
    if (s < 0 || s >= kNumStates) throw Error("score_path: state out of range");
  }
  std::vector<int> y = tags.empty() ? gold_tags(sentence) : tags;
  if (static_cast<int>(y.size()) != length) {
    throw Error("score_path: tag sequence length does not match the sentence");
  }
  Lexicals lex(params, sentence);

  // Accumulation mirrors the DP exactly (same terms, same addition order) so
  // scores compare bit-for-bit with decode totals.
  double score = params.log_pi(path[0]);
  switch (variant) {
    case Variant::mono_first:
      score += lex.mono1(path[0], 0);
      for (int pos = 1; pos < length; ++pos) {
        score += params.log_trans_first(path[pos - 1], path[pos]);
        score += lex.mono1(path[pos], pos);
      }
      break;
    case Variant::mono_second:
      score += lex.mono1(path[0], 0);
      for (int pos = 1; pos < length; ++pos) {
        if (pos == 1) {
          score += params.log_trans_first(path[0], path[1]);
        } else {
          score += params.log_trans_second(path[pos - 2], path[pos - 1], path[pos]);
        }
        score += lex.mono2(path[pos - 1], path[pos], pos);
      }
      break;
    case Variant::double_simple:
    case Variant::double_transfer:
      score += lex.pos_cond(y[0], path[0], 0);
      for (int pos = 1; pos < length; ++pos) {
        score += params.log_trans_pos(transition_row(variant, y, pos),
                                      path[pos - 1], path[pos]);
        score += params.lambda_max * lex.pos_cond(y[pos], path[pos], pos);
      }
      break;
  }
  return score;
}

OracleResult brute_force_oracle(const Sentence& sentence,
                                const std::vector<int>& tags,
                                const ModelParams& params, Variant variant,
                                int max_length) {
  const int length = static_cast<int>(sentence.tokens.size());
  if (length < 2) {
    throw Error("brute_force_oracle: sentence must be padded to length >= 2");
  }
  if (length > max_length) {
    throw Error("brute_force_oracle: sentence longer than the exhaustive-search cap");
  }

  std::uint64_t combos = 1;
  for (int i = 0; i < length; ++i) combos *= kNumStates;

  // Reversed-tuple preference: among score-tied paths keep the one whose
  // (s_L, ..., s_1) tuple is smallest — the same path per-step lowest-index
  // argmaxes produce.
  auto prefer = [length](const std::vector<int>& candidate,
                         const std::vector<int>& incumbent) {
    for (int pos = length - 1; pos >= 0; --pos) {
      if (candidate[static_cast<std::size_t>(pos)] !=
          incumbent[static_cast<std::size_t>(pos)]) {
        return candidate[static_cast<std::size_t>(pos)] <
               incumbent[static_cast<std::size_t>(pos)];
      }
    }
    return false;
  };

  OracleResult best;
  best.score = kNegInf;
  std::vector<int> path(static_cast<std::size_t>(length), 0);
  for (std::uint64_t code = 0; code < combos; ++code) {
    std::uint64_t c = code;
    for (int i = 0; i < length; ++i) {
      path[static_cast<std::size_t>(i)] = static_cast<int>(c % kNumStates);
      c /= kNumStates;
    }
    double score = score_path(sentence, tags, params, variant, path);
    if (score > best.score ||
        (score == best.score && (best.path.empty() || prefer(path, best.path)))) {
      best.score = score;
      best.path = path;
    }
  }
  return best;
}

double combine_cell(double prev_best, double transition, double lexical,
                    bool lambda_applied,
                    std::optional<double> extra_transition, double lambda_max) {
  const double lexical_contribution =
      lambda_applied ? lexical : lambda_max * lexical;
  double total = prev_best + transition + lexical_contribution;
  if (extra_transition.has_value()) total += *extra_transition;
  return total;
}

}  // namespace lv
