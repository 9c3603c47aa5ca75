#include "lv/diagnostics.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <utility>

#include "lv/util.hpp"

namespace lv {

namespace {

bool is_state_var(Var v) {
  return v == Var::gamma_r || v == Var::gamma_r1 || v == Var::gamma_r2;
}

std::vector<int> gold_states_of(const Sentence& s) {
  std::vector<int> out;
  out.reserve(s.tokens.size());
  for (const Token& t : s.tokens) out.push_back(t.state);
  return out;
}

std::vector<int> gold_tags_of(const Sentence& s) {
  std::vector<int> out;
  out.reserve(s.tokens.size());
  for (const Token& t : s.tokens) out.push_back(t.pos);
  return out;
}

// Hypothesis cells of one position in presentation order: score descending,
// lowest hypothesis state first on ties.
std::vector<int> rank_cells(const std::vector<AuditCell>& cells) {
  std::vector<int> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (cells[static_cast<std::size_t>(a)].score !=
        cells[static_cast<std::size_t>(b)].score) {
      return cells[static_cast<std::size_t>(a)].score >
             cells[static_cast<std::size_t>(b)].score;
    }
    return a < b;
  });
  return order;
}

std::string pad_utf8(const std::string& s, std::size_t width) {
  std::string out = s;
  for (std::size_t len = utf8_length(s); len < width; ++len) out.push_back(' ');
  return out;
}

std::string format_short(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

const char* origin_tag(BindingOrigin origin) {
  switch (origin) {
    case BindingOrigin::hypothesis:
      return "hyp";
    case BindingOrigin::argmax_selected:
      return "sel";
    case BindingOrigin::structural:
      return "struct";
  }
  return "hyp";
}

std::string binding_text(const Binding& b, bool flagged) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s=%d@%d[%s]", var_name(b.var), b.value,
                b.position, origin_tag(b.origin));
  if (flagged) return "~" + std::string(buf) + "~";
  return buf;
}

const char* term_kind_text(const ScoredTerm& term) {
  switch (term.kind) {
    case TermKind::initial:
      return "initial";
    case TermKind::transition:
      return "transition";
    case TermKind::lexical:
      return term.lambda_applied ? "lexical*" : "lexical";
  }
  return "initial";
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == sep) {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

long parse_long(const std::string& s, const std::string& what) {
  if (s.empty()) throw Error("sensitivity csv: empty " + what);
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == nullptr || *end != '\0') {
    throw Error("sensitivity csv: bad " + what + ": " + s);
  }
  return v;
}

double parse_double_field(const std::string& s, const std::string& what) {
  if (s.empty()) throw Error("sensitivity csv: empty " + what);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0') {
    throw Error("sensitivity csv: bad " + what + ": " + s);
  }
  return v;
}

}  // namespace

TermJudgment classify_term(const ScoredTerm& term,
                           const std::vector<int>& gold_states,
                           const std::vector<int>& gold_tags) {
  if (gold_states.size() != gold_tags.size()) {
    throw Error("classify_term: gold state/tag sequences differ in length");
  }
  TermJudgment judgment;
  for (std::size_t i = 0; i < term.bindings.size(); ++i) {
    const Binding& b = term.bindings[i];
    if (b.origin == BindingOrigin::hypothesis) continue;
    if (b.position < 0 ||
        b.position >= static_cast<int>(gold_states.size())) {
      throw Error("classify_term: binding position out of range");
    }
    const int expected =
        is_state_var(b.var)
            ? gold_states[static_cast<std::size_t>(b.position)]
            : gold_tags[static_cast<std::size_t>(b.position)];
    if (b.value != expected) {
      judgment.parasite = true;
      judgment.offending_bindings.push_back(i);
    }
  }
  return judgment;
}

ParasiteSummary count_parasites(const DecodeTrace& trace, const Sentence& gold,
                                int position, int top_k) {
  if (trace.audits.empty()) {
    throw Error("count_parasites: trace carries no audit cells");
  }
  if (position < 0 || position >= static_cast<int>(trace.audits.size())) {
    throw Error("count_parasites: position out of range");
  }
  if (gold.tokens.size() != trace.path.size()) {
    throw Error("count_parasites: gold sentence length does not match trace");
  }
  top_k = std::clamp(top_k, 1, kNumStates);

  const std::vector<int> gold_states = gold_states_of(gold);
  const std::vector<int> gold_tags = gold_tags_of(gold);
  const auto& cells = trace.audits[static_cast<std::size_t>(position)];
  const std::vector<int> order = rank_cells(cells);

  ParasiteSummary summary;
  summary.position = position;
  summary.top_k = top_k;
  for (int rank = 0; rank < top_k; ++rank) {
    const AuditCell& cell = cells[static_cast<std::size_t>(order[rank])];
    RankedCell ranked;
    ranked.hypothesis = cell.hypothesis;
    ranked.score = cell.score;
    for (const ScoredTerm& term : cell.terms) {
      TermJudgment judgment = classify_term(term, gold_states, gold_tags);
      if (judgment.parasite) ++ranked.parasite_terms;
      ranked.judgments.push_back(std::move(judgment));
    }
    summary.total_parasites += ranked.parasite_terms;
    summary.cells.push_back(std::move(ranked));
  }
  return summary;
}

std::string build_situations_table(const DecodeTrace& trace,
                                   const Sentence& gold, int position,
                                   int top_k) {
  ParasiteSummary summary = count_parasites(trace, gold, position, top_k);
  const auto& cells = trace.audits[static_cast<std::size_t>(position)];

  const Token& token = gold.tokens[static_cast<std::size_t>(position)];
  std::string out;
  {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "position %d  surface %s  gold_state %d  gold_tag %d  "
                  "decoded %d\n",
                  position, token.surface.c_str(), token.state, token.pos,
                  trace.path[static_cast<std::size_t>(position)]);
    out += buf;
  }

  // Collect the term rows first so columns can be aligned table-wide.
  struct Row {
    std::size_t header = 0;  // index into headers when this row starts a cell
    bool is_header = false;
    std::vector<std::string> fields;
  };
  std::vector<std::string> headers;
  std::vector<Row> rows;
  for (const RankedCell& ranked : summary.cells) {
    const AuditCell* cell = nullptr;
    for (const AuditCell& c : cells) {
      if (c.hypothesis == ranked.hypothesis) cell = &c;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "hypothesis %d  score %s  base %s  cell (pos %d, row %d, "
                  "col %d)  parasites %d",
                  ranked.hypothesis, format_short(ranked.score).c_str(),
                  format_short(cell->base).c_str(), cell->cell_position,
                  cell->cell_row, cell->cell_col, ranked.parasite_terms);
    headers.push_back(buf);
    Row header_row;
    header_row.is_header = true;
    header_row.header = headers.size() - 1;
    rows.push_back(header_row);
    for (std::size_t t = 0; t < cell->terms.size(); ++t) {
      const ScoredTerm& term = cell->terms[t];
      const TermJudgment& judgment = ranked.judgments[t];
      Row row;
      row.fields.push_back(term_kind_text(term));
      row.fields.push_back(format_short(term.log_value));
      for (std::size_t b = 0; b < term.bindings.size(); ++b) {
        const bool flagged =
            std::find(judgment.offending_bindings.begin(),
                      judgment.offending_bindings.end(),
                      b) != judgment.offending_bindings.end();
        row.fields.push_back(binding_text(term.bindings[b], flagged));
      }
      rows.push_back(std::move(row));
    }
  }

  std::vector<std::size_t> widths;
  for (const Row& row : rows) {
    if (row.is_header) continue;
    for (std::size_t i = 0; i < row.fields.size(); ++i) {
      if (widths.size() <= i) widths.push_back(0);
      widths[i] = std::max(widths[i], utf8_length(row.fields[i]));
    }
  }
  for (const Row& row : rows) {
    if (row.is_header) {
      out += headers[row.header];
      out += '\n';
      continue;
    }
    out += " ";
    for (std::size_t i = 0; i < row.fields.size(); ++i) {
      out += ' ';
      const bool last = (i + 1 == row.fields.size());
      out += last ? row.fields[i] : pad_utf8(row.fields[i], widths[i] + 1);
    }
    out += '\n';
  }
  return out;
}

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::base:
      return "base";
    case Condition::add_similar:
      return "add_similar";
    case Condition::duplicate:
      return "duplicate";
    case Condition::unknown_word:
      return "unknown_word";
  }
  return "base";
}

std::optional<Condition> condition_from_name(const std::string& name) {
  if (name == "base") return Condition::base;
  if (name == "add_similar") return Condition::add_similar;
  if (name == "duplicate") return Condition::duplicate;
  if (name == "unknown_word") return Condition::unknown_word;
  return std::nullopt;
}

Corpus apply_condition(const Corpus& corpus, Condition condition,
                       int sentence_index, int position,
                       const std::optional<Sentence>& similar) {
  if (sentence_index < 0 ||
      sentence_index >= static_cast<int>(corpus.sentences.size())) {
    throw Error("apply_condition: sentence index out of range");
  }
  const Sentence& target =
      corpus.sentences[static_cast<std::size_t>(sentence_index)];
  if (position <= 0 ||
      position + 1 >= static_cast<int>(target.tokens.size())) {
    throw Error(
        "apply_condition: position must be an interior token of the padded "
        "sentence");
  }

  switch (condition) {
    case Condition::base:
      return corpus;
    case Condition::add_similar:
      if (!similar.has_value()) {
        throw Error("apply_condition: add_similar requires a similar sentence");
      }
      return augment(corpus, *similar, corpus.tagset);
    case Condition::duplicate:
      return augment(corpus, target, corpus.tagset);
    case Condition::unknown_word: {
      const std::string& surface =
          target.tokens[static_cast<std::size_t>(position)].surface;
      Corpus out;
      out.tagset = corpus.tagset;
      for (const Sentence& s : corpus.sentences) {
        Sentence stripped;
        for (std::size_t i = 1; i + 1 < s.tokens.size(); ++i) {
          if (s.tokens[i].surface != surface) {
            stripped.tokens.push_back(s.tokens[i]);
          }
        }
        if (stripped.tokens.empty()) continue;  // nothing left to learn from
        Sentence padded = pad_sentence(std::move(stripped), corpus.tagset);
        validate_sentence(padded, corpus.tagset, "unknown_word condition");
        out.sentences.push_back(std::move(padded));
      }
      if (out.sentences.empty()) {
        throw Error("apply_condition: unknown_word removed every sentence");
      }
      rebuild_vocabulary(out);
      return out;
    }
  }
  throw Error("apply_condition: unknown condition");
}

SensitivityReport sensitivity_report(const Corpus& corpus, int sentence_index,
                                     int position,
                                     const SensitivityOptions& options) {
  if (sentence_index < 0 ||
      sentence_index >= static_cast<int>(corpus.sentences.size())) {
    throw Error("sensitivity_report: sentence index out of range");
  }
  const Sentence& target =
      corpus.sentences[static_cast<std::size_t>(sentence_index)];
  if (position <= 0 ||
      position + 1 >= static_cast<int>(target.tokens.size())) {
    throw Error(
        "sensitivity_report: position must be an interior token of the padded "
        "sentence");
  }

  std::vector<Condition> conditions = options.conditions;
  if (conditions.empty()) {
    conditions = {Condition::base, Condition::add_similar, Condition::duplicate,
                  Condition::unknown_word};
  }
  std::vector<Variant> variants = options.variants;
  if (variants.empty()) {
    variants = {Variant::mono_first, Variant::mono_second,
                Variant::double_simple, Variant::double_transfer};
  }
  const int top_k = std::clamp(options.top_k, 1, kNumStates);

  SensitivityReport report;
  report.sentence_index = sentence_index;
  report.position = position;
  report.surface = target.tokens[static_cast<std::size_t>(position)].surface;

  for (Condition condition : conditions) {
    const Corpus edited = apply_condition(corpus, condition, sentence_index,
                                          position, options.similar);
    const ModelParams params = train(edited, options.train);
    log_info(std::string("sensitivity: trained condition ") +
             condition_name(condition));
    for (Variant variant : variants) {
      DecodeOptions decode_options;
      decode_options.first_layer = options.first_layer;
      decode_options.with_audits = true;
      const DecodeTrace trace = decode(target, params, variant, decode_options);
      const ParasiteSummary summary =
          count_parasites(trace, target, position, top_k);
      SensitivityRow row;
      row.condition = condition;
      row.variant = variant;
      row.total_parasites = summary.total_parasites;
      for (const RankedCell& cell : summary.cells) {
        row.top.push_back({cell.hypothesis, cell.score, cell.parasite_terms});
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string sensitivity_csv(const SensitivityReport& report) {
  std::string out = "# parasite counting: per occurrence\n";
  out += "condition,variant,hypothesis,score,parasite_count\n";
  for (const SensitivityRow& row : report.rows) {
    for (const HypothesisScore& h : row.top) {
      out += condition_name(row.condition);
      out += ',';
      out += variant_name(row.variant);
      out += ',';
      out += std::to_string(h.hypothesis);
      out += ',';
      out += format_g17(h.score);
      out += ',';
      out += std::to_string(h.parasite_terms);
      out += '\n';
    }
  }
  return out;
}

SensitivityReport parse_sensitivity_csv(const std::string& text) {
  SensitivityReport report;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "condition,variant,hypothesis,score,parasite_count") {
        throw Error("sensitivity csv: unexpected header: " + line);
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string> fields = split_fields(line, ',');
    if (fields.size() != 5) {
      throw Error("sensitivity csv: expected 5 fields: " + line);
    }
    const std::optional<Condition> condition = condition_from_name(fields[0]);
    if (!condition) throw Error("sensitivity csv: bad condition: " + fields[0]);
    const std::optional<Variant> variant = variant_from_name(fields[1]);
    if (!variant) throw Error("sensitivity csv: bad variant: " + fields[1]);
    HypothesisScore h;
    h.hypothesis = static_cast<int>(parse_long(fields[2], "hypothesis"));
    h.score = parse_double_field(fields[3], "score");
    h.parasite_terms = static_cast<int>(parse_long(fields[4], "parasite count"));

    if (report.rows.empty() || report.rows.back().condition != *condition ||
        report.rows.back().variant != *variant) {
      SensitivityRow row;
      row.condition = *condition;
      row.variant = *variant;
      report.rows.push_back(std::move(row));
    }
    report.rows.back().top.push_back(h);
    report.rows.back().total_parasites += h.parasite_terms;
  }
  if (!header_seen) throw Error("sensitivity csv: missing header");
  return report;
}

}  // namespace lv
