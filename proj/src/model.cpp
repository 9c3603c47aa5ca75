#include "lv/model.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lv/util.hpp"

namespace lv {

namespace {

std::vector<std::string> state_targets() {
  return {"0", "1", "2", "3"};
}

std::vector<std::string> tag_targets() {
  std::vector<std::string> out;
  for (int t = 1; t <= kNumTags; ++t) out.push_back(std::to_string(t));
  return out;
}

std::string ctx1(int a) { return std::to_string(a); }
std::string ctx2(int a, int b) {
  return std::to_string(a) + "," + std::to_string(b);
}

// Smoothed probability vector for a count row over a fixed target universe.
void smooth_row(const std::map<std::string, std::size_t>& counts,
                const std::vector<std::string>& universe, double alpha,
                std::map<std::string, double>& out) {
  std::size_t total = 0;
  for (const auto& [target, c] : counts) total += c;
  const double denom =
      static_cast<double>(total) + alpha * static_cast<double>(universe.size());
  for (const std::string& target : universe) {
    auto it = counts.find(target);
    const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    const double p = (c + alpha) / denom;
    if (p > 0.0) out[target] = p;
  }
}

}  // namespace

void CondTable::add_count(const std::string& context, const std::string& target,
                          std::size_t count) {
  counts_[context][target] += count;
}

void CondTable::finalize(double alpha,
                         const std::vector<std::string>& closed_targets) {
  rows_.clear();
  for (const auto& [context, counts] : counts_) {
    std::map<std::string, double> row;
    if (!closed_targets.empty()) {
      smooth_row(counts, closed_targets, alpha, row);
    } else {
      std::vector<std::string> support;
      support.reserve(counts.size());
      for (const auto& [target, c] : counts) {
        (void)c;
        support.push_back(target);
      }
      smooth_row(counts, support, alpha, row);
    }
    if (!row.empty()) rows_[context] = std::move(row);
  }
  counts_.clear();
}

std::optional<double> CondTable::prob(const std::string& context,
                                      const std::string& target) const {
  auto row = rows_.find(context);
  if (row == rows_.end()) return std::nullopt;
  auto entry = row->second.find(target);
  if (entry == row->second.end()) return std::nullopt;
  return entry->second;
}

bool CondTable::has_context(const std::string& context) const {
  return rows_.count(context) > 0;
}

void CondTable::for_each(
    const std::function<void(const std::string&, const std::string&, double)>&
        fn) const {
  for (const auto& [context, row] : rows_) {
    for (const auto& [target, p] : row) fn(context, target, p);
  }
}

void CondTable::set(const std::string& context, const std::string& target,
                    double prob) {
  rows_[context][target] = prob;
}

// ---------------------------------------------------------------------------
// ModelParams accessors.
// ---------------------------------------------------------------------------

namespace {

double log_or_floor(double p, double log_floor) {
  return p > 0.0 ? std::log(p) : log_floor;
}

// Lookup into a closed-target table: materialized entry wins; a missing
// context falls back to the uniform pseudo-count row when alpha > 0 and the
// floor when alpha == 0; a missing target in a materialized row only happens
// when alpha == 0 (zero count) and scores the floor.
double closed_log_prob(const CondTable& table, const std::string& context,
                       const std::string& target, double alpha, int cardinality,
                       double log_floor) {
  if (auto p = table.prob(context, target)) return std::log(*p);
  if (!table.has_context(context) && alpha > 0.0) {
    return std::log(1.0 / static_cast<double>(cardinality));
  }
  return log_floor;
}

double open_log_prob(const CondTable& table, const std::string& context,
                     const std::string& target, double log_floor) {
  if (auto p = table.prob(context, target)) return std::log(*p);
  return log_floor;
}

}  // namespace

double ModelParams::log_pi(int state) const {
  return log_or_floor(pi[static_cast<std::size_t>(state)], smoothing.log_floor);
}

double ModelParams::log_trans_first(int prev, int next) const {
  return closed_log_prob(trans_first, ctx1(prev), std::to_string(next),
                         smoothing.alpha, kNumStates, smoothing.log_floor);
}

double ModelParams::log_trans_second(int prev2, int prev, int next) const {
  return closed_log_prob(trans_second, ctx2(prev2, prev), std::to_string(next),
                         smoothing.alpha, kNumStates, smoothing.log_floor);
}

double ModelParams::log_trans_pos(int tag, int prev, int next) const {
  return closed_log_prob(trans_pos, ctx2(tag, prev), std::to_string(next),
                         smoothing.alpha, kNumStates, smoothing.log_floor);
}

double ModelParams::lexical_log_prob(LexModel model, int a, int b,
                                     const std::string& surface,
                                     bool is_known) const {
  std::string context;
  switch (model) {
    case LexModel::mono_first:
      context = ctx1(b);
      break;
    case LexModel::mono_second:
    case LexModel::pos_cond:
      context = ctx2(a, b);
      break;
  }
  if (is_known) {
    const CondTable* table = nullptr;
    switch (model) {
      case LexModel::mono_first: table = &lex_mono1; break;
      case LexModel::mono_second: table = &lex_mono2; break;
      case LexModel::pos_cond: table = &lex_pos; break;
    }
    return open_log_prob(*table, context, surface, smoothing.log_floor);
  }
  const CondTable* table = nullptr;
  switch (model) {
    case LexModel::mono_first: table = &unk_mono1; break;
    case LexModel::mono_second: table = &unk_mono2; break;
    case LexModel::pos_cond: table = &unk_pos; break;
  }
  return open_log_prob(*table, context, utf8_prefix(surface, prefix_len),
                       smoothing.log_floor);
}

double ModelParams::log_pos_pi(int tag) const {
  return log_or_floor(pos_pi[static_cast<std::size_t>(tag - 1)],
                      smoothing.log_floor);
}

double ModelParams::log_pos_trans(int prev_tag, int tag) const {
  return closed_log_prob(pos_trans, ctx1(prev_tag), std::to_string(tag),
                         smoothing.alpha, kNumTags, smoothing.log_floor);
}

double ModelParams::log_pos_emit(int tag, const std::string& surface) const {
  if (known(surface)) {
    return open_log_prob(pos_emit, ctx1(tag), surface, smoothing.log_floor);
  }
  return open_log_prob(pos_unk, ctx1(tag), utf8_prefix(surface, prefix_len),
                       smoothing.log_floor);
}

bool ModelParams::operator==(const ModelParams& other) const {
  return tagset == other.tagset && smoothing.alpha == other.smoothing.alpha &&
         smoothing.log_floor == other.smoothing.log_floor &&
         prefix_len == other.prefix_len && lambda_max == other.lambda_max &&
         pi == other.pi && trans_first == other.trans_first &&
         trans_second == other.trans_second && trans_pos == other.trans_pos &&
         lex_mono1 == other.lex_mono1 && lex_mono2 == other.lex_mono2 &&
         lex_pos == other.lex_pos && unk_mono1 == other.unk_mono1 &&
         unk_mono2 == other.unk_mono2 && unk_pos == other.unk_pos &&
         pos_pi == other.pos_pi && pos_trans == other.pos_trans &&
         pos_emit == other.pos_emit && pos_unk == other.pos_unk &&
         vocabulary == other.vocabulary;
}

// ---------------------------------------------------------------------------
// Training.
// ---------------------------------------------------------------------------

ModelParams train(const Corpus& corpus, const TrainOptions& options) {
  if (corpus.sentences.empty()) throw Error("train: empty corpus");
  if (options.prefix_len < 1 || options.prefix_len > 8) {
    throw Error("train: prefix_len must be in 1..8");
  }
  if (options.smoothing.alpha < 0.0) {
    throw Error("train: alpha must be >= 0");
  }
  ModelParams params;
  params.tagset = corpus.tagset;
  params.smoothing = options.smoothing;
  params.prefix_len = options.prefix_len;
  params.lambda_max = options.lambda_max;

  const double alpha = options.smoothing.alpha;

  std::array<std::size_t, kNumStates> pi_counts{};
  std::array<std::size_t, kNumTags> pos_pi_counts{};

  auto prefix = [&](const std::string& s) {
    return utf8_prefix(s, options.prefix_len);
  };

  for (const Sentence& sentence : corpus.sentences) {
    const auto& toks = sentence.tokens;
    const std::size_t n = toks.size();
    ++pi_counts[static_cast<std::size_t>(toks[0].state)];
    ++pos_pi_counts[static_cast<std::size_t>(toks[0].pos - 1)];
    for (std::size_t l = 0; l < n; ++l) {
      const Token& t = toks[l];
      params.lex_mono1.add_count(ctx1(t.state), t.surface);
      params.unk_mono1.add_count(ctx1(t.state), prefix(t.surface));
      params.lex_pos.add_count(ctx2(t.pos, t.state), t.surface);
      params.unk_pos.add_count(ctx2(t.pos, t.state), prefix(t.surface));
      params.pos_emit.add_count(ctx1(t.pos), t.surface);
      params.pos_unk.add_count(ctx1(t.pos), prefix(t.surface));
      params.vocabulary.insert(t.surface);
      if (l >= 1) {
        const Token& p = toks[l - 1];
        params.trans_first.add_count(ctx1(p.state), std::to_string(t.state));
        params.trans_pos.add_count(ctx2(p.pos, p.state),
                                   std::to_string(t.state));
        params.pos_trans.add_count(ctx1(p.pos), std::to_string(t.pos));
        params.lex_mono2.add_count(ctx2(p.state, t.state), t.surface);
        params.unk_mono2.add_count(ctx2(p.state, t.state), prefix(t.surface));
      }
      if (l >= 2) {
        params.trans_second.add_count(
            ctx2(toks[l - 2].state, toks[l - 1].state),
            std::to_string(t.state));
      }
    }
  }

  // Initial distributions over their closed spaces.
  const auto pi_total = static_cast<double>(corpus.sentences.size());
  for (int k = 0; k < kNumStates; ++k) {
    params.pi[static_cast<std::size_t>(k)] =
        (static_cast<double>(pi_counts[static_cast<std::size_t>(k)]) + alpha) /
        (pi_total + alpha * kNumStates);
  }
  for (int t = 0; t < kNumTags; ++t) {
    params.pos_pi[static_cast<std::size_t>(t)] =
        (static_cast<double>(pos_pi_counts[static_cast<std::size_t>(t)]) +
         alpha) /
        (pi_total + alpha * kNumTags);
  }

  const std::vector<std::string> states = state_targets();
  const std::vector<std::string> tags = tag_targets();
  const std::vector<std::string> open;
  params.trans_first.finalize(alpha, states);
  params.trans_second.finalize(alpha, states);
  params.trans_pos.finalize(alpha, states);
  params.pos_trans.finalize(alpha, tags);
  params.lex_mono1.finalize(alpha, open);
  params.lex_mono2.finalize(alpha, open);
  params.lex_pos.finalize(alpha, open);
  params.unk_mono1.finalize(alpha, open);
  params.unk_mono2.finalize(alpha, open);
  params.unk_pos.finalize(alpha, open);
  params.pos_emit.finalize(alpha, open);
  params.pos_unk.finalize(alpha, open);
  return params;
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kFormatName = "lv-model";
constexpr int kFormatVersion = 1;

struct TableRef {
  const char* id;
  const CondTable* table;
};

std::vector<TableRef> table_registry(const ModelParams& p) {
  return {
      {"trans_first", &p.trans_first}, {"trans_second", &p.trans_second},
      {"trans_pos", &p.trans_pos},     {"lex_mono1", &p.lex_mono1},
      {"lex_mono2", &p.lex_mono2},     {"lex_pos", &p.lex_pos},
      {"unk_mono1", &p.unk_mono1},     {"unk_mono2", &p.unk_mono2},
      {"unk_pos", &p.unk_pos},         {"pos_trans", &p.pos_trans},
      {"pos_emit", &p.pos_emit},       {"pos_unk", &p.pos_unk},
  };
}

CondTable* table_by_id(ModelParams& p, const std::string& id) {
  if (id == "trans_first") return &p.trans_first;
  if (id == "trans_second") return &p.trans_second;
  if (id == "trans_pos") return &p.trans_pos;
  if (id == "lex_mono1") return &p.lex_mono1;
  if (id == "lex_mono2") return &p.lex_mono2;
  if (id == "lex_pos") return &p.lex_pos;
  if (id == "unk_mono1") return &p.unk_mono1;
  if (id == "unk_mono2") return &p.unk_mono2;
  if (id == "unk_pos") return &p.unk_pos;
  if (id == "pos_trans") return &p.pos_trans;
  if (id == "pos_emit") return &p.pos_emit;
  if (id == "pos_unk") return &p.pos_unk;
  return nullptr;
}

double parse_double_field(const std::string& s, const std::string& where) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0' || s.empty()) {
    throw Error(where + ": non-numeric field '" + s + "'");
  }
  return v;
}

long parse_int_field(const std::string& s, const std::string& where) {
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == nullptr || *end != '\0' || s.empty()) {
    throw Error(where + ": non-integer field '" + s + "'");
  }
  return v;
}

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

}  // namespace

std::string serialize_model(const ModelParams& params) {
  std::ostringstream out;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(params.tagset.hash()));
  out << kFormatName << " " << kFormatVersion << "\n";
  out << "tagset_hash\t" << hash_hex << "\n";
  out << "tagset";
  for (const std::string& name : params.tagset.names) out << '\t' << name;
  out << "\n";
  out << "prefix_len\t" << params.prefix_len << "\n";
  out << "lambda_max\t" << format_g17(params.lambda_max) << "\n";
  out << "alpha\t" << format_g17(params.smoothing.alpha) << "\n";
  out << "log_floor\t" << format_g17(params.smoothing.log_floor) << "\n";
  out << "tables\n";
  for (int k = 0; k < kNumStates; ++k) {
    out << "pi\t-\t" << k << '\t'
        << format_g17(params.pi[static_cast<std::size_t>(k)]) << "\n";
  }
  for (int t = 1; t <= kNumTags; ++t) {
    out << "pos_pi\t-\t" << t << '\t'
        << format_g17(params.pos_pi[static_cast<std::size_t>(t - 1)]) << "\n";
  }
  for (const TableRef& ref : table_registry(params)) {
    ref.table->for_each([&](const std::string& context,
                            const std::string& target, double p) {
      out << ref.id << '\t' << context << '\t' << target << '\t'
          << format_g17(p) << "\n";
    });
  }
  return out.str();
}

void save_model(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << serialize_model(params);
  if (!out) throw Error("write failed: " + path);
}

ModelParams parse_model(const std::string& text, const std::string& where) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  auto at = [&]() { return where + ":" + std::to_string(line_no); };

  if (!next_line()) throw Error(where + ": empty model file");
  {
    std::istringstream header(line);
    std::string name;
    int version = 0;
    header >> name >> version;
    if (name != kFormatName) {
      throw Error(at() + ": not a model file (bad magic '" + name + "')");
    }
    if (version != kFormatVersion) {
      throw Error(at() + ": unsupported model format version " +
                  std::to_string(version));
    }
  }

  ModelParams params;
  std::string declared_hash;
  bool saw_tables = false;
  while (next_line()) {
    if (line == "tables") {
      saw_tables = true;
      break;
    }
    std::vector<std::string> fields = split_tabs(line);
    if (fields.empty()) throw Error(at() + ": malformed header line");
    const std::string& key = fields[0];
    if (key == "tagset_hash" && fields.size() == 2) {
      declared_hash = fields[1];
    } else if (key == "tagset") {
      params.tagset.names.assign(fields.begin() + 1, fields.end());
    } else if (key == "prefix_len" && fields.size() == 2) {
      params.prefix_len = static_cast<int>(parse_int_field(fields[1], at()));
    } else if (key == "lambda_max" && fields.size() == 2) {
      params.lambda_max = parse_double_field(fields[1], at());
    } else if (key == "alpha" && fields.size() == 2) {
      params.smoothing.alpha = parse_double_field(fields[1], at());
    } else if (key == "log_floor" && fields.size() == 2) {
      params.smoothing.log_floor = parse_double_field(fields[1], at());
    } else {
      throw Error(at() + ": unrecognized header line '" + line + "'");
    }
  }
  if (!saw_tables) throw Error(where + ": truncated model file (no tables)");
  if (params.tagset.names.size() != static_cast<std::size_t>(kNumTags)) {
    throw Error(where + ": model tagset must have " + std::to_string(kNumTags) +
                " names");
  }
  params.tagset.boundary = params.tagset.code(kBoundarySurface);
  if (params.tagset.boundary == 0) {
    throw Error(where + ": model tagset lacks the boundary tag \".\"");
  }
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(params.tagset.hash()));
  if (!declared_hash.empty() && declared_hash != hash_hex) {
    throw Error(where + ": tagset hash mismatch (file says " + declared_hash +
                ", names hash to " + hash_hex + ")");
  }

  while (next_line()) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != 4) {
      throw Error(at() + ": expected 4 tab-separated fields, got " +
                  std::to_string(fields.size()));
    }
    const std::string& id = fields[0];
    const std::string& context = fields[1];
    const std::string& target = fields[2];
    const double p = parse_double_field(fields[3], at());
    if (id == "pi") {
      long k = parse_int_field(target, at());
      if (k < 0 || k >= kNumStates) throw Error(at() + ": pi state out of range");
      params.pi[static_cast<std::size_t>(k)] = p;
    } else if (id == "pos_pi") {
      long t = parse_int_field(target, at());
      if (t < 1 || t > kNumTags) throw Error(at() + ": pos_pi tag out of range");
      params.pos_pi[static_cast<std::size_t>(t - 1)] = p;
    } else if (CondTable* table = table_by_id(params, id)) {
      table->set(context, target, p);
    } else {
      throw Error(at() + ": unknown table id '" + id + "'");
    }
  }

  // The vocabulary is exactly the surface support of the first-order lexical
  // table (every training token is counted there under its own state).
  params.lex_mono1.for_each([&](const std::string&, const std::string& target,
                                double) { params.vocabulary.insert(target); });
  if (params.vocabulary.empty()) {
    throw Error(where + ": model has no lexical entries");
  }
  return params;
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str(), path);
}

}  // namespace lv
