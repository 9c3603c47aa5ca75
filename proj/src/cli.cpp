#include "lv/cli.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lv/diagnostics.hpp"
#include "lv/eval.hpp"
#include "lv/util.hpp"

namespace lv {

namespace {

// Option storage shared across subcommands (only one subcommand parses).
struct CliState {
  std::string corpus_path;
  std::string tagset_path;
  std::string model_path;
  std::string out_path;
  std::string similar_path;
  std::string variant = "mono1";
  std::string first_layer = "gold";
  std::vector<std::string> conditions;
  double lambda = 4.0;
  double alpha = 0.01;
  int prefix_len = 2;
  int topk_diagnose = 4;
  int topk_sensitivity = 3;
  int sentence = 0;
  int position = 0;
  std::uint64_t seed = 0;
  bool oracle = false;
};

Variant need_variant(const std::string& name) {
  const std::optional<Variant> v = variant_from_name(name);
  if (!v) throw Error("unknown variant: " + name);
  return *v;
}

FirstLayerMode need_first_layer(const std::string& name) {
  if (name == "gold") return FirstLayerMode::gold;
  if (name == "hmm") return FirstLayerMode::hmm;
  throw Error("unknown first-layer mode: " + name);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& out_path, std::ostream& fallback,
                const std::string& text) {
  if (out_path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw Error("cannot write " + out_path);
  f << text;
  if (!f) throw Error("failed while writing " + out_path);
}

TrainOptions train_options(const CliState& st) {
  TrainOptions options;
  options.smoothing.alpha = st.alpha;
  options.prefix_len = st.prefix_len;
  options.lambda_max = st.lambda;
  return options;
}

void run_train(const CliState& st) {
  const TagSet tagset = load_tagset(st.tagset_path);
  const Corpus corpus = load_corpus(st.corpus_path, tagset);
  const ModelParams params = train(corpus, train_options(st));
  save_model(params, st.out_path);
  log_info("train: " + std::to_string(corpus.sentences.size()) +
           " sentences -> " + st.out_path);
}

void run_decode(const CliState& st, bool lambda_given, std::ostream& out) {
  ModelParams params = load_model(st.model_path);
  if (lambda_given) params.lambda_max = st.lambda;
  const Corpus corpus = load_corpus(st.corpus_path, params.tagset);
  const Variant variant = need_variant(st.variant);
  DecodeOptions options;
  options.first_layer = need_first_layer(st.first_layer);
  options.with_audits = false;

  std::string text;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    const Sentence& sentence = corpus.sentences[i];
    const DecodeTrace trace = decode(sentence, params, variant, options);
    if (st.oracle) {
      if (sentence.tokens.size() <= 8) {
        const OracleResult oracle = brute_force_oracle(
            sentence, trace.first_layer, params, variant);
        if (oracle.path != trace.path) {
          throw Error("decode: oracle disagreement at sentence " +
                      std::to_string(i));
        }
      } else {
        log_warn("decode: sentence " + std::to_string(i) +
                 " has more than 8 tokens; oracle check skipped");
      }
    }
    for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
      text += sentence.tokens[t].surface;
      text += '\t';
      text += std::to_string(sentence.tokens[t].state);
      text += '\t';
      text += std::to_string(trace.path[t]);
      text += '\n';
    }
    text += "# score=" + format_g17(trace.total) + "\n";
    if (i + 1 < corpus.sentences.size()) text += '\n';
  }
  write_text(st.out_path, out, text);
}

void run_eval(const CliState& st, bool lambda_given, std::ostream& out) {
  ModelParams params = load_model(st.model_path);
  if (lambda_given) params.lambda_max = st.lambda;
  const Corpus corpus = load_corpus(st.corpus_path, params.tagset);
  const Metrics metrics = evaluate(params, corpus, need_variant(st.variant),
                                   need_first_layer(st.first_layer));
  write_text(st.out_path, out, eval_report(metrics));
}

EvalOptions eval_options(const CliState& st) {
  EvalOptions options;
  options.train = train_options(st);
  options.first_layer = need_first_layer(st.first_layer);
  options.seed = st.seed;
  return options;
}

void run_xval(const CliState& st, std::ostream& out) {
  const TagSet tagset = load_tagset(st.tagset_path);
  const Corpus corpus = load_corpus(st.corpus_path, tagset);
  const XvalResult result =
      cross_validate(corpus, {need_variant(st.variant)}, eval_options(st));
  write_text(st.out_path, out, xval_csv(result));
}

void run_compare(const CliState& st, std::ostream& out) {
  const TagSet tagset = load_tagset(st.tagset_path);
  const Corpus corpus = load_corpus(st.corpus_path, tagset);
  const std::vector<CompareRow> rows =
      compare_methods(corpus, {}, eval_options(st));
  write_text(st.out_path, out, compare_csv(rows));
}

void run_diagnose(const CliState& st, bool lambda_given, std::ostream& out) {
  ModelParams params = load_model(st.model_path);
  if (lambda_given) params.lambda_max = st.lambda;
  const Corpus corpus = load_corpus(st.corpus_path, params.tagset);
  if (st.sentence < 0 ||
      st.sentence >= static_cast<int>(corpus.sentences.size())) {
    throw Error("diagnose: sentence index out of range");
  }
  const Sentence& sentence =
      corpus.sentences[static_cast<std::size_t>(st.sentence)];
  DecodeOptions options;
  options.first_layer = need_first_layer(st.first_layer);
  options.with_audits = true;
  const DecodeTrace trace =
      decode(sentence, params, need_variant(st.variant), options);
  std::string text =
      build_situations_table(trace, sentence, st.position, st.topk_diagnose);
  const ParasiteSummary summary =
      count_parasites(trace, sentence, st.position, st.topk_diagnose);
  text += "total_parasites " + std::to_string(summary.total_parasites) + "\n";
  write_text(st.out_path, out, text);
}

void run_sensitivity(const CliState& st, bool variant_given,
                     std::ostream& out) {
  const TagSet tagset = load_tagset(st.tagset_path);
  const Corpus corpus = load_corpus(st.corpus_path, tagset);

  SensitivityOptions options;
  options.train = train_options(st);
  options.top_k = st.topk_sensitivity;
  options.first_layer = need_first_layer(st.first_layer);
  if (variant_given) options.variants = {need_variant(st.variant)};

  if (!st.similar_path.empty()) {
    options.similar = parse_sentence_tsv(read_file(st.similar_path), tagset,
                                         st.similar_path);
  }
  for (const std::string& name : st.conditions) {
    const std::optional<Condition> condition = condition_from_name(name);
    if (!condition) throw Error("unknown condition: " + name);
    options.conditions.push_back(*condition);
  }
  if (options.conditions.empty()) {
    // Default: every condition that can run. add_similar joins in only when
    // a look-alike sentence was provided.
    options.conditions = {Condition::base, Condition::duplicate,
                          Condition::unknown_word};
    if (options.similar.has_value()) {
      options.conditions.insert(options.conditions.begin() + 1,
                                Condition::add_similar);
    }
  }

  const SensitivityReport report =
      sensitivity_report(corpus, st.sentence, st.position, options);
  write_text(st.out_path, out, sensitivity_csv(report));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CliState st;
  CLI::App app{"Layered ingredient-state decoding toolkit"};
  app.name("lv");
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read options from a config file (command line wins)");

  const std::string variants_help = "mono1|mono2|double|transfer";

  CLI::App* train_cmd = app.add_subcommand("train", "Count-train a model");
  train_cmd->add_option("--corpus", st.corpus_path, "Training corpus (TSV)")
      ->required();
  train_cmd->add_option("--tagset", st.tagset_path, "Tagset file")->required();
  train_cmd->add_option("--out", st.out_path, "Model output path")->required();
  train_cmd->add_option("--alpha", st.alpha, "Additive smoothing")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--prefix-len", st.prefix_len,
                        "Unknown-word prefix length (codepoints)")
      ->check(CLI::Range(1, 8));
  train_cmd->add_option("--lambda", st.lambda,
                        "Default lexical weight stored in the model")
      ->check(CLI::NonNegativeNumber);

  CLI::App* decode_cmd =
      app.add_subcommand("decode", "Decode ingredient states");
  decode_cmd->add_option("--model", st.model_path, "Model file")->required();
  decode_cmd->add_option("--corpus", st.corpus_path, "Sentences to decode (TSV)")
      ->required();
  decode_cmd->add_option("--variant", st.variant, variants_help)
      ->check(CLI::IsMember({"mono1", "mono2", "double", "transfer"}));
  decode_cmd->add_option("--first-layer", st.first_layer, "gold|hmm")
      ->check(CLI::IsMember({"gold", "hmm"}));
  decode_cmd->add_option("--lambda", st.lambda, "Override the lexical weight")
      ->check(CLI::NonNegativeNumber);
  decode_cmd->add_flag("--oracle", st.oracle,
                       "Cross-check each decode against exhaustive search "
                       "(sentences of at most 8 tokens)");
  decode_cmd->add_option("--out", st.out_path, "Output path (default stdout)");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Score a model on a corpus");
  eval_cmd->add_option("--model", st.model_path, "Model file")->required();
  eval_cmd->add_option("--corpus", st.corpus_path, "Evaluation corpus (TSV)")
      ->required();
  eval_cmd->add_option("--variant", st.variant, variants_help)
      ->check(CLI::IsMember({"mono1", "mono2", "double", "transfer"}));
  eval_cmd->add_option("--first-layer", st.first_layer, "gold|hmm")
      ->check(CLI::IsMember({"gold", "hmm"}));
  eval_cmd->add_option("--lambda", st.lambda, "Override the lexical weight")
      ->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--out", st.out_path, "Output path (default stdout)");

  CLI::App* xval_cmd = app.add_subcommand(
      "xval", "10 seeded 80/20 holdout evaluations of one variant");
  xval_cmd->add_option("--corpus", st.corpus_path, "Corpus (TSV)")->required();
  xval_cmd->add_option("--tagset", st.tagset_path, "Tagset file")->required();
  xval_cmd->add_option("--variant", st.variant, variants_help)
      ->check(CLI::IsMember({"mono1", "mono2", "double", "transfer"}));
  xval_cmd->add_option("--first-layer", st.first_layer, "gold|hmm")
      ->check(CLI::IsMember({"gold", "hmm"}));
  xval_cmd->add_option("--seed", st.seed, "Split seed");
  xval_cmd->add_option("--alpha", st.alpha, "Additive smoothing")
      ->check(CLI::NonNegativeNumber);
  xval_cmd->add_option("--prefix-len", st.prefix_len,
                       "Unknown-word prefix length (codepoints)")
      ->check(CLI::Range(1, 8));
  xval_cmd->add_option("--lambda", st.lambda, "Lexical weight")
      ->check(CLI::NonNegativeNumber);
  xval_cmd->add_option("--out", st.out_path, "Output path (default stdout)");

  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "All four variants on one shared holdout split");
  compare_cmd->add_option("--corpus", st.corpus_path, "Corpus (TSV)")
      ->required();
  compare_cmd->add_option("--tagset", st.tagset_path, "Tagset file")
      ->required();
  compare_cmd->add_option("--first-layer", st.first_layer, "gold|hmm")
      ->check(CLI::IsMember({"gold", "hmm"}));
  compare_cmd->add_option("--seed", st.seed, "Split seed");
  compare_cmd->add_option("--alpha", st.alpha, "Additive smoothing")
      ->check(CLI::NonNegativeNumber);
  compare_cmd->add_option("--prefix-len", st.prefix_len,
                          "Unknown-word prefix length (codepoints)")
      ->check(CLI::Range(1, 8));
  compare_cmd->add_option("--lambda", st.lambda, "Lexical weight")
      ->check(CLI::NonNegativeNumber);
  compare_cmd->add_option("--out", st.out_path, "Output path (default stdout)");

  CLI::App* diagnose_cmd = app.add_subcommand(
      "diagnose", "Audit the per-term score situations at one position");
  diagnose_cmd->add_option("--model", st.model_path, "Model file")->required();
  diagnose_cmd->add_option("--corpus", st.corpus_path, "Corpus (TSV)")
      ->required();
  diagnose_cmd->add_option("--sentence", st.sentence, "Sentence index (0-based)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  diagnose_cmd
      ->add_option("--position", st.position,
                   "Token position in the padded sentence (0-based)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  diagnose_cmd->add_option("--variant", st.variant, variants_help)
      ->check(CLI::IsMember({"mono1", "mono2", "double", "transfer"}));
  diagnose_cmd->add_option("--first-layer", st.first_layer, "gold|hmm")
      ->check(CLI::IsMember({"gold", "hmm"}));
  diagnose_cmd->add_option("--topk", st.topk_diagnose, "Hypothesis cells shown")
      ->check(CLI::Range(1, 4));
  diagnose_cmd->add_option("--lambda", st.lambda, "Override the lexical weight")
      ->check(CLI::NonNegativeNumber);
  diagnose_cmd->add_option("--out", st.out_path, "Output path (default stdout)");

  CLI::App* sensitivity_cmd = app.add_subcommand(
      "sensitivity",
      "Retrain under corpus edits and track scores/parasites at one token");
  sensitivity_cmd->add_option("--corpus", st.corpus_path, "Corpus (TSV)")
      ->required();
  sensitivity_cmd->add_option("--tagset", st.tagset_path, "Tagset file")
      ->required();
  sensitivity_cmd
      ->add_option("--sentence", st.sentence, "Sentence index (0-based)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  sensitivity_cmd
      ->add_option("--position", st.position,
                   "Token position in the padded sentence (0-based)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  sensitivity_cmd
      ->add_option("--conditions", st.conditions,
                   "base,add_similar,duplicate,unknown_word (default: all "
                   "runnable)")
      ->delimiter(',');
  sensitivity_cmd->add_option("--similar", st.similar_path,
                              "Look-alike sentence (TSV) for add_similar");
  sensitivity_cmd->add_option("--variant", st.variant,
                              variants_help + " (default: all four)")
      ->check(CLI::IsMember({"mono1", "mono2", "double", "transfer"}));
  sensitivity_cmd->add_option("--first-layer", st.first_layer, "gold|hmm")
      ->check(CLI::IsMember({"gold", "hmm"}));
  sensitivity_cmd
      ->add_option("--topk", st.topk_sensitivity, "Hypothesis cells per report")
      ->check(CLI::Range(1, 4));
  sensitivity_cmd->add_option("--alpha", st.alpha, "Additive smoothing")
      ->check(CLI::NonNegativeNumber);
  sensitivity_cmd
      ->add_option("--prefix-len", st.prefix_len,
                   "Unknown-word prefix length (codepoints)")
      ->check(CLI::Range(1, 8));
  sensitivity_cmd->add_option("--lambda", st.lambda, "Lexical weight")
      ->check(CLI::NonNegativeNumber);
  sensitivity_cmd->add_option("--out", st.out_path,
                              "Output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (train_cmd->parsed()) {
      run_train(st);
    } else if (decode_cmd->parsed()) {
      run_decode(st, decode_cmd->count("--lambda") > 0, out);
    } else if (eval_cmd->parsed()) {
      run_eval(st, eval_cmd->count("--lambda") > 0, out);
    } else if (xval_cmd->parsed()) {
      run_xval(st, out);
    } else if (compare_cmd->parsed()) {
      run_compare(st, out);
    } else if (diagnose_cmd->parsed()) {
      run_diagnose(st, diagnose_cmd->count("--lambda") > 0, out);
    } else if (sensitivity_cmd->parsed()) {
      run_sensitivity(st, sensitivity_cmd->count("--variant") > 0, out);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e, out, err);  // --help and friends
    }
    app.exit(e, out, err);
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lv
