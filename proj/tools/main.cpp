#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "l2s/batch.hpp"
#include "l2s/conll.hpp"
#include "l2s/dep/oracle_check.hpp"
#include "l2s/dep/pipeline.hpp"
#include "l2s/errors.hpp"
#include "l2s/eval.hpp"
#include "l2s/learner.hpp"
#include "l2s/search.hpp"
#include "l2s/tagger.hpp"

namespace fs = std::filesystem;
using namespace l2s;

namespace {

// L2S_LOG=quiet|info|debug
enum class Verbosity { Quiet, Info, Debug };

Verbosity verbosity() {
  const char* v = std::getenv("L2S_LOG");
  if (!v) return Verbosity::Info;
  const std::string s(v);
  if (s == "quiet" || s == "0") return Verbosity::Quiet;
  if (s == "debug" || s == "2") return Verbosity::Debug;
  return Verbosity::Info;
}

bool info() { return verbosity() >= Verbosity::Info; }
bool debug() { return verbosity() >= Verbosity::Debug; }

struct LearnOptions {
  std::string learner = "nn+ftrl";
  std::uint32_t hidden = 5;
  std::uint32_t bits = kDefaultBits;
  float learning_rate = 0.5f;
  FtrlParams ftrl;
  std::size_t passes = 5;
  double alpha = 1e-5;
  std::string rollin = "mixture";
  std::string rollout = "reference";
  bool reference_increases = false;
  std::uint64_t seed = 0;
  std::uint32_t history = 1;
  std::uint32_t stride = 1;
  bool exact_rollouts = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--passes", passes, "Training passes")->check(CLI::PositiveNumber);
    cmd.add_option("--alpha", alpha, "Mixture rate; P(reference) = (1-alpha)^t")
        ->check(CLI::Range(0.0, 1.0))
        ->check([](const std::string& s) { return (std::stod(s) > 0 && std::stod(s) < 1) ? "" : "alpha must lie in (0,1)"; });
    cmd.add_option("--learner", learner, "Base learner")->check(CLI::IsMember({"sgd", "sgd+", "nn", "nn+ftrl", "multiclass"}));
    cmd.add_option("--hidden", hidden, "Hidden units of the network learners")->check(CLI::PositiveNumber);
    cmd.add_option("--bits", bits, "Hash bits")->check(CLI::Range(1, 30));
    cmd.add_option("--learning-rate", learning_rate, "Step size of the SGD learners");
    cmd.add_option("--ftrl-alpha", ftrl.alpha, "FTRL alpha");
    cmd.add_option("--ftrl-beta", ftrl.beta, "FTRL beta");
    cmd.add_option("--l1", ftrl.l1, "FTRL L1");
    cmd.add_option("--l2", ftrl.l2, "FTRL L2");
    cmd.add_option("--rollin", rollin, "Rollin policy")->check(CLI::IsMember({"reference", "learned", "mixture"}));
    cmd.add_option("--rollout", rollout, "Rollout policy")->check(CLI::IsMember({"reference", "learned", "mixture"}));
    cmd.add_flag("--reference-increases", reference_increases, "Use P(reference) = 1-(1-alpha)^t instead");
    cmd.add_option("--seed", seed, "Random seed");
    cmd.add_option("--history", history, "Previous actions used as features (0 disables)");
    cmd.add_option("--deviation-stride", stride, "Deviate at every k-th step")->check(CLI::PositiveNumber);
    cmd.add_flag("--exact-rollouts", exact_rollouts, "Always re-run the decoder for rollouts");
  }

  LearnerConfig learner_config() const {
    LearnerConfig c;
    c.kind = parse_learner_kind(learner);
    c.bits = bits;
    c.hidden = hidden;
    c.learning_rate = learning_rate;
    c.ftrl = ftrl;
    c.seed = seed;
    return c;
  }

  PolicySchedule schedule() const {
    PolicySchedule s;
    s.rollin = parse_policy_kind(rollin);
    s.rollout = parse_policy_kind(rollout);
    s.alpha = alpha;
    s.reference_decays = !reference_increases;
    return s;
  }

  SearchOptions search() const { return {.history_length = history, .deviation_stride = stride, .use_oracle_costs = !exact_rollouts}; }
};

void print_pass(const PassStats& s) {
  if (!info()) return;
  std::cerr << "pass " << s.pass << "  avg_loss " << std::fixed << std::setprecision(4) << s.average_loss
            << "  examples " << s.examples << "  round " << s.round << "  p_ref " << std::setprecision(6)
            << s.reference_probability << std::defaultfloat;
  if (debug()) std::cerr << "  instances " << s.instances;
  std::cerr << '\n';
}

void save_model(const PolicyModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model " + path);
  model.save(out);
  if (!out) throw LoadError("failed writing model " + path);
}

PolicyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model " + path);
  return PolicyModel::load(in);
}

// Usage errors print a diagnostic and exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int cmd_train(const std::string& data, const std::string& model_path, const LearnOptions& lo,
              const std::string& feature_set, bool unlabeled, const std::string& pos_column) {
  conll::ReadOptions ro;
  const auto sentences = conll::read_conll_file(data, ro);
  dep::ParserConfig pc;
  pc.labeled = !unlabeled;
  pc.feature_set = dep::parse_feature_set(feature_set);
  pc.bits = lo.bits;
  pc.pos_column = pos_column == "cpostag" ? conll::PosColumn::Coarse : conll::PosColumn::Fine;

  dep::TrainSettings ts;
  ts.passes = lo.passes;
  ts.schedule = lo.schedule();
  ts.search = lo.search();
  ts.seed = lo.seed;
  ts.on_pass = print_pass;
  if (info())
    std::cerr << "training " << lo.learner << " on " << sentences.size() << " sentences, features " << feature_set
              << ", rollin " << lo.rollin << ", rollout " << lo.rollout << ", alpha " << lo.alpha << '\n';
  auto trained = dep::train_parser(sentences, pc, lo.learner_config(), ts);
  if (info() && trained.skipped_nonprojective)
    std::cerr << "skipped " << trained.skipped_nonprojective << " non-projective sentences\n";
  save_model(trained.model, model_path);
  if (info()) std::cerr << "model written to " << model_path << '\n';
  return 0;
}

int cmd_parse(const std::string& model_path, const std::string& input, const std::string& output,
              const std::optional<std::string>& feature_set) {
  const PolicyModel model = load_model(model_path);
  const dep::ParserTask task = dep::ParserTask::load(model);
  if (feature_set && dep::parse_feature_set(*feature_set) != task.config().feature_set)
    throw UsageError("model was trained with feature set '" + std::string(dep::to_string(task.config().feature_set)) +
                     "' but '" + *feature_set + "' was requested");
  conll::ReadOptions ro;
  ro.allow_missing_heads = true;
  const auto sentences = conll::read_conll_file(input, ro);
  const auto parsed = dep::parse_all(task, model, sentences);
  if (output.empty() || output == "-")
    conll::write_conll(std::cout, parsed);
  else
    conll::write_conll_file(output, parsed);
  if (info()) std::cerr << "parsed " << parsed.size() << " sentences\n";
  return 0;
}

int cmd_eval(const std::string& gold, const std::string& pred, bool include_punct, bool machine) {
  conll::ReadOptions ro;
  const auto g = conll::read_conll_file(gold, ro);
  ro.allow_missing_heads = true;
  const auto p = conll::read_conll_file(pred, ro);
  const auto report = eval::score(p, g, !include_punct);
  if (machine)
    eval::write_key_values(std::cout, report);
  else
    eval::write_table(std::cout, report);
  return 0;
}

int cmd_oracle_check(std::uint32_t max_len, std::size_t cases, std::uint64_t seed) {
  const auto trees = dep::oracle_check_cases(max_len, cases, seed);
  const auto report = dep::check_oracle(trees);
  std::cout << "trees " << report.trees << "\nconfigurations " << report.configurations << "\nmismatches "
            << report.mismatches << '\n';
  for (const auto& f : report.failures) std::cout << "  " << f << '\n';
  std::cout << (report.ok() ? "oracle matches brute force on every configuration\n" : "ORACLE MISMATCH\n");
  return report.ok() ? 0 : 1;
}

int cmd_tag_train(const std::string& data, const std::string& model_path, const LearnOptions& lo) {
  const auto seqs = tag::read_tagged_file(data);
  if (seqs.empty()) throw ConfigError("training set is empty");
  tag::TaggerTask task(tag::TagSet::build(seqs), lo.bits);
  PolicyModel model = task.make_model(lo.learner_config());
  model.metadata()["history"] = std::to_string(lo.history);
  std::vector<tag::TagInstance> xs;
  for (const auto& s : seqs) xs.push_back(task.prepare(s));
  PolicySchedule sched = lo.schedule();
  TrainOptions to;
  to.passes = lo.passes;
  to.seed = lo.seed;
  to.search = lo.search();
  to.on_pass = print_pass;
  train(task, std::span<const tag::TagInstance>(xs), sched, model, to);
  save_model(model, model_path);
  if (info()) std::cerr << "model written to " << model_path << '\n';
  return 0;
}

int cmd_tag_predict(const std::string& model_path, const std::string& input, const std::string& output) {
  const PolicyModel model = load_model(model_path);
  const tag::TaggerTask task = tag::TaggerTask::load(model);
  const auto seqs = tag::read_tagged_file(input);
  std::vector<tag::TagInstance> xs;
  std::size_t errors = 0, tokens = 0;
  bool gold = true;
  for (const auto& s : seqs) {
    tag::TaggedSentence bare = s;
    for (auto& t : bare) t.tag = "_";
    xs.push_back(task.prepare(bare));
  }
  SearchOptions so;
  so.history_length = dep::stored_history_length(model);
  const auto outs = decode_all(task, std::span<const tag::TagInstance>(xs), model, so);
  std::vector<tag::TaggedSentence> tagged;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    tagged.push_back(task.annotate(seqs[i], outs[i]));
    for (std::size_t k = 0; k < seqs[i].size(); ++k) {
      ++tokens;
      if (seqs[i][k].tag == "_") gold = false;
      errors += seqs[i][k].tag != tagged.back()[k].tag;
    }
  }
  if (output.empty() || output == "-") {
    tag::write_tagged(std::cout, tagged);
  } else {
    std::ofstream out(output);
    if (!out) throw LoadError("cannot write " + output);
    tag::write_tagged(out, tagged);
  }
  if (gold && tokens && info())
    std::cerr << "tag accuracy " << std::fixed << std::setprecision(2)
              << 100.0 * static_cast<double>(tokens - errors) / static_cast<double>(tokens) << " %\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-to-search dependency parser"};
  app.require_subcommand(1);

  LearnOptions lo;
  std::string data, model, input, output, gold, pred, feature_set = "full", pos_column = "postag";
  bool unlabeled = false, include_punct = false, machine = false;
  std::optional<std::string> parse_feature_set;
  std::uint32_t max_len = 6;
  std::size_t cases = 500;
  std::uint64_t check_seed = 1;

  auto* train = app.add_subcommand("train", "Train a parser on a CoNLL-X file");
  train->add_option("--data", data, "Training treebank")->required()->check(CLI::ExistingFile);
  train->add_option("--model", model, "Output model file")->required();
  train->add_option("--feature-set", feature_set, "uni, uni+bi or full")->check(CLI::IsMember({"uni", "uni+bi", "full"}));
  train->add_flag("--unlabeled", unlabeled, "Predict heads only");
  train->add_option("--pos-column", pos_column, "postag or cpostag")->check(CLI::IsMember({"postag", "cpostag"}));
  lo.add_to(*train);

  auto* parse = app.add_subcommand("parse", "Parse a CoNLL-X file");
  parse->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  parse->add_option("--input", input, "Sentences to parse")->required()->check(CLI::ExistingFile);
  parse->add_option("--output", output, "Output file (stdout by default)");
  parse->add_option("--feature-set", parse_feature_set, "Expected feature set; must match the model")
      ->check(CLI::IsMember({"uni", "uni+bi", "full"}));

  auto* evalc = app.add_subcommand("eval", "Score predicted trees against gold trees");
  evalc->add_option("--gold", gold, "Gold treebank")->required()->check(CLI::ExistingFile);
  evalc->add_option("--pred", pred, "Predicted treebank")->required()->check(CLI::ExistingFile);
  evalc->add_flag("--include-punct", include_punct, "Score punctuation tokens too");
  evalc->add_flag("--machine", machine, "key=value output at full precision");

  auto* check = app.add_subcommand("oracle-check", "Compare the dynamic oracle with brute force search");
  check->add_option("--max-len", max_len, "Maximum sentence length")->check(CLI::Range(1, 10));
  check->add_option("--cases", cases, "Random trees");
  check->add_option("--seed", check_seed, "Random seed");

  auto* tag_train = app.add_subcommand("tag-train", "Train a sequence tagger on token/tag lines");
  tag_train->add_option("--data", data, "Training file")->required()->check(CLI::ExistingFile);
  tag_train->add_option("--model", model, "Output model file")->required();
  lo.add_to(*tag_train);

  auto* tag_predict = app.add_subcommand("tag-predict", "Tag token lines");
  tag_predict->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  tag_predict->add_option("--input", input, "Tokens to tag")->required()->check(CLI::ExistingFile);
  tag_predict->add_option("--output", output, "Output file (stdout by default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(data, model, lo, feature_set, unlabeled, pos_column);
    if (*parse) return cmd_parse(model, input, output, parse_feature_set);
    if (*evalc) return cmd_eval(gold, pred, include_punct, machine);
    if (*check) return cmd_oracle_check(max_len, cases, check_seed);
    if (*tag_train) return cmd_tag_train(data, model, lo);
    if (*tag_predict) return cmd_tag_predict(model, input, output);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
