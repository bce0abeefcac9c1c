// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradient_check.hpp"
#include "l2s/conll.hpp"
#include "l2s/dep/oracle_check.hpp"
#include "l2s/dep/parser.hpp"
#include "l2s/dep/pipeline.hpp"
#include "l2s/batch.hpp"
#include "l2s/errors.hpp"
#include "l2s/eval.hpp"
#include "l2s/search.hpp"
#include "test_util.hpp"

using namespace l2s;

namespace {

const std::filesystem::path kSynth = L2S_SYNTH_DATA;
const std::filesystem::path kTestData = L2S_TEST_DATA;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void progress(const std::string& what) { std::cerr << "  ... " << what << std::endl; }

// Training runs shared between the ablation and learner comparisons.
class Runs {
 public:
  Runs(std::vector<conll::Sentence> train, std::vector<conll::Sentence> test)
      : train_(std::move(train)), test_(std::move(test)) {}

  double uas(LearnerKind kind, dep::FeatureSet fs, std::uint64_t seed) {
    const auto key = std::make_tuple(static_cast<int>(kind), static_cast<int>(fs), seed);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    dep::ParserConfig pc;
    pc.feature_set = fs;
    LearnerConfig lc;
    lc.kind = kind;
    lc.seed = seed;
    dep::TrainSettings ts;
    ts.passes = kPasses;
    ts.seed = seed;
    const auto trained = dep::train_parser(train_, pc, lc, ts);
    const auto parsed = dep::parse_all(trained.task, trained.model, test_);
    const double u = 100.0 * eval::score(parsed, test_).uas;
    progress(std::string(to_string(kind)) + " " + std::string(dep::to_string(fs)) + " seed " + std::to_string(seed) +
             ": UAS " + fmt(u) + " (" + fmt(seconds_since(t0), 1) + " s)");
    cache_[key] = u;
    return u;
  }

  double mean_uas(LearnerKind kind, dep::FeatureSet fs) {
    double sum = 0;
    for (std::uint64_t seed : kSeeds) sum += uas(kind, fs, seed);
    return sum / static_cast<double>(std::size(kSeeds));
  }

  static constexpr std::size_t kPasses = 5;
  static constexpr std::uint64_t kSeeds[] = {1, 2, 3};

 private:
  std::vector<conll::Sentence> train_, test_;
  std::map<std::tuple<int, int, std::uint64_t>, double> cache_;
};

Outcome flying_planes_trace() {
  const auto s = testutil::flying_planes_sentence();
  dep::ParserConfig pc;
  pc.labeled = false;
  dep::ParserTask task(pc, dep::LabelSet::build(std::vector{s}));
  const auto trace = testutil::flying_planes_trace();
  RunPlan plan;
  plan.prefix = trace;
  const auto t = run_trajectory(task, task.prepare(s), plan);
  const std::vector<int> expected = {-1, 2, 3, 0, 3, 4};
  const bool ok = t.output.heads == expected && t.loss == 2.0 && t.actions == trace;
  std::ostringstream d;
  d << "heads";
  for (std::size_t i = 1; i < t.output.heads.size(); ++i) d << ' ' << t.output.heads[i];
  d << ", loss " << t.loss;
  return {ok, d.str()};
}

Outcome oracle_vs_brute_force() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto trees = dep::oracle_check_cases(6, 500, 1);
  const auto r = dep::check_oracle(trees);
  const double secs = seconds_since(t0);
  bool lengths_ok = true;
  for (const auto& t : trees) lengths_ok = lengths_ok && t.size() >= 2 && t.size() <= 7 && conll::is_projective(t);
  return {r.ok() && r.trees == 500 && lengths_ok && secs < 60.0,
          std::to_string(r.trees) + " trees, " + std::to_string(r.configurations) + " configurations, " +
              std::to_string(r.mismatches) + " mismatches, " + fmt(secs, 2) + " s"};
}

Outcome reference_decode(const std::vector<conll::Sentence>& train, const std::vector<conll::Sentence>& test) {
  const dep::ParserTask task(dep::ParserConfig{}, dep::LabelSet::build(train));
  std::vector<conll::Sentence> gold, pred;
  for (const auto& s : test) {
    if (!conll::is_projective(s.heads())) continue;
    RunPlan plan;
    const auto t = run_trajectory(task, task.prepare(s), plan);
    gold.push_back(s);
    pred.push_back(task.annotate(s, t.output));
  }
  const auto r = eval::score(pred, gold, false);
  return {r.uas == 1.0 && r.las == 1.0 && !gold.empty(),
          std::to_string(gold.size()) + " sentences, UAS " + fmt(100 * r.uas) + ", LAS " + fmt(100 * r.las)};
}

Outcome fits_training_set(const std::vector<conll::Sentence>& train) {
  const std::vector<conll::Sentence> small(train.begin(), train.begin() + 50);
  dep::TrainSettings ts;
  ts.passes = 10;
  ts.seed = 1;
  double p_ref = 1.0;
  ts.on_pass = [&](const PassStats& s) { p_ref = s.reference_probability; };
  const auto trained = dep::train_parser(small, dep::ParserConfig{}, LearnerConfig{}, ts);
  const auto parsed = dep::parse_all(trained.task, trained.model, small);
  const double u = 100.0 * eval::score(parsed, small).uas;
  return {u >= 99.0, "training-set UAS " + fmt(u) + ", P(ref) in the last pass " + fmt(p_ref, 4)};
}

Outcome beats_baseline(Runs& runs, const std::vector<conll::Sentence>& test) {
  std::vector<conll::Sentence> baseline;
  for (const auto& s : test) baseline.push_back(eval::right_neighbor_baseline(s));
  const double b = 100.0 * eval::score(baseline, test).uas;
  const double u = runs.uas(LearnerKind::NnFtrl, dep::FeatureSet::Full, 1);
  return {u - b >= 20.0, "held-out UAS " + fmt(u) + " vs right-neighbour " + fmt(b)};
}

Outcome ablation(Runs& runs) {
  const double uni = runs.mean_uas(LearnerKind::NnFtrl, dep::FeatureSet::Unigram);
  const double bi = runs.mean_uas(LearnerKind::NnFtrl, dep::FeatureSet::Bigram);
  const double full = runs.mean_uas(LearnerKind::NnFtrl, dep::FeatureSet::Full);
  return {bi - uni >= 1.0 && full - bi >= 1.0,
          "uni " + fmt(uni) + ", uni+bi " + fmt(bi) + ", full " + fmt(full)};
}

Outcome learners(Runs& runs) {
  const double sgd = runs.mean_uas(LearnerKind::Sgd, dep::FeatureSet::Full);
  const double plus = runs.mean_uas(LearnerKind::SgdPlus, dep::FeatureSet::Full);
  const double nn = runs.mean_uas(LearnerKind::NnFtrl, dep::FeatureSet::Full);
  const double mc = runs.mean_uas(LearnerKind::Multiclass, dep::FeatureSet::Full);
  const double slack = 0.3;
  const bool ok = sgd <= plus + slack && plus <= nn + slack && nn >= mc;
  return {ok, "SGD " + fmt(sgd) + ", SGD+ " + fmt(plus) + ", NN+FTRL " + fmt(nn) + ", Multiclass " + fmt(mc)};
}

Outcome gradients() {
  std::mt19937_64 rng(2024);
  double worst = 0;
  std::size_t coords = 0;
  for (int i = 0; i < 100; ++i) {
    const auto r = gradcheck::check_case(rng, i % 2 == 1);
    worst = std::max(worst, r.max_relative_error);
    coords += r.coordinates;
  }
  std::ostringstream d;
  d << "100 cases, " << coords << " coordinates, max relative error " << worst;
  return {worst < 1e-4, d.str()};
}

Outcome schedule() {
  PolicySchedule s;
  s.alpha = 1e-5;
  s.round = 0;
  const double p0 = s.reference_probability();
  s.round = 69315;
  const double p1 = s.reference_probability();
  std::ostringstream d;
  d.precision(6);
  d << "P(ref) " << p0 << " at t=0, " << p1 << " at t=69315";
  return {p0 == 1.0 && p1 >= 0.49 && p1 <= 0.51, d.str()};
}

Outcome reproducible(const std::vector<conll::Sentence>& train, const std::vector<conll::Sentence>& test) {
  const std::vector<conll::Sentence> small(train.begin(), train.begin() + 200);
  auto run = [&](std::string& model_bytes, std::string& report) {
    dep::TrainSettings ts;
    ts.passes = 2;
    ts.seed = 9;
    LearnerConfig lc;
    lc.seed = 9;
    const auto trained = dep::train_parser(small, dep::ParserConfig{}, lc, ts);
    model_bytes = trained.model.serialize();
    const auto parsed = dep::parse_all(trained.task, trained.model, test);
    std::ostringstream os;
    conll::write_conll(os, parsed);
    eval::write_key_values(os, eval::score(parsed, test));
    report = os.str();
  };
  std::string m1, r1, m2, r2;
  run(m1, r1);
  run(m2, r2);
  return {m1 == m2 && r1 == r2, "model " + std::to_string(m1.size()) + " bytes, report " + std::to_string(r1.size()) +
                                    " bytes, identical: " + (m1 == m2 && r1 == r2 ? "yes" : "no")};
}

std::size_t parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    conll::read_conll(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

Outcome conll_io() {
  bool ok = true;
  std::size_t files = 0;
  for (const auto& path : {kTestData / "golden.conll", kSynth / "test.conll"}) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream raw;
    raw << in.rdbuf();
    const auto sentences = conll::read_conll_file(path);
    std::ostringstream out;
    conll::write_conll(out, sentences);
    ok = ok && out.str() == raw.str();
    ++files;
  }
  const std::string good = "1\ta\ta\tX\tX\t_\t0\tROOT\t_\t_\n";
  const std::size_t l1 = parse_error_line(good + "\n1\tb\tb\tX\tX\t_\t7\tdep\t_\t_\n");
  const std::size_t l2 = parse_error_line(good + "2\tb\tb\tX\n");
  const std::size_t l3 = parse_error_line(good + "2\tb\tb\tX\tX\t_\tnone\tdep\t_\t_\n");
  ok = ok && l1 == 3 && l2 == 2 && l3 == 2;
  return {ok, std::to_string(files) + " files round-tripped; error lines " + std::to_string(l1) + ", " +
                  std::to_string(l2) + ", " + std::to_string(l3)};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto train = conll::read_conll_file(kSynth / "train.conll");
  const auto test = conll::read_conll_file(kSynth / "test.conll");
  Runs runs(train, test);

  struct Check {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Check> checks = {
      {1, "worked example trace", flying_planes_trace},
      {2, "oracle vs brute force", oracle_vs_brute_force},
      {3, "reference decode", [&] { return reference_decode(train, test); }},
      {4, "fit 50 training sentences", [&] { return fits_training_set(train); }},
      {4, "beat right-neighbour baseline", [&] { return beats_baseline(runs, test); }},
      {5, "feature ablation ordering", [&] { return ablation(runs); }},
      {6, "learner ordering", [&] { return learners(runs); }},
      {7, "network gradients", gradients},
      {8, "mixture schedule", schedule},
      {9, "reproducibility", [&] { return reproducible(train, test); }},
      {10, "CoNLL round trip and errors", conll_io},
  };

  int failed = 0;
  for (const auto& c : checks) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " failed" : std::string("all passed")) << " ("
            << fmt(seconds_since(t0), 0) << " s)" << std::endl;
  return failed ? 1 : 0;
}
