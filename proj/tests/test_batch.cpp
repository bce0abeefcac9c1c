#include <doctest.h>

#include <omp.h>

#include "l2s/batch.hpp"
#include "l2s/conll.hpp"
#include "l2s/dep/parser.hpp"
#include "l2s/dep/pipeline.hpp"

using namespace l2s;

TEST_SUITE("batch") {

TEST_CASE("parallel decoding equals the serial reference") {
  const auto data = conll::read_conll_file(std::filesystem::path(L2S_SYNTH_DATA) / "train.conll");
  const std::vector<conll::Sentence> train(data.begin(), data.begin() + 200);
  const std::vector<conll::Sentence> held(data.begin() + 200, data.begin() + 500);
  dep::TrainSettings settings;
  settings.passes = 1;
  settings.seed = 3;
  LearnerConfig lc;
  lc.kind = LearnerKind::SgdPlus;
  const auto trained = dep::train_parser(train, dep::ParserConfig{}, lc, settings);
  std::vector<dep::ParseInstance> xs;
  for (const auto& s : held) xs.push_back(trained.task.prepare(s));
  const auto serial = decode_all_serial(trained.task, std::span<const dep::ParseInstance>(xs), trained.model);
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    const auto parallel = decode_all(trained.task, std::span<const dep::ParseInstance>(xs), trained.model);
    REQUIRE(parallel.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(parallel[i].heads == serial[i].heads);
      CHECK(parallel[i].labels == serial[i].labels);
    }
  }
}

TEST_CASE("parallel decoding rethrows task errors") {
  dep::ParserConfig pc;
  pc.labeled = false;
  dep::ParserTask task(pc, dep::LabelSet{});
  std::vector<dep::ParseInstance> xs(20);
  const auto model = task.make_model(LearnerConfig{});
  CHECK_THROWS_AS(decode_all(task, std::span<const dep::ParseInstance>(xs), model), ContractError);
}

TEST_CASE("parallel oracle check equals the serial reference") {
  const auto trees = dep::oracle_check_cases(6, 200, 11);
  omp_set_num_threads(4);
  const auto a = dep::check_oracle(trees);
  const auto b = dep::check_oracle_serial(trees);
  CHECK(a.trees == b.trees);
  CHECK(a.configurations == b.configurations);
  CHECK(a.mismatches == b.mismatches);
  CHECK(a.failures == b.failures);
  CHECK(a.ok());
}

}
