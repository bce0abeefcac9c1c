#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gradient_check.hpp"
#include "l2s/errors.hpp"
#include "l2s/learner.hpp"
#include "l2s/network.hpp"

using namespace l2s;

namespace {

const LearnerKind kAll[] = {LearnerKind::Sgd, LearnerKind::SgdPlus, LearnerKind::Nn, LearnerKind::NnFtrl,
                            LearnerKind::Multiclass};

LearnerConfig small(LearnerKind kind, std::uint32_t bits = 10) {
  LearnerConfig c;
  c.kind = kind;
  c.bits = bits;
  c.seed = 3;
  return c;
}

FeatureVector features(std::initializer_list<std::uint64_t> ids, std::uint32_t bits = 10) {
  FeatureVector fv(bits);
  for (auto id : ids) fv.add_feature('a', id);
  fv.add_constant();
  return fv;
}

CostSensitiveExample example(FeatureVector fv, std::vector<std::pair<Action, float>> costs, std::uint32_t role = 0) {
  CostSensitiveExample ex{std::move(fv), std::move(costs), role};
  return ex;
}

FeatureVector random_features(std::mt19937_64& rng, std::uint32_t bits = 10) {
  FeatureVector fv(bits);
  for (int i = 0; i < 6; ++i) fv.add_feature(static_cast<NamespaceId>('a' + rng() % 3), rng() % 50);
  return fv;
}

}  // namespace

TEST_SUITE("learners") {

TEST_CASE("a fresh model picks the smallest allowed action") {
  for (auto kind : kAll) {
    CAPTURE(to_string(kind));
    PolicyModel m(small(kind), {4}, {});
    const std::vector<Action> allowed = {3, 1, 2};
    CHECK(m.predict(0, features({1, 2}), allowed) == 1);
    std::vector<float> s;
    m.scores(0, features({5}), s);
    for (float v : s) CHECK(v == 0.0f);
  }
}

TEST_CASE("argmin over allowed actions, ties to the smallest id") {
  PolicyModel m(small(LearnerKind::Sgd), {3}, {});
  const auto f = features({1});
  for (int i = 0; i < 50; ++i) m.update(example(f, {{0, 4.0f}, {1, 4.0f}, {2, 0.0f}}));
  const std::vector<Action> all = {0, 1, 2};
  CHECK(m.predict(0, f, all) == 2);
  const std::vector<Action> no2 = {1, 0};
  CHECK(m.predict(0, f, no2) == 0);
  CHECK_THROWS_AS(m.predict(0, f, std::vector<Action>{}), ContractError);
}

TEST_CASE("SGD one-step update on a single unit feature") {
  LearnerConfig c = small(LearnerKind::Sgd);
  c.learning_rate = 0.5f;
  PolicyModel m(c, {2}, {});
  FeatureVector f(10);
  f.add_feature('a', std::uint64_t{9});
  m.update(example(f, {{0, 1.0f}}));
  std::vector<float> s;
  m.scores(0, f, s);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(s[1] == 0.0f);
  const auto idx = f.features('a')[0].index;
  CHECK(m.head(0).weights[idx * 2 + 0] == doctest::Approx(0.5));
}

TEST_CASE("SGD with target equal to prediction leaves weights unchanged") {
  PolicyModel m(small(LearnerKind::Sgd), {2}, {});
  const auto before = m.head(0).weights;
  m.update(example(features({4}), {{0, 0.0f}, {1, 0.0f}}));
  CHECK(m.head(0).weights == before);
}

TEST_CASE("repeated training orders the two actions by cost") {
  for (auto kind : kAll) {
    CAPTURE(to_string(kind));
    PolicyModel m(small(kind), {3}, {});
    const auto f = features({7, 8});
    for (int i = 0; i < 300; ++i) m.update(example(f, {{1, 0.0f}, {2, 5.0f}}));
    const std::vector<Action> allowed = {1, 2};
    CHECK(m.predict(0, f, allowed) == 1);
    std::vector<float> s;
    m.scores(0, f, s);
    CHECK(s[1] < s[2]);
  }
}

TEST_CASE("regression learners preserve a three-way cost order") {
  for (auto kind : {LearnerKind::Sgd, LearnerKind::SgdPlus, LearnerKind::Nn, LearnerKind::NnFtrl}) {
    CAPTURE(to_string(kind));
    PolicyModel m(small(kind), {3}, {});
    const auto f = features({3});
    for (int i = 0; i < 500; ++i) m.update(example(f, {{0, 3.0f}, {1, 0.0f}, {2, 1.0f}}));
    std::vector<float> s;
    m.scores(0, f, s);
    CHECK(s[1] < s[2]);
    CHECK(s[2] < s[0]);
  }
}

TEST_CASE("multiclass positive label is the lowest-id zero-cost action") {
  PolicyModel m(small(LearnerKind::Multiclass), {3}, {});
  const auto f = features({1});
  for (int i = 0; i < 200; ++i) m.update(example(f, {{2, 0.0f}, {1, 0.0f}, {0, 3.0f}}));
  const std::vector<Action> all = {0, 1, 2};
  CHECK(m.predict(0, f, all) == 1);
}

TEST_CASE("network forward with zero input weights returns the output bias") {
  const std::uint32_t hidden = 5, classes = 3;
  std::vector<float> in(16 * hidden, 0.0f), out(classes * (hidden + 1), 0.7f);
  out[0 * (hidden + 1) + hidden] = 0.25f;
  out[1 * (hidden + 1) + hidden] = -1.0f;
  out[2 * (hidden + 1) + hidden] = 2.0f;
  std::vector<Feature> x = {{3, 1.0f}, {9, 2.0f}};
  nn::Activations<float> act;
  nn::forward(std::span<const Feature>(x), hidden, classes, in, out, act);
  for (float h : act.hidden) CHECK(h == 0.0f);
  CHECK(act.out[0] == 0.25f);
  CHECK(act.out[1] == -1.0f);
  CHECK(act.out[2] == 2.0f);
}

TEST_CASE("analytic network gradients match central differences") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto r = gradcheck::check_case(rng, i % 2 == 1);
    CHECK(r.coordinates > 0);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("FTRL weights stay exactly zero while |z| is within L1") {
  LearnerConfig c = small(LearnerKind::NnFtrl, 8);
  c.ftrl.l1 = 0.05f;
  PolicyModel m(c, {3}, {});
  std::mt19937_64 rng(4);
  std::size_t zero_checked = 0, nonzero = 0;
  for (int step = 0; step < 200; ++step) {
    m.update(example(random_features(rng, 8), {{0, float(rng() % 3)}, {1, 0.0f}, {2, float(rng() % 2)}}));
    const auto& h = m.head(0);
    for (std::size_t i = 0; i < h.weights.size(); ++i) {
      if (std::abs(h.state_a[i]) <= c.ftrl.l1) {
        CHECK(h.weights[i] == 0.0f);
        ++zero_checked;
      } else {
        ++nonzero;
      }
    }
  }
  CHECK(zero_checked > 0);
  CHECK(nonzero > 0);
  CHECK(ftrl_weight(0.04f, 1.0f, c.ftrl) == 0.0f);
  CHECK(ftrl_weight(-0.5f, 0.0f, c.ftrl) > 0.0f);
}

TEST_CASE("FTRL z accumulators reproduce the random output initialization") {
  PolicyModel m(small(LearnerKind::NnFtrl), {3}, {});
  const auto& h = m.head(0);
  const FtrlParams p;
  bool any = false;
  for (std::size_t i = 0; i < h.output.size(); ++i) {
    CHECK(h.output[i] == doctest::Approx(ftrl_weight(h.out_state_a[i], h.out_state_b[i], p)));
    any = any || h.output[i] != 0.0f;
  }
  CHECK(any);
}

TEST_CASE("model bytes round trip exactly") {
  std::mt19937_64 rng(8);
  for (auto kind : kAll) {
    CAPTURE(to_string(kind));
    PolicyModel m(small(kind), {3, 4}, InteractionSpec::parse("ab", "abc"));
    m.metadata()["task"] = "test";
    for (int i = 0; i < 50; ++i)
      m.update(example(random_features(rng), {{0, float(rng() % 3)}, {1, 0.0f}, {2, 1.0f}}, 0));
    for (int i = 0; i < 20; ++i) m.update(example(random_features(rng), {{3, 0.0f}, {1, 1.0f}}, 1));
    const std::string bytes = m.serialize();
    const PolicyModel back = PolicyModel::deserialize(bytes);
    CHECK(back == m);
    CHECK(back.serialize() == bytes);
    CHECK(back.metadata().at("task") == "test");
    for (int i = 0; i < 100; ++i) {
      const auto f = random_features(rng);
      const std::vector<Action> allowed = {0, 1, 2};
      CHECK(back.predict(0, f, allowed) == m.predict(0, f, allowed));
      std::vector<float> a, b;
      m.scores(1, f, a);
      back.scores(1, f, b);
      CHECK(a == b);
    }
  }
}

TEST_CASE("damaged model files are rejected") {
  PolicyModel m(small(LearnerKind::SgdPlus), {3}, {});
  m.update(example(features({1}), {{0, 1.0f}, {1, 0.0f}}));
  const std::string bytes = m.serialize();

  std::string bad_header = bytes;
  bad_header[0] = 'X';
  CHECK_THROWS_AS(PolicyModel::deserialize(bad_header), LoadError);

  std::string bad_version = bytes;
  bad_version[8] = 9;
  CHECK_THROWS_WITH_AS(PolicyModel::deserialize(bad_version), doctest::Contains("version"), LoadError);

  CHECK_THROWS_AS(PolicyModel::deserialize(bytes.substr(0, bytes.size() / 2)), LoadError);
  CHECK_THROWS_AS(PolicyModel::deserialize(bytes.substr(0, bytes.size() - 1)), LoadError);
  CHECK_THROWS_AS(PolicyModel::deserialize(""), LoadError);
}

TEST_CASE("non-finite gradients raise a numeric fault naming the weight") {
  for (auto kind : kAll) {
    CAPTURE(to_string(kind));
    PolicyModel m(small(kind), {2}, {});
    FeatureVector f(10);
    f.add_feature('a', std::uint64_t{1}, std::numeric_limits<float>::quiet_NaN());
    CHECK_THROWS_WITH_AS(m.update(example(f, {{0, 1.0f}, {1, 0.0f}})), doctest::Contains("weight"), NumericFault);
  }
}

TEST_CASE("configuration errors") {
  PolicyModel m(small(LearnerKind::Sgd), {2, 3}, {});
  std::vector<float> s;
  CHECK_THROWS_AS(m.scores(2, features({1}), s), ConfigError);
  CHECK_THROWS_AS(m.update(example(features({1}), {{0, 1.0f}}, 5)), ConfigError);
  CHECK_THROWS_AS(m.scores(0, features({1}, 12), s), ConfigError);
  CHECK_THROWS_AS(m.update(example(features({1}), {})), ContractError);
  CHECK_THROWS_AS(m.update(example(features({1}), {{0, -1.0f}})), ContractError);
  CHECK_THROWS_AS(PolicyModel(small(LearnerKind::Sgd), {}, {}), ConfigError);
  CHECK_THROWS_AS(parse_learner_kind("adam"), ConfigError);
  CHECK(parse_learner_kind("nn+ftrl") == LearnerKind::NnFtrl);
}

TEST_CASE("weight tables are sized 2^b times classes or hidden units") {
  PolicyModel lin(small(LearnerKind::SgdPlus, 9), {3}, {});
  CHECK(lin.head(0).weights.size() == (1u << 9) * 3);
  CHECK(lin.head(0).state_a.size() == lin.head(0).weights.size());
  PolicyModel net(small(LearnerKind::NnFtrl, 9), {3}, {});
  CHECK(net.head(0).weights.size() == (1u << 9) * 5);
  CHECK(net.head(0).output.size() == 3 * 6);
  CHECK(net.head(0).out_state_a.size() == net.head(0).output.size());
}

}
