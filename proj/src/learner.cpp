#include "l2s/learner.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "l2s/errors.hpp"
#include "l2s/network.hpp"

namespace l2s {
namespace {

constexpr char kMagic[8] = {'L', '2', 'S', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

bool is_network(LearnerKind k) noexcept {
  return k == LearnerKind::Nn || k == LearnerKind::NnFtrl || k == LearnerKind::Multiclass;
}

bool uses_ftrl(LearnerKind k) noexcept { return k == LearnerKind::NnFtrl || k == LearnerKind::Multiclass; }

[[noreturn, gnu::noinline]] void numeric_fault(std::uint32_t role, const char* layer, std::size_t pos) {
  std::ostringstream msg;
  msg << "non-finite gradient in role " << role << ", " << layer << " weight " << pos;
  throw NumericFault(msg.str());
}

inline void check_finite(double g, std::uint32_t role, const char* layer, std::size_t pos) {
  if (!std::isfinite(g)) [[unlikely]]
    numeric_fault(role, layer, pos);
}

thread_local std::vector<Feature> tls_flat;

// Network inputs are scaled to unit Euclidean norm.
void normalize(std::vector<Feature>& x) {
  double sq = 0.0;
  for (const Feature& f : x) sq += static_cast<double>(f.value) * f.value;
  if (sq <= 0.0) return;
  const float s = static_cast<float>(1.0 / std::sqrt(sq));
  for (Feature& f : x) f.value *= s;
}

// Little-endian binary writer/reader for the model file.
class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  ~Writer() { flush(); }
  void flush() {
    os_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    buf_.clear();
  }
  template <class T>
  void pod(T v) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    const U u = std::bit_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<char>((u >> (8 * i)) & 0xffu));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  // Sparse: only non-zero bit patterns are written.
  void floats(const std::vector<float>& v) {
    pod(static_cast<std::uint64_t>(v.size()));
    std::uint64_t nnz = 0;
    for (float f : v) nnz += std::bit_cast<std::uint32_t>(f) != 0;
    pod(nnz);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(v[i]);
      if (bits == 0) continue;
      pod(static_cast<std::uint64_t>(i));
      pod(bits);
    }
  }

 private:
  std::ostream& os_;
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}
  template <class T>
  T pod() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      const int c = is_.get();
      if (c == std::char_traits<char>::eof()) throw LoadError("model file truncated");
      u |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(c)) << (8 * i));
    }
    return std::bit_cast<T>(u);
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    if (n > (1u << 28)) throw LoadError("model file corrupt: string length " + std::to_string(n));
    std::string s(n, '\0');
    is_.read(s.data(), n);
    if (static_cast<std::uint32_t>(is_.gcount()) != n) throw LoadError("model file truncated");
    return s;
  }
  std::vector<float> floats(std::uint64_t expected_size) {
    const auto size = pod<std::uint64_t>();
    if (size != expected_size)
      throw LoadError("model file corrupt: array size " + std::to_string(size) + ", expected " +
                      std::to_string(expected_size));
    const auto nnz = pod<std::uint64_t>();
    if (nnz > size) throw LoadError("model file corrupt: too many entries");
    std::vector<float> v(size, 0.0f);
    std::uint64_t prev = 0;
    for (std::uint64_t i = 0; i < nnz; ++i) {
      const auto idx = pod<std::uint64_t>();
      if (idx >= size || (i > 0 && idx <= prev)) throw LoadError("model file corrupt: bad array index");
      prev = idx;
      v[idx] = std::bit_cast<float>(pod<std::uint32_t>());
    }
    return v;
  }

 private:
  std::istream& is_;
};

void allocate_head(RoleHead& h, const LearnerConfig& cfg, std::uint32_t classes, std::uint32_t role) {
  h.classes = classes;
  const std::size_t table = std::size_t{1} << cfg.bits;
  if (!is_network(cfg.kind)) {
    h.weights.assign(table * classes, 0.0f);
    if (cfg.kind == LearnerKind::SgdPlus) {
      h.state_a.assign(h.weights.size(), 0.0f);
      h.state_b.assign(h.weights.size(), 0.0f);
    }
    return;
  }
  h.weights.assign(table * cfg.hidden, 0.0f);
  h.output.assign(static_cast<std::size_t>(classes) * (cfg.hidden + 1), 0.0f);
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + role + 1);
  const double range = 1.0 / std::sqrt(static_cast<double>(cfg.hidden + 1));
  for (std::size_t k = 0; k < classes; ++k)
    for (std::uint32_t j = 0; j < cfg.hidden; ++j) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      h.output[k * (cfg.hidden + 1) + j] = static_cast<float>((2.0 * u - 1.0) * range);
    }
  if (uses_ftrl(cfg.kind)) {
    h.state_a.assign(h.weights.size(), 0.0f);
    h.state_b.assign(h.weights.size(), 0.0f);
    h.out_state_a.assign(h.output.size(), 0.0f);
    h.out_state_b.assign(h.output.size(), 0.0f);
    // Seed z so the closed-form FTRL weight reproduces the random init.
    const FtrlParams& p = cfg.ftrl;
    const float denom = p.beta / p.alpha + p.l2;
    for (std::size_t i = 0; i < h.output.size(); ++i) {
      const float w = h.output[i];
      if (w == 0.0f) continue;
      h.out_state_a[i] = -w * denom - std::copysign(p.l1, w);
      h.output[i] = ftrl_weight(h.out_state_a[i], 0.0f, p);
    }
  }
}

void ftrl_step(float& w, float& z, float& n, float g, const FtrlParams& p) {
  const float n_new = n + g * g;
  const float sigma = (std::sqrt(n_new) - std::sqrt(n)) / p.alpha;
  z += g - sigma * w;
  n = n_new;
  w = ftrl_weight(z, n, p);
}

}  // namespace

std::string_view to_string(LearnerKind kind) noexcept {
  switch (kind) {
    case LearnerKind::Sgd: return "sgd";
    case LearnerKind::SgdPlus: return "sgd+";
    case LearnerKind::Nn: return "nn";
    case LearnerKind::NnFtrl: return "nn+ftrl";
    case LearnerKind::Multiclass: return "multiclass";
  }
  return "?";
}

LearnerKind parse_learner_kind(std::string_view name) {
  for (auto k : {LearnerKind::Sgd, LearnerKind::SgdPlus, LearnerKind::Nn, LearnerKind::NnFtrl, LearnerKind::Multiclass})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown learner '" + std::string(name) + "' (expected sgd, sgd+, nn, nn+ftrl, multiclass)");
}

float ftrl_weight(float z, float n, const FtrlParams& p) noexcept {
  if (std::abs(z) <= p.l1) return 0.0f;
  const float sign = z < 0 ? -1.0f : 1.0f;
  return -(z - sign * p.l1) / ((p.beta + std::sqrt(n)) / p.alpha + p.l2);
}

PolicyModel::PolicyModel(LearnerConfig config, std::vector<std::uint32_t> classes_per_role,
                         InteractionSpec interactions)
    : config_(config), interactions_(std::move(interactions)) {
  if (config_.bits == 0 || config_.bits > 30) throw ConfigError("hash bits must be in [1, 30]");
  if (is_network(config_.kind) && config_.hidden == 0) throw ConfigError("hidden layer needs at least one unit");
  if (classes_per_role.empty()) throw ConfigError("model needs at least one predictor role");
  heads_.resize(classes_per_role.size());
  for (std::uint32_t r = 0; r < heads_.size(); ++r) {
    if (classes_per_role[r] == 0) throw ConfigError("role " + std::to_string(r) + " has no classes");
    allocate_head(heads_[r], config_, classes_per_role[r], r);
  }
}

std::uint32_t PolicyModel::classes(std::uint32_t role) const { return head(role).classes; }

const RoleHead& PolicyModel::head(std::uint32_t role) const {
  if (role >= heads_.size())
    throw ConfigError("unknown predictor role " + std::to_string(role) + " (model has " +
                      std::to_string(heads_.size()) + ")");
  return heads_[role];
}

RoleHead& PolicyModel::mutable_head(std::uint32_t role) { return const_cast<RoleHead&>(head(role)); }

void PolicyModel::linear_scores(const RoleHead& h, std::span<const Feature> x, std::vector<float>& out) const {
  out.assign(h.classes, 0.0f);
  const std::size_t stride = h.classes;
  for (const Feature& f : x) {
    assert(f.index < (1u << config_.bits));
    const float* w = h.weights.data() + static_cast<std::size_t>(f.index) * stride;
    for (std::size_t k = 0; k < stride; ++k) out[k] += w[k] * f.value;
  }
}

void PolicyModel::network_scores(const RoleHead& h, std::span<const Feature> x, std::vector<float>& out) const {
  nn::Activations<float> act;
  nn::forward(x, config_.hidden, h.classes, h.weights, h.output, act);
  out = std::move(act.out);
  if (config_.kind == LearnerKind::Multiclass)
    for (float& s : out) s = -s;
}

void PolicyModel::scores(std::uint32_t role, const FeatureVector& x, std::vector<float>& out) const {
  const RoleHead& h = head(role);
  if (x.bits() != config_.bits)
    throw ConfigError("feature vector uses " + std::to_string(x.bits()) + " hash bits, model uses " +
                      std::to_string(config_.bits));
  auto& flat = tls_flat;
  x.expand(interactions_, flat);
  if (is_network(config_.kind)) {
    normalize(flat);
    network_scores(h, flat, out);
  } else {
    linear_scores(h, flat, out);
  }
}

Action PolicyModel::predict(std::uint32_t role, const FeatureVector& x, std::span<const Action> allowed) const {
  if (allowed.empty()) throw ContractError("predict called with an empty allowed-action set");
  std::vector<float> s;
  scores(role, x, s);
  Action best = allowed.front();
  float best_score = std::numeric_limits<float>::infinity();
  bool found = false;
  for (Action a : allowed) {
    if (a >= s.size()) throw ContractError("action " + std::to_string(a) + " outside role " + std::to_string(role));
    if (!found || s[a] < best_score || (s[a] == best_score && a < best)) {
      best = a;
      best_score = s[a];
      found = true;
    }
  }
  return best;
}

void PolicyModel::update(const CostSensitiveExample& ex) {
  RoleHead& h = mutable_head(ex.role);
  if (ex.costs.empty()) throw ContractError("cost-sensitive example without costs");
  for (const auto& [a, c] : ex.costs) {
    if (a >= h.classes) throw ContractError("cost for action " + std::to_string(a) + " outside role");
    if (!(c >= 0.0f) || !std::isfinite(c)) throw ContractError("costs must be finite and non-negative");
  }
  if (ex.features.bits() != config_.bits) throw ConfigError("feature vector hash bits do not match the model");
  auto& flat = tls_flat;
  ex.features.expand(interactions_, flat);
  if (is_network(config_.kind)) normalize(flat);
  const std::vector<Feature> x = flat;
  switch (config_.kind) {
    case LearnerKind::Sgd: update_sgd(h, x, ex); break;
    case LearnerKind::SgdPlus: update_sgd_plus(h, x, ex); break;
    case LearnerKind::Nn:
    case LearnerKind::NnFtrl:
    case LearnerKind::Multiclass: update_network(h, x, ex); break;
  }
}

// Plain gradient step with rate eta / sqrt(1 + t).
void PolicyModel::update_sgd(RoleHead& h, std::span<const Feature> x, const CostSensitiveExample& ex) {
  std::vector<float> yhat;
  linear_scores(h, x, yhat);
  const std::size_t stride = h.classes;
  for (const auto& [a, cost] : ex.costs) h.label_max = std::max(h.label_max, cost);
  const float eta = static_cast<float>(config_.learning_rate / std::sqrt(1.0 + h.examples_seen));
  h.examples_seen += 1.0;
  for (const auto& [a, cost] : ex.costs) {
    const float err = std::clamp(yhat[a], 0.0f, h.label_max) - cost;
    if (err == 0.0f) continue;
    for (const Feature& f : x) {
      const std::size_t pos = static_cast<std::size_t>(f.index) * stride + a;
      const float g = err * f.value;
      check_finite(g, ex.role, "linear", pos);
      h.weights[pos] -= eta * g;
    }
  }
}

// Adaptive per-coordinate rates, per-feature scale normalization and the
// importance-invariant closed-form step for squared loss.
void PolicyModel::update_sgd_plus(RoleHead& h, std::span<const Feature> x, const CostSensitiveExample& ex) {
  std::vector<float> yhat;
  linear_scores(h, x, yhat);
  const std::size_t stride = h.classes;
  const double eta = config_.learning_rate;
  for (const auto& [a, cost] : ex.costs) h.label_max = std::max(h.label_max, cost);

  for (const auto& [a, cost] : ex.costs) {
    const double err = static_cast<double>(std::clamp(yhat[a], 0.0f, h.label_max)) - cost;
    double norm_x = 0.0;
    for (const Feature& f : x) {
      const std::size_t pos = static_cast<std::size_t>(f.index) * stride + a;
      const float ax = std::abs(f.value);
      if (ax > h.state_b[pos]) {
        // Rescale the weight so predictions do not jump when the scale grows.
        if (h.state_b[pos] > 0.0f) {
          const float r = h.state_b[pos] / ax;
          h.weights[pos] *= r * r;
        }
        h.state_b[pos] = ax;
      }
      if (h.state_b[pos] > 0.0f) norm_x += (f.value * f.value) / (h.state_b[pos] * h.state_b[pos]);
    }
    h.norm_sum += norm_x;
    h.examples_seen += 1.0;
    if (err == 0.0) continue;

    const double global = h.examples_seen / std::max(h.norm_sum, 1e-12);
    double q = 0.0;
    for (const Feature& f : x) {
      const std::size_t pos = static_cast<std::size_t>(f.index) * stride + a;
      const double g = err * f.value;
      check_finite(g, ex.role, "linear", pos);
      h.state_a[pos] += static_cast<float>(g * g);
    }
    auto rate = [&](std::size_t pos) {
      const double s = h.state_b[pos];
      const double acc = std::sqrt(static_cast<double>(h.state_a[pos]));
      return (s > 0.0 && acc > 0.0) ? global / (acc * s * s) : 0.0;
    };
    for (const Feature& f : x) {
      const std::size_t pos = static_cast<std::size_t>(f.index) * stride + a;
      q += static_cast<double>(f.value) * f.value * rate(pos);
    }
    if (q <= 0.0) continue;
    const double u = -err * (1.0 - std::exp(-eta * q)) / q;
    check_finite(u, ex.role, "linear", 0);
    for (const Feature& f : x) {
      const std::size_t pos = static_cast<std::size_t>(f.index) * stride + a;
      h.weights[pos] += static_cast<float>(u * rate(pos) * f.value);
    }
  }
}

void PolicyModel::update_network(RoleHead& h, std::span<const Feature> x, const CostSensitiveExample& ex) {
  nn::Activations<float> act;
  nn::forward(x, config_.hidden, h.classes, h.weights, h.output, act);

  std::vector<std::uint32_t> cls;
  std::vector<float> costs;
  for (const auto& [a, c] : ex.costs) {
    cls.push_back(a);
    costs.push_back(c);
  }
  std::vector<float> delta;
  if (config_.kind == LearnerKind::Multiclass) {
    // Positive label: lowest-id zero-cost action.
    std::uint32_t positive = cls.front();
    float best = std::numeric_limits<float>::infinity();
    for (std::size_t i = 0; i < cls.size(); ++i)
      if (costs[i] < best || (costs[i] == best && cls[i] < positive)) {
        best = costs[i];
        positive = cls[i];
      }
    nn::logistic_loss<float>(act, cls, positive, delta);
  } else {
    for (float c : costs) h.label_max = std::max(h.label_max, c);
    nn::Activations<float> clipped = act;
    for (float& o : clipped.out) o = std::clamp(o, 0.0f, h.label_max);
    nn::squared_loss<float>(clipped, cls, costs, delta);
  }

  const std::uint32_t role = ex.role;
  const double t = h.examples_seen;
  h.examples_seen += 1.0;
  if (config_.kind == LearnerKind::Nn) {
    const float eta = static_cast<float>(config_.learning_rate / std::sqrt(1.0 + t));
    std::vector<std::pair<std::size_t, float>> out_grads;
    nn::backward<float>(
        x, config_.hidden, h.output, act, delta,
        [&](std::size_t pos, float g) {
          check_finite(g, role, "input", pos);
          h.weights[pos] -= eta * g;
        },
        [&](std::size_t pos, float g) {
          check_finite(g, role, "output", pos);
          out_grads.emplace_back(pos, g);
        });
    for (const auto& [pos, g] : out_grads) h.output[pos] -= eta * g;
    return;
  }

  const FtrlParams& p = config_.ftrl;
  std::vector<std::pair<std::size_t, float>> out_grads;
  nn::backward<float>(
      x, config_.hidden, h.output, act, delta,
      [&](std::size_t pos, float g) {
        check_finite(g, role, "input", pos);
        ftrl_step(h.weights[pos], h.state_a[pos], h.state_b[pos], g, p);
      },
      [&](std::size_t pos, float g) {
        check_finite(g, role, "output", pos);
        out_grads.emplace_back(pos, g);
      });
  for (const auto& [pos, g] : out_grads) ftrl_step(h.output[pos], h.out_state_a[pos], h.out_state_b[pos], g, p);
}

void PolicyModel::save(std::ostream& os) const {
  os.write(kMagic, sizeof(kMagic));
  Writer w(os);
  w.pod(kFormatVersion);
  w.pod(static_cast<std::uint8_t>(config_.kind));
  w.pod(config_.bits);
  w.pod(config_.hidden);
  w.pod(config_.learning_rate);
  w.pod(config_.ftrl.alpha);
  w.pod(config_.ftrl.beta);
  w.pod(config_.ftrl.l1);
  w.pod(config_.ftrl.l2);
  w.pod(config_.seed);
  w.str(interactions_.pairs_string());
  w.str(interactions_.triples_string());
  w.pod(static_cast<std::uint32_t>(heads_.size()));
  for (const RoleHead& h : heads_) {
    w.pod(h.classes);
    w.pod(h.examples_seen);
    w.pod(h.norm_sum);
    w.pod(h.label_max);
    w.floats(h.weights);
    w.floats(h.state_a);
    w.floats(h.state_b);
    w.floats(h.output);
    w.floats(h.out_state_a);
    w.floats(h.out_state_b);
  }
  w.pod(static_cast<std::uint32_t>(metadata_.size()));
  for (const auto& [k, v] : metadata_) {
    w.str(k);
    w.str(v);
  }
  w.flush();
  os.write(kMagic, sizeof(kMagic));
}

PolicyModel PolicyModel::load(std::istream& is) {
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (is.gcount() != sizeof(magic) || !std::equal(std::begin(magic), std::end(magic), kMagic))
    throw LoadError("not a model file (bad header)");
  Reader r(is);
  const auto version = r.pod<std::uint32_t>();
  if (version != kFormatVersion)
    throw LoadError("unsupported model format version " + std::to_string(version) + " (expected " +
                    std::to_string(kFormatVersion) + ")");
  PolicyModel m;
  const auto kind = r.pod<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(LearnerKind::Multiclass)) throw LoadError("unknown learner kind in model file");
  m.config_.kind = static_cast<LearnerKind>(kind);
  m.config_.bits = r.pod<std::uint32_t>();
  m.config_.hidden = r.pod<std::uint32_t>();
  m.config_.learning_rate = r.pod<float>();
  m.config_.ftrl.alpha = r.pod<float>();
  m.config_.ftrl.beta = r.pod<float>();
  m.config_.ftrl.l1 = r.pod<float>();
  m.config_.ftrl.l2 = r.pod<float>();
  m.config_.seed = r.pod<std::uint64_t>();
  if (m.config_.bits == 0 || m.config_.bits > 30) throw LoadError("model file corrupt: hash bits out of range");
  if (m.config_.hidden > 4096) throw LoadError("model file corrupt: hidden size out of range");
  const std::string pairs = r.str();
  const std::string triples = r.str();
  try {
    m.interactions_ = InteractionSpec::parse(pairs, triples);
  } catch (const ConfigError& e) {
    throw LoadError(std::string("model file corrupt: ") + e.what());
  }
  const auto roles = r.pod<std::uint32_t>();
  if (roles == 0 || roles > 64) throw LoadError("model file corrupt: role count out of range");
  const std::size_t table = std::size_t{1} << m.config_.bits;
  const bool network = is_network(m.config_.kind);
  for (std::uint32_t i = 0; i < roles; ++i) {
    RoleHead h;
    h.classes = r.pod<std::uint32_t>();
    if (h.classes == 0 || h.classes > 100000) throw LoadError("model file corrupt: class count out of range");
    h.examples_seen = r.pod<double>();
    h.norm_sum = r.pod<double>();
    h.label_max = r.pod<float>();
    const std::size_t in_size = table * (network ? m.config_.hidden : h.classes);
    const std::size_t out_size = network ? static_cast<std::size_t>(h.classes) * (m.config_.hidden + 1) : 0;
    const bool linear_state = m.config_.kind == LearnerKind::SgdPlus;
    const bool ftrl = uses_ftrl(m.config_.kind);
    h.weights = r.floats(in_size);
    h.state_a = r.floats(linear_state || ftrl ? in_size : 0);
    h.state_b = r.floats(linear_state || ftrl ? in_size : 0);
    h.output = r.floats(out_size);
    h.out_state_a = r.floats(ftrl ? out_size : 0);
    h.out_state_b = r.floats(ftrl ? out_size : 0);
    m.heads_.push_back(std::move(h));
  }
  const auto entries = r.pod<std::uint32_t>();
  for (std::uint32_t i = 0; i < entries; ++i) {
    std::string k = r.str();
    m.metadata_[k] = r.str();
  }
  char tail[sizeof(kMagic)];
  is.read(tail, sizeof(tail));
  if (is.gcount() != sizeof(tail) || !std::equal(std::begin(tail), std::end(tail), kMagic))
    throw LoadError("model file truncated (missing trailer)");
  return m;
}

std::string PolicyModel::serialize() const {
  std::ostringstream os(std::ios::binary);
  save(os);
  return std::move(os).str();
}

PolicyModel PolicyModel::deserialize(std::string_view bytes) {
  std::istringstream is(std::string(bytes), std::ios::binary);
  return load(is);
}

}  // namespace l2s
