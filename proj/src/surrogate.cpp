#include "idoe/surrogate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "idoe/adamw.hpp"
#include "idoe/error.hpp"
#include "idoe/rng.hpp"

namespace idoe {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Features checked(Features f) {
  if (!all_finite(f)) throw Error(ErrorKind::InvalidCycle, "characteristic points are not finite");
  return f;
}

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void byte(unsigned char b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw Error(ErrorKind::SchemaMismatch, "dataset_hash must be 16 lowercase hex digits");
  }
  return std::stoull(s, nullptr, 16);
}

}  // namespace

Features featurize(const CycleResult& r) {
  if (!r.valid) throw Error(ErrorKind::InvalidCycle, "cannot featurize an invalid run");
  const auto& p = r.points;
  return checked({p[0].enthalpy, p[1].enthalpy, p[2].enthalpy, p[3].enthalpy, std::log10(p[0].pressure),
                  std::log10(p[1].pressure), r.t_subcooling, r.t_superheating});
}

Features featurize(const RefrigerantModel& model, const std::array<CharPoint, 4>& p) {
  if (p[3].enthalpy != p[2].enthalpy || p[0].pressure != p[3].pressure || p[1].pressure != p[2].pressure ||
      !(p[0].pressure < p[1].pressure)) {
    throw Error(ErrorKind::InvalidCycle, "points do not form a cycle (shared pressures, h4 = h3)");
  }
  try {
    const double superheat = p[0].temperature - model.saturation_temperature(p[0].pressure);
    const double subcool = model.saturation_temperature(p[2].pressure) - p[2].temperature;
    return checked({p[0].enthalpy, p[1].enthalpy, p[2].enthalpy, p[3].enthalpy, std::log10(p[0].pressure),
                    std::log10(p[1].pressure), subcool, superheat});
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidCycle) throw;
    throw Error(ErrorKind::InvalidCycle, e.what());
  }
}

Features featurize(const RefrigerantModel& model, const CycleGeometry& geometry) {
  return featurize(model, geometry.points);
}

std::vector<Example> make_dataset(std::span<const Run> runs) {
  std::vector<Example> out;
  for (const auto& r : runs) {
    if (!r.result.valid) continue;
    out.push_back({featurize(r.result), r.params.to_array()});
  }
  return out;
}

std::vector<Example> make_dataset(const Ensemble& ensemble) { return make_dataset(std::span<const Run>(ensemble.runs())); }

std::uint64_t dataset_hash(std::span<const Example> examples) {
  Fnv f;
  f.u64(examples.size());
  for (const auto& e : examples) {
    for (double v : e.features) f.f64(v);
    for (double v : e.targets) f.f64(v);
  }
  return f.h;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "train config: " + what); };
  if (hidden < 1 || epochs < 1 || batch_size < 1 || online_epochs < 1) fail("counts must be positive");
  if (!(learning_rate > 0.0) || !(online_learning_rate > 0.0)) fail("learning rates must be positive");
  if (!(weight_decay >= 0.0)) fail("weight decay must be non-negative");
  if (!(train_fraction > 0.0 && val_fraction > 0.0 && test_fraction > 0.0)) fail("split fractions must be positive");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-12) fail("split fractions must sum to 1");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"hidden", c.hidden},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"online_epochs", c.online_epochs},
          {"online_learning_rate", c.online_learning_rate},
          {"train_fraction", c.train_fraction},
          {"val_fraction", c.val_fraction},
          {"test_fraction", c.test_fraction},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  if (!j.is_object()) throw Error(ErrorKind::SchemaMismatch, "train config must be an object");
  c.hidden = j.value("hidden", c.hidden);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.online_epochs = j.value("online_epochs", c.online_epochs);
  c.online_learning_rate = j.value("online_learning_rate", c.online_learning_rate);
  c.train_fraction = j.value("train_fraction", c.train_fraction);
  c.val_fraction = j.value("val_fraction", c.val_fraction);
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

// Normalization

Normalization Normalization::identity() {
  Normalization n;
  n.in_mean.fill(0.0);
  n.in_std.fill(1.0);
  n.out_mean.fill(0.0);
  n.out_std.fill(1.0);
  return n;
}

namespace {

template <std::size_t N, typename Get>
void mean_std(std::span<const Example> ex, Get get, std::array<double, N>& mean, std::array<double, N>& sd) {
  const double n = static_cast<double>(ex.size());
  for (std::size_t k = 0; k < N; ++k) {
    double s = 0.0;
    for (const auto& e : ex) s += get(e)[k];
    const double m = s / n;
    double ss = 0.0;
    for (const auto& e : ex) ss += (get(e)[k] - m) * (get(e)[k] - m);
    const double v = std::sqrt(ss / n);
    mean[k] = m;
    sd[k] = v > 0.0 ? v : 1.0;  // constant feature: pass through centred
  }
}

}  // namespace

Normalization Normalization::fit(std::span<const Example> ex) {
  if (ex.empty()) throw Error(ErrorKind::DatasetTooSmall, "cannot fit normalization on no examples");
  Normalization n;
  mean_std<kFeatureCount>(ex, [](const Example& e) -> const Features& { return e.features; }, n.in_mean, n.in_std);
  mean_std<kTargetCount>(ex, [](const Example& e) -> const Targets& { return e.targets; }, n.out_mean, n.out_std);
  return n;
}

Features Normalization::normalize_features(const Features& f) const {
  Features z;
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = (f[k] - in_mean[k]) / in_std[k];
  return z;
}

Features Normalization::denormalize_features(const Features& z) const {
  Features f;
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = z[k] * in_std[k] + in_mean[k];
  return f;
}

Targets Normalization::normalize_targets(const Targets& t) const {
  Targets z;
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = (t[k] - out_mean[k]) / out_std[k];
  return z;
}

Targets Normalization::denormalize_targets(const Targets& z) const {
  Targets t;
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = z[k] * out_std[k] + out_mean[k];
  return t;
}

// Network

namespace {

struct Layer {
  std::size_t in;
  std::size_t out;
  std::size_t w;  // offset of the weights
  std::size_t b;  // offset of the bias
};

std::array<Layer, 4> layout(std::size_t hidden) {
  const std::array<std::size_t, 5> sizes = {kFeatureCount, hidden, hidden, hidden, kTargetCount};
  std::array<Layer, 4> layers{};
  std::size_t off = 0;
  for (std::size_t l = 0; l < 4; ++l) {
    layers[l] = {sizes[l], sizes[l + 1], off, off + sizes[l] * sizes[l + 1]};
    off = layers[l].b + sizes[l + 1];
  }
  return layers;
}

std::size_t count_parameters(std::size_t hidden) {
  const auto l = layout(hidden);
  return l[3].b + l[3].out;
}

using ConstMap = Eigen::Map<const Matrix>;
using ConstRow = Eigen::Map<const Eigen::RowVectorXd>;

struct Activations {
  std::array<Matrix, 4> a;  // a[0] input, a[1..3] hidden outputs
  Matrix y;
};

Activations run_forward(std::span<const double> p, std::size_t hidden, const Matrix& x) {
  const auto layers = layout(hidden);
  Activations act;
  act.a[0] = x;
  for (std::size_t l = 0; l < 4; ++l) {
    const auto& L = layers[l];
    ConstMap w(p.data() + L.w, static_cast<Eigen::Index>(L.out), static_cast<Eigen::Index>(L.in));
    ConstRow b(p.data() + L.b, static_cast<Eigen::Index>(L.out));
    Matrix z = act.a[l] * w.transpose();
    z.rowwise() += b;
    if (l < 3) {
      act.a[l + 1] = z.array().tanh().matrix();
    } else {
      act.y = std::move(z);
    }
  }
  return act;
}

}  // namespace

InversionNet::InversionNet(std::size_t hidden, std::uint64_t seed) : hidden_(hidden) {
  if (hidden < 1) throw Error(ErrorKind::InvalidArgument, "hidden width must be positive");
  params_.assign(count_parameters(hidden), 0.0);
  Rng rng(seed);
  for (const auto& L : layout(hidden)) {
    const double k = 1.0 / std::sqrt(static_cast<double>(L.in));
    for (std::size_t i = L.w; i < L.b + L.out; ++i) params_[i] = rng.uniform(-k, k);
  }
}

void InversionNet::mark_trained(std::uint64_t hash, const TrainConfig& config) {
  trained_ = true;
  dataset_hash_ = hash;
  config_ = config;
}

Matrix InversionNet::forward(const Matrix& x) const {
  if (x.cols() != static_cast<Eigen::Index>(kFeatureCount)) {
    throw Error(ErrorKind::LengthMismatch, "network input needs 8 columns");
  }
  if (params_.empty()) throw Error(ErrorKind::NotTrained, "network has no parameters");
  return run_forward(params_, hidden_, x).y;
}

double InversionNet::loss(const Matrix& x, const Matrix& y) const {
  const Matrix diff = forward(x) - y;
  return diff.squaredNorm() / static_cast<double>(diff.size());
}

double InversionNet::loss_and_gradient(const Matrix& x, const Matrix& y, std::vector<double>& grad) const {
  if (params_.empty()) throw Error(ErrorKind::NotTrained, "network has no parameters");
  if (x.rows() != y.rows() || y.cols() != static_cast<Eigen::Index>(kTargetCount) ||
      x.cols() != static_cast<Eigen::Index>(kFeatureCount)) {
    throw Error(ErrorKind::LengthMismatch, "batch shapes do not match the network");
  }
  const auto layers = layout(hidden_);
  const Activations act = run_forward(params_, hidden_, x);
  const Matrix diff = act.y - y;
  const double n = static_cast<double>(diff.size());
  grad.assign(params_.size(), 0.0);

  Matrix dz = diff * (2.0 / n);
  for (std::size_t l = 4; l-- > 0;) {
    const auto& L = layers[l];
    const auto rows = static_cast<Eigen::Index>(L.out);
    const auto cols = static_cast<Eigen::Index>(L.in);
    Eigen::Map<Matrix>(grad.data() + L.w, rows, cols).noalias() = dz.transpose() * act.a[l];
    Eigen::Map<Eigen::RowVectorXd>(grad.data() + L.b, rows) = dz.colwise().sum();
    if (l > 0) {
      ConstMap w(params_.data() + L.w, rows, cols);
      Matrix da = dz * w;
      dz = da.array() * (1.0 - act.a[l].array().square());
    }
  }
  return diff.squaredNorm() / n;
}

ControlParams InversionNet::predict(const Features& features) const {
  if (!trained_) throw Error(ErrorKind::NotTrained, "the inversion network has not been trained");
  if (!all_finite(features)) throw Error(ErrorKind::InvalidArgument, "features must be finite");
  const Features z = norm_.normalize_features(features);
  Matrix x(1, static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t k = 0; k < kFeatureCount; ++k) x(0, static_cast<Eigen::Index>(k)) = z[k];
  const Matrix y = forward(x);
  Targets out{};
  for (std::size_t k = 0; k < kTargetCount; ++k) out[k] = y(0, static_cast<Eigen::Index>(k));
  return box_.clip(ControlParams::from_array(norm_.denormalize_targets(out)));
}

std::uint64_t InversionNet::checksum() const {
  Fnv f;
  f.u64(hidden_);
  f.u64(params_.size());
  for (double v : params_) f.f64(v);
  for (double v : norm_.in_mean) f.f64(v);
  for (double v : norm_.in_std) f.f64(v);
  for (double v : norm_.out_mean) f.f64(v);
  for (double v : norm_.out_std) f.f64(v);
  return f.h;
}

bool InversionNet::bit_equal(const InversionNet& o) const {
  if (hidden_ != o.hidden_ || trained_ != o.trained_ || dataset_hash_ != o.dataset_hash_ || !(box_ == o.box_) ||
      params_.size() != o.params_.size()) {
    return false;
  }
  auto same = [](double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); };
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (!same(params_[i], o.params_[i])) return false;
  for (std::size_t k = 0; k < kFeatureCount; ++k)
    if (!same(norm_.in_mean[k], o.norm_.in_mean[k]) || !same(norm_.in_std[k], o.norm_.in_std[k])) return false;
  for (std::size_t k = 0; k < kTargetCount; ++k)
    if (!same(norm_.out_mean[k], o.norm_.out_mean[k]) || !same(norm_.out_std[k], o.norm_.out_std[k])) return false;
  return true;
}

nlohmann::json InversionNet::to_json() const {
  return {{"format", "idoe-inversion-net"},
          {"version", 1},
          {"inputs", kFeatureCount},
          {"hidden", hidden_},
          {"hidden_layers", kHiddenLayers},
          {"outputs", kTargetCount},
          {"activation", "tanh"},
          {"parameters", params_},
          {"normalization",
           {{"in_mean", norm_.in_mean}, {"in_std", norm_.in_std}, {"out_mean", norm_.out_mean}, {"out_std", norm_.out_std}}},
          {"box", idoe::to_json(box_)},
          {"trained", trained_},
          {"provenance", {{"dataset_hash", hex64(dataset_hash_)}, {"config", idoe::to_json(config_)}}}};
}

InversionNet InversionNet::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "idoe-inversion-net" || j.at("version") != 1) {
      throw Error(ErrorKind::SchemaMismatch, "not an inversion-net checkpoint (version 1)");
    }
    if (j.at("inputs") != kFeatureCount || j.at("outputs") != kTargetCount || j.at("hidden_layers") != kHiddenLayers) {
      throw Error(ErrorKind::SchemaMismatch, "checkpoint dimensions do not match 8 -> H x 3 -> 5");
    }
    InversionNet net;
    net.hidden_ = j.at("hidden").get<std::size_t>();
    net.params_ = j.at("parameters").get<std::vector<double>>();
    if (net.hidden_ < 1 || net.params_.size() != count_parameters(net.hidden_)) {
      throw Error(ErrorKind::SchemaMismatch, "parameter count does not match the hidden width");
    }
    if (!all_finite(net.params_)) throw Error(ErrorKind::SchemaMismatch, "checkpoint weights are not finite");
    const auto& n = j.at("normalization");
    net.norm_.in_mean = n.at("in_mean").get<Features>();
    net.norm_.in_std = n.at("in_std").get<Features>();
    net.norm_.out_mean = n.at("out_mean").get<Targets>();
    net.norm_.out_std = n.at("out_std").get<Targets>();
    net.box_ = box_from_json(j.at("box"));
    net.trained_ = j.at("trained").get<bool>();
    const auto& prov = j.at("provenance");
    net.dataset_hash_ = parse_hex64(prov.at("dataset_hash").get<std::string>());
    net.config_ = train_config_from_json(prov.at("config"));
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("malformed checkpoint: ") + e.what());
  }
}

// Training

Matrix feature_matrix(const InversionNet& net, std::span<const Example> ex) {
  Matrix x(static_cast<Eigen::Index>(ex.size()), static_cast<Eigen::Index>(kFeatureCount));
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const auto z = net.normalization().normalize_features(ex[i].features);
    for (std::size_t k = 0; k < kFeatureCount; ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = z[k];
  }
  return x;
}

Matrix target_matrix(const InversionNet& net, std::span<const Example> ex) {
  Matrix y(static_cast<Eigen::Index>(ex.size()), static_cast<Eigen::Index>(kTargetCount));
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const auto z = net.normalization().normalize_targets(ex[i].targets);
    for (std::size_t k = 0; k < kTargetCount; ++k) y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = z[k];
  }
  return y;
}

namespace {

// One pass of shuffled mini-batch AdamW; returns the size-weighted mean of the
// batch losses or throws NonFiniteLoss.
double run_epoch(InversionNet& net, AdamW& opt, const Matrix& x, const Matrix& y, std::size_t batch_size, Rng& rng,
                 std::size_t epoch) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  rng.shuffle(std::span<Eigen::Index>(order));
  std::vector<double> grad;
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    const auto rows = static_cast<Eigen::Index>(stop - start);
    Matrix bx(rows, x.cols());
    Matrix by(rows, y.cols());
    for (Eigen::Index r = 0; r < rows; ++r) {
      bx.row(r) = x.row(order[start + static_cast<std::size_t>(r)]);
      by.row(r) = y.row(order[start + static_cast<std::size_t>(r)]);
    }
    const double l = net.loss_and_gradient(bx, by, grad);
    if (!std::isfinite(l) || !all_finite(grad)) {
      throw Error(ErrorKind::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                                std::to_string(start / batch_size + 1) +
                                                "; check the inputs or lower the learning rate");
    }
    opt.step(net.parameters(), grad);
    total += l * static_cast<double>(rows);
  }
  return total / static_cast<double>(n);
}

std::vector<Example> pick(std::span<const Example> all, std::span<const std::size_t> idx) {
  std::vector<Example> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace

TrainResult train_batch(std::span<const Example> dataset, const TrainConfig& config, const ParameterBox& box) {
  config.validate();
  box.validate();
  constexpr std::size_t kMinExamples = 10 * (kFeatureCount + kTargetCount);
  if (dataset.size() < kMinExamples) {
    throw Error(ErrorKind::DatasetTooSmall, "training needs at least " + std::to_string(kMinExamples) +
                                                " valid runs, got " + std::to_string(dataset.size()) +
                                                "; enlarge the initial ensemble");
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!all_finite(dataset[i].features) || !all_finite(dataset[i].targets)) {
      throw Error(ErrorKind::NonFiniteLoss, "example " + std::to_string(i) + " has non-finite values");
    }
  }

  const std::size_t n = dataset.size();
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(n)));
  const std::span<const std::size_t> all(order);
  const auto train_idx = all.subspan(0, n_train);
  const auto val_idx = all.subspan(n_train, n_val);
  const auto test_idx = all.subspan(n_train + n_val);

  const auto train = pick(dataset, train_idx);
  const auto val = pick(dataset, val_idx);
  const auto test = pick(dataset, test_idx);

  TrainResult out{InversionNet(config.hidden, config.seed), {}};
  InversionNet& net = out.net;
  net.set_normalization(Normalization::fit(train));
  net.set_box(box);

  const Matrix xt = feature_matrix(net, train);
  const Matrix yt = target_matrix(net, train);
  const Matrix xv = feature_matrix(net, val);
  const Matrix yv = target_matrix(net, val);

  AdamW opt(net.parameter_count(), {config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay});
  auto& rep = out.report;
  rep.n_train = train.size();
  rep.n_val = val.size();
  rep.n_test = test.size();
  rep.test_indices.assign(test_idx.begin(), test_idx.end());
  for (std::size_t e = 0; e < config.epochs; ++e) {
    rep.train_loss.push_back(run_epoch(net, opt, xt, yt, config.batch_size, rng, e));
    rep.val_loss.push_back(net.loss(xv, yv));
  }
  rep.test_mse = net.loss(feature_matrix(net, test), target_matrix(net, test));
  if (!std::isfinite(rep.test_mse)) throw Error(ErrorKind::NonFiniteLoss, "non-finite test loss after training");
  net.mark_trained(dataset_hash(dataset), config);
  return out;
}

OnlineReport train_online(InversionNet& net, std::span<const Example> examples, const TrainConfig& config) {
  config.validate();
  if (!net.trained()) throw Error(ErrorKind::NotTrained, "online learning needs a batch-trained network");
  OnlineReport rep;
  rep.examples = examples.size();
  if (examples.empty()) return rep;

  const std::vector<double> backup(net.parameters().begin(), net.parameters().end());
  auto restore = [&] { std::copy(backup.begin(), backup.end(), net.parameters().begin()); };

  const Matrix x = feature_matrix(net, examples);
  const Matrix y = target_matrix(net, examples);
  rep.mse_before = net.loss(x, y);
  if (!std::isfinite(rep.mse_before)) {
    throw Error(ErrorKind::NonFiniteLoss, "new examples produce a non-finite loss; update rejected");
  }
  AdamW opt(net.parameter_count(), {config.online_learning_rate, 0.9, 0.999, 1e-8, config.weight_decay});
  Rng rng(config.seed ^ dataset_hash(examples));
  try {
    for (std::size_t e = 0; e < config.online_epochs; ++e) {
      run_epoch(net, opt, x, y, std::min(config.batch_size, examples.size()), rng, e);
    }
  } catch (const Error&) {
    restore();
    throw;
  }
  rep.mse_after = net.loss(x, y);
  if (!std::isfinite(rep.mse_after) || !all_finite(net.parameters())) {
    restore();
    throw Error(ErrorKind::NonFiniteLoss, "online update diverged; prior weights kept");
  }
  rep.accepted = rep.mse_after <= rep.mse_before;
  if (!rep.accepted) {
    restore();
    rep.mse_after = rep.mse_before;
  }
  return rep;
}

GradientCheck gradient_check(const InversionNet& net, const Matrix& x, const Matrix& y, double step) {
  std::vector<double> analytic;
  net.loss_and_gradient(x, y, analytic);
  InversionNet probe = net;
  auto p = probe.parameters();
  GradientCheck out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + step;
    const double up = probe.loss(x, y);
    p[i] = saved - step;
    const double down = probe.loss(x, y);
    p[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double abs_err = std::abs(numeric - analytic[i]);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
    out.max_absolute_error = std::max(out.max_absolute_error, abs_err);
    out.max_relative_error = std::max(out.max_relative_error, abs_err / scale);
  }
  return out;
}

std::vector<WidthSweepEntry> sweep_width(std::span<const Example> dataset, std::span<const std::size_t> widths,
                                         const TrainConfig& config, const ParameterBox& box) {
  std::vector<WidthSweepEntry> out;
  for (auto h : widths) {
    TrainConfig c = config;
    c.hidden = h;
    const auto r = train_batch(dataset, c, box);
    out.push_back({h, r.report.test_mse, r.report.val_loss.back()});
  }
  return out;
}

}  // namespace idoe
