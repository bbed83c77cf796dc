#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "idoe/cycle_sim.hpp"
#include "idoe/cycle_spec.hpp"
#include "idoe/doe.hpp"

namespace idoe {

inline constexpr std::size_t kFeatureCount = 8;
inline constexpr std::size_t kTargetCount = ControlParams::kCount;

using Features = std::array<double, kFeatureCount>;
using Targets = std::array<double, kTargetCount>;

/// [h1, h2, h3, h4, log10 P_low, log10 P_high, dT_subcool, dT_superheat]
/// with enthalpies in J/kg and pressures in Pa. Throws InvalidCycle.
Features featurize(const CycleResult& result);
Features featurize(const RefrigerantModel& model, const std::array<CharPoint, 4>& points);
Features featurize(const RefrigerantModel& model, const CycleGeometry& geometry);

struct Example {
  Features features{};
  Targets targets{};
};

/// Valid runs of the ensemble as training examples, in run order.
std::vector<Example> make_dataset(const Ensemble& ensemble);
std::vector<Example> make_dataset(std::span<const Run> runs);

/// FNV-1a over the bit patterns of all values, byte order fixed.
std::uint64_t dataset_hash(std::span<const Example> examples);

struct TrainConfig {
  std::size_t hidden = 64;
  std::size_t epochs = 300;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  std::size_t online_epochs = 20;
  double online_learning_rate = 1e-4;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 42;

  /// Throws InvalidArgument.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct TrainReport {
  std::vector<double> train_loss;  // per epoch, normalized space
  std::vector<double> val_loss;
  double test_mse = 0.0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
  std::vector<std::size_t> test_indices;  // into the training dataset
};

/// Per-feature z-score statistics, frozen at batch-training time.
struct Normalization {
  Features in_mean{};
  Features in_std{};
  Targets out_mean{};
  Targets out_std{};

  static Normalization identity();
  static Normalization fit(std::span<const Example> examples);

  Features normalize_features(const Features& f) const;
  Features denormalize_features(const Features& z) const;
  Targets normalize_targets(const Targets& t) const;
  Targets denormalize_targets(const Targets& z) const;

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fully connected 8 -> H -> H -> H -> 5 network with tanh hidden layers
/// and a linear output. Parameters live in one flat vector, layer by layer,
/// each layer as a row-major weight matrix followed by its bias.
class InversionNet {
 public:
  static constexpr std::size_t kHiddenLayers = 3;

  InversionNet() = default;
  /// Random initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and
  /// biases, identity normalization, default box, not trained.
  InversionNet(std::size_t hidden, std::uint64_t seed);

  std::size_t hidden() const { return hidden_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }

  const Normalization& normalization() const { return norm_; }
  void set_normalization(const Normalization& n) { norm_ = n; }
  const ParameterBox& box() const { return box_; }
  void set_box(const ParameterBox& b) { box_ = b; }
  bool trained() const { return trained_; }
  void mark_trained(std::uint64_t dataset_hash, const TrainConfig& config);

  std::uint64_t dataset_hash() const { return dataset_hash_; }
  const TrainConfig& train_config() const { return config_; }

  /// Rows are samples; both sides in normalized space.
  Matrix forward(const Matrix& x) const;
  /// Mean squared error over all output elements.
  double loss(const Matrix& x, const Matrix& y) const;
  /// Loss plus its gradient with respect to parameters() (resized to fit).
  double loss_and_gradient(const Matrix& x, const Matrix& y, std::vector<double>& grad) const;

  /// De-normalized, box-clamped prediction. Throws NotTrained.
  ControlParams predict(const Features& features) const;

  /// Checksum over the parameter bit patterns and normalization.
  std::uint64_t checksum() const;

  nlohmann::json to_json() const;
  static InversionNet from_json(const nlohmann::json& j);

  bool bit_equal(const InversionNet& other) const;

 private:
  std::size_t hidden_ = 0;
  std::vector<double> params_;
  Normalization norm_ = Normalization::identity();
  ParameterBox box_ = ParameterBox::defaults();
  bool trained_ = false;
  std::uint64_t dataset_hash_ = 0;
  TrainConfig config_;
};

struct TrainResult {
  InversionNet net;
  TrainReport report;
};

/// Batch training from scratch. Throws DatasetTooSmall, NonFiniteLoss.
TrainResult train_batch(std::span<const Example> dataset, const TrainConfig& config,
                        const ParameterBox& box = ParameterBox::defaults());

struct OnlineReport {
  double mse_before = 0.0;  // normalized space, on the new examples
  double mse_after = 0.0;
  bool accepted = false;  // false: prior weights kept
  std::size_t examples = 0;
};

/// Fine-tunes with the frozen normalization on the new examples only. An
/// update that raises their MSE is rejected; a non-finite loss restores the
/// prior weights and throws NonFiniteLoss.
OnlineReport train_online(InversionNet& net, std::span<const Example> examples, const TrainConfig& config);

/// Normalized-space views of examples.
Matrix feature_matrix(const InversionNet& net, std::span<const Example> examples);
Matrix target_matrix(const InversionNet& net, std::span<const Example> examples);

struct GradientCheck {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
};

/// Compares backpropagation against central differences over every
/// parameter. Relative errors use max(|analytic|, |numeric|, 1e-6).
GradientCheck gradient_check(const InversionNet& net, const Matrix& x, const Matrix& y, double step = 1e-5);

struct WidthSweepEntry {
  std::size_t hidden = 0;
  double test_mse = 0.0;
  double final_val_loss = 0.0;
};

/// Trains one net per hidden width with otherwise identical settings.
std::vector<WidthSweepEntry> sweep_width(std::span<const Example> dataset, std::span<const std::size_t> widths,
                                         const TrainConfig& config, const ParameterBox& box = ParameterBox::defaults());

}  // namespace idoe
