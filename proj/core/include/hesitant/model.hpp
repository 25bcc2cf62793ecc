#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hesitant/labels.hpp"
#include "hesitant/stats.hpp"

namespace hesitant {

// ---------------------------------------------------------------------------
// Hashed bag of n-grams

struct FeaturizerConfig {
    std::size_t dim = 4096;
    std::uint64_t hash_seed = 0;
    bool l2_normalize = true;

    bool operator==(const FeaturizerConfig&) const = default;
};

FeaturizerConfig featurizer_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FeaturizerConfig& config);

/// Hash function version 1: seeded 64-bit FNV-1a followed by a SplitMix64 finalizer.
std::uint64_t hash_key(std::string_view key, std::uint64_t seed);
std::size_t bucket_of(std::string_view key, std::size_t dim, std::uint64_t seed);
/// Bigram key used by featurize: the two tokens joined by one space.
std::string bigram_key(std::string_view first, std::string_view second);

/// Logically a dense vector of length dim(); stored as sorted (index, value)
/// pairs since hashed report vectors are overwhelmingly zero.
class FeatureVector {
public:
    FeatureVector() = default;
    explicit FeatureVector(std::size_t dim) : m_dim(dim) {}

    static FeatureVector from_dense(std::span<const double> values);
    /// Indices must be strictly increasing and < dim.
    static FeatureVector from_sparse(std::size_t dim, std::vector<std::uint32_t> indices, std::vector<double> values);

    std::size_t dim() const { return m_dim; }
    std::size_t nonzeros() const { return m_index.size(); }
    std::span<const std::uint32_t> indices() const { return m_index; }
    std::span<const double> values() const { return m_value; }

    double operator[](std::size_t i) const;
    std::vector<double> to_dense() const;

    bool operator==(const FeatureVector&) const = default;

private:
    std::size_t m_dim = 0;
    std::vector<std::uint32_t> m_index;
    std::vector<double> m_value;
};

/// Unigram and adjacent-bigram counts hashed into [0, dim). Throws for dim < 2.
FeatureVector featurize(std::span<const std::string> tokens, const FeaturizerConfig& config);

// ---------------------------------------------------------------------------
// Network

enum class InitScheme { Uniform, Zero };

/// D -> H (tanh, dropout) -> 1 (logistic).
struct Arch {
    std::size_t input_dim = 4096;
    std::size_t hidden = 64;
    double dropout_rate = 0.2;
    InitScheme init = InitScheme::Uniform;

    bool operator==(const Arch&) const = default;
};

Arch arch_from_json(const nlohmann::json& j, std::size_t input_dim);
nlohmann::json to_json(const Arch& arch);

/// Flat parameter buffer. Layout: input weights (D x H, input-major, so the
/// H weights leaving feature i are contiguous), hidden bias (H), output
/// weights (H), output bias (1).
class MlpParams {
public:
    MlpParams() = default;
    /// All parameters zero. Throws ValidationError on an invalid arch.
    explicit MlpParams(const Arch& arch);

    const Arch& arch() const { return m_arch; }
    std::size_t size() const { return m_values.size(); }

    std::span<double> values() { return m_values; }
    std::span<const double> values() const { return m_values; }

    std::span<const double> input_weights() const { return values().subspan(0, input_weight_count()); }
    std::span<const double> hidden_bias() const { return values().subspan(input_weight_count(), m_arch.hidden); }
    std::span<const double> output_weights() const {
        return values().subspan(input_weight_count() + m_arch.hidden, m_arch.hidden);
    }
    double output_bias() const { return m_values.back(); }

    std::size_t input_weight_count() const { return m_arch.input_dim * m_arch.hidden; }
    std::size_t hidden_bias_offset() const { return input_weight_count(); }
    std::size_t output_weight_offset() const { return input_weight_count() + m_arch.hidden; }
    std::size_t output_bias_offset() const { return m_values.size() - 1; }

    /// Throws NumericError if any parameter is NaN or infinite.
    void check_finite() const;

    bool operator==(const MlpParams&) const = default;

private:
    Arch m_arch;
    std::vector<double> m_values;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and zero biases, or all zeros.
MlpParams init_params(const Arch& arch, std::uint64_t seed);

struct Deterministic {};
/// Hidden unit h is dropped iff counter_uniform(key, h) < rate; survivors are
/// scaled by 1 / (1 - rate).
struct StochasticDropout {
    std::uint64_t key = 0;
};
using ForwardMode = std::variant<Deterministic, StochasticDropout>;

/// Pre-logistic output. Throws NumericError if the result is not finite.
double forward_logit(const MlpParams& params, const FeatureVector& x, const ForwardMode& mode);
double forward(const MlpParams& params, const FeatureVector& x, const ForwardMode& mode);

double logistic(double z);

// ---------------------------------------------------------------------------
// Data and training

struct BinaryDataset {
    std::vector<std::string> ids;
    std::vector<FeatureVector> features;
    std::vector<BinaryLabel> labels;

    std::size_t size() const { return labels.size(); }
    BinaryDataset subset(std::span<const std::size_t> rows) const;
    /// Shapes agree and every vector has the given dimension.
    void validate(std::size_t dim) const;
};

inline constexpr double kProbabilityFloor = 1e-12;

struct LossAndGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Mean binary cross-entropy over `rows` of `data` with gradients by
/// backpropagation. Under StochasticDropout the row at batch position j uses
/// mask key derive_key({mode.key, j}).
LossAndGrad loss_and_grad(const MlpParams& params, const BinaryDataset& data, std::span<const std::size_t> rows,
                          const ForwardMode& mode);

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    double epsilon = 1e-7;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::size_t batch_size = 128;
    std::size_t epochs = 3;
    std::uint64_t seed = 0;
    double decision_threshold = 0.5;

    /// Throws ValidationError when an invariant fails.
    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& config);

struct AdamWState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;

    static AdamWState fresh(std::size_t parameter_count, const TrainConfig& config);
};

/// Increments t, updates moments, then
///   w <- w - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * w
/// with the decay applied to the pre-step weight and never folded into g.
void adamw_step(AdamWState& state, std::span<double> params, std::span<const double> grads, const TrainConfig& config);

struct TrainResult {
    MlpParams params;
    std::vector<double> epoch_loss;
    std::vector<std::string> warnings;
    std::size_t steps = 0;
};

/// Pure function of (data, arch, config): initialisation, shuffling, and
/// dropout masks all derive from config.seed.
TrainResult train(const BinaryDataset& data, const Arch& arch, const TrainConfig& config);

struct Prediction {
    double probability = 0.0;
    BinaryLabel label = BinaryLabel::Negative;
};

/// Positive iff p >= threshold.
BinaryLabel decide(double probability, double threshold);
Prediction predict(const MlpParams& params, const FeatureVector& x, double threshold = 0.5);

/// K disjoint folds covering [0, n) with sizes differing by at most one.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct MeanMetrics {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

/// Averages each metric over the folds where it is defined.
MeanMetrics mean_metrics(std::span<const ClassificationMetrics> folds);

struct CrossValidationResult {
    std::vector<ClassificationMetrics> folds;
    MeanMetrics mean;
};

/// Fold f trains with seed derive_key({config.seed, f}) on the complement of
/// fold f and evaluates deterministic predictions on fold f.
CrossValidationResult cross_validate(const BinaryDataset& data, const Arch& arch, const TrainConfig& config,
                                     std::size_t k);

// ---------------------------------------------------------------------------
// Checkpoints: "HSTMLP01", u64 metadata length, metadata JSON, u64 parameter
// count, then the parameters as little-endian IEEE-754 doubles.

struct Checkpoint {
    MlpParams params;
    TrainConfig config;
    std::optional<FeaturizerConfig> featurizer;

    bool operator==(const Checkpoint&) const = default;
};

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace hesitant
