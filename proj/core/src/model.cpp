#include "hesitant/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>

#include "hesitant/error.hpp"
#include "hesitant/io.hpp"
#include "hesitant/parallel.hpp"
#include "hesitant/rng.hpp"

namespace hesitant {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Featurizer

FeaturizerConfig featurizer_config_from_json(const json& j) {
    FeaturizerConfig c;
    c.dim = j.value("dim", c.dim);
    c.hash_seed = j.value("hash_seed", c.hash_seed);
    c.l2_normalize = j.value("l2_normalize", c.l2_normalize);
    if (c.dim < 2) throw ValidationError("feature dimension must be >= 2");
    return c;
}

json to_json(const FeaturizerConfig& c) {
    return {{"dim", c.dim}, {"hash_seed", c.hash_seed}, {"l2_normalize", c.l2_normalize}, {"hash_version", 1}};
}

std::uint64_t hash_key(std::string_view key, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

std::size_t bucket_of(std::string_view key, std::size_t dim, std::uint64_t seed) {
    return static_cast<std::size_t>(hash_key(key, seed) % dim);
}

std::string bigram_key(std::string_view first, std::string_view second) {
    std::string key;
    key.reserve(first.size() + second.size() + 1);
    key.append(first);
    key.push_back(' ');
    key.append(second);
    return key;
}

FeatureVector FeatureVector::from_dense(std::span<const double> values) {
    FeatureVector v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] != 0.0) {
            v.m_index.push_back(static_cast<std::uint32_t>(i));
            v.m_value.push_back(values[i]);
        }
    }
    return v;
}

FeatureVector FeatureVector::from_sparse(std::size_t dim, std::vector<std::uint32_t> indices, std::vector<double> values) {
    if (indices.size() != values.size()) throw ValidationError("sparse vector: index/value length mismatch");
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= dim || (i > 0 && indices[i] <= indices[i - 1])) {
            throw ValidationError("sparse vector: indices must be increasing and below dim");
        }
    }
    FeatureVector v(dim);
    v.m_index = std::move(indices);
    v.m_value = std::move(values);
    return v;
}

double FeatureVector::operator[](std::size_t i) const {
    auto it = std::lower_bound(m_index.begin(), m_index.end(), i);
    if (it == m_index.end() || *it != i) return 0.0;
    return m_value[static_cast<std::size_t>(it - m_index.begin())];
}

std::vector<double> FeatureVector::to_dense() const {
    std::vector<double> out(m_dim, 0.0);
    for (std::size_t k = 0; k < m_index.size(); ++k) out[m_index[k]] = m_value[k];
    return out;
}

FeatureVector featurize(std::span<const std::string> tokens, const FeaturizerConfig& config) {
    if (config.dim < 2) throw ValidationError("feature dimension must be >= 2");
    std::vector<std::uint32_t> buckets;
    buckets.reserve(tokens.size() * 2);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        buckets.push_back(static_cast<std::uint32_t>(bucket_of(tokens[i], config.dim, config.hash_seed)));
        if (i + 1 < tokens.size()) {
            buckets.push_back(
                static_cast<std::uint32_t>(bucket_of(bigram_key(tokens[i], tokens[i + 1]), config.dim, config.hash_seed)));
        }
    }
    std::sort(buckets.begin(), buckets.end());

    std::vector<std::uint32_t> indices;
    std::vector<double> counts;
    for (auto b : buckets) {
        if (!indices.empty() && indices.back() == b) {
            counts.back() += 1.0;
        } else {
            indices.push_back(b);
            counts.push_back(1.0);
        }
    }
    if (config.l2_normalize && !counts.empty()) {
        double norm = 0.0;
        for (double c : counts) norm += c * c;
        norm = std::sqrt(norm);
        for (double& c : counts) c /= norm;
    }
    return FeatureVector::from_sparse(config.dim, std::move(indices), std::move(counts));
}

// ---------------------------------------------------------------------------
// Network

namespace {

void validate_arch(const Arch& arch) {
    if (arch.input_dim < 1 || arch.hidden < 1) throw ValidationError("network dimensions must be positive");
    if (!(arch.dropout_rate >= 0.0 && arch.dropout_rate < 1.0)) throw ValidationError("dropout_rate must be in [0,1)");
}

std::string_view to_string(InitScheme init) { return init == InitScheme::Zero ? "zero" : "uniform"; }

} // namespace

Arch arch_from_json(const json& j, std::size_t input_dim) {
    Arch a;
    a.input_dim = input_dim;
    a.hidden = j.value("hidden", a.hidden);
    a.dropout_rate = j.value("dropout_rate", a.dropout_rate);
    const auto init = j.value("init", std::string("uniform"));
    if (init == "zero") a.init = InitScheme::Zero;
    else if (init != "uniform") throw ValidationError("unknown init scheme '" + init + "'");
    validate_arch(a);
    return a;
}

json to_json(const Arch& a) {
    return {{"input_dim", a.input_dim},
            {"hidden", a.hidden},
            {"dropout_rate", a.dropout_rate},
            {"init", to_string(a.init)},
            {"activation", "tanh"},
            {"output", "logistic"}};
}

MlpParams::MlpParams(const Arch& arch) : m_arch(arch) {
    validate_arch(arch);
    m_values.assign(arch.input_dim * arch.hidden + 2 * arch.hidden + 1, 0.0);
}

void MlpParams::check_finite() const {
    for (double v : m_values) {
        if (!std::isfinite(v)) throw NumericError("network parameter is not finite");
    }
}

MlpParams init_params(const Arch& arch, std::uint64_t seed) {
    MlpParams params(arch);
    if (arch.init == InitScheme::Zero) return params;
    SeqRng rng(derive_key({seed, 0x1417}));
    auto values = params.values();
    const double in_bound = 1.0 / std::sqrt(static_cast<double>(arch.input_dim));
    for (std::size_t i = 0; i < params.input_weight_count(); ++i) values[i] = rng.uniform(-in_bound, in_bound);
    const double out_bound = 1.0 / std::sqrt(static_cast<double>(arch.hidden));
    for (std::size_t h = 0; h < arch.hidden; ++h) values[params.output_weight_offset() + h] = rng.uniform(-out_bound, out_bound);
    return params;
}

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

struct HiddenPass {
    std::vector<double> activation;  // tanh of the pre-activation
    std::vector<double> mask;        // 0 or the survivor scale
    double logit = 0.0;
};

void run_hidden(const MlpParams& params, const FeatureVector& x, const ForwardMode& mode, HiddenPass& pass) {
    const Arch& arch = params.arch();
    if (x.dim() != arch.input_dim) {
        throw ValidationError("feature dimension " + std::to_string(x.dim()) + " does not match network input " +
                              std::to_string(arch.input_dim));
    }
    const std::size_t hidden = arch.hidden;
    const auto w = params.values();
    pass.activation.assign(w.begin() + static_cast<std::ptrdiff_t>(params.hidden_bias_offset()),
                           w.begin() + static_cast<std::ptrdiff_t>(params.hidden_bias_offset() + hidden));
    const auto idx = x.indices();
    const auto val = x.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double* row = w.data() + static_cast<std::size_t>(idx[k]) * hidden;
        const double xv = val[k];
        for (std::size_t h = 0; h < hidden; ++h) pass.activation[h] += row[h] * xv;
    }
    for (double& a : pass.activation) a = std::tanh(a);

    pass.mask.assign(hidden, 1.0);
    if (const auto* drop = std::get_if<StochasticDropout>(&mode)) {
        const double rate = arch.dropout_rate;
        const double scale = 1.0 / (1.0 - rate);
        for (std::size_t h = 0; h < hidden; ++h) {
            pass.mask[h] = counter_uniform(drop->key, h) < rate ? 0.0 : scale;
        }
    }

    double z = params.output_bias();
    const double* out_w = w.data() + params.output_weight_offset();
    for (std::size_t h = 0; h < hidden; ++h) z += out_w[h] * pass.activation[h] * pass.mask[h];
    if (!std::isfinite(z)) throw NumericError("non-finite network output");
    pass.logit = z;
}

} // namespace

double forward_logit(const MlpParams& params, const FeatureVector& x, const ForwardMode& mode) {
    HiddenPass pass;
    run_hidden(params, x, mode, pass);
    return pass.logit;
}

double forward(const MlpParams& params, const FeatureVector& x, const ForwardMode& mode) {
    return logistic(forward_logit(params, x, mode));
}

// ---------------------------------------------------------------------------
// Training

BinaryDataset BinaryDataset::subset(std::span<const std::size_t> rows) const {
    BinaryDataset out;
    out.ids.reserve(rows.size());
    out.features.reserve(rows.size());
    out.labels.reserve(rows.size());
    for (auto r : rows) {
        out.ids.push_back(ids.at(r));
        out.features.push_back(features.at(r));
        out.labels.push_back(labels.at(r));
    }
    return out;
}

void BinaryDataset::validate(std::size_t dim) const {
    if (ids.size() != labels.size() || features.size() != labels.size()) {
        throw ValidationError("dataset columns differ in length");
    }
    for (const auto& f : features) {
        if (f.dim() != dim) throw ValidationError("dataset feature dimension mismatch");
    }
}

LossAndGrad loss_and_grad(const MlpParams& params, const BinaryDataset& data, std::span<const std::size_t> rows,
                          const ForwardMode& mode) {
    if (rows.empty()) throw ValidationError("loss_and_grad needs a non-empty batch");
    const std::size_t hidden = params.arch().hidden;
    LossAndGrad out;
    out.grad.assign(params.size(), 0.0);
    const auto w = params.values();
    const double* out_w = w.data() + params.output_weight_offset();
    const double inv_n = 1.0 / static_cast<double>(rows.size());

    HiddenPass pass;
    std::vector<double> delta(hidden);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const std::size_t r = rows[j];
        ForwardMode row_mode = Deterministic{};
        if (const auto* drop = std::get_if<StochasticDropout>(&mode)) {
            row_mode = StochasticDropout{derive_key({drop->key, static_cast<std::uint64_t>(j)})};
        }
        const FeatureVector& x = data.features.at(r);
        run_hidden(params, x, row_mode, pass);

        const double y = as_real(data.labels.at(r));
        const double p = logistic(pass.logit);
        const double pc = std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
        out.loss -= (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc)) * inv_n;

        const double dz = (p - y) * inv_n;
        out.grad[params.output_bias_offset()] += dz;
        for (std::size_t h = 0; h < hidden; ++h) {
            const double a = pass.activation[h];
            out.grad[params.output_weight_offset() + h] += dz * a * pass.mask[h];
            delta[h] = dz * out_w[h] * pass.mask[h] * (1.0 - a * a);
            out.grad[params.hidden_bias_offset() + h] += delta[h];
        }
        const auto idx = x.indices();
        const auto val = x.values();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            double* g = out.grad.data() + static_cast<std::size_t>(idx[k]) * hidden;
            for (std::size_t h = 0; h < hidden; ++h) g[h] += delta[h] * val[k];
        }
    }
    return out;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("betas must be in [0,1)");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(decision_threshold > 0.0 && decision_threshold < 1.0)) {
        throw ValidationError("decision_threshold must be in (0,1)");
    }
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    c.decision_threshold = j.value("decision_threshold", c.decision_threshold);
    c.validate();
    return c;
}

json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay},
            {"epsilon", c.epsilon},             {"beta1", c.beta1},
            {"beta2", c.beta2},                 {"batch_size", c.batch_size},
            {"epochs", c.epochs},               {"seed", c.seed},
            {"decision_threshold", c.decision_threshold}};
}

AdamWState AdamWState::fresh(std::size_t parameter_count, const TrainConfig& config) {
    AdamWState s;
    s.m.assign(parameter_count, 0.0);
    s.v.assign(parameter_count, 0.0);
    s.beta1 = config.beta1;
    s.beta2 = config.beta2;
    return s;
}

void adamw_step(AdamWState& state, std::span<double> params, std::span<const double> grads, const TrainConfig& config) {
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ValidationError("adamw_step: shape mismatch");
    }
    state.t += 1;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    const double lr = config.learning_rate;
    const double decay = config.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        const double w = params[i];
        params[i] = w - lr * m_hat / (std::sqrt(v_hat) + config.epsilon) - lr * decay * w;
    }
}

TrainResult train(const BinaryDataset& data, const Arch& arch, const TrainConfig& config) {
    config.validate();
    if (data.size() == 0) throw ValidationError("cannot train on an empty dataset");
    data.validate(arch.input_dim);

    TrainResult result;
    result.params = init_params(arch, config.seed);
    const std::size_t positives = static_cast<std::size_t>(
        std::count(data.labels.begin(), data.labels.end(), BinaryLabel::Positive));
    if (positives == 0 || positives == data.size()) {
        result.warnings.push_back("training data contains a single class");
    }

    AdamWState state = AdamWState::fresh(result.params.size(), config);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const bool stochastic = arch.dropout_rate > 0.0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        SeqRng shuffle_rng(derive_key({config.seed, 0x5u, epoch}));
        shuffle_in_place(order, shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> rows(order.data() + start, end - start);
            ForwardMode mode = Deterministic{};
            if (stochastic) mode = StochasticDropout{derive_key({config.seed, 0xd0u, epoch, batch_index})};
            auto lg = loss_and_grad(result.params, data, rows, mode);
            epoch_loss += lg.loss * static_cast<double>(rows.size());
            adamw_step(state, result.params.values(), lg.grad, config);
            ++result.steps;
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(data.size()));
    }
    return result;
}

BinaryLabel decide(double probability, double threshold) {
    return probability >= threshold ? BinaryLabel::Positive : BinaryLabel::Negative;
}

Prediction predict(const MlpParams& params, const FeatureVector& x, double threshold) {
    Prediction p;
    p.probability = forward(params, x, Deterministic{});
    p.label = decide(p.probability, threshold);
    return p;
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("kfold needs K >= 2");
    if (n < k) throw ValidationError("kfold needs n >= K (n=" + std::to_string(n) + ", K=" + std::to_string(k) + ")");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeqRng rng(derive_key({seed, 0xf01du}));
    shuffle_in_place(order, rng);

    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return folds;
}

MeanMetrics mean_metrics(std::span<const ClassificationMetrics> folds) {
    MeanMetrics out;
    if (folds.empty()) return out;
    auto average = [&](auto getter) -> std::optional<double> {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& f : folds) {
            if (auto v = getter(f)) {
                sum += *v;
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    };
    out.accuracy = *average([](const ClassificationMetrics& m) { return std::optional<double>(m.accuracy); });
    out.precision = average([](const ClassificationMetrics& m) { return m.precision; });
    out.recall = average([](const ClassificationMetrics& m) { return m.recall; });
    out.f1 = average([](const ClassificationMetrics& m) { return m.f1; });
    return out;
}

CrossValidationResult cross_validate(const BinaryDataset& data, const Arch& arch, const TrainConfig& config,
                                     std::size_t k) {
    const auto folds = kfold_split(data.size(), k, config.seed);
    CrossValidationResult result;
    result.folds.resize(k);
    parallel_for(k, [&](std::size_t f) {
        std::vector<std::size_t> train_rows;
        train_rows.reserve(data.size() - folds[f].size());
        for (std::size_t g = 0; g < k; ++g) {
            if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        TrainConfig fold_config = config;
        fold_config.seed = derive_key({config.seed, static_cast<std::uint64_t>(f)});
        const auto trained = train(data.subset(train_rows), arch, fold_config);

        std::vector<BinaryLabel> predicted;
        std::vector<BinaryLabel> truth;
        for (auto r : folds[f]) {
            predicted.push_back(predict(trained.params, data.features[r], config.decision_threshold).label);
            truth.push_back(data.labels[r]);
        }
        result.folds[f] = classification_metrics(predicted, truth);
    });
    result.mean = mean_metrics(result.folds);
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kMagic = "HSTMLP01";

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(std::string_view in, std::size_t& pos) {
    if (pos + 8 > in.size()) throw ValidationError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    pos += 8;
    return v;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    json meta = {{"format", "hesitant-mlp"},
                 {"version", kCheckpointVersion},
                 {"arch", to_json(checkpoint.params.arch())},
                 {"train_config", to_json(checkpoint.config)},
                 {"seed", checkpoint.config.seed}};
    if (checkpoint.featurizer) meta["featurizer"] = to_json(*checkpoint.featurizer);
    const std::string meta_text = meta.dump();

    std::string blob(kMagic);
    put_u64(blob, meta_text.size());
    blob += meta_text;
    const auto values = checkpoint.params.values();
    put_u64(blob, values.size());
    for (double v : values) put_u64(blob, std::bit_cast<std::uint64_t>(v));
    io::write_file(path, blob);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::string blob = io::read_file(path);
    if (!std::string_view(blob).starts_with(kMagic)) throw ValidationError("not a hesitant checkpoint: " + path.string());
    std::size_t pos = kMagic.size();
    const auto meta_len = get_u64(blob, pos);
    if (pos + meta_len > blob.size()) throw ValidationError("checkpoint truncated");
    json meta;
    try {
        meta = json::parse(std::string_view(blob).substr(pos, meta_len));
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("checkpoint metadata: ") + e.what());
    }
    pos += meta_len;
    if (meta.value("version", 0) != kCheckpointVersion) throw ValidationError("unsupported checkpoint version");

    const auto& arch_json = meta.at("arch");
    Arch arch = arch_from_json(arch_json, arch_json.at("input_dim").get<std::size_t>());
    Checkpoint cp;
    cp.params = MlpParams(arch);
    cp.config = train_config_from_json(meta.at("train_config"));
    if (meta.contains("featurizer")) cp.featurizer = featurizer_config_from_json(meta["featurizer"]);

    const auto count = get_u64(blob, pos);
    if (count != cp.params.size()) throw ValidationError("checkpoint parameter count does not match its architecture");
    auto values = cp.params.values();
    for (std::size_t i = 0; i < count; ++i) values[i] = std::bit_cast<double>(get_u64(blob, pos));
    if (pos != blob.size()) throw ValidationError("trailing bytes in checkpoint");
    return cp;
}

} // namespace hesitant
