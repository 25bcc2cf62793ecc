#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hesitant/analysis.hpp"
#include "hesitant/corpus.hpp"
#include "hesitant/labels.hpp"
#include "hesitant/model.hpp"
#include "hesitant/textprep.hpp"
#include "hesitant/uq.hpp"

namespace hesitant {

/// TrainOnly fits on the train split and evaluates on validation; FullTrain
/// fits on train + validation and evaluates on test.
enum class Regime { TrainOnly, FullTrain };
std::string_view to_string(Regime regime);

struct CorpusSource {
    std::optional<SyntheticSpec> synthetic;
    std::filesystem::path reports;
    std::filesystem::path labels;
};

struct UqSettings {
    std::size_t mc_passes = 10;
    std::uint64_t mc_seed = 0;
    std::size_t ensemble_size = 10;
    std::uint64_t ensemble_base_seed = 100;
};

struct AnalysisSettings {
    double tau = 0.45;
    Regime regime = Regime::FullTrain;
    /// Folds for cross-validation on the training rows; 0 disables it.
    std::size_t kfold = 5;
};

/// Every random decision in a run traces back to a seed in here.
struct ExperimentConfig {
    CorpusSource corpus;
    PrepConfig prep;
    FeaturizerConfig features;
    Strategy strategy = Strategy::random(7);
    Arch arch;  // input_dim always follows features.dim
    TrainConfig train;
    UqSettings uq;
    AnalysisSettings analysis;
    std::filesystem::path output_dir = "out";
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct CorpusCounts {
    std::size_t reports_without_labels = 0;
    std::size_t labels_without_reports = 0;
    std::size_t missing_label = 0;
    std::size_t empty_text = 0;
};

/// Joined studies plus everything derived from them before training.
struct PreparedCorpus {
    CorpusCounts exclusions;
    std::vector<LabelledStudy> studies;
    std::vector<FeatureVector> features;
    std::vector<BinaryLabel> chexpert;  // binarised on stream kChexpertStream
    std::vector<BinaryLabel> negbio;    // binarised on stream kNegbioStream
    std::vector<UncertaintyIndicator> indicators;
};

JoinResult load_corpus(const CorpusSource& source);
PreparedCorpus prepare_corpus(const JoinResult& joined, const PrepConfig& prep, const FeaturizerConfig& features,
                              const Strategy& strategy);

// dataset.json: the prepared corpus with sparse features, ready for training.
void save_prepared(const std::filesystem::path& path, const PreparedCorpus& corpus, const nlohmann::json& config_echo);
PreparedCorpus load_prepared(const std::filesystem::path& path);

struct RegimeRows {
    std::vector<std::size_t> train;
    std::vector<std::size_t> eval;
    Split eval_split = Split::Test;
};

RegimeRows regime_rows(const PreparedCorpus& corpus, Regime regime);
/// Features with binarised CheXpert targets for the given rows.
BinaryDataset labelled_rows(const PreparedCorpus& corpus, std::span<const std::size_t> rows);

struct TrainingTrace {
    std::vector<double> epoch_loss;
    std::vector<std::string> warnings;
    std::size_t steps = 0;
};

/// Inputs to the analysis stage. Any piece may be absent.
struct AnalysisInputs {
    const PreparedCorpus* corpus = nullptr;
    RegimeRows rows;
    std::optional<std::vector<double>> single_probabilities;  // aligned with rows.eval
    std::optional<TrainingTrace> single_trace;
    std::optional<SampleMatrix> mc;
    std::optional<SampleMatrix> ensemble;
    std::optional<CrossValidationResult> cross_validation;
};

struct SplitTally {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

struct LabelDistribution {
    std::array<SplitTally, 3> by_label{};  // positive, negative, uncertain
};

struct RateBySplit {
    std::optional<double> train;
    std::optional<double> validation;
    std::optional<double> test;
    std::optional<double> overall;
};

struct ExperimentResults {
    nlohmann::json config = nlohmann::json::object();
    std::optional<CorpusCounts> exclusions;
    std::optional<SplitTally> split_counts;
    std::optional<LabelDistribution> chexpert_distribution;
    std::optional<LabelDistribution> negbio_distribution;
    std::optional<RateBySplit> raw_tld;
    std::optional<RateBySplit> binarised_tld;

    std::optional<Regime> regime;
    std::optional<Split> eval_split;
    std::size_t eval_count = 0;

    std::optional<TrainingTrace> single_trace;
    std::optional<ClassificationMetrics> single_metrics;
    std::vector<std::pair<SampleSource, ClassificationMetrics>> method_metrics;
    std::optional<CrossValidationResult> cross_validation;

    std::vector<UncertaintyIndicator> eval_indicators;
    std::vector<SourceSummaries> summaries;
    std::vector<std::pair<SampleSource, GroupMeans>> group_means;
    std::optional<CorrelationTables> correlations;
    std::optional<OodResult> ood;

    double tau = 0.45;
    std::vector<std::pair<SampleSource, std::vector<ErrorCase>>> errors;
};

ExperimentResults analyze(const AnalysisInputs& inputs, const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Pipeline stages

TrainResult train_single(const PreparedCorpus& corpus, const RegimeRows& rows, const ExperimentConfig& config);
std::vector<MlpParams> train_ensemble(const PreparedCorpus& corpus, const RegimeRows& rows,
                                      const ExperimentConfig& config);
std::vector<double> eval_probabilities(const MlpParams& params, const PreparedCorpus& corpus,
                                       std::span<const std::size_t> rows);
SampleMatrix sample_mc(const MlpParams& params, const PreparedCorpus& corpus, std::span<const std::size_t> rows,
                       const UqSettings& uq);
SampleMatrix sample_ensemble(std::span<const MlpParams> members, const PreparedCorpus& corpus,
                             std::span<const std::size_t> rows);
std::vector<UncertaintyIndicator> rows_indicators(const PreparedCorpus& corpus, std::span<const std::size_t> rows);

/// End to end in memory: load, prepare, train, sample, analyze.
ExperimentResults run_experiment(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Report

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json report_json(const ExperimentResults& results);
/// Pretty-printed report with a trailing newline. Throws IoError if unwritable.
void emit_report(const ExperimentResults& results, const std::filesystem::path& path);
/// Aligned plain-text tables for a report document.
std::string render_report(const nlohmann::json& report);

nlohmann::json to_json(const ClassificationMetrics& metrics);
nlohmann::json to_json(const CrossValidationResult& cv);
nlohmann::json to_json(const CorrelationTables& tables);

} // namespace hesitant
