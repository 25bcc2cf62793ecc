#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hesitant/error.hpp"
#include "hesitant/experiment.hpp"
#include "hesitant/io.hpp"

namespace hesitant::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// File names inside an output directory.
constexpr const char* kConfigFile = "config.json";
constexpr const char* kReportsFile = "reports.jsonl";
constexpr const char* kLabelsFile = "labels.csv";
constexpr const char* kDatasetFile = "dataset.json";
constexpr const char* kIndicatorsFile = "indicators.csv";
constexpr const char* kModelFile = "model.ckpt";
constexpr const char* kTraceFile = "train_trace.json";
constexpr const char* kEnsembleDir = "ensemble";
constexpr const char* kMcPredictionsFile = "predictions_mc.csv";
constexpr const char* kEnsemblePredictionsFile = "predictions_ensemble.csv";
constexpr const char* kMetricsFile = "metrics.json";
constexpr const char* kCvMetricsFile = "cv_metrics.json";
constexpr const char* kCorrelationsFile = "correlations.json";
constexpr const char* kReportFile = "report.json";

std::array<double, kScenarioCount> demo_mix() { return {0.35, 0.35, 0.20, 0.10, 0.0}; }

void write_json(const fs::path& path, const json& j) { io::write_file(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
    try {
        return json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

json config_echo(const ExperimentConfig& config) {
    json j = to_json(config);
    j.erase("output_dir");
    return j;
}

fs::path member_path(const fs::path& dir, std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof(name), "member_%02zu.ckpt", i);
    return dir / kEnsembleDir / name;
}

fs::path predictions_path(const fs::path& dir, SampleSource source) {
    return dir / (source == SampleSource::McDropout ? kMcPredictionsFile : kEnsemblePredictionsFile);
}

// ---------------------------------------------------------------------------
// Stages. Each writes only below config.output_dir.

void stage_gen(const ExperimentConfig& config) {
    if (!config.corpus.synthetic) throw ValidationError("gen needs a synthetic corpus spec");
    const auto studies = generate_synthetic(*config.corpus.synthetic);
    const fs::path& dir = config.output_dir;
    {
        auto out = io::open_output(dir / kReportsFile);
        write_reports(out, studies);
    }
    {
        auto out = io::open_output(dir / kLabelsFile);
        write_labels(out, studies);
    }
}

void stage_prep(const ExperimentConfig& config) {
    const auto corpus = prepare_corpus(load_corpus(config.corpus), config.prep, config.features, config.strategy);
    const fs::path& dir = config.output_dir;
    save_prepared(dir / kDatasetFile, corpus, config_echo(config));
    const auto rows = regime_rows(corpus, config.analysis.regime);
    auto out = io::open_output(dir / kIndicatorsFile);
    write_indicators(out, rows_indicators(corpus, rows.eval));
}

PreparedCorpus load_dataset(const fs::path& path, const ExperimentConfig& config) {
    auto corpus = load_prepared(path);
    for (const auto& f : corpus.features) {
        if (f.dim() != config.arch.input_dim) {
            throw ValidationError("dataset feature dimension " + std::to_string(f.dim()) +
                                  " does not match model input_dim " + std::to_string(config.arch.input_dim));
        }
    }
    return corpus;
}

RegimeRows training_rows(const PreparedCorpus& corpus, const ExperimentConfig& config) {
    auto rows = regime_rows(corpus, config.analysis.regime);
    if (rows.train.empty()) throw ValidationError("no training rows for the configured regime");
    return rows;
}

void stage_train(const ExperimentConfig& config, const fs::path& dataset) {
    const auto corpus = load_dataset(dataset, config);
    const auto rows = training_rows(corpus, config);
    const auto result = train_single(corpus, rows, config);
    save_checkpoint(config.output_dir / kModelFile, {result.params, config.train, config.features});
    write_json(config.output_dir / kTraceFile,
               {{"epoch_loss", result.epoch_loss}, {"warnings", result.warnings}, {"steps", result.steps}});
}

void stage_train_ensemble(const ExperimentConfig& config, const fs::path& dataset) {
    const auto corpus = load_dataset(dataset, config);
    const auto rows = training_rows(corpus, config);
    const auto members = train_ensemble(corpus, rows, config);
    for (std::size_t i = 0; i < members.size(); ++i) {
        TrainConfig member_config = config.train;
        member_config.seed = config.uq.ensemble_base_seed + i;
        save_checkpoint(member_path(config.output_dir, i), {members[i], member_config, config.features});
    }
}

MlpParams load_model(const fs::path& path, const ExperimentConfig& config) {
    auto ckpt = load_checkpoint(path);
    if (ckpt.params.arch().input_dim != config.arch.input_dim) {
        throw ValidationError(path.string() + ": model input_dim does not match the features");
    }
    return std::move(ckpt.params);
}

std::vector<MlpParams> load_members(const fs::path& dir, const ExperimentConfig& config) {
    std::vector<MlpParams> members;
    for (std::size_t i = 0; i < config.uq.ensemble_size; ++i) members.push_back(load_model(member_path(dir, i), config));
    return members;
}

void stage_sample(const ExperimentConfig& config, SampleSource method, const fs::path& dataset, const fs::path& model,
                  const fs::path& model_dir) {
    const auto corpus = load_dataset(dataset, config);
    const auto rows = regime_rows(corpus, config.analysis.regime);
    std::optional<SampleMatrix> matrix;
    if (method == SampleSource::McDropout) {
        matrix = sample_mc(load_model(model, config), corpus, rows.eval, config.uq);
    } else {
        const auto members = load_members(model_dir, config);
        matrix = sample_ensemble(members, corpus, rows.eval);
    }
    auto out = io::open_output(predictions_path(config.output_dir, method));
    write_predictions(out, *matrix);
}

void stage_eval(const ExperimentConfig& config, const fs::path& dataset, const fs::path& model) {
    const auto corpus = load_dataset(dataset, config);
    const auto rows = regime_rows(corpus, config.analysis.regime);
    json metrics = {{"config", config_echo(config)},
                    {"eval_split", to_string(rows.eval_split)},
                    {"eval_count", rows.eval.size()},
                    {"metrics", nullptr},
                    {"ood", nullptr}};
    if (!rows.eval.empty()) {
        const auto params = load_model(model, config);
        const auto probabilities = eval_probabilities(params, corpus, rows.eval);
        std::vector<BinaryLabel> predicted;
        std::vector<BinaryLabel> truth;
        std::vector<BinaryLabel> ood_truth;
        for (std::size_t k = 0; k < rows.eval.size(); ++k) {
            predicted.push_back(decide(probabilities[k], config.train.decision_threshold));
            truth.push_back(corpus.chexpert[rows.eval[k]]);
            ood_truth.push_back(corpus.negbio[rows.eval[k]]);
        }
        const auto ood = ood_eval(predicted, truth, ood_truth);
        metrics["metrics"] = to_json(ood.in_distribution);
        metrics["ood"] = {{"in_distribution", to_json(ood.in_distribution)},
                          {"out_of_distribution", to_json(ood.out_of_distribution)}};
    }
    write_json(config.output_dir / kMetricsFile, metrics);

    if (config.analysis.kfold >= 2) {
        const auto rows_for_cv = training_rows(corpus, config);
        const auto cv = cross_validate(labelled_rows(corpus, rows_for_cv.train), config.arch, config.train,
                                       config.analysis.kfold);
        write_json(config.output_dir / kCvMetricsFile, {{"config", config_echo(config)}, {"cross_validation", to_json(cv)}});
    }
}

SampleSource source_from_filename(const fs::path& path) {
    const auto name = path.filename().string();
    if (name == kMcPredictionsFile) return SampleSource::McDropout;
    if (name == kEnsemblePredictionsFile) return SampleSource::DeepEnsemble;
    return SampleSource::External;
}

void stage_correlate(const ExperimentConfig& config, const std::vector<fs::path>& predictions,
                     const fs::path& indicators_path, std::optional<std::size_t> samples) {
    const auto indicators = load_indicators(indicators_path);
    std::vector<SourceSummaries> sources;
    for (const auto& path : predictions) {
        const SampleSource source = source_from_filename(path);
        for (const auto& s : sources) {
            if (s.source == source) throw ValidationError("two prediction files for source " + std::string(to_string(source)));
        }
        const auto matrix = load_predictions(path, samples, source);
        sources.push_back({source, summarize(matrix, config.train.decision_threshold)});
    }
    const auto tables = correlate_uncertainty(sources, indicators);

    json groups = json::object();
    for (const auto& s : sources) {
        const auto aligned = align_indicators(s.summaries, indicators);
        const auto g = group_means(s.summaries, aligned, IndicatorField::Tld);
        auto mean = [](const std::optional<GroupMean>& m) -> json {
            if (!m) return nullptr;
            return {{"mean_pe", m->mean_pe}, {"mean_psd", m->mean_psd}, {"count", m->count}};
        };
        groups[std::string(to_string(s.source))] = {{"tld", mean(g.flagged)}, {"tla", mean(g.unflagged)},
                                                    {"overall", mean(g.overall)}};
        auto out = io::open_output(config.output_dir / ("summaries_" + std::string(to_string(s.source)) + ".csv"));
        write_summaries(out, s.summaries);
    }
    write_json(config.output_dir / kCorrelationsFile,
               {{"correlations", to_json(tables)}, {"group_means", groups}, {"samples", samples ? json(*samples) : json("all")}});
}

json stage_report(const ExperimentConfig& config) {
    const fs::path& dir = config.output_dir;
    std::optional<PreparedCorpus> corpus;
    AnalysisInputs inputs;
    if (fs::exists(dir / kDatasetFile)) {
        corpus = load_dataset(dir / kDatasetFile, config);
        inputs.corpus = &*corpus;
        inputs.rows = regime_rows(*corpus, config.analysis.regime);
        if (fs::exists(dir / kModelFile) && !inputs.rows.eval.empty()) {
            inputs.single_probabilities = eval_probabilities(load_model(dir / kModelFile, config), *corpus, inputs.rows.eval);
        }
        if (fs::exists(dir / kTraceFile)) {
            const json t = read_json(dir / kTraceFile);
            inputs.single_trace = TrainingTrace{t.at("epoch_loss").get<std::vector<double>>(),
                                                t.at("warnings").get<std::vector<std::string>>(),
                                                t.at("steps").get<std::size_t>()};
        }
        for (auto source : {SampleSource::McDropout, SampleSource::DeepEnsemble}) {
            const auto path = predictions_path(dir, source);
            if (!fs::exists(path)) continue;
            auto matrix = load_predictions(path, std::nullopt, source);
            (source == SampleSource::McDropout ? inputs.mc : inputs.ensemble) = std::move(matrix);
        }
    }
    json report = report_json(analyze(inputs, config));
    if (corpus && fs::exists(dir / kCvMetricsFile)) {
        report["cross_validation"] = read_json(dir / kCvMetricsFile).at("cross_validation");
    }
    io::write_file(dir / kReportFile, report.dump(2) + "\n");
    return report;
}

// ---------------------------------------------------------------------------
// Option plumbing

struct CommonOptions {
    std::optional<std::string> config;
    std::optional<std::string> out;
};

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "Experiment config JSON");
    sub->add_option("--out", o.out, "Output directory (overrides output_dir)");
}

/// --config if given; otherwise config.json left in the output directory by an
/// earlier stage; otherwise defaults. `--out` then overrides output_dir.
ExperimentConfig resolve_config(const CommonOptions& o, bool inherit) {
    ExperimentConfig config;
    if (o.config) {
        config = load_experiment_config(*o.config);
    } else if (inherit) {
        const fs::path dir = o.out ? fs::path(*o.out) : config.output_dir;
        if (fs::exists(dir / kConfigFile)) config = experiment_config_from_json(read_json(dir / kConfigFile));
    }
    if (o.out) config.output_dir = *o.out;
    return config;
}

/// Rebuilds the config through its JSON form so cross-field rules such as
/// arch.input_dim == features.dim hold after flag overrides.
ExperimentConfig finalize(const ExperimentConfig& config) {
    auto effective = experiment_config_from_json(to_json(config));
    effective.train.validate();
    return effective;
}

void echo_config(const ExperimentConfig& config) { write_json(config.output_dir / kConfigFile, to_json(config)); }

fs::path or_default(const std::optional<std::string>& flag, const fs::path& fallback) {
    return flag ? fs::path(*flag) : fallback;
}

ScenarioMix parse_mix(const std::string& text) {
    std::array<double, kScenarioCount> fractions{};
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        const std::string item(io::trim(std::string_view(text).substr(start, end - start)));
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("--mix entries look like Scenario=fraction");
        fractions[static_cast<std::size_t>(parse_scenario(io::trim(std::string_view(item).substr(0, eq))))] =
            io::parse_real(item.substr(eq + 1), 0);
        start = end + 1;
    }
    return ScenarioMix::from_fractions(fractions);
}

Strategy parse_strategy(const std::string& kind, std::uint64_t seed) {
    return strategy_from_json(kind == "u_random" ? json{{"kind", kind}, {"seed", seed}} : json{{"kind", kind}});
}

Regime parse_regime_flag(const std::string& text) {
    return experiment_config_from_json({{"analysis", {{"regime", text}}}}).analysis.regime;
}

struct TrainFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<double> lr;
    std::optional<std::size_t> batch;
    std::optional<std::string> regime;
};

void add_train_flags(CLI::App* sub, TrainFlags& f) {
    sub->add_option("--seed", f.seed, "Training seed");
    sub->add_option("--epochs", f.epochs, "Training epochs");
    sub->add_option("--lr", f.lr, "Learning rate");
    sub->add_option("--batch", f.batch, "Batch size");
    sub->add_option("--regime", f.regime, "train_only or full_train");
}

void apply(const TrainFlags& f, ExperimentConfig& c) {
    if (f.seed) c.train.seed = *f.seed;
    if (f.epochs) c.train.epochs = *f.epochs;
    if (f.lr) c.train.learning_rate = *f.lr;
    if (f.batch) c.train.batch_size = *f.batch;
    if (f.regime) c.analysis.regime = parse_regime_flag(*f.regime);
}

int fail(std::ostream& err, std::string_view what, int code) {
    err << "error: " << what << "\n";
    return code;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Predictive and linguistic uncertainty experiments on report classifiers", "hesitant"};
    app.set_version_flag("--version", "hesitant 0.1.0");
    app.require_subcommand(1);

    // gen
    CommonOptions gen_common;
    std::optional<std::size_t> gen_n;
    std::optional<std::uint64_t> gen_seed;
    std::optional<std::string> gen_mix;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic report corpus");
    add_common(gen, gen_common);
    gen->add_option("--n", gen_n, "Number of studies");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--mix", gen_mix, "Scenario fractions, e.g. CertainPositive=0.5,CertainNegative=0.5");

    // prep
    CommonOptions prep_common;
    std::optional<std::string> prep_reports;
    std::optional<std::string> prep_labels;
    std::optional<std::string> prep_strategy;
    std::optional<std::uint64_t> prep_strategy_seed;
    std::optional<std::size_t> prep_dim;
    std::optional<bool> prep_stem;
    std::optional<std::string> prep_regime;
    auto* prep = app.add_subcommand("prep", "Tokenize, featurize and binarise a corpus");
    add_common(prep, prep_common);
    prep->add_option("--reports", prep_reports, "reports.jsonl");
    prep->add_option("--labels", prep_labels, "labels.csv");
    prep->add_option("--strategy", prep_strategy, "u_ones, u_zeros or u_random")
        ->check(CLI::IsMember({"u_ones", "u_zeros", "u_random"}));
    prep->add_option("--strategy-seed", prep_strategy_seed, "Seed for u_random");
    prep->add_option("--dim", prep_dim, "Hashed feature dimension");
    prep->add_option("--stem", prep_stem, "Apply Porter stemming (true/false)");
    prep->add_option("--regime", prep_regime, "train_only or full_train");

    // train
    CommonOptions train_common;
    TrainFlags train_flags;
    std::optional<std::string> train_data;
    std::optional<std::size_t> train_ensemble_size;
    auto* train_cmd = app.add_subcommand("train", "Train a single model or an ensemble");
    add_common(train_cmd, train_common);
    add_train_flags(train_cmd, train_flags);
    train_cmd->add_option("--data", train_data, "dataset.json (default: <out>/dataset.json)");
    train_cmd->add_option("--ensemble", train_ensemble_size, "Train M members with seeds base_seed + i");

    // sample
    CommonOptions sample_common;
    std::string sample_method;
    std::optional<std::string> sample_data;
    std::optional<std::string> sample_model;
    std::optional<std::string> sample_model_dir;
    std::optional<std::size_t> sample_passes;
    std::optional<std::uint64_t> sample_seed;
    std::optional<std::string> sample_regime;
    auto* sample = app.add_subcommand("sample", "Draw prediction samples for the evaluation rows");
    add_common(sample, sample_common);
    sample->add_option("--method", sample_method, "mc or ensemble")->required()->check(CLI::IsMember({"mc", "ensemble"}));
    sample->add_option("--data", sample_data, "dataset.json (default: <out>/dataset.json)");
    sample->add_option("--model", sample_model, "Checkpoint for mc (default: <out>/model.ckpt)");
    sample->add_option("--models", sample_model_dir, "Directory holding ensemble/ (default: <out>)");
    sample->add_option("--passes", sample_passes, "MC dropout passes");
    sample->add_option("--seed", sample_seed, "MC dropout seed");
    sample->add_option("--regime", sample_regime, "train_only or full_train");

    // eval
    CommonOptions eval_common;
    std::optional<std::string> eval_data;
    std::optional<std::string> eval_model;
    std::optional<std::size_t> eval_kfold;
    TrainFlags eval_flags;
    auto* eval = app.add_subcommand("eval", "Classification metrics and optional cross-validation");
    add_common(eval, eval_common);
    add_train_flags(eval, eval_flags);
    eval->add_option("--data", eval_data, "dataset.json (default: <out>/dataset.json)");
    eval->add_option("--model", eval_model, "Checkpoint (default: <out>/model.ckpt)");
    eval->add_option("--kfold", eval_kfold, "Cross-validation folds (0 disables)");

    // correlate
    CommonOptions corr_common;
    std::vector<std::string> corr_predictions;
    std::string corr_indicators;
    std::string corr_samples = "all";
    std::optional<double> corr_threshold;
    auto* correlate = app.add_subcommand("correlate", "Point-biserial tables from predictions and indicators");
    add_common(correlate, corr_common);
    correlate->add_option("--predictions", corr_predictions, "predictions CSV (repeatable)")->required();
    correlate->add_option("--indicators", corr_indicators, "indicators.csv")->required();
    correlate->add_option("--samples", corr_samples, "Expected samples per study, or 'all'");
    correlate->add_option("--threshold", corr_threshold, "Decision threshold");

    // report
    CommonOptions report_common;
    std::optional<std::string> report_dir;
    bool report_render = false;
    auto* report = app.add_subcommand("report", "Assemble report.json from stage outputs");
    add_common(report, report_common);
    report->add_option("--dir", report_dir, "Directory holding stage outputs (default: <out>)");
    report->add_flag("--render", report_render, "Print aligned text tables");

    // all
    CommonOptions all_common;
    bool all_render = false;
    auto* all = app.add_subcommand("all", "Run every stage from one config");
    add_common(all, all_common);
    all->add_flag("--render", all_render, "Print aligned text tables");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitValidation;
    }

    try {
        if (gen->parsed()) {
            auto config = resolve_config(gen_common, false);
            if (!config.corpus.synthetic) {
                SyntheticSpec spec;
                spec.mix = ScenarioMix::from_fractions(demo_mix());
                config.corpus.synthetic = spec;
            }
            if (gen_n) config.corpus.synthetic->n = *gen_n;
            if (gen_seed) config.corpus.synthetic->seed = *gen_seed;
            if (gen_mix) config.corpus.synthetic->mix = parse_mix(*gen_mix);
            config = finalize(config);
            stage_gen(config);
            echo_config(config);
        } else if (prep->parsed()) {
            auto config = resolve_config(prep_common, true);
            const bool has_corpus = config.corpus.synthetic || !config.corpus.reports.empty();
            if (prep_reports || prep_labels) {
                if (!prep_reports || !prep_labels) throw ValidationError("--reports and --labels go together");
                config.corpus = CorpusSource{std::nullopt, *prep_reports, *prep_labels};
            } else if (!has_corpus) {
                const fs::path dir = config.output_dir;
                if (!fs::exists(dir / kReportsFile)) {
                    throw ValidationError("prep needs --reports and --labels, or a corpus in --config");
                }
                config.corpus = CorpusSource{std::nullopt, dir / kReportsFile, dir / kLabelsFile};
            }
            if (prep_strategy) {
                config.strategy = parse_strategy(*prep_strategy, prep_strategy_seed.value_or(config.strategy.seed()));
            } else if (prep_strategy_seed) {
                config.strategy = parse_strategy(std::string(to_string(config.strategy.kind())), *prep_strategy_seed);
            }
            if (prep_dim) config.features.dim = *prep_dim;
            if (prep_stem) config.prep.stem = *prep_stem;
            if (prep_regime) config.analysis.regime = parse_regime_flag(*prep_regime);
            config = finalize(config);
            stage_prep(config);
            echo_config(config);
        } else if (train_cmd->parsed()) {
            auto config = resolve_config(train_common, true);
            apply(train_flags, config);
            if (train_ensemble_size) {
                config.uq.ensemble_size = *train_ensemble_size;
                if (train_flags.seed) config.uq.ensemble_base_seed = *train_flags.seed;
            }
            config = finalize(config);
            const fs::path data = or_default(train_data, config.output_dir / kDatasetFile);
            if (train_ensemble_size) {
                stage_train_ensemble(config, data);
            } else {
                stage_train(config, data);
            }
            echo_config(config);
        } else if (sample->parsed()) {
            auto config = resolve_config(sample_common, true);
            if (sample_passes) config.uq.mc_passes = *sample_passes;
            if (sample_seed) config.uq.mc_seed = *sample_seed;
            if (sample_regime) config.analysis.regime = parse_regime_flag(*sample_regime);
            config = finalize(config);
            const fs::path dir = config.output_dir;
            stage_sample(config, sample_method == "mc" ? SampleSource::McDropout : SampleSource::DeepEnsemble,
                         or_default(sample_data, dir / kDatasetFile), or_default(sample_model, dir / kModelFile),
                         or_default(sample_model_dir, dir));
            echo_config(config);
        } else if (eval->parsed()) {
            auto config = resolve_config(eval_common, true);
            apply(eval_flags, config);
            if (eval_kfold) config.analysis.kfold = *eval_kfold;
            config = finalize(config);
            const fs::path dir = config.output_dir;
            stage_eval(config, or_default(eval_data, dir / kDatasetFile), or_default(eval_model, dir / kModelFile));
            echo_config(config);
        } else if (correlate->parsed()) {
            auto config = resolve_config(corr_common, true);
            if (corr_threshold) config.train.decision_threshold = *corr_threshold;
            config = finalize(config);
            std::optional<std::size_t> samples;
            if (corr_samples != "all") {
                std::size_t parsed = 0;
                try {
                    parsed = std::stoul(corr_samples);
                } catch (const std::exception&) {
                    throw ValidationError("--samples must be a count or 'all'");
                }
                samples = parsed;
            }
            std::vector<fs::path> paths(corr_predictions.begin(), corr_predictions.end());
            stage_correlate(config, paths, corr_indicators, samples);
            echo_config(config);
        } else if (report->parsed()) {
            if (report_dir && !report_common.out) report_common.out = *report_dir;
            auto config = finalize(resolve_config(report_common, true));
            const json doc = stage_report(config);
            if (report_render) out << render_report(doc);
        } else if (all->parsed()) {
            auto config = finalize(resolve_config(all_common, false));
            echo_config(config);
            if (config.corpus.synthetic) stage_gen(config);
            stage_prep(config);
            const fs::path dir = config.output_dir;
            stage_train(config, dir / kDatasetFile);
            stage_train_ensemble(config, dir / kDatasetFile);
            stage_sample(config, SampleSource::McDropout, dir / kDatasetFile, dir / kModelFile, dir);
            stage_sample(config, SampleSource::DeepEnsemble, dir / kDatasetFile, dir / kModelFile, dir);
            stage_eval(config, dir / kDatasetFile, dir / kModelFile);
            stage_correlate(config, {predictions_path(dir, SampleSource::McDropout),
                                     predictions_path(dir, SampleSource::DeepEnsemble)},
                            dir / kIndicatorsFile, config.uq.mc_passes == config.uq.ensemble_size
                                                       ? std::optional<std::size_t>(config.uq.mc_passes)
                                                       : std::nullopt);
            const json doc = stage_report(config);
            if (all_render) out << render_report(doc);
        }
    } catch (const IoError& e) {
        return fail(err, e.what(), kExitIo);
    } catch (const fs::filesystem_error& e) {
        return fail(err, e.what(), kExitIo);
    } catch (const ValidationError& e) {
        return fail(err, e.what(), kExitValidation);
    } catch (const NumericError& e) {
        return fail(err, e.what(), kExitValidation);
    } catch (const json::exception& e) {
        return fail(err, e.what(), kExitValidation);
    }
    return kExitOk;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace hesitant::cli
