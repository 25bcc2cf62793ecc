#include "hesitant/experiment.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

#include "hesitant/error.hpp"
#include "hesitant/io.hpp"
#include "hesitant/parallel.hpp"

namespace hesitant {

using nlohmann::json;

std::string_view to_string(Regime regime) { return regime == Regime::TrainOnly ? "train_only" : "full_train"; }

namespace {

Regime parse_regime(const std::string& text) {
    if (text == "train_only") return Regime::TrainOnly;
    if (text == "full_train") return Regime::FullTrain;
    throw ValidationError("unknown regime '" + text + "'");
}

} // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("experiment config must be a JSON object");
    ExperimentConfig c;
    try {
        if (auto it = j.find("corpus"); it != j.end()) {
            if (it->contains("synthetic")) {
                const auto& synthetic = it->at("synthetic");
                c.corpus.synthetic = synthetic_spec_from_json(synthetic);
                if (synthetic.value("template_version", synthetic_template_version()) != synthetic_template_version()) {
                    throw ValidationError("synthetic template version " + synthetic["template_version"].dump() +
                                          " is not the bundled version " +
                                          std::to_string(synthetic_template_version()));
                }
            } else {
                c.corpus.reports = it->at("reports").get<std::string>();
                c.corpus.labels = it->at("labels").get<std::string>();
            }
        }
        if (auto it = j.find("prep"); it != j.end()) c.prep = prep_config_from_json(*it);
        if (auto it = j.find("features"); it != j.end()) c.features = featurizer_config_from_json(*it);
        if (auto it = j.find("strategy"); it != j.end()) c.strategy = strategy_from_json(*it);
        c.arch = arch_from_json(j.value("model", json::object()), c.features.dim);
        if (auto it = j.find("train"); it != j.end()) c.train = train_config_from_json(*it);
        if (auto it = j.find("uq"); it != j.end()) {
            c.uq.mc_passes = it->value("mc_passes", c.uq.mc_passes);
            c.uq.mc_seed = it->value("mc_seed", c.uq.mc_seed);
            c.uq.ensemble_size = it->value("ensemble_size", c.uq.ensemble_size);
            c.uq.ensemble_base_seed = it->value("ensemble_base_seed", c.uq.ensemble_base_seed);
        }
        if (auto it = j.find("analysis"); it != j.end()) {
            c.analysis.tau = it->value("tau", c.analysis.tau);
            c.analysis.regime = parse_regime(it->value("regime", std::string("full_train")));
            c.analysis.kfold = it->value("kfold", c.analysis.kfold);
        }
        c.output_dir = j.value("output_dir", std::string("out"));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("experiment config: ") + e.what());
    }
    if (c.uq.mc_passes < 2) throw ValidationError("uq.mc_passes must be >= 2");
    if (c.uq.ensemble_size < 2) throw ValidationError("uq.ensemble_size must be >= 2");
    if (!(c.analysis.tau > 0.0 && c.analysis.tau < 0.5)) throw ValidationError("analysis.tau must be in (0, 0.5)");
    if (c.analysis.kfold == 1) throw ValidationError("analysis.kfold must be 0 or >= 2");
    return c;
}

json to_json(const ExperimentConfig& c) {
    json corpus;
    if (c.corpus.synthetic) {
        corpus["synthetic"] = to_json(*c.corpus.synthetic);
        corpus["synthetic"]["template_version"] = synthetic_template_version();
    } else {
        corpus["reports"] = c.corpus.reports.generic_string();
        corpus["labels"] = c.corpus.labels.generic_string();
    }
    json model = to_json(c.arch);
    model.erase("input_dim");
    return {{"corpus", corpus},
            {"prep", to_json(c.prep)},
            {"features", to_json(c.features)},
            {"strategy", to_json(c.strategy)},
            {"model", model},
            {"train", to_json(c.train)},
            {"uq",
             {{"mc_passes", c.uq.mc_passes},
              {"mc_seed", c.uq.mc_seed},
              {"ensemble_size", c.uq.ensemble_size},
              {"ensemble_base_seed", c.uq.ensemble_base_seed}}},
            {"analysis", {{"tau", c.analysis.tau}, {"regime", to_string(c.analysis.regime)}, {"kfold", c.analysis.kfold}}},
            {"output_dir", c.output_dir.generic_string()}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    const std::string text = io::read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return experiment_config_from_json(j);
}

JoinResult load_corpus(const CorpusSource& source) {
    if (source.synthetic) {
        JoinResult r;
        r.studies = generate_synthetic(*source.synthetic);
        return r;
    }
    if (source.reports.empty() || source.labels.empty()) throw ValidationError("corpus needs reports and labels paths");
    return join_and_filter(load_reports(source.reports), load_labels(source.labels));
}

PreparedCorpus prepare_corpus(const JoinResult& joined, const PrepConfig& prep, const FeaturizerConfig& features,
                              const Strategy& strategy) {
    PreparedCorpus out;
    out.exclusions = {joined.reports_without_labels, joined.labels_without_reports, joined.missing_label,
                      joined.empty_text};
    out.studies = joined.studies;
    out.features.resize(out.studies.size());
    parallel_for(out.studies.size(), [&](std::size_t i) {
        const auto tokens = preprocess(out.studies[i].text, prep);
        out.features[i] = featurize(tokens, features);
    });
    std::vector<TriLabel> chex;
    std::vector<TriLabel> neg;
    for (const auto& s : out.studies) {
        chex.push_back(s.chexpert);
        neg.push_back(s.negbio);
    }
    out.chexpert = binarise(chex, strategy, kChexpertStream);
    out.negbio = binarise(neg, strategy, kNegbioStream);
    out.indicators = compute_indicators(out.studies, strategy);
    return out;
}

void save_prepared(const std::filesystem::path& path, const PreparedCorpus& corpus, const json& config_echo) {
    json studies = json::array();
    for (std::size_t i = 0; i < corpus.studies.size(); ++i) {
        const auto& s = corpus.studies[i];
        const auto& f = corpus.features[i];
        studies.push_back({{"study_id", s.study_id},
                           {"split", split_code(s.split)},
                           {"chexpert", label_code(s.chexpert)},
                           {"negbio", label_code(s.negbio)},
                           {"text", s.text},
                           {"y_chexpert", as_real(corpus.chexpert[i]) > 0.5 ? 1 : 0},
                           {"y_negbio", as_real(corpus.negbio[i]) > 0.5 ? 1 : 0},
                           {"tld", corpus.indicators[i].tld},
                           {"dim", f.dim()},
                           {"idx", std::vector<std::uint32_t>(f.indices().begin(), f.indices().end())},
                           {"val", std::vector<double>(f.values().begin(), f.values().end())}});
    }
    const json doc = {{"format", "hesitant-dataset"},
                      {"version", 1},
                      {"config", config_echo},
                      {"exclusions",
                       {{"reports_without_labels", corpus.exclusions.reports_without_labels},
                        {"labels_without_reports", corpus.exclusions.labels_without_reports},
                        {"missing_label", corpus.exclusions.missing_label},
                        {"empty_text", corpus.exclusions.empty_text}}},
                      {"studies", studies}};
    io::write_file(path, doc.dump() + "\n");
}

PreparedCorpus load_prepared(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(io::read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    if (doc.value("format", std::string()) != "hesitant-dataset") {
        throw ValidationError(path.string() + " is not a prepared dataset");
    }
    PreparedCorpus out;
    try {
        const auto& ex = doc.at("exclusions");
        out.exclusions = {ex.at("reports_without_labels").get<std::size_t>(),
                          ex.at("labels_without_reports").get<std::size_t>(), ex.at("missing_label").get<std::size_t>(),
                          ex.at("empty_text").get<std::size_t>()};
        for (const auto& s : doc.at("studies")) {
            LabelledStudy study{s.at("study_id").get<std::string>(), parse_split(s.at("split").get<std::string>()),
                                s.at("text").get<std::string>(), parse_label_code(s.at("chexpert").get<std::string>()),
                                parse_label_code(s.at("negbio").get<std::string>())};
            const int tld = s.at("tld").get<int>();
            out.indicators.push_back({study.study_id, tld, study.chexpert == TriLabel::Uncertain ? 1 : 0,
                                      study.negbio == TriLabel::Uncertain ? 1 : 0});
            out.chexpert.push_back(s.at("y_chexpert").get<int>() == 1 ? BinaryLabel::Positive : BinaryLabel::Negative);
            out.negbio.push_back(s.at("y_negbio").get<int>() == 1 ? BinaryLabel::Positive : BinaryLabel::Negative);
            out.features.push_back(FeatureVector::from_sparse(s.at("dim").get<std::size_t>(),
                                                              s.at("idx").get<std::vector<std::uint32_t>>(),
                                                              s.at("val").get<std::vector<double>>()));
            out.studies.push_back(std::move(study));
        }
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return out;
}

RegimeRows regime_rows(const PreparedCorpus& corpus, Regime regime) {
    RegimeRows rows;
    rows.eval_split = regime == Regime::TrainOnly ? Split::Validation : Split::Test;
    for (std::size_t i = 0; i < corpus.studies.size(); ++i) {
        const Split s = corpus.studies[i].split;
        if (s == Split::Train || (regime == Regime::FullTrain && s == Split::Validation)) {
            rows.train.push_back(i);
        } else if (s == rows.eval_split) {
            rows.eval.push_back(i);
        }
    }
    return rows;
}

BinaryDataset labelled_rows(const PreparedCorpus& corpus, std::span<const std::size_t> rows) {
    BinaryDataset d;
    for (auto r : rows) {
        d.ids.push_back(corpus.studies.at(r).study_id);
        d.features.push_back(corpus.features.at(r));
        d.labels.push_back(corpus.chexpert.at(r));
    }
    return d;
}

TrainResult train_single(const PreparedCorpus& corpus, const RegimeRows& rows, const ExperimentConfig& config) {
    return train(labelled_rows(corpus, rows.train), config.arch, config.train);
}

std::vector<MlpParams> train_ensemble(const PreparedCorpus& corpus, const RegimeRows& rows,
                                      const ExperimentConfig& config) {
    return ensemble_train(labelled_rows(corpus, rows.train), config.arch, config.train, config.uq.ensemble_size,
                          config.uq.ensemble_base_seed);
}

namespace {

std::vector<FeatureVector> gather_features(const PreparedCorpus& corpus, std::span<const std::size_t> rows) {
    std::vector<FeatureVector> xs;
    xs.reserve(rows.size());
    for (auto r : rows) xs.push_back(corpus.features.at(r));
    return xs;
}

std::vector<std::string> gather_ids(const PreparedCorpus& corpus, std::span<const std::size_t> rows) {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (auto r : rows) ids.push_back(corpus.studies.at(r).study_id);
    return ids;
}

} // namespace

std::vector<double> eval_probabilities(const MlpParams& params, const PreparedCorpus& corpus,
                                       std::span<const std::size_t> rows) {
    params.check_finite();
    std::vector<double> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(forward(params, corpus.features.at(r), Deterministic{}));
    return out;
}

SampleMatrix sample_mc(const MlpParams& params, const PreparedCorpus& corpus, std::span<const std::size_t> rows,
                       const UqSettings& uq) {
    return mc_dropout_predict(params, gather_features(corpus, rows), gather_ids(corpus, rows), uq.mc_passes, uq.mc_seed);
}

SampleMatrix sample_ensemble(std::span<const MlpParams> members, const PreparedCorpus& corpus,
                             std::span<const std::size_t> rows) {
    return ensemble_predict(members, gather_features(corpus, rows), gather_ids(corpus, rows));
}

std::vector<UncertaintyIndicator> rows_indicators(const PreparedCorpus& corpus, std::span<const std::size_t> rows) {
    std::vector<UncertaintyIndicator> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(corpus.indicators.at(r));
    return out;
}

namespace {

void tally(SplitTally& t, Split s) {
    switch (s) {
        case Split::Train: ++t.train; break;
        case Split::Validation: ++t.validation; break;
        case Split::Test: ++t.test; break;
    }
}

RateBySplit rates(const PreparedCorpus& corpus, const std::function<bool(std::size_t)>& flagged) {
    SplitTally hits;
    SplitTally totals;
    for (std::size_t i = 0; i < corpus.studies.size(); ++i) {
        tally(totals, corpus.studies[i].split);
        if (flagged(i)) tally(hits, corpus.studies[i].split);
    }
    auto ratio = [](std::size_t a, std::size_t b) -> std::optional<double> {
        if (b == 0) return std::nullopt;
        return static_cast<double>(a) / static_cast<double>(b);
    };
    return {ratio(hits.train, totals.train), ratio(hits.validation, totals.validation), ratio(hits.test, totals.test),
            ratio(hits.train + hits.validation + hits.test, corpus.studies.size())};
}

std::vector<BinaryLabel> labels_from_probabilities(std::span<const double> probabilities, double threshold) {
    std::vector<BinaryLabel> out;
    out.reserve(probabilities.size());
    for (double p : probabilities) out.push_back(decide(p, threshold));
    return out;
}

} // namespace

ExperimentResults analyze(const AnalysisInputs& inputs, const ExperimentConfig& config) {
    ExperimentResults r;
    r.config = to_json(config);
    r.config.erase("output_dir");
    r.tau = config.analysis.tau;
    if (inputs.corpus == nullptr) return r;
    const PreparedCorpus& corpus = *inputs.corpus;
    const double threshold = config.train.decision_threshold;

    r.exclusions = corpus.exclusions;
    SplitTally splits;
    LabelDistribution chex;
    LabelDistribution neg;
    auto slot = [](TriLabel l) -> std::size_t {
        switch (l) {
            case TriLabel::Positive: return 0;
            case TriLabel::Negative: return 1;
            default: return 2;
        }
    };
    for (const auto& s : corpus.studies) {
        tally(splits, s.split);
        tally(chex.by_label[slot(s.chexpert)], s.split);
        tally(neg.by_label[slot(s.negbio)], s.split);
    }
    r.split_counts = splits;
    r.chexpert_distribution = chex;
    r.negbio_distribution = neg;
    r.raw_tld = rates(corpus, [&](std::size_t i) { return corpus.studies[i].chexpert != corpus.studies[i].negbio; });
    r.binarised_tld = rates(corpus, [&](std::size_t i) { return corpus.indicators[i].tld == 1; });

    const auto& eval = inputs.rows.eval;
    r.regime = config.analysis.regime;
    r.eval_split = inputs.rows.eval_split;
    r.eval_count = eval.size();
    r.single_trace = inputs.single_trace;
    r.cross_validation = inputs.cross_validation;
    r.eval_indicators = rows_indicators(corpus, eval);

    std::vector<BinaryLabel> truth;
    std::vector<BinaryLabel> ood_truth;
    for (auto row : eval) {
        truth.push_back(corpus.chexpert.at(row));
        ood_truth.push_back(corpus.negbio.at(row));
    }

    if (inputs.single_probabilities && !eval.empty()) {
        if (inputs.single_probabilities->size() != eval.size()) {
            throw ValidationError("single-model predictions do not match the evaluation rows");
        }
        const auto predicted = labels_from_probabilities(*inputs.single_probabilities, threshold);
        r.single_metrics = classification_metrics(predicted, truth);
        r.ood = ood_eval(predicted, truth, ood_truth);
    }

    for (const auto* matrix : {inputs.mc ? &*inputs.mc : nullptr, inputs.ensemble ? &*inputs.ensemble : nullptr}) {
        if (matrix == nullptr) continue;
        SourceSummaries source{matrix->source(), summarize(*matrix, threshold)};
        const auto aligned = align_indicators(source.summaries, r.eval_indicators);
        if (!source.summaries.empty()) {
            std::unordered_map<std::string_view, BinaryLabel> truth_by_id;
            for (std::size_t k = 0; k < eval.size(); ++k) truth_by_id.emplace(corpus.studies[eval[k]].study_id, truth[k]);
            std::vector<BinaryLabel> predicted;
            std::vector<BinaryLabel> matched_truth;
            for (const auto& s : source.summaries) {
                predicted.push_back(s.predicted_label);
                matched_truth.push_back(truth_by_id.at(s.study_id));
            }
            r.method_metrics.emplace_back(source.source, classification_metrics(predicted, matched_truth));
        }
        r.group_means.emplace_back(source.source, group_means(source.summaries, aligned, IndicatorField::Tld));
        r.errors.emplace_back(source.source, mine_errors(source.summaries, aligned, r.tau, corpus.studies));
        r.summaries.push_back(std::move(source));
    }
    if (!r.summaries.empty()) r.correlations = correlate_uncertainty(r.summaries, r.eval_indicators);
    return r;
}

ExperimentResults run_experiment(const ExperimentConfig& config) {
    const PreparedCorpus corpus =
        prepare_corpus(load_corpus(config.corpus), config.prep, config.features, config.strategy);
    AnalysisInputs inputs;
    inputs.corpus = &corpus;
    inputs.rows = regime_rows(corpus, config.analysis.regime);
    if (inputs.rows.train.empty()) throw ValidationError("no training rows for the configured regime");

    const auto single = train_single(corpus, inputs.rows, config);
    inputs.single_trace = TrainingTrace{single.epoch_loss, single.warnings, single.steps};
    const auto members = train_ensemble(corpus, inputs.rows, config);
    if (!inputs.rows.eval.empty()) {
        inputs.single_probabilities = eval_probabilities(single.params, corpus, inputs.rows.eval);
        inputs.mc = sample_mc(single.params, corpus, inputs.rows.eval, config.uq);
        inputs.ensemble = sample_ensemble(members, corpus, inputs.rows.eval);
    }
    if (config.analysis.kfold >= 2) {
        inputs.cross_validation =
            cross_validate(labelled_rows(corpus, inputs.rows.train), config.arch, config.train, config.analysis.kfold);
    }
    return analyze(inputs, config);
}

} // namespace hesitant
