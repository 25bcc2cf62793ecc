#include <cstdio>
#include <sstream>

#include "hesitant/error.hpp"
#include "hesitant/experiment.hpp"
#include "hesitant/io.hpp"

namespace hesitant {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const SplitTally& t) {
    return {{"train", t.train}, {"validation", t.validation}, {"test", t.test}, {"total", t.train + t.validation + t.test}};
}

json to_json(const LabelDistribution& d) {
    return {{"positive", to_json(d.by_label[0])}, {"negative", to_json(d.by_label[1])}, {"uncertain", to_json(d.by_label[2])}};
}

json to_json(const RateBySplit& r) {
    return {{"train", optional_number(r.train)},
            {"validation", optional_number(r.validation)},
            {"test", optional_number(r.test)},
            {"overall", optional_number(r.overall)}};
}

json to_json(const std::optional<GroupMean>& g) {
    if (!g) return nullptr;
    return {{"mean_pe", g->mean_pe}, {"mean_psd", g->mean_psd}, {"count", g->count}};
}

json to_json(const std::optional<CorrelationResult>& c) {
    if (!c) return nullptr;
    return {{"r_pb", c->r_pb},
            {"p_value", c->p_value},
            {"mean_y1", c->groups.mean_y1},
            {"mean_y0", c->groups.mean_y0},
            {"sd_y", c->groups.sd_y},
            {"n1", c->groups.n1},
            {"n0", c->groups.n0},
            {"n", c->groups.n}};
}

json to_json(const CorrelationTable& table) {
    json rows = json::object();
    for (const auto& row : table.rows) {
        json cells = json::object();
        for (std::size_t c = 0; c < kIndicatorColumns.size(); ++c) {
            cells[std::string(to_string(kIndicatorColumns[c]))] = to_json(row.cells[c]);
        }
        rows[std::string(to_string(row.source))] = cells;
    }
    return rows;
}

json to_json(const ErrorCase& e) {
    return {{"study_id", e.study_id}, {"mean_prob", e.mean_prob}, {"tld", e.tld}, {"excerpt", e.excerpt}};
}

} // namespace

json to_json(const ClassificationMetrics& m) {
    return {{"accuracy", m.accuracy},
            {"precision", optional_number(m.precision)},
            {"recall", optional_number(m.recall)},
            {"f1", optional_number(m.f1)},
            {"confusion", {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"tn", m.counts.tn}, {"fn", m.counts.fn}}}};
}

json to_json(const CrossValidationResult& cv) {
    json folds = json::array();
    for (const auto& f : cv.folds) folds.push_back(to_json(f));
    return {{"k", cv.folds.size()},
            {"folds", folds},
            {"mean",
             {{"accuracy", cv.mean.accuracy},
              {"precision", optional_number(cv.mean.precision)},
              {"recall", optional_number(cv.mean.recall)},
              {"f1", optional_number(cv.mean.f1)}}}};
}

json to_json(const CorrelationTables& tables) {
    return {{"pe", to_json(tables.pe)}, {"psd", to_json(tables.psd)}};
}

json report_json(const ExperimentResults& r) {
    json report;
    report["schema_version"] = kReportSchemaVersion;
    report["config"] = r.config;

    json corpus = json::object();
    if (r.exclusions) {
        corpus["exclusions"] = {{"reports_without_labels", r.exclusions->reports_without_labels},
                                {"labels_without_reports", r.exclusions->labels_without_reports},
                                {"missing_label", r.exclusions->missing_label},
                                {"empty_text", r.exclusions->empty_text}};
    }
    if (r.split_counts) corpus["split_counts"] = to_json(*r.split_counts);
    if (r.chexpert_distribution && r.negbio_distribution) {
        corpus["label_distributions"] = {{"chexpert", to_json(*r.chexpert_distribution)},
                                         {"negbio", to_json(*r.negbio_distribution)}};
    }
    if (r.raw_tld && r.binarised_tld) {
        corpus["tld_rates"] = {{"raw", to_json(*r.raw_tld)}, {"binarised", to_json(*r.binarised_tld)}};
    }
    report["corpus"] = corpus;

    json evaluation = json::object();
    if (r.regime) evaluation["regime"] = to_string(*r.regime);
    if (r.eval_split) evaluation["eval_split"] = to_string(*r.eval_split);
    evaluation["eval_count"] = r.eval_count;
    report["evaluation"] = evaluation;

    json training = json::object();
    if (r.single_trace) {
        training["single"] = {{"epoch_loss", r.single_trace->epoch_loss},
                              {"warnings", r.single_trace->warnings},
                              {"steps", r.single_trace->steps}};
    }
    report["training"] = training;

    json metrics = json::object();
    if (r.single_metrics) metrics["single"] = to_json(*r.single_metrics);
    for (const auto& [source, m] : r.method_metrics) metrics[std::string(to_string(source))] = to_json(m);
    report["model_metrics"] = metrics;

    report["cross_validation"] = r.cross_validation ? to_json(*r.cross_validation) : json(nullptr);

    json groups = json::object();
    for (const auto& [source, g] : r.group_means) {
        groups[std::string(to_string(source))] = {
            {"tld", to_json(g.flagged)}, {"tla", to_json(g.unflagged)}, {"overall", to_json(g.overall)}};
    }
    report["group_means"] = groups;

    report["correlations"] = r.correlations ? to_json(*r.correlations) : json{{"pe", json::object()}, {"psd", json::object()}};

    if (r.ood) {
        report["ood"] = {{"in_distribution", to_json(r.ood->in_distribution)},
                         {"out_of_distribution", to_json(r.ood->out_of_distribution)},
                         {"delta",
                          {{"accuracy", r.ood->delta.accuracy},
                           {"precision", optional_number(r.ood->delta.precision)},
                           {"recall", optional_number(r.ood->delta.recall)},
                           {"f1", optional_number(r.ood->delta.f1)}}}};
    } else {
        report["ood"] = nullptr;
    }

    json errors = {{"tau", r.tau}, {"cases", json::object()}};
    for (const auto& [source, cases] : r.errors) {
        json list = json::array();
        for (const auto& e : cases) list.push_back(to_json(e));
        errors["cases"][std::string(to_string(source))] = list;
    }
    report["error_cases"] = errors;
    return report;
}

void emit_report(const ExperimentResults& results, const std::filesystem::path& path) {
    io::write_file(path, report_json(results).dump(2) + "\n");
}

namespace {

std::string cell(const json& v, int width = 12) {
    char buf[64];
    if (v.is_null()) {
        std::snprintf(buf, sizeof(buf), "%*s", width, "-");
    } else if (v.is_number_float()) {
        std::snprintf(buf, sizeof(buf), "%*.4f", width, v.get<double>());
    } else if (v.is_string()) {
        std::snprintf(buf, sizeof(buf), "%*s", width, v.get<std::string>().c_str());
    } else if (v.is_number()) {
        std::snprintf(buf, sizeof(buf), "%*lld", width, v.get<long long>());
    } else {
        std::snprintf(buf, sizeof(buf), "%*s", width, v.dump().c_str());
    }
    return buf;
}

std::string label(std::string_view text, int width = 16) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-*.*s", width, width, std::string(text).c_str());
    return buf;
}

} // namespace

std::string render_report(const json& report) {
    std::ostringstream out;
    const json empty = json::object();
    auto section = [&](const char* title) { out << "\n" << title << "\n"; };

    const json& corpus = report.value("corpus", empty);
    if (corpus.contains("split_counts")) {
        section("Split counts");
        out << label("") << cell("train") << cell("validation") << cell("test") << cell("total") << "\n";
        const auto& s = corpus["split_counts"];
        out << label("studies") << cell(s["train"]) << cell(s["validation"]) << cell(s["test"]) << cell(s["total"]) << "\n";
    }
    if (corpus.contains("tld_rates")) {
        section("True-label disagreement rate");
        out << label("") << cell("train") << cell("validation") << cell("test") << cell("overall") << "\n";
        for (const char* kind : {"raw", "binarised"}) {
            const auto& r = corpus["tld_rates"][kind];
            out << label(kind) << cell(r["train"]) << cell(r["validation"]) << cell(r["test"]) << cell(r["overall"]) << "\n";
        }
    }

    const json& metrics = report.value("model_metrics", empty);
    if (!metrics.empty()) {
        section("Model performance");
        out << label("") << cell("accuracy") << cell("f1") << cell("precision") << cell("recall") << "\n";
        for (const auto& [name, m] : metrics.items()) {
            out << label(name) << cell(m["accuracy"]) << cell(m["f1"]) << cell(m["precision"]) << cell(m["recall"]) << "\n";
        }
    }
    if (const auto& cv = report.value("cross_validation", json()); cv.is_object()) {
        const auto& m = cv["mean"];
        out << label("cross-val mean") << cell(m["accuracy"]) << cell(m["f1"]) << cell(m["precision"])
            << cell(m["recall"]) << "\n";
    }

    const json& groups = report.value("group_means", empty);
    if (!groups.empty()) {
        section("Group means (PE / PSD)");
        out << label("") << cell("TLA PE") << cell("TLD PE") << cell("all PE") << cell("TLA PSD") << cell("TLD PSD")
            << cell("all PSD") << "\n";
        for (const auto& [name, g] : groups.items()) {
            auto field = [&](const char* row, const char* key) { return g[row].is_null() ? json() : g[row][key]; };
            out << label(name) << cell(field("tla", "mean_pe")) << cell(field("tld", "mean_pe"))
                << cell(field("overall", "mean_pe")) << cell(field("tla", "mean_psd")) << cell(field("tld", "mean_psd"))
                << cell(field("overall", "mean_psd")) << "\n";
        }
    }

    const json& corr = report.value("correlations", empty);
    for (const char* measure : {"psd", "pe"}) {
        if (!corr.contains(measure) || corr[measure].empty()) continue;
        section(std::string(measure) == "pe" ? "Point-biserial r: predictive entropy (p-value)"
                                             : "Point-biserial r: predictive std (p-value)");
        out << label("") << cell("TLD", 24) << cell("Chex Unc.", 24) << cell("Neg Unc.", 24) << "\n";
        for (const auto& [name, row] : corr[measure].items()) {
            out << label(name);
            for (const char* col : {"tld", "chex_uncertain", "neg_uncertain"}) {
                const auto& c = row[col];
                if (c.is_null()) {
                    out << cell(json(), 24);
                } else {
                    char buf[64];
                    std::snprintf(buf, sizeof(buf), "%.4f (%.2e)", c["r_pb"].get<double>(), c["p_value"].get<double>());
                    out << cell(buf, 24);
                }
            }
            out << "\n";
        }
    }

    if (const auto& ood = report.value("ood", json()); ood.is_object()) {
        section("In-distribution vs out-of-distribution labels");
        out << label("") << cell("ID") << cell("OOD") << cell("delta") << "\n";
        for (const char* key : {"accuracy", "f1", "precision", "recall"}) {
            out << label(key) << cell(ood["in_distribution"][key]) << cell(ood["out_of_distribution"][key])
                << cell(ood["delta"][key]) << "\n";
        }
    }

    const json& errors = report.value("error_cases", empty);
    if (errors.contains("cases")) {
        section("Confident predictions on disagreeing labels");
        for (const auto& [name, cases] : errors["cases"].items()) {
            out << label(name) << cases.size() << " case(s)\n";
        }
    }
    return out.str();
}

} // namespace hesitant
