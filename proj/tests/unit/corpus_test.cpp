#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hesitant/corpus.hpp"
#include "hesitant/error.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace hesitant;

namespace {

LabelledStudy study(std::string id, Split split) {
    LabelledStudy s;
    s.study_id = std::move(id);
    s.split = split;
    return s;
}

std::vector<ReportRecord> reports_from(const std::string& text) {
    std::istringstream in(text);
    return parse_reports(in);
}

std::vector<LabelRecord> labels_from(const std::string& text) {
    std::istringstream in(text);
    return parse_labels(in);
}

SyntheticSpec spec_with(std::size_t n, std::uint64_t seed, std::array<double, kScenarioCount> mix) {
    SyntheticSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.mix = ScenarioMix::from_fractions(mix);
    return spec;
}

} // namespace

TEST(LoadReports, TwoWellFormedLines) {
    const auto r = reports_from(R"({"study_id":"a","text":"one"}
{"study_id":"b","text":"two"}
)");
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0], (ReportRecord{"a", "one"}));
    EXPECT_EQ(r[1], (ReportRecord{"b", "two"}));
}

TEST(LoadReports, EmptyFile) { EXPECT_TRUE(reports_from("").empty()); }

TEST(LoadReports, MissingTextNamesLine) {
    try {
        reports_from("{\"study_id\":\"a\",\"text\":\"x\"}\n{\"study_id\":\"b\"}\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(LoadReports, MalformedJsonNamesLine) {
    try {
        reports_from("{\"study_id\":\"a\",\"text\":\"x\"}\n\n{oops\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(LoadReports, DuplicateIdIsValidationError) {
    EXPECT_THROW(reports_from("{\"study_id\":\"a\",\"text\":\"x\"}\n{\"study_id\":\"a\",\"text\":\"y\"}\n"),
                 ValidationError);
}

TEST(LoadReports, MissingFileIsIoError) { EXPECT_THROW(load_reports("/nonexistent/reports.jsonl"), IoError); }

TEST(LabelCodes, CheXpertCoding) {
    EXPECT_EQ(parse_label_code("1.0"), TriLabel::Positive);
    EXPECT_EQ(parse_label_code("0.0"), TriLabel::Negative);
    EXPECT_EQ(parse_label_code("-1.0"), TriLabel::Uncertain);
    EXPECT_EQ(parse_label_code(""), TriLabel::Missing);
    EXPECT_EQ(parse_label_code("1"), TriLabel::Positive);
    EXPECT_THROW(parse_label_code("2.0"), ValidationError);
    EXPECT_THROW(parse_label_code("yes"), ValidationError);
    for (auto l : {TriLabel::Positive, TriLabel::Negative, TriLabel::Uncertain, TriLabel::Missing}) {
        EXPECT_EQ(parse_label_code(label_code(l)), l);
    }
}

TEST(LoadLabels, ParsesSplitsAndCodes) {
    const auto l = labels_from("study_id,split,chexpert,negbio\na,train,1.0,-1.0\nb,validate,,0.0\nc,test,0.0,1.0\n");
    ASSERT_EQ(l.size(), 3u);
    EXPECT_EQ(l[0], (LabelRecord{"a", Split::Train, TriLabel::Positive, TriLabel::Uncertain}));
    EXPECT_EQ(l[1], (LabelRecord{"b", Split::Validation, TriLabel::Missing, TriLabel::Negative}));
    EXPECT_EQ(l[2], (LabelRecord{"c", Split::Test, TriLabel::Negative, TriLabel::Positive}));
}

TEST(LoadLabels, Errors) {
    EXPECT_THROW(labels_from("id,split,chexpert,negbio\n"), ValidationError);
    EXPECT_THROW(labels_from("study_id,split,chexpert,negbio\na,dev,1.0,1.0\n"), ValidationError);
    EXPECT_THROW(labels_from("study_id,split,chexpert,negbio\na,train,2.0,1.0\n"), ValidationError);
    EXPECT_THROW(labels_from("study_id,split,chexpert,negbio\na,train,1.0\n"), ParseError);
}

TEST(JoinAndFilter, DropsMissingAndUnmatched) {
    const std::vector<ReportRecord> reports{{"a", "x"}, {"b", "y"}, {"c", "z"}};
    const std::vector<LabelRecord> labels{{"a", Split::Train, TriLabel::Positive, TriLabel::Positive},
                                          {"b", Split::Train, TriLabel::Missing, TriLabel::Negative}};
    const auto j = join_and_filter(reports, labels);
    ASSERT_EQ(j.studies.size(), 1u);
    EXPECT_EQ(j.studies[0].study_id, "a");
    EXPECT_EQ(j.missing_label, 1u);
    EXPECT_EQ(j.reports_without_labels, 1u);
    EXPECT_EQ(j.labels_without_reports, 0u);
}

TEST(JoinAndFilter, AllPresentKeepsIntersection) {
    const std::vector<ReportRecord> reports{{"a", "x"}, {"b", "y"}};
    const std::vector<LabelRecord> labels{{"b", Split::Test, TriLabel::Negative, TriLabel::Negative},
                                          {"a", Split::Train, TriLabel::Positive, TriLabel::Uncertain},
                                          {"q", Split::Train, TriLabel::Positive, TriLabel::Positive}};
    const auto j = join_and_filter(reports, labels);
    ASSERT_EQ(j.studies.size(), 2u);
    EXPECT_EQ(j.studies[0].study_id, "a");
    EXPECT_EQ(j.studies[1].split, Split::Test);
    EXPECT_EQ(j.labels_without_reports, 1u);
}

TEST(JoinAndFilter, DisjointKeys) {
    const auto j = join_and_filter({{"a", "x"}}, {{"b", Split::Train, TriLabel::Positive, TriLabel::Positive}});
    EXPECT_TRUE(j.studies.empty());
    EXPECT_EQ(j.reports_without_labels, 1u);
    EXPECT_EQ(j.labels_without_reports, 1u);
}

TEST(JoinAndFilter, BlankTextExcluded) {
    const auto j = join_and_filter({{"a", "  \n"}}, {{"a", Split::Train, TriLabel::Positive, TriLabel::Positive}});
    EXPECT_TRUE(j.studies.empty());
    EXPECT_EQ(j.empty_text, 1u);
}

TEST(Partition, SizesAndOrder) {
    std::vector<LabelledStudy> s{study("1", Split::Train), study("2", Split::Train), study("3", Split::Validation),
                                 study("4", Split::Test)};
    const auto p = partition(s);
    EXPECT_EQ(p.train.size(), 2u);
    EXPECT_EQ(p.validation.size(), 1u);
    EXPECT_EQ(p.test.size(), 1u);
    EXPECT_EQ(p.train[0].study_id, "1");
    EXPECT_EQ(p.train[1].study_id, "2");

    std::vector<LabelledStudy> all_train(5, study("x", Split::Train));
    const auto q = partition(all_train);
    EXPECT_EQ(q.train.size(), 5u);
    EXPECT_TRUE(q.validation.empty());
    EXPECT_TRUE(q.test.empty());
}

TEST(ScenarioMixTest, RejectsBadSums) {
    EXPECT_THROW(ScenarioMix::from_fractions({0.5, 0.4, 0, 0, 0}), ValidationError);
    EXPECT_THROW(ScenarioMix::from_fractions({1.2, -0.2, 0, 0, 0}), ValidationError);
    EXPECT_NO_THROW(ScenarioMix::from_fractions({0.35, 0.35, 0.2, 0.1, 0.0}));
}

TEST(Synthetic, AllCertainPositive) {
    const auto studies = generate_synthetic(spec_with(200, 1, {1, 0, 0, 0, 0}));
    for (const auto& s : studies) {
        EXPECT_EQ(s.chexpert, TriLabel::Positive);
        EXPECT_EQ(s.negbio, TriLabel::Positive);
        EXPECT_FALSE(s.text.empty());
    }
}

TEST(Synthetic, Deterministic) {
    const auto spec = spec_with(300, 9, {0.35, 0.35, 0.2, 0.1, 0.0});
    std::ostringstream a;
    std::ostringstream b;
    write_reports(a, generate_synthetic(spec));
    write_reports(b, generate_synthetic(spec));
    EXPECT_EQ(a.str(), b.str());
    std::ostringstream c;
    write_reports(c, generate_synthetic(spec_with(300, 10, {0.35, 0.35, 0.2, 0.1, 0.0})));
    EXPECT_NE(a.str(), c.str());
}

TEST(Synthetic, StudyIsIndependentOfCorpusSize) {
    const auto small = generate_synthetic(spec_with(10, 4, {0.2, 0.2, 0.2, 0.2, 0.2}));
    const auto large = generate_synthetic(spec_with(50, 4, {0.2, 0.2, 0.2, 0.2, 0.2}));
    for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i], large[i]);
}

TEST(Synthetic, UncertainCountWithinBinomialBounds) {
    const auto studies = generate_synthetic(spec_with(10000, 3, {0.4, 0.4, 0.2, 0.0, 0.0}));
    const auto uncertain = std::count_if(studies.begin(), studies.end(),
                                         [](const auto& s) { return s.chexpert == TriLabel::Uncertain; });
    EXPECT_GE(uncertain, 1883);
    EXPECT_LE(uncertain, 2117);
    const auto b = oracle::binomial_3sigma(10000, 0.2);
    EXPECT_GE(static_cast<double>(uncertain), b.lo);
    EXPECT_LE(static_cast<double>(uncertain), b.hi);
}

TEST(Synthetic, ScenarioSemantics) {
    const auto studies = generate_synthetic(spec_with(2000, 5, {0.2, 0.2, 0.2, 0.2, 0.2}));
    std::size_t borderline = 0;
    std::size_t hedged = 0;
    for (const auto& s : studies) {
        if (s.chexpert == TriLabel::Negative && s.negbio == TriLabel::Uncertain) {
            std::string lower = s.text;
            std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
            if (lower.find("borderline") != std::string::npos) ++borderline;
        }
        if (s.chexpert == TriLabel::Uncertain && s.negbio == TriLabel::Uncertain) ++hedged;
        EXPECT_NE(s.chexpert, TriLabel::Missing);
        EXPECT_NE(s.negbio, TriLabel::Missing);
    }
    EXPECT_GT(borderline, 300u);
    EXPECT_GT(hedged, 300u);
}

TEST(Synthetic, BorderlineAlwaysDisagrees) {
    for (const auto& s : generate_synthetic(spec_with(500, 6, {0, 0, 0, 1, 0}))) {
        EXPECT_NE(s.chexpert, s.negbio);
        EXPECT_NE(s.text.find("orderline"), std::string::npos);
    }
}

TEST(Synthetic, SplitProportions) {
    const auto studies = generate_synthetic(spec_with(10000, 8, {0.5, 0.5, 0, 0, 0}));
    const auto p = partition(studies);
    const auto b = oracle::binomial_3sigma(10000, 0.1);
    EXPECT_GE(static_cast<double>(p.test.size()), b.lo);
    EXPECT_LE(static_cast<double>(p.test.size()), b.hi);
    EXPECT_GE(static_cast<double>(p.validation.size()), b.lo);
    EXPECT_LE(static_cast<double>(p.validation.size()), b.hi);
}

TEST(Synthetic, FilesRoundTripThroughJoin) {
    testing_support::TempDir dir("corpus");
    const auto studies = generate_synthetic(spec_with(100, 2, {0.3, 0.3, 0.2, 0.1, 0.1}));
    {
        std::ofstream r(dir / "reports.jsonl");
        write_reports(r, studies);
        std::ofstream l(dir / "labels.csv");
        write_labels(l, studies);
    }
    const auto joined = join_and_filter(load_reports(dir / "reports.jsonl"), load_labels(dir / "labels.csv"));
    EXPECT_EQ(joined.studies, studies);
}

TEST(Synthetic, SpecJsonRoundTrip) {
    auto spec = spec_with(123, 45, {0.35, 0.35, 0.2, 0.1, 0.0});
    const auto back = synthetic_spec_from_json(to_json(spec));
    EXPECT_EQ(back.n, spec.n);
    EXPECT_EQ(back.seed, spec.seed);
    EXPECT_EQ(back.mix.fractions(), spec.mix.fractions());
    EXPECT_THROW(synthetic_spec_from_json({{"n", 10}, {"mix", {{"CertainPositive", 0.5}}}}), ValidationError);
    EXPECT_THROW(synthetic_spec_from_json({{"n", 10}, {"mix", {{"Nope", 1.0}}}}), ValidationError);
}
