#include <gtest/gtest.h>

#include <algorithm>

#include "hesitant/analysis.hpp"
#include "hesitant/error.hpp"
#include "hesitant/rng.hpp"

using namespace hesitant;

namespace {

UncertaintySummary summary(std::string id, double p, double psd = 0.01) {
    return {std::move(id), p, psd, predictive_entropy(p), decide(p, 0.5)};
}

std::vector<BinaryLabel> labels(std::initializer_list<int> bits) {
    std::vector<BinaryLabel> out;
    for (int b : bits) out.push_back(b ? BinaryLabel::Positive : BinaryLabel::Negative);
    return out;
}

} // namespace

TEST(AlignIndicators, ReordersByKey) {
    const std::vector<UncertaintySummary> s{summary("b", 0.2), summary("a", 0.7)};
    const std::vector<UncertaintyIndicator> ind{{"a", 1, 0, 0}, {"b", 0, 1, 0}};
    const auto aligned = align_indicators(s, ind);
    EXPECT_EQ(aligned[0].study_id, "b");
    EXPECT_EQ(aligned[1].tld, 1);
}

TEST(AlignIndicators, KeyMismatch) {
    const std::vector<UncertaintySummary> s{summary("a", 0.2), summary("b", 0.7)};
    const std::vector<UncertaintyIndicator> extra{{"a", 1, 0, 0}, {"b", 0, 1, 0}, {"c", 0, 0, 0}};
    const std::vector<UncertaintyIndicator> other{{"a", 1, 0, 0}, {"z", 0, 1, 0}};
    try {
        align_indicators(s, extra);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("key mismatch"), std::string::npos);
    }
    EXPECT_THROW(align_indicators(s, other), ValidationError);
}

TEST(CorrelateUncertainty, ConstantMeasureGivesAbsentCells) {
    SourceSummaries src{SampleSource::McDropout, {summary("a", 0.3), summary("b", 0.3), summary("c", 0.3)}};
    const std::vector<UncertaintyIndicator> ind{{"a", 1, 1, 0}, {"b", 0, 0, 1}, {"c", 1, 0, 0}};
    const std::vector<SourceSummaries> sources{src};
    const auto t = correlate_uncertainty(sources, ind);
    ASSERT_EQ(t.pe.rows.size(), 1u);
    for (const auto& cell : t.pe.rows[0].cells) EXPECT_FALSE(cell);
    for (const auto& cell : t.psd.rows[0].cells) EXPECT_FALSE(cell);
}

TEST(CorrelateUncertainty, CellsMatchPointBiserial) {
    SeqRng rng(8);
    std::vector<UncertaintySummary> s;
    std::vector<UncertaintyIndicator> ind;
    for (int i = 0; i < 50; ++i) {
        const std::string id = "s" + std::to_string(i);
        const int tld = i % 3 == 0;
        s.push_back(summary(id, tld ? rng.uniform(0.3, 0.7) : rng.uniform(0.0, 0.2), rng.uniform(0.0, 0.1)));
        ind.push_back({id, tld, i % 4 == 0, 0});
    }
    const std::vector<SourceSummaries> sources{{SampleSource::DeepEnsemble, s}};
    const auto t = correlate_uncertainty(sources, ind);
    std::vector<double> pe;
    std::vector<double> psd;
    std::vector<int> tld;
    for (std::size_t i = 0; i < s.size(); ++i) {
        pe.push_back(s[i].pe);
        psd.push_back(s[i].psd);
        tld.push_back(ind[i].tld);
    }
    EXPECT_EQ(t.pe.rows[0].cells[0]->r_pb, point_biserial(pe, tld).r_pb);
    EXPECT_EQ(t.psd.rows[0].cells[0]->r_pb, point_biserial(psd, tld).r_pb);
    EXPECT_GT(t.pe.rows[0].cells[0]->r_pb, 0.5);
    EXPECT_TRUE(t.pe.rows[0].cells[1].has_value());
    EXPECT_FALSE(t.pe.rows[0].cells[2].has_value());
    EXPECT_EQ(t.pe.rows[0].source, SampleSource::DeepEnsemble);
}

TEST(OodEval, IdenticalLabelsAreSymmetric) {
    const auto pred = labels({1, 0, 1, 1, 0, 0});
    const auto truth = labels({1, 0, 0, 1, 1, 0});
    const auto r = ood_eval(pred, truth, truth);
    EXPECT_EQ(r.delta.accuracy, 0.0);
    EXPECT_EQ(*r.delta.f1, 0.0);
    EXPECT_EQ(*r.delta.precision, 0.0);
    EXPECT_EQ(*r.delta.recall, 0.0);
    EXPECT_EQ(r.in_distribution.counts, r.out_of_distribution.counts);
}

TEST(OodEval, ComplementFlipsAccuracy) {
    const auto pred = labels({1, 0, 1, 1, 0, 0, 1});
    const auto truth = labels({1, 0, 0, 1, 1, 0, 1});
    const auto flipped = labels({0, 1, 1, 0, 0, 1, 0});
    const auto r = ood_eval(pred, truth, flipped);
    EXPECT_DOUBLE_EQ(r.out_of_distribution.accuracy, 1.0 - r.in_distribution.accuracy);
}

TEST(MineErrors, Definition) {
    const std::vector<UncertaintySummary> s{summary("a", 0.99), summary("b", 0.60), summary("c", 0.99),
                                            summary("d", 0.01)};
    const std::vector<UncertaintyIndicator> ind{{"a", 1, 0, 0}, {"b", 1, 0, 0}, {"c", 0, 0, 0}, {"d", 1, 1, 1}};
    const auto e = mine_errors(s, ind, 0.45);
    ASSERT_EQ(e.size(), 2u);
    EXPECT_EQ(e[0].study_id, "a");
    EXPECT_EQ(e[1].study_id, "d");
    for (const auto& c : e) {
        EXPECT_EQ(c.tld, 1);
        EXPECT_GT(std::abs(c.mean_prob - 0.5), 0.45);
    }
    EXPECT_THROW(mine_errors(s, ind, 0.5), ValidationError);
    EXPECT_THROW(mine_errors(s, ind, 0.0), ValidationError);
}

TEST(MineErrors, OrderInvariantWithExcerpts) {
    std::vector<UncertaintySummary> s;
    std::vector<UncertaintyIndicator> ind;
    std::vector<LabelledStudy> studies;
    SeqRng rng(9);
    for (int i = 0; i < 60; ++i) {
        const std::string id = "s" + std::to_string(i);
        const double p = i % 2 ? rng.uniform(0.97, 1.0) : rng.uniform(0.0, 0.03);
        s.push_back(summary(id, i < 4 ? 0.99 : p));
        ind.push_back({id, i % 3 != 0, 0, 0});
        studies.push_back({id, Split::Test, std::string(400, 'x') + id, TriLabel::Negative, TriLabel::Uncertain});
    }
    const auto base = mine_errors(s, ind, 0.45, studies);
    ASSERT_FALSE(base.empty());
    for (const auto& c : base) EXPECT_EQ(c.excerpt.size(), kExcerptLength);
    for (int round = 0; round < 5; ++round) {
        auto s2 = s;
        auto ind2 = ind;
        shuffle_in_place(s2, rng);
        shuffle_in_place(ind2, rng);
        EXPECT_EQ(mine_errors(s2, ind2, 0.45, studies), base);
    }
    for (std::size_t i = 1; i < base.size(); ++i) {
        const double a = std::abs(base[i - 1].mean_prob - 0.5);
        const double b = std::abs(base[i].mean_prob - 0.5);
        EXPECT_TRUE(a > b || (a == b && base[i - 1].study_id < base[i].study_id));
    }
}

TEST(Excerpt, NeverSplitsUtf8) {
    std::string text(299, 'a');
    text += "\xc3\xa9tail";
    EXPECT_EQ(excerpt(text).size(), 299u);
    EXPECT_EQ(excerpt("short"), "short");
}
