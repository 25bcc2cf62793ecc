#include <gtest/gtest.h>

#include <cmath>

#include "hesitant/error.hpp"
#include "hesitant/rng.hpp"
#include "hesitant/stats.hpp"
#include "oracles.hpp"

using namespace hesitant;

namespace {

std::vector<BinaryLabel> labels(std::initializer_list<int> bits) {
    std::vector<BinaryLabel> out;
    for (int b : bits) out.push_back(b ? BinaryLabel::Positive : BinaryLabel::Negative);
    return out;
}

struct Instance {
    std::vector<double> y;
    std::vector<int> x;
};

Instance random_instance(SeqRng& rng) {
    Instance in;
    const std::size_t n = 3 + rng.below(198);
    for (std::size_t i = 0; i < n; ++i) {
        in.x.push_back(rng.uniform() < 0.4 ? 1 : 0);
        in.y.push_back(rng.uniform(-5.0, 5.0) + 2.0 * in.x.back());
    }
    in.x[0] = 0;
    in.x[1] = 1;
    return in;
}

} // namespace

TEST(Metrics, PerfectPrediction) {
    const auto l = labels({1, 0, 1, 1, 0});
    const auto m = classification_metrics(l, l);
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_EQ(*m.precision, 1.0);
    EXPECT_EQ(*m.recall, 1.0);
    EXPECT_EQ(*m.f1, 1.0);
}

TEST(Metrics, HandCount) {
    const auto m = metrics_from_counts({2, 1, 1, 1});
    EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
    EXPECT_DOUBLE_EQ(*m.precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*m.recall, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*m.f1, 2.0 / 3.0);
}

TEST(Metrics, FromSequences) {
    const auto m = classification_metrics(labels({1, 1, 1, 0, 0}), labels({1, 1, 0, 1, 0}));
    EXPECT_EQ(m.counts, (ConfusionCounts{2, 1, 1, 1}));
}

TEST(Metrics, PublishedF1Consistency) { EXPECT_NEAR(*f1_from(0.9694, 0.843), 0.9018, 0.0005); }

TEST(Metrics, UndefinedRatiosAbsent) {
    const auto m = classification_metrics(labels({0, 0}), labels({0, 0}));
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_FALSE(m.precision);
    EXPECT_FALSE(m.recall);
    EXPECT_FALSE(m.f1);
    EXPECT_EQ(m.counts.tn, 2u);
}

TEST(Metrics, Errors) {
    EXPECT_THROW(classification_metrics(labels({1}), labels({1, 0})), ValidationError);
    EXPECT_THROW(classification_metrics(labels({}), labels({})), ValidationError);
}

TEST(Metrics, F1IsHarmonicMean) {
    SeqRng rng(4);
    for (int k = 0; k < 200; ++k) {
        const ConfusionCounts c{rng.below(20), rng.below(20), rng.below(20), rng.below(20) + 1};
        const auto m = metrics_from_counts(c);
        if (m.precision && m.recall && (*m.precision + *m.recall) > 0) {
            EXPECT_NEAR(*m.f1, 2 * *m.precision * *m.recall / (*m.precision + *m.recall), 1e-15);
        }
    }
}

TEST(Moments, TwoPass) {
    const std::vector<double> v{1e9 + 4, 1e9 + 7, 1e9 + 13, 1e9 + 16};
    EXPECT_DOUBLE_EQ(mean(v), 1e9 + 10);
    EXPECT_DOUBLE_EQ(sample_sd(v), std::sqrt(30.0));
}

TEST(PointBiserial, PerfectAssociation) {
    const std::vector<double> y{0, 0, 1, 1};
    const std::vector<int> x{0, 0, 1, 1};
    const auto r = point_biserial(y, x);
    EXPECT_DOUBLE_EQ(r.r_pb, 1.0);
    EXPECT_EQ(r.p_value, 0.0);
}

TEST(PointBiserial, MatchesPearsonExample) {
    const std::vector<double> y{1, 2, 3, 4};
    const std::vector<int> x{0, 0, 1, 1};
    const auto r = point_biserial(y, x);
    EXPECT_NEAR(r.r_pb, 0.8944, 1e-4);
    EXPECT_EQ(r.groups.n1, 2u);
    EXPECT_EQ(r.groups.n0, 2u);
    EXPECT_DOUBLE_EQ(r.groups.mean_y1, 3.5);
    EXPECT_DOUBLE_EQ(r.groups.mean_y0, 1.5);
}

TEST(PointBiserial, Errors) {
    const std::vector<double> y{1, 2, 3};
    EXPECT_THROW(point_biserial(y, std::vector<int>{1, 1, 1}), UndefinedCorrelation);
    EXPECT_THROW(point_biserial(std::vector<double>{2, 2, 2}, std::vector<int>{0, 1, 1}), UndefinedCorrelation);
    EXPECT_THROW(point_biserial(std::vector<double>{1, 2}, std::vector<int>{0, 1}), ValidationError);
    EXPECT_THROW(point_biserial(y, std::vector<int>{0, 1, 2}), ValidationError);
    EXPECT_THROW(point_biserial(y, std::vector<int>{0, 1}), ValidationError);
}

TEST(PointBiserial, PearsonOracleOnRandomInstances) {
    SeqRng rng(20240);
    for (int k = 0; k < 100; ++k) {
        const auto in = random_instance(rng);
        const std::vector<double> xr(in.x.begin(), in.x.end());
        const auto r = point_biserial(in.y, in.x);
        const double expected = oracle::pearson(in.y, xr);
        EXPECT_NEAR(r.r_pb, expected, 1e-10);
        EXPECT_NEAR(r.r_pb * r.r_pb, expected * expected, 1e-10);
        EXPECT_GE(r.r_pb, -1.0);
        EXPECT_LE(r.r_pb, 1.0);
        EXPECT_EQ(r.groups.n1 + r.groups.n0, r.groups.n);
    }
}

TEST(PointBiserial, SignFlipAndAffineEquivariance) {
    SeqRng rng(77);
    for (int k = 0; k < 100; ++k) {
        const auto in = random_instance(rng);
        const auto base = point_biserial(in.y, in.x);
        std::vector<int> flipped;
        for (int v : in.x) flipped.push_back(1 - v);
        const auto f = point_biserial(in.y, flipped);
        EXPECT_NEAR(f.r_pb, -base.r_pb, 1e-12);
        EXPECT_NEAR(f.p_value, base.p_value, 1e-12);

        const double a = rng.uniform(0.1, 10.0);
        const double b = rng.uniform(-10.0, 10.0);
        std::vector<double> pos;
        std::vector<double> neg;
        for (double v : in.y) {
            pos.push_back(a * v + b);
            neg.push_back(-a * v + b);
        }
        EXPECT_NEAR(point_biserial(pos, in.x).r_pb, base.r_pb, 1e-12);
        EXPECT_NEAR(point_biserial(neg, in.x).r_pb, -base.r_pb, 1e-12);
    }
}

TEST(StudentT, Examples) {
    EXPECT_EQ(student_t_sf(0.0, 1), 1.0);
    EXPECT_EQ(student_t_sf(0.0, 30), 1.0);
    EXPECT_NEAR(student_t_sf(2.776, 4), 0.050, 0.001);
    EXPECT_LT(student_t_sf(10.0, 8), 1e-5);
    EXPECT_EQ(student_t_sf(std::numeric_limits<double>::infinity(), 5), 0.0);
}

TEST(StudentT, MatchesNumericIntegration) {
    for (double df : {1.0, 2.0, 4.0, 8.0, 30.0, 200.0}) {
        for (double t : {0.1, 0.5, 1.0, 2.0, 2.776, 4.0, 10.0}) {
            const double expected = oracle::t_two_sided_numeric(t, df);
            EXPECT_NEAR(student_t_sf(t, df), expected, 1e-9 + 1e-7 * expected) << "t=" << t << " df=" << df;
            EXPECT_DOUBLE_EQ(student_t_sf(-t, df), student_t_sf(t, df));
        }
    }
}

TEST(StudentT, MonotoneInAbsT) {
    for (double df : {1.0, 3.0, 10.0, 100.0}) {
        double prev = 1.0;
        for (int i = 1; i <= 400; ++i) {
            const double p = student_t_sf(i * 0.05, df);
            EXPECT_LE(p, prev);
            prev = p;
        }
    }
}

TEST(IncompleteBeta, KnownValues) {
    EXPECT_NEAR(regularized_incomplete_beta(0.5, 1.0, 1.0), 0.5, 1e-14);
    EXPECT_NEAR(regularized_incomplete_beta(0.3, 2.0, 3.0), 0.3483, 1e-12);
    EXPECT_EQ(regularized_incomplete_beta(0.0, 2.0, 3.0), 0.0);
    EXPECT_EQ(regularized_incomplete_beta(1.0, 2.0, 3.0), 1.0);
    for (double x : {0.1, 0.4, 0.9}) {
        EXPECT_NEAR(regularized_incomplete_beta(x, 2.5, 0.5) + regularized_incomplete_beta(1 - x, 0.5, 2.5), 1.0, 1e-13);
    }
}
