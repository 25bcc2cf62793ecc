#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "hesitant/labels.hpp"

namespace hesitant {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

/// Ratios with a zero denominator are left empty rather than 0 or NaN.
struct ClassificationMetrics {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    ConfusionCounts counts;
};

ClassificationMetrics metrics_from_counts(const ConfusionCounts& counts);

/// Throws ValidationError on length mismatch or empty input.
ClassificationMetrics classification_metrics(std::span<const BinaryLabel> predicted, std::span<const BinaryLabel> truth);

/// Harmonic mean; empty when both inputs are zero.
std::optional<double> f1_from(double precision, double recall);

double mean(std::span<const double> values);
/// Two-pass sample standard deviation (n - 1 denominator). Needs n >= 2.
double sample_sd(std::span<const double> values);

struct GroupStats {
    double mean_y1 = 0.0;  // X = 1 group
    double mean_y0 = 0.0;  // X = 0 group
    double sd_y = 0.0;     // sample sd of Y over all N
    std::size_t n1 = 0;
    std::size_t n0 = 0;
    std::size_t n = 0;
};

struct CorrelationResult {
    double r_pb = 0.0;
    double p_value = 1.0;
    GroupStats groups;
};

/// Point-biserial correlation of continuous y against dichotomous x in {0,1},
/// with a two-sided t-test p-value on N - 2 degrees of freedom.
/// Throws ValidationError for N < 3 or bad codes, UndefinedCorrelation when
/// either x group is empty or y is constant.
CorrelationResult point_biserial(std::span<const double> y, std::span<const int> x);

/// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double x, double a, double b);

/// Two-sided tail probability 2 P(T >= |t|) for Student's t with df degrees of freedom.
double student_t_sf(double t, double df);

} // namespace hesitant
