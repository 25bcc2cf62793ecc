#include "hesitant/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hesitant/error.hpp"

namespace hesitant {

std::optional<double> f1_from(double precision, double recall) {
    if (precision + recall <= 0.0) return std::nullopt;
    return 2.0 * precision * recall / (precision + recall);
}

ClassificationMetrics metrics_from_counts(const ConfusionCounts& c) {
    if (c.total() == 0) throw ValidationError("metrics need at least one prediction");
    ClassificationMetrics m;
    m.counts = c;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (m.precision && m.recall) m.f1 = f1_from(*m.precision, *m.recall);
    return m;
}

ClassificationMetrics classification_metrics(std::span<const BinaryLabel> predicted, std::span<const BinaryLabel> truth) {
    if (predicted.size() != truth.size()) {
        throw ValidationError("prediction/truth length mismatch: " + std::to_string(predicted.size()) + " vs " +
                              std::to_string(truth.size()));
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == BinaryLabel::Positive;
        const bool t = truth[i] == BinaryLabel::Positive;
        if (p && t) ++c.tp;
        else if (p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return metrics_from_counts(c);
}

double mean(std::span<const double> values) {
    if (values.empty()) throw ValidationError("mean of an empty sequence");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) throw ValidationError("sample standard deviation needs at least 2 values");
    const double mu = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

CorrelationResult point_biserial(std::span<const double> y, std::span<const int> x) {
    if (y.size() != x.size()) throw ValidationError("point_biserial: y and x differ in length");
    if (y.size() < 3) throw ValidationError("point_biserial: need N >= 3");

    GroupStats g;
    g.n = y.size();
    double sum1 = 0.0;
    double sum0 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (x[i] == 1) {
            ++g.n1;
            sum1 += y[i];
        } else if (x[i] == 0) {
            ++g.n0;
            sum0 += y[i];
        } else {
            throw ValidationError("point_biserial: x must be 0 or 1");
        }
    }
    if (g.n1 == 0 || g.n0 == 0) throw UndefinedCorrelation("point_biserial: dichotomous variable is constant");

    const bool constant_y = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
    if (constant_y) throw UndefinedCorrelation("point_biserial: continuous variable is constant");

    g.mean_y1 = sum1 / static_cast<double>(g.n1);
    g.mean_y0 = sum0 / static_cast<double>(g.n0);
    g.sd_y = sample_sd(y);

    const double n = static_cast<double>(g.n);
    const double scale = std::sqrt(static_cast<double>(g.n1) * static_cast<double>(g.n0) / (n * (n - 1.0)));
    double r = (g.mean_y1 - g.mean_y0) / g.sd_y * scale;
    r = std::clamp(r, -1.0, 1.0);

    CorrelationResult result;
    result.r_pb = r;
    result.groups = g;
    const double df = n - 2.0;
    const double one_minus_r2 = 1.0 - r * r;
    if (one_minus_r2 <= 0.0) {
        result.p_value = 0.0;
    } else {
        result.p_value = student_t_sf(r * std::sqrt(df / one_minus_r2), df);
    }
    return result;
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz evaluation.
double beta_continued_fraction(double x, double a, double b) {
    constexpr int kMaxIterations = 500;
    constexpr double kEpsilon = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEpsilon) break;
    }
    return h;
}

} // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw ValidationError("incomplete beta needs a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete beta needs x in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // The fraction converges quickly on the side of the symmetry point.
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_sf(double t, double df) {
    if (!(df >= 1.0)) throw ValidationError("student_t_sf needs df >= 1");
    if (std::isnan(t)) throw ValidationError("student_t_sf: t is NaN");
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    const double x = df / (df + t * t);
    return std::clamp(regularized_incomplete_beta(x, 0.5 * df, 0.5), 0.0, 1.0);
}

} // namespace hesitant
