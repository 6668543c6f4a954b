#include "airbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "airbench/errors.hpp"
#include "airbench/rng.hpp"

namespace airbench {

CoverageReport coverage(FlipMode flip, SamplingMode sampling, int64_t n, int window_epochs,
                        int trials, uint64_t seed) {
    if (n <= 0) throw ArgumentError("coverage needs n > 0");
    if (window_epochs <= 0) throw ArgumentError("coverage needs window_epochs > 0");
    if (trials <= 0) throw ArgumentError("coverage needs trials > 0");

    AugmentPolicy policy;
    policy.flip = flip;

    CoverageReport rep;
    rep.n = n;
    rep.window_epochs = window_epochs;
    rep.trials = trials;
    rep.min_unique_pairs = std::numeric_limits<double>::infinity();
    rep.max_unique_pairs = -std::numeric_limits<double>::infinity();

    std::vector<uint8_t> seen_pair(static_cast<size_t>(2 * n));
    std::vector<uint8_t> seen_idx(static_cast<size_t>(n));
    double sum_pairs = 0.0, sum_idx = 0.0;
    for (int t = 0; t < trials; ++t) {
        RngStream idx_rng(seed, RngPurpose::Coverage, 2 * static_cast<uint64_t>(t));
        RngStream flip_rng(seed, RngPurpose::Coverage, 2 * static_cast<uint64_t>(t) + 1);
        std::fill(seen_pair.begin(), seen_pair.end(), uint8_t{0});
        std::fill(seen_idx.begin(), seen_idx.end(), uint8_t{0});
        for (int e = 0; e < window_epochs; ++e) {
            std::vector<int64_t> order = epoch_indices(sampling, n, idx_rng);
            for (int64_t i : order) {
                bool f = flip_decision(policy, flip_rng, i, e);
                seen_pair[static_cast<size_t>(2 * i + (f ? 1 : 0))] = 1;
                seen_idx[static_cast<size_t>(i)] = 1;
            }
        }
        int64_t pairs = std::count(seen_pair.begin(), seen_pair.end(), uint8_t{1});
        int64_t idx = std::count(seen_idx.begin(), seen_idx.end(), uint8_t{1});
        sum_pairs += static_cast<double>(pairs);
        sum_idx += static_cast<double>(idx);
        rep.min_unique_pairs = std::min(rep.min_unique_pairs, static_cast<double>(pairs));
        rep.max_unique_pairs = std::max(rep.max_unique_pairs, static_cast<double>(pairs));
    }
    rep.mean_unique_pairs = sum_pairs / trials;
    rep.mean_unique_indices = sum_idx / trials;

    // Closed-form expectations. p is the chance an index appears at least
    // once in one epoch; exhaustive sampling modes have p = 1.
    double nd = static_cast<double>(n);
    double p = 1.0;
    if (sampling == SamplingMode::WithReplacement) p = 1.0 - std::pow(1.0 - 1.0 / nd, nd);
    double w = static_cast<double>(window_epochs);
    rep.expected_indices = nd * (1.0 - std::pow(1.0 - p, w));
    switch (flip) {
    case FlipMode::None:
        rep.expected_pairs = rep.expected_indices;
        break;
    case FlipMode::Random:
        // Each epoch shows a specific orientation with probability p/2.
        rep.expected_pairs = 2.0 * nd * (1.0 - std::pow(1.0 - p / 2.0, w));
        break;
    case FlipMode::Alternating: {
        // Every image sees one orientation in ceil(w/2) epochs of the window
        // and the other in floor(w/2), whichever parity its hash has.
        double hi = std::ceil(w / 2.0), lo = std::floor(w / 2.0);
        rep.expected_pairs =
            nd * (2.0 - std::pow(1.0 - p, hi) - std::pow(1.0 - p, lo));
        break;
    }
    }
    return rep;
}

double PowerLawFit::predict(double epochs) const { return c + b * std::pow(epochs, a); }

namespace {

struct LinearSolve {
    double b = 0.0, c = 0.0, sse = 0.0;
};

// Least-squares (b, c) for y = c + b*x with x = epochs^a, c clamped >= 0.
LinearSolve solve_bc(const std::vector<std::pair<double, double>>& pts, double a) {
    double xm = 0.0, ym = 0.0;
    for (const auto& [e, y] : pts) {
        xm += std::pow(e, a);
        ym += y;
    }
    size_t m = pts.size();
    xm /= static_cast<double>(m);
    ym /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [e, y] : pts) {
        double dx = std::pow(e, a) - xm;
        sxx += dx * dx;
        sxy += dx * (y - ym);
    }
    LinearSolve out;
    if (sxx > 0.0) out.b = sxy / sxx;
    out.c = ym - out.b * xm;
    if (out.c < 0.0) {
        out.c = 0.0;
        double num = 0.0, den = 0.0;
        for (const auto& [e, y] : pts) {
            double x = std::pow(e, a);
            num += x * y;
            den += x * x;
        }
        out.b = den > 0.0 ? num / den : 0.0;
    }
    for (const auto& [e, y] : pts) {
        double r = out.c + out.b * std::pow(e, a) - y;
        out.sse += r * r;
    }
    return out;
}

} // namespace

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3)
        throw ArgumentError("power-law fit needs at least 3 points for 3 unknowns");
    for (const auto& [e, y] : points) {
        (void)y;
        if (!(e > 0.0)) throw ArgumentError("power-law fit needs epochs > 0");
    }
    for (size_t i = 0; i < points.size(); ++i)
        for (size_t j = i + 1; j < points.size(); ++j)
            if (points[i].first == points[j].first)
                throw ArgumentError("power-law fit needs distinct epoch values");

    // Golden-section search on the exponent; the objective is smooth in a.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = -3.0, hi = -0.01;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = solve_bc(points, x1).sse, f2 = solve_bc(points, x2).sse;
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = solve_bc(points, x1).sse;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = solve_bc(points, x2).sse;
        }
    }
    PowerLawFit fit;
    fit.a = 0.5 * (lo + hi);
    LinearSolve bc = solve_bc(points, fit.a);
    fit.b = bc.b;
    fit.c = bc.c;
    fit.residual = bc.sse;
    return fit;
}

double effective_speedup(const PowerLawFit& fit, double epochs, double improved_error) {
    if (!(epochs > 0.0)) throw ArgumentError("effective_speedup needs epochs > 0");
    if (!(improved_error > fit.c))
        throw ArgumentError("improved error " + std::to_string(improved_error) +
                            " is unattainable under the fit: at or below the floor c = " +
                            std::to_string(fit.c));
    if (!(fit.b > 0.0) || fit.a == 0.0)
        throw ArgumentError("fitted curve is not invertible (b <= 0 or a == 0)");
    double e = std::pow((improved_error - fit.c) / fit.b, 1.0 / fit.a);
    return e / epochs - 1.0;
}

std::string power_law_csv(const PowerLawFit& fit,
                          const std::vector<std::pair<double, double>>& points) {
    std::string out = "epochs,error,prediction\n";
    char buf[96];
    for (const auto& [e, y] : points) {
        std::snprintf(buf, sizeof(buf), "%g,%.4f,%.4f\n", e, y, fit.predict(e));
        out += buf;
    }
    return out;
}

namespace {

// Continued fraction for the regularized incomplete beta (modified Lentz).
double betacf(double a, double b, double x) {
    const double eps = 3e-14, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

double betai(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

} // namespace

double student_t_sf(double t, double dof) {
    if (!(dof > 0.0)) throw ArgumentError("student_t_sf needs dof > 0");
    // P(|T| > |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2)
    double two_sided = betai(0.5 * dof, 0.5, dof / (dof + t * t));
    return t >= 0.0 ? 0.5 * two_sided : 1.0 - 0.5 * two_sided;
}

PairedTest paired_t_greater(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ArgumentError("paired test needs equal-length samples");
    if (a.size() < 2) throw ArgumentError("paired test needs n >= 2");
    PairedTest out;
    out.n = static_cast<int64_t>(a.size());
    double nd = static_cast<double>(out.n);
    for (size_t i = 0; i < a.size(); ++i) out.mean_diff += a[i] - b[i];
    out.mean_diff /= nd;
    double ss = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i] - out.mean_diff;
        ss += d * d;
    }
    out.sd_diff = std::sqrt(ss / (nd - 1.0));
    if (out.sd_diff == 0.0) {
        // Degenerate: all differences equal; the test reduces to the sign.
        out.t = out.mean_diff > 0.0 ? std::numeric_limits<double>::infinity()
                : out.mean_diff < 0.0 ? -std::numeric_limits<double>::infinity()
                                      : 0.0;
        out.p = out.mean_diff > 0.0 ? 0.0 : out.mean_diff < 0.0 ? 1.0 : 0.5;
        return out;
    }
    out.t = out.mean_diff / (out.sd_diff / std::sqrt(nd));
    out.p = student_t_sf(out.t, nd - 1.0);
    return out;
}

} // namespace airbench
