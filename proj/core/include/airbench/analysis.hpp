#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "airbench/augment.hpp"

namespace airbench {

// Distinct (image, orientation) coverage of the augmentation stream over a
// window of consecutive epochs, simulated with the real sampling and flip
// code and averaged over independent trials.
struct CoverageReport {
    int64_t n = 0;
    int window_epochs = 0;
    int trials = 0;
    double mean_unique_pairs = 0.0;
    double min_unique_pairs = 0.0;
    double max_unique_pairs = 0.0;
    double mean_unique_indices = 0.0;
    double expected_pairs = 0.0;   // closed-form expectation for the policy
    double expected_indices = 0.0;
};

CoverageReport coverage(FlipMode flip, SamplingMode sampling, int64_t n, int window_epochs,
                        int trials, uint64_t seed);

// error(epochs) = c + b*epochs^a fitted by least squares: golden-section
// search on the exponent with a closed-form linear solve for (b, c) at each
// candidate; c is clamped to be non-negative.
struct PowerLawFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;        // asymptotic error floor, >= 0
    double residual = 0.0; // sum of squared errors at the optimum

    double predict(double epochs) const;
};

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

// Epochs-equivalent speedup of reaching improved_error relative to training
// for `epochs` under the fitted curve: solve predict(e) = improved_error and
// report e/epochs - 1. improved_error must lie above the fitted floor.
double effective_speedup(const PowerLawFit& fit, double epochs, double improved_error);

// CSV rows "epochs,error,prediction" for external plotting.
std::string power_law_csv(const PowerLawFit& fit,
                          const std::vector<std::pair<double, double>>& points);

// Upper tail P(T > t) of Student's t with dof degrees of freedom.
double student_t_sf(double t, double dof);

// One-sided paired t-test of H1: mean(a - b) > 0.
struct PairedTest {
    int64_t n = 0;
    double mean_diff = 0.0;
    double sd_diff = 0.0; // sample standard deviation of the differences
    double t = 0.0;
    double p = 1.0;
};

PairedTest paired_t_greater(const std::vector<double>& a, const std::vector<double>& b);

} // namespace airbench
