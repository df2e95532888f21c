// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "budgetrl/mode.hpp"

namespace budgetrl {

// Accuracy-cost trade-off scoring. Per mode, retention A = Acc / Acc_base and
// compression C = 1 - Cost / Cost_base are mixed as beta * A + (1 - beta) * C
// with beta = 1 for High (accuracy is all that matters there) and 0.5
// otherwise; the benchmark score is the plain mean of the three mode scores.

struct ModeMeasurement {
    Mode mode = Mode::High;
    double accuracy = 0.0;  // fraction in [0,1] or percentage in [0,100]
    double cost = 0.0;      // mean total tokens per response, > 0
};

struct BaselineMeasurement {
    double accuracy_base = 0.0;
    double cost_base = 0.0;
};

// How to read the accuracy fields. Auto treats the report as percent-scaled
// when any accuracy exceeds 1 and rejects apparent mixtures.
enum class AccuracyUnit { Auto, Fraction, Percent };

AccuracyUnit accuracy_unit_from_string(const std::string& name);

// (A, C) in ratio units. C may be negative when cost exceeds the baseline;
// A is deliberately uncapped. Throws InvalidBaseline on non-positive base
// fields, ValidationError on a non-finite or negative measurement.
std::pair<double, double> retention_and_compression(const ModeMeasurement& m,
                                                    const BaselineMeasurement& base);

// beta * A + (1 - beta) * C with beta = 1 for High and 0.5 otherwise.
double mode_score(double retention, double compression, Mode mode);

// Arithmetic mean; requires exactly three per-mode scores.
double act_score(std::span<const double> mode_scores);

// Mean over problems of mean over repeats. Every problem must carry exactly
// `repeats` 0-or-1 outcomes (RaggedOutcomes otherwise).
double aggregate_accuracy(const std::vector<std::vector<int>>& per_problem_outcomes, int repeats);

struct ModeOutcome {
    Mode mode = Mode::High;
    double retention = 0.0;    // percent-scaled, Table-style
    double compression = 0.0;  // percent-scaled
    double score = 0.0;        // percent-scaled
};

struct ACTReport {
    std::string benchmark;
    std::array<ModeOutcome, 3> modes{};  // indexed by Mode enum value
    double act = 0.0;                    // percent-scaled mean of the three scores
};

// Requires exactly one measurement per mode. Units are validated for
// consistency across the three measurements and the baseline (the ratios
// themselves are scale-invariant, so the unit only matters for validation).
// Report values are percent-scaled; keep full precision and round only for
// display.
ACTReport build_report(const std::string& benchmark, std::span<const ModeMeasurement> measurements,
                       const BaselineMeasurement& baseline,
                       AccuracyUnit unit = AccuracyUnit::Auto);

std::string report_to_json(const ACTReport& report);

// Scatter-plot rows (benchmark, mode, accuracy, cost) straight from the
// measurements.
void write_measurements_csv(const std::string& benchmark,
                            std::span<const ModeMeasurement> measurements, std::ostream& out);

}  // namespace budgetrl
