// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/act.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <ostream>

#include "budgetrl/errors.hpp"

namespace budgetrl {

namespace {

void check_measurement(const ModeMeasurement& m) {
    if (!std::isfinite(m.accuracy) || m.accuracy < 0.0) {
        throw ValidationError("accuracy must be finite and non-negative, got " +
                              std::to_string(m.accuracy) + " for mode " + to_string(m.mode));
    }
    if (!std::isfinite(m.cost) || m.cost <= 0.0) {
        throw ValidationError("cost must be finite and positive, got " + std::to_string(m.cost) +
                              " for mode " + to_string(m.mode));
    }
}

}  // namespace

AccuracyUnit accuracy_unit_from_string(const std::string& name) {
    if (name == "auto") return AccuracyUnit::Auto;
    if (name == "fraction") return AccuracyUnit::Fraction;
    if (name == "percent") return AccuracyUnit::Percent;
    throw ParseError("unknown accuracy unit '" + name + "' (expected auto, fraction, or percent)");
}

std::pair<double, double> retention_and_compression(const ModeMeasurement& m,
                                                    const BaselineMeasurement& base) {
    if (!std::isfinite(base.accuracy_base) || base.accuracy_base <= 0.0) {
        throw InvalidBaseline("baseline accuracy must be positive, got " +
                              std::to_string(base.accuracy_base));
    }
    if (!std::isfinite(base.cost_base) || base.cost_base <= 0.0) {
        throw InvalidBaseline("baseline cost must be positive, got " +
                              std::to_string(base.cost_base));
    }
    check_measurement(m);
    return {m.accuracy / base.accuracy_base, 1.0 - m.cost / base.cost_base};
}

double mode_score(double retention, double compression, Mode mode) {
    const double beta = mode == Mode::High ? 1.0 : 0.5;
    return beta * retention + (1.0 - beta) * compression;
}

double act_score(std::span<const double> mode_scores) {
    if (mode_scores.size() != 3) {
        throw ValidationError("act_score requires exactly three mode scores, got " +
                              std::to_string(mode_scores.size()));
    }
    return (mode_scores[0] + mode_scores[1] + mode_scores[2]) / 3.0;
}

double aggregate_accuracy(const std::vector<std::vector<int>>& per_problem_outcomes, int repeats) {
    if (repeats < 1) throw ValidationError("repeats must be at least 1");
    if (per_problem_outcomes.empty()) {
        throw ValidationError("aggregate_accuracy needs at least one problem");
    }
    double sum_of_means = 0.0;
    for (std::size_t p = 0; p < per_problem_outcomes.size(); ++p) {
        const auto& outcomes = per_problem_outcomes[p];
        if (static_cast<int>(outcomes.size()) != repeats) {
            throw RaggedOutcomes("problem " + std::to_string(p) + " has " +
                                 std::to_string(outcomes.size()) + " outcomes, expected " +
                                 std::to_string(repeats));
        }
        int correct = 0;
        for (int o : outcomes) {
            if (o != 0 && o != 1) {
                throw ValidationError("outcomes must be 0 or 1, got " + std::to_string(o));
            }
            correct += o;
        }
        sum_of_means += static_cast<double>(correct) / static_cast<double>(repeats);
    }
    return sum_of_means / static_cast<double>(per_problem_outcomes.size());
}

ACTReport build_report(const std::string& benchmark, std::span<const ModeMeasurement> measurements,
                       const BaselineMeasurement& baseline, AccuracyUnit unit) {
    if (measurements.size() != 3) {
        throw ValidationError("build_report requires exactly three measurements, got " +
                              std::to_string(measurements.size()));
    }
    std::array<const ModeMeasurement*, 3> by_mode{};
    for (const ModeMeasurement& m : measurements) {
        auto& slot = by_mode[static_cast<std::size_t>(m.mode)];
        if (slot != nullptr) {
            throw ValidationError("duplicate measurement for mode " + to_string(m.mode));
        }
        check_measurement(m);
        slot = &m;
    }

    // Unit consistency. The ratios are scale-invariant, so this is purely a
    // sanity gate: a 0.93 next to a 95.0 means someone mixed conventions.
    double max_acc = baseline.accuracy_base;
    double min_acc = baseline.accuracy_base;
    for (const auto* m : by_mode) {
        max_acc = std::max(max_acc, m->accuracy);
        min_acc = std::min(min_acc, m->accuracy);
    }
    AccuracyUnit effective = unit;
    if (effective == AccuracyUnit::Auto) {
        effective = max_acc > 1.0 ? AccuracyUnit::Percent : AccuracyUnit::Fraction;
        if (effective == AccuracyUnit::Percent && min_acc > 0.0 && min_acc < 1.0) {
            throw ValidationError(
                "accuracy units look mixed (values both above and below 1); "
                "pass an explicit unit");
        }
    }
    const double cap = effective == AccuracyUnit::Percent ? 100.0 : 1.0;
    for (const auto* m : by_mode) {
        if (m->accuracy > cap) {
            throw ValidationError("accuracy " + std::to_string(m->accuracy) + " exceeds " +
                                  std::to_string(cap) + " for the detected unit");
        }
    }
    if (baseline.accuracy_base > cap) {
        throw InvalidBaseline("baseline accuracy " + std::to_string(baseline.accuracy_base) +
                              " exceeds " + std::to_string(cap) + " for the detected unit");
    }

    ACTReport report;
    report.benchmark = benchmark;
    std::array<double, 3> scores{};
    for (Mode mode : kAllModes) {
        const auto m = static_cast<std::size_t>(mode);
        const auto [retention, compression] = retention_and_compression(*by_mode[m], baseline);
        const double score = mode_score(retention, compression, mode);
        report.modes[m] =
            ModeOutcome{mode, 100.0 * retention, 100.0 * compression, 100.0 * score};
        scores[m] = report.modes[m].score;
    }
    report.act = act_score(scores);
    return report;
}

std::string report_to_json(const ACTReport& report) {
    nlohmann::ordered_json j;
    j["benchmark"] = report.benchmark;
    j["scale"] = "percent";
    nlohmann::ordered_json modes;
    for (Mode mode : kAllModes) {
        const ModeOutcome& o = report.modes[static_cast<std::size_t>(mode)];
        modes[to_string(mode)] = nlohmann::ordered_json{{"retention", o.retention},
                                                        {"compression", o.compression},
                                                        {"score", o.score}};
    }
    j["modes"] = modes;
    j["act_score"] = report.act;
    return j.dump(2) + "\n";
}

void write_measurements_csv(const std::string& benchmark,
                            std::span<const ModeMeasurement> measurements, std::ostream& out) {
    out << "benchmark,mode,accuracy,cost\n";
    nlohmann::json num;
    for (const ModeMeasurement& m : measurements) {
        out << benchmark << ',' << to_string(m.mode) << ',';
        num = m.accuracy;
        out << num.dump() << ',';
        num = m.cost;
        out << num.dump() << '\n';
    }
}

}  // namespace budgetrl
