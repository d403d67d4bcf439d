#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sake/records.hpp"

namespace sake {

enum class Metric { Accuracy, Generality, Specificity, CI, CII, SA, RS };

inline constexpr std::array<Metric, 7> kAllMetrics = {Metric::Accuracy, Metric::Generality, Metric::Specificity,
                                                      Metric::CI,       Metric::CII,        Metric::SA,
                                                      Metric::RS};

std::string_view metric_name(Metric m) noexcept;  // "accuracy", "generality", ...
Category metric_category(Metric m) noexcept;      // the category feeding the metric

struct CategoryCount {
    std::size_t evaluated = 0;
    std::size_t passed = 0;

    friend bool operator==(const CategoryCount&, const CategoryCount&) = default;
};

// Parameters echoed into every report; absent values serialize as null.
struct ReportConfig {
    std::optional<double> epsilon;
    std::optional<double> reg;
    std::optional<std::size_t> n_train;
    std::string map_kind;
    std::optional<std::uint64_t> seed;
    std::vector<ExtraField> extra;

    friend bool operator==(const ReportConfig&, const ReportConfig&) = default;
};

struct MetricReport {
    ReportConfig config;
    std::array<CategoryCount, 7> counts{};  // indexed by Category
    std::size_t steered = 0;                // records routed through some edit's map
    std::size_t total = 0;

    CategoryCount& count(Category c) { return counts[static_cast<std::size_t>(c)]; }
    const CategoryCount& count(Category c) const { return counts[static_cast<std::size_t>(c)]; }

    // 100 * passed / evaluated; nullopt when the category was empty.
    std::optional<double> score(Metric m) const;

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

struct SweepPoint {
    double value = 0.0;
    MetricReport report;
};

}  // namespace sake
