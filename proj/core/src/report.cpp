#include "sake/report.hpp"

namespace sake {

std::string_view metric_name(Metric m) noexcept {
    switch (m) {
        case Metric::Accuracy: return "accuracy";
        case Metric::Generality: return "generality";
        case Metric::Specificity: return "specificity";
        case Metric::CI: return "ci";
        case Metric::CII: return "cii";
        case Metric::SA: return "sa";
        case Metric::RS: return "rs";
    }
    return "accuracy";
}

Category metric_category(Metric m) noexcept {
    switch (m) {
        case Metric::Accuracy: return Category::EditPrompt;
        case Metric::Generality: return Category::Paraphrase;
        case Metric::Specificity: return Category::Unrelated;
        case Metric::CI: return Category::CI;
        case Metric::CII: return Category::CII;
        case Metric::SA: return Category::SA;
        case Metric::RS: return Category::RS;
    }
    return Category::EditPrompt;
}

std::optional<double> MetricReport::score(Metric m) const {
    const CategoryCount& c = count(metric_category(m));
    if (c.evaluated == 0) return std::nullopt;
    return 100.0 * static_cast<double>(c.passed) / static_cast<double>(c.evaluated);
}

}  // namespace sake
