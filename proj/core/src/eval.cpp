#include "sake/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "sake/errors.hpp"

namespace sake {

EditEntry fit_edit(std::string id, EditSpec spec, const ActivationSet& source, const ActivationSet& target,
                   const FitOptions& options) {
    if (source.dim != target.dim) {
        fail(ErrorKind::DimensionMismatch, "source is " + std::to_string(source.dim) + "-dimensional, target is " +
                                               std::to_string(target.dim) + "-dimensional");
    }
    const auto src = source.vectors(options.n_train);
    const auto tgt = target.vectors(options.n_train);
    for (const auto* set : {&src, &tgt}) {
        if (set->size() < 2) {
            fail(ErrorKind::InsufficientSamples, "edit '" + id + "' needs at least 2 source and 2 target samples, got " +
                                                     std::to_string(set->size()));
        }
    }
    const GaussianSummary s = summarize(src, options.reg);
    const GaussianSummary t = summarize(tgt, options.reg);

    EditEntry entry;
    entry.id = std::move(id);
    entry.spec = std::move(spec);
    entry.detector.centroid = empirical_mean(source.scope_vectors(options.n_train));
    entry.detector.epsilon = options.epsilon;
    entry.detector.distance = options.distance;
    entry.detector.representation = options.representation;
    entry.map = fit_map(options.kind, s, t);
    entry.created_at = options.created_at;
    return entry;
}

Registry build_registry(const Benchmark& benchmark, const FitOptions& options) {
    Registry registry(benchmark.activation_dim, benchmark.scope_dim);
    for (const auto& e : benchmark.edits) {
        registry.add(fit_edit(e.id, e.spec, e.train_source, e.train_target, options));
    }
    return registry;
}

Registry with_epsilon(const Registry& registry, double epsilon) {
    Registry out(registry.activation_dim(), registry.scope_dim());
    for (const auto& e : registry.entries()) {
        EditEntry copy = *e;
        copy.detector.epsilon = epsilon;
        out.add(std::move(copy));
    }
    return out;
}

namespace {

std::optional<std::uint64_t> benchmark_seed(const Benchmark& benchmark) {
    if (benchmark.backend.kind == BackendConfig::Kind::Toy) return benchmark.backend.seed;
    return std::nullopt;
}

std::size_t available_train(const Benchmark& benchmark) {
    std::size_t n = 0;
    for (const auto& e : benchmark.edits) n = std::max(n, e.train_source.records.size());
    return n;
}

}  // namespace

ReportConfig report_config(const FitOptions& options, const Benchmark& benchmark) {
    ReportConfig c;
    c.epsilon = options.epsilon;
    c.reg = options.reg;
    c.n_train = options.n_train ? std::min(*options.n_train, available_train(benchmark)) : available_train(benchmark);
    c.map_kind = std::string(map_kind_name(options.kind));
    c.seed = benchmark_seed(benchmark);
    c.extra.emplace_back("distance", "\"" + std::string(distance_kind_name(options.distance)) + "\"");
    return c;
}

ReportConfig report_config(const Registry& registry, const Benchmark& benchmark) {
    ReportConfig c;
    c.seed = benchmark_seed(benchmark);
    std::set<double> eps;
    std::set<std::string_view> kinds;
    for (const auto& e : registry.entries()) {
        eps.insert(e->detector.epsilon);
        kinds.insert(map_kind_name(e->map.kind()));
    }
    if (eps.size() == 1) c.epsilon = *eps.begin();
    c.map_kind = kinds.size() == 1 ? std::string(*kinds.begin()) : (kinds.empty() ? "none" : "mixed");
    c.extra.emplace_back("edits", std::to_string(registry.size()));
    return c;
}

MetricReport evaluate(const LanguageModelBackend& backend, const Registry& registry,
                      std::span<const PromptRecord> records, ReportConfig config) {
    MetricReport report;
    report.config = std::move(config);
    for (const auto& rec : records) {
        const SteeringOutcome out = edited_forward(backend, registry, rec);
        bool pass = false;
        if (is_in_scope(rec.category)) {
            pass = out.output_label == rec.expected_post_edit;
        } else {
            pass = !out.steered && out.output_label == rec.expected_pre_edit;
        }
        CategoryCount& c = report.count(rec.category);
        ++c.evaluated;
        if (pass) ++c.passed;
        if (out.steered) ++report.steered;
        ++report.total;
    }
    return report;
}

std::vector<SweepPoint> sweep_epsilon(const LanguageModelBackend& backend, const Benchmark& benchmark,
                                      std::span<const double> grid, const FitOptions& options) {
    if (grid.empty()) fail(ErrorKind::InvalidArgument, "epsilon grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            fail(ErrorKind::InvalidArgument, "epsilon grid must be positive and strictly increasing");
        }
    }
    const Registry fitted = build_registry(benchmark, options);
    const auto records = benchmark.eval_records();
    std::vector<SweepPoint> table;
    for (double eps : grid) {
        FitOptions point = options;
        point.epsilon = eps;
        table.push_back(SweepPoint{eps, evaluate(backend, with_epsilon(fitted, eps), records,
                                                 report_config(point, benchmark))});
    }
    return table;
}

std::vector<SweepPoint> sweep_num_prompts(const LanguageModelBackend& backend, const Benchmark& benchmark,
                                          std::span<const std::size_t> sizes, const FitOptions& options) {
    if (sizes.empty()) fail(ErrorKind::InvalidArgument, "size list is empty");
    const std::size_t available = available_train(benchmark);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 2) fail(ErrorKind::InsufficientSamples, "every size must be at least 2");
        if (i > 0 && !(sizes[i] > sizes[i - 1])) fail(ErrorKind::InvalidArgument, "sizes must be increasing");
        if (sizes[i] > available) {
            fail(ErrorKind::InsufficientSamples, "size " + std::to_string(sizes[i]) + " exceeds the " +
                                                     std::to_string(available) + " available training samples");
        }
    }
    const auto records = benchmark.eval_records();
    std::vector<SweepPoint> table;
    for (std::size_t n : sizes) {
        FitOptions point = options;
        point.n_train = n;
        table.push_back(SweepPoint{static_cast<double>(n),
                                   evaluate(backend, build_registry(benchmark, point), records,
                                            report_config(point, benchmark))});
    }
    return table;
}

MapComparison compare_map_kinds(const LanguageModelBackend& backend, const Benchmark& benchmark,
                                const FitOptions& options) {
    const auto records = benchmark.eval_records();
    FitOptions ot = options;
    ot.kind = MapKind::OptimalTransport;
    FitOptions uniform = options;
    uniform.kind = MapKind::UniformShift;
    return MapComparison{
        evaluate(backend, build_registry(benchmark, ot), records, report_config(ot, benchmark)),
        evaluate(backend, build_registry(benchmark, uniform), records, report_config(uniform, benchmark))};
}

namespace {

template <typename T>
T parse_number(std::string_view text, const char* what) {
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        fail(ErrorKind::InvalidArgument, std::string("cannot parse ") + what + " '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
    const auto c1 = spec.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : spec.find(':', c1 + 1);
    if (c2 == std::string_view::npos) fail(ErrorKind::InvalidArgument, "grid must look like a:b:n");
    const double lo = parse_number<double>(spec.substr(0, c1), "grid start");
    const double hi = parse_number<double>(spec.substr(c1 + 1, c2 - c1 - 1), "grid end");
    const auto n = parse_number<std::size_t>(spec.substr(c2 + 1), "grid count");
    if (n < 2 || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
        fail(ErrorKind::InvalidArgument, "grid needs a < b and n >= 2");
    }
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return out;
}

std::vector<std::size_t> parse_sizes(std::string_view spec) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        auto end = spec.find(',', pos);
        if (end == std::string_view::npos) end = spec.size();
        out.push_back(parse_number<std::size_t>(spec.substr(pos, end - pos), "size"));
        pos = end + 1;
    }
    return out;
}

}  // namespace sake
