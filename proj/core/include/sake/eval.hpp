#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sake/io.hpp"
#include "sake/ot_map.hpp"
#include "sake/registry.hpp"
#include "sake/report.hpp"
#include "sake/steering.hpp"

namespace sake {

struct FitOptions {
    MapKind kind = MapKind::OptimalTransport;
    double reg = kDefaultRegularization;
    double epsilon = kDefaultEpsilon;
    DistanceKind distance = DistanceKind::Euclidean;
    ScopeRepresentation representation = ScopeRepresentation::ExternalEmbedding;
    std::optional<std::size_t> n_train;  // use only the first n records of each role
    std::string created_at = std::string(kEpochTimestamp);
};

// Fits one edit from its source and target activations. The scope centroid
// is the mean of the source scope vectors.
EditEntry fit_edit(std::string id, EditSpec spec, const ActivationSet& source, const ActivationSet& target,
                   const FitOptions& options);

Registry build_registry(const Benchmark& benchmark, const FitOptions& options);

// Same maps and centroids, every detector's radius replaced.
Registry with_epsilon(const Registry& registry, double epsilon);

// Config echo for a report produced from `options` on `benchmark`.
ReportConfig report_config(const FitOptions& options, const Benchmark& benchmark);

// Config echo for an arbitrary registry: fields shared by every entry, null otherwise.
ReportConfig report_config(const Registry& registry, const Benchmark& benchmark);

// Edit prompts, paraphrases and implications pass when the edited output is
// the expected post-edit label. RS and unrelated prompts pass only when they
// are left unsteered and keep their pre-edit label.
MetricReport evaluate(const LanguageModelBackend& backend, const Registry& registry,
                      std::span<const PromptRecord> records, ReportConfig config = {});

std::vector<SweepPoint> sweep_epsilon(const LanguageModelBackend& backend, const Benchmark& benchmark,
                                      std::span<const double> grid, const FitOptions& options);

std::vector<SweepPoint> sweep_num_prompts(const LanguageModelBackend& backend, const Benchmark& benchmark,
                                          std::span<const std::size_t> sizes, const FitOptions& options);

struct MapComparison {
    MetricReport optimal_transport;
    MetricReport uniform_shift;
};

// Two evaluations that differ only in the map kind; scope detectors are shared.
MapComparison compare_map_kinds(const LanguageModelBackend& backend, const Benchmark& benchmark,
                                const FitOptions& options);

// "a:b:n" -> n evenly spaced points from a to b inclusive.
std::vector<double> parse_grid(std::string_view spec);

// "10,25,50" -> {10, 25, 50}
std::vector<std::size_t> parse_sizes(std::string_view spec);

}  // namespace sake
