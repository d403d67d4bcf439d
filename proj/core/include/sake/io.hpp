#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sake/linalg.hpp"
#include "sake/records.hpp"
#include "sake/registry.hpp"
#include "sake/report.hpp"

namespace sake {

// ---- activation sets (line-delimited JSON) -------------------------------
//
// Line 1: {"format":"sake-activations","version":1,"dim":D,"scope_dim":S}
// Then one record per line:
//   {"id":..,"role":"source|target|eval","category":..,"vector":[..],
//    "scope_vector":[..]?,"expected_pre_edit":..?,"expected_post_edit":..?}
// Unknown header and record fields are carried through unchanged.

std::string format_activation_set(const ActivationSet& set);
ActivationSet parse_activation_set(std::string_view text);

ActivationSet read_activation_set(const std::filesystem::path& path);
void write_activation_set(const ActivationSet& set, const std::filesystem::path& path);

// ---- benchmark manifests -------------------------------------------------

struct GroundTruth {
    Matrix M;
    Vector c;
};

struct BackendConfig {
    enum class Kind { Toy, External };
    Kind kind = Kind::External;
    std::uint64_t seed = 0;
    Index dim = 0;
    std::vector<std::string> vocab;
};

struct BenchmarkEdit {
    std::string id;
    EditSpec spec;
    std::string train_source_file;  // relative to the manifest directory
    std::string train_target_file;
    std::string eval_file;
    std::optional<GroundTruth> ground_truth;
    std::vector<ExtraField> extra;

    ActivationSet train_source;
    ActivationSet train_target;
    ActivationSet eval;
};

struct Benchmark {
    Index activation_dim = 0;
    Index scope_dim = 0;
    std::vector<BenchmarkEdit> edits;
    BackendConfig backend;
    std::vector<ExtraField> extra;

    // Eval records of every edit, in manifest order.
    std::vector<PromptRecord> eval_records() const;
};

std::string format_manifest(const Benchmark& benchmark);

// Parses the manifest only; the activation sets of each edit stay empty.
Benchmark parse_manifest(std::string_view text);

// Writes manifest.json plus every referenced activation file into `dir`.
void write_benchmark(const Benchmark& benchmark, const std::filesystem::path& dir);

// Loads a manifest and its activation files, validating headers and dims.
Benchmark read_benchmark(const std::filesystem::path& manifest_path);

// ---- reports and plot data ----------------------------------------------

std::string format_report(const MetricReport& report);
MetricReport parse_report(std::string_view text);

// Header "sweep_var,accuracy,generality,specificity,ci,cii,sa,rs", then one
// row per point; absent metrics are empty fields.
std::string format_plot_data(std::span<const SweepPoint> table);
void emit_plot_data(std::span<const SweepPoint> table, const std::filesystem::path& path);

// Shortest decimal that reads back to the same double.
std::string format_double(double value);

// ---- files ---------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);

// Writes through a temporary file and a rename so readers never see a partial file.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace sake
