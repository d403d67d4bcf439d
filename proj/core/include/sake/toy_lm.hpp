#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sake/io.hpp"
#include "sake/linalg.hpp"
#include "sake/records.hpp"
#include "sake/rng.hpp"
#include "sake/steering.hpp"

namespace sake {

// Synthetic model whose unembedding rows are orthonormal, so an activation
// decodes to object o whenever its projection on row o dominates.
class ToyModel {
public:
    ToyModel(std::uint64_t seed, std::vector<std::string> vocab, Matrix unembedding);

    std::uint64_t seed() const noexcept { return seed_; }
    Index dim() const noexcept { return unembedding_.cols(); }
    const std::vector<std::string>& vocab() const noexcept { return vocab_; }
    const Matrix& unembedding() const noexcept { return unembedding_; }  // |V| x d

    // Orthonormal basis (d x (d - |V|)) of the directions no label reads.
    const Matrix& null_basis() const noexcept { return null_basis_; }

    std::size_t label_index(std::string_view label) const;  // UnknownObject
    Vector scores(const Vector& h) const;
    std::size_t decode_index(const Vector& h) const;  // ties -> lowest index
    const std::string& decode(const Vector& h) const { return vocab_[decode_index(h)]; }
    std::vector<std::string> ranked(const Vector& h) const;

    // Column-wise decode of a d x n batch.
    std::vector<std::size_t> decode_columns(const Matrix& batch) const;

private:
    std::uint64_t seed_;
    std::vector<std::string> vocab_;
    Matrix unembedding_;
    Matrix null_basis_;
};

std::vector<std::string> default_vocab(std::size_t size);  // obj00, obj01, ...

// Gram-Schmidt over seeded Gaussian rows. Throws VocabTooLarge unless 2 <= |vocab| <= dim.
ToyModel build_toy_model(std::uint64_t seed, Index dim, std::vector<std::string> vocab);

class ToyBackend final : public LanguageModelBackend {
public:
    ToyBackend(ToyModel model, Index scope_dim) : model_(std::move(model)), scope_dim_(scope_dim) {}

    Index activation_dim() const override { return model_.dim(); }
    Index scope_dim() const override { return scope_dim_; }
    Encoding encode(const PromptRecord& prompt, std::span<const std::string> generated) const override;
    std::vector<std::string> decode(const Vector& activation) const override { return model_.ranked(activation); }

    const ToyModel& model() const noexcept { return model_; }

private:
    ToyModel model_;
    Index scope_dim_;
};

// Decoding backend described by a benchmark manifest. External benchmarks
// carry no unembedding, so they cannot be decoded here (InvalidArgument).
std::unique_ptr<LanguageModelBackend> make_backend(const Benchmark& benchmark);

// Gaussian cloud of activations that decode to one object.
struct FactCluster {
    std::string object_label;
    Vector mean;
    SymMatrix cov;
    Category category = Category::Paraphrase;
    Matrix factor;  // cov = factor * factor^T

    Vector sample(Rng& rng) const;
    Matrix sample_columns(Rng& rng, std::size_t n) const;  // d x n
};

struct FactClusterOptions {
    double strength = 4.0;          // projection of the mean on the object's row
    double off_row_fraction = 0.05; // norm of the off-row part of the mean, relative to strength
    std::size_t mc_draws = 10000;
    double min_decode_rate = 0.99;
};

// Mean = strength * row_o plus a small seeded off-row component; covariance =
// spread^2 * Q diag(lambda) Q^T with lambda in [1, anisotropy]. Verifies by
// Monte Carlo that the required share of draws decodes to the object and
// throws DecodabilityFailure otherwise.
FactCluster make_fact_cluster(const ToyModel& model, std::string_view object_label, double spread, double anisotropy,
                              std::uint64_t seed, Category category = Category::Paraphrase,
                              const FactClusterOptions& options = {});

// Share of `draws` samples of x = mean + factor z that decode to `label`.
double decode_rate(const ToyModel& model, const Vector& mean, const Matrix& factor, std::size_t label,
                   std::size_t draws, Rng& rng);

struct ToyConfig {
    std::size_t n_edits = 20;
    Index dim = 64;
    std::size_t vocab_size = 32;
    std::size_t n_train = 100;
    double drift_strength = 0.5;
    std::uint64_t seed = 0;

    // Geometry. The defaults are the values the regression fixtures were frozen with.
    Index scope_dim = 32;
    double epsilon = 6.75;          // scope radius the benchmark is laid out for
    double object_strength = 4.0;
    double implication_strength = 1.5;  // CI/CII object strength, relative
    double spread = 0.3;
    double anisotropy = 4.0;
    double context_norm = 200.0;    // null-space prompt-context offset per cluster
    double near_context = 0.1;      // SA/RS context offset from the paraphrase context, relative
    double scope_radius = 30.0;
    double scope_noise = 0.7;       // per coordinate
    double alias_offset = 2.0;
    double implication_offset = 3.0;
    double relation_offset = 14.0;  // RS distance from the edit anchor
    double min_image_margin = 1.0;  // decode margin of every in-scope target cluster mean
    std::size_t eval_rs = 5;
    std::size_t eval_unrelated = 5;
    std::size_t max_attempts = 64;

    void validate() const;
};

struct ToyEdit {
    std::vector<FactCluster> source_clusters;  // paraphrase, sa, ci, cii, rs, unrelated
    std::vector<FactCluster> target_clusters;  // images of the in-scope source clusters
    SymMatrix drift;                           // M
    Vector shift;                              // c
    Vector scope_anchor;
};

struct ToyBenchmark {
    ToyConfig config;
    ToyModel model;
    Benchmark data;
    std::vector<ToyEdit> edits;
};

ToyBenchmark generate_benchmark(const ToyConfig& config);

}  // namespace sake
