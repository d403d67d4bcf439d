#include "sake/toy_lm.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>

#include "sake/errors.hpp"

namespace sake {

// ---- model ---------------------------------------------------------------

ToyModel::ToyModel(std::uint64_t seed, std::vector<std::string> vocab, Matrix unembedding)
    : seed_(seed), vocab_(std::move(vocab)), unembedding_(std::move(unembedding)) {
    const Index v = unembedding_.rows();
    const Index d = unembedding_.cols();
    if (static_cast<std::size_t>(v) != vocab_.size()) {
        fail(ErrorKind::DimensionMismatch, "unembedding has " + std::to_string(v) + " rows for " +
                                               std::to_string(vocab_.size()) + " labels");
    }
    Eigen::HouseholderQR<Matrix> qr(unembedding_.transpose());
    const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    null_basis_ = q.rightCols(d - v);
}

std::size_t ToyModel::label_index(std::string_view label) const {
    const auto it = std::find(vocab_.begin(), vocab_.end(), label);
    if (it == vocab_.end()) fail(ErrorKind::UnknownObject, "'" + std::string(label) + "' is not in the vocabulary");
    return static_cast<std::size_t>(it - vocab_.begin());
}

Vector ToyModel::scores(const Vector& h) const {
    if (h.size() != dim()) {
        fail(ErrorKind::DimensionMismatch, "activation has dimension " + std::to_string(h.size()) +
                                               ", model expects " + std::to_string(dim()));
    }
    return unembedding_ * h;
}

std::size_t ToyModel::decode_index(const Vector& h) const {
    const Vector s = scores(h);
    Index best = 0;
    for (Index i = 1; i < s.size(); ++i) {
        if (s(i) > s(best)) best = i;
    }
    return static_cast<std::size_t>(best);
}

std::vector<std::string> ToyModel::ranked(const Vector& h) const {
    const Vector s = scores(h);
    std::vector<std::size_t> order(vocab_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s(static_cast<Index>(a)) > s(static_cast<Index>(b)); });
    std::vector<std::string> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(vocab_[i]);
    return out;
}

std::vector<std::size_t> ToyModel::decode_columns(const Matrix& batch) const {
    const Matrix s = unembedding_ * batch;
    std::vector<std::size_t> out(static_cast<std::size_t>(batch.cols()));
    for (Index j = 0; j < s.cols(); ++j) {
        Index best = 0;
        for (Index i = 1; i < s.rows(); ++i) {
            if (s(i, j) > s(best, j)) best = i;
        }
        out[static_cast<std::size_t>(j)] = static_cast<std::size_t>(best);
    }
    return out;
}

std::vector<std::string> default_vocab(std::size_t size) {
    std::vector<std::string> out;
    out.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "obj%02zu", i);
        out.emplace_back(buf);
    }
    return out;
}

namespace {

Vector gaussian_vector(Rng& rng, Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

Matrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    // Row-major fill so the stream order does not depend on Eigen's storage order.
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
    }
    return m;
}

// Column j holds draws j*rows .. (j+1)*rows - 1 of the stream.
Matrix gaussian_columns(Rng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    double* p = m.data();
    for (Index i = 0; i < rows * cols; ++i) p[i] = rng.normal();
    return m;
}

Matrix random_orthogonal(Rng& rng, Index d) {
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rng, d, d));
    return qr.householderQ() * Matrix::Identity(d, d);
}

}  // namespace

ToyModel build_toy_model(std::uint64_t seed, Index dim, std::vector<std::string> vocab) {
    const auto v = static_cast<Index>(vocab.size());
    if (v < 2 || v > dim) {
        fail(ErrorKind::VocabTooLarge, "vocabulary of " + std::to_string(v) + " labels needs 2 <= |V| <= dim (" +
                                           std::to_string(dim) + ")");
    }
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        for (std::size_t j = i + 1; j < vocab.size(); ++j) {
            if (vocab[i] == vocab[j]) fail(ErrorKind::InvalidArgument, "duplicate vocabulary label '" + vocab[i] + "'");
        }
    }
    Rng rng(seed);
    Matrix rows = gaussian_matrix(rng, v, dim);
    // Modified Gram-Schmidt, two passes.
    for (int pass = 0; pass < 2; ++pass) {
        for (Index i = 0; i < v; ++i) {
            for (Index j = 0; j < i; ++j) rows.row(i) -= rows.row(i).dot(rows.row(j)) * rows.row(j);
            rows.row(i) /= rows.row(i).norm();
        }
    }
    return ToyModel(seed, std::move(vocab), std::move(rows));
}

Encoding ToyBackend::encode(const PromptRecord& prompt, std::span<const std::string>) const {
    if (prompt.activation.size() != model_.dim() || prompt.scope_vec.size() != scope_dim_) {
        fail(ErrorKind::DimensionMismatch, "prompt '" + prompt.prompt_id + "' does not fit the toy backend");
    }
    return Encoding{prompt.activation, prompt.scope_vec};
}

std::unique_ptr<LanguageModelBackend> make_backend(const Benchmark& benchmark) {
    if (benchmark.backend.kind != BackendConfig::Kind::Toy) {
        fail(ErrorKind::InvalidArgument, "external benchmarks have no decoder; evaluate them with the toy backend only");
    }
    return std::make_unique<ToyBackend>(
        build_toy_model(benchmark.backend.seed, benchmark.backend.dim, benchmark.backend.vocab), benchmark.scope_dim);
}

// ---- fact clusters -------------------------------------------------------

Vector FactCluster::sample(Rng& rng) const { return mean + factor * gaussian_vector(rng, factor.cols()); }

Matrix FactCluster::sample_columns(Rng& rng, std::size_t n) const {
    const Matrix z = gaussian_columns(rng, factor.cols(), static_cast<Index>(n));
    Matrix out = factor * z;
    out.colwise() += mean;
    return out;
}

double decode_rate(const ToyModel& model, const Vector& mean, const Matrix& factor, std::size_t label,
                   std::size_t draws, Rng& rng) {
    if (draws == 0) return 1.0;
    const Matrix z = gaussian_columns(rng, factor.cols(), static_cast<Index>(draws));
    Matrix x = factor * z;
    x.colwise() += mean;
    const auto decoded = model.decode_columns(x);
    const auto hits = std::count(decoded.begin(), decoded.end(), label);
    return static_cast<double>(hits) / static_cast<double>(draws);
}

FactCluster make_fact_cluster(const ToyModel& model, std::string_view object_label, double spread, double anisotropy,
                              std::uint64_t seed, Category category, const FactClusterOptions& options) {
    const std::size_t label = model.label_index(object_label);
    if (!(spread > 0.0)) fail(ErrorKind::InvalidArgument, "spread must be positive");
    if (!(anisotropy >= 1.0)) fail(ErrorKind::InvalidArgument, "anisotropy must be >= 1");
    const Index d = model.dim();
    Rng rng(seed);
    const Vector row = model.unembedding().row(static_cast<Index>(label)).transpose();

    Vector off = gaussian_vector(rng, d);
    off -= off.dot(row) * row;
    off *= options.off_row_fraction * options.strength / off.norm();

    FactCluster c;
    c.object_label = std::string(object_label);
    c.category = category;
    c.mean = options.strength * row + off;
    if (model.decode_index(c.mean) != label) {
        fail(ErrorKind::DecodabilityFailure, "cluster mean does not decode to '" + c.object_label + "'");
    }
    if (anisotropy == 1.0) {
        c.factor = spread * Matrix::Identity(d, d);
        c.cov = SymMatrix(Matrix::Identity(d, d) * (spread * spread));
    } else {
        const Matrix q = random_orthogonal(rng, d);
        Vector lambda(d);
        for (Index i = 0; i < d; ++i) lambda(i) = std::pow(anisotropy, rng.uniform());
        lambda /= lambda.minCoeff();
        lambda = lambda.cwiseMin(anisotropy);
        c.factor = q * (spread * lambda.cwiseSqrt()).asDiagonal();
        c.cov = SymMatrix(c.factor * c.factor.transpose());
    }
    Rng mc = rng.split();
    const double rate = decode_rate(model, c.mean, c.factor, label, options.mc_draws, mc);
    if (rate < options.min_decode_rate) {
        fail(ErrorKind::DecodabilityFailure, "only " + std::to_string(100.0 * rate) + "% of draws decode to '" +
                                                 c.object_label + "'; spread too large");
    }
    return c;
}

// ---- benchmark generation -----------------------------------------------

void ToyConfig::validate() const {
    if (n_edits == 0) fail(ErrorKind::InvalidArgument, "n_edits must be positive");
    if (vocab_size < 6) fail(ErrorKind::InvalidArgument, "toy benchmarks need at least 6 vocabulary labels");
    if (static_cast<Index>(vocab_size) > dim) fail(ErrorKind::VocabTooLarge, "vocab_size must not exceed dim");
    if (n_train < 2) fail(ErrorKind::InsufficientSamples, "n_train must be at least 2");
    if (!(drift_strength >= 0.0) || !std::isfinite(drift_strength)) {
        fail(ErrorKind::InvalidArgument, "drift_strength must be finite and >= 0");
    }
    if (scope_dim <= 0 || !(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "scope_dim and epsilon must be positive");
}

namespace {

constexpr std::uint64_t kStreamSalt = 0x9E3779B97F4A7C15ULL;

Vector random_direction(Rng& rng, Index n) {
    Vector v = gaussian_vector(rng, n);
    return v / v.norm();
}

// Random unit vector in the span of `basis`' columns (zero if the span is empty).
Vector random_in_span(Rng& rng, const Matrix& basis) {
    if (basis.cols() == 0) return Vector::Zero(basis.rows());
    return basis * random_direction(rng, basis.cols());
}

// Anchors at `radius` from the origin, each at least `min_sep` from every point in `avoid` and from each other.
std::vector<Vector> place_anchors(Rng& rng, std::size_t count, Index dim, double radius, double min_sep,
                                  const std::vector<Vector>& avoid) {
    std::vector<Vector> placed;
    for (std::size_t k = 0; k < count; ++k) {
        for (int attempt = 0;; ++attempt) {
            if (attempt > 10000) {
                fail(ErrorKind::GenerationRetryExhausted, "cannot place separated scope anchors; raise scope_dim");
            }
            const Vector a = radius * random_direction(rng, dim);
            auto too_close = [&](const Vector& b) { return (a - b).norm() < min_sep; };
            if (std::any_of(avoid.begin(), avoid.end(), too_close)) continue;
            if (std::any_of(placed.begin(), placed.end(), too_close)) continue;
            placed.push_back(a);
            break;
        }
    }
    return placed;
}

double decode_margin(const ToyModel& model, const Vector& h) {
    Vector s = model.scores(h);
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    return s(0) - s(1);
}

FactCluster image_of(const FactCluster& src, const SymMatrix& drift, const Vector& shift, const ToyModel& model) {
    FactCluster t;
    t.category = src.category;
    t.mean = drift.matrix() * src.mean + shift;
    t.factor = drift.matrix() * src.factor;
    t.cov = SymMatrix(t.factor * t.factor.transpose());
    t.object_label = model.decode(t.mean);
    return t;
}

struct Layout {
    std::size_t paraphrase = 0;
    std::size_t implication = 0;  // each of sa, ci, cii
};

Layout train_layout(std::size_t n_train) {
    Layout l;
    l.implication = n_train * 2 / 15;
    l.paraphrase = n_train - 3 * l.implication;
    return l;
}

std::size_t eval_count(std::size_t train) { return std::max<std::size_t>(1, (train + 3) / 4); }

std::string padded(std::size_t i, int width) {
    std::string s = std::to_string(i);
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

}  // namespace

ToyBenchmark generate_benchmark(const ToyConfig& config) {
    config.validate();
    ToyModel model = build_toy_model(config.seed, config.dim, default_vocab(config.vocab_size));
    Rng master(config.seed ^ kStreamSalt);
    const Index d = config.dim;
    const Index s = config.scope_dim;
    const Matrix& null = model.null_basis();
    const Matrix& rows = model.unembedding();

    const double separation = 4.0 * config.epsilon;
    Rng anchor_rng = master.split();
    const auto edit_anchors = place_anchors(anchor_rng, config.n_edits, s, config.scope_radius, separation, {});
    const auto unrelated_anchors =
        place_anchors(anchor_rng, config.n_edits, s, config.scope_radius, separation, edit_anchors);

    FactClusterOptions base;
    base.strength = config.object_strength;
    FactClusterOptions strong = base;
    strong.strength = config.object_strength * config.implication_strength;

    const Layout layout = train_layout(config.n_train);

    ToyBenchmark out{config, model, Benchmark{}, {}};
    Benchmark& bench = out.data;
    bench.activation_dim = d;
    bench.scope_dim = s;
    bench.backend = BackendConfig{BackendConfig::Kind::Toy, config.seed, d, model.vocab()};
    bench.extra.emplace_back("config",
                             "{\"n_edits\":" + std::to_string(config.n_edits) + ",\"dim\":" + std::to_string(d) +
                                 ",\"vocab_size\":" + std::to_string(config.vocab_size) +
                                 ",\"n_train\":" + std::to_string(config.n_train) +
                                 ",\"drift_strength\":" + format_double(config.drift_strength) +
                                 ",\"seed\":" + std::to_string(config.seed) +
                                 ",\"epsilon\":" + format_double(config.epsilon) + "}");
    bench.extra.emplace_back("scope_representation", "\"external\"");

    for (std::size_t e = 0; e < config.n_edits; ++e) {
        Rng rng = master.split();
        const std::string edit_id = "edit-" + padded(e, 2);

        ToyEdit edit;
        std::size_t o = 0, o_new = 0, a = 0, b = 0, r = 0, u = 0;
        bool ok = false;
        // Clusters are expensive (Monte Carlo check each); redraw only the drift first.
        const std::size_t drift_tries = config.drift_strength == 0.0 ? 1 : 8;
        for (std::size_t attempt = 0; attempt < config.max_attempts && !ok; ++attempt) {
            std::vector<std::size_t> labels(config.vocab_size);
            std::iota(labels.begin(), labels.end(), std::size_t{0});
            for (std::size_t i = 0; i < 5; ++i) std::swap(labels[i], labels[i + rng.below(labels.size() - i)]);
            o = labels[0];
            o_new = labels[1];
            a = labels[2];
            b = labels[3];
            r = labels[4];
            u = rng.below(config.vocab_size);

            const Vector ctx_p = config.context_norm * random_in_span(rng, null);
            const Vector ctx_sa = ctx_p + config.near_context * config.context_norm * random_in_span(rng, null);
            const Vector ctx_ci = config.context_norm * random_in_span(rng, null);
            const Vector ctx_cii = config.context_norm * random_in_span(rng, null);
            const Vector ctx_rs = ctx_p + config.near_context * config.context_norm * random_in_span(rng, null);
            const Vector ctx_u = config.context_norm * random_in_span(rng, null);

            auto cluster = [&](std::size_t label, const Vector& ctx, Category cat, const FactClusterOptions& opt) {
                FactCluster c = make_fact_cluster(model, model.vocab()[label], config.spread, config.anisotropy,
                                                  rng.next(), cat, opt);
                c.mean += ctx;
                return c;
            };
            edit.source_clusters = {cluster(o, ctx_p, Category::Paraphrase, base),
                                    cluster(o, ctx_sa, Category::SA, base),
                                    cluster(a, ctx_ci, Category::CI, strong),
                                    cluster(b, ctx_cii, Category::CII, strong),
                                    cluster(r, ctx_rs, Category::RS, base),
                                    cluster(u, ctx_u, Category::Unrelated, base)};
            const FactCluster& para = edit.source_clusters[0];
            const Vector object_shift =
                config.object_strength *
                (rows.row(static_cast<Index>(o_new)) - rows.row(static_cast<Index>(o))).transpose();

            for (std::size_t k = 0; k < drift_tries && !ok; ++k) {
                if (config.drift_strength == 0.0) {
                    edit.drift = SymMatrix::identity(d);
                } else {
                    const Matrix q = random_orthogonal(rng, d);
                    Vector lambda(d);
                    for (Index i = 0; i < d; ++i) lambda(i) = rng.uniform();
                    lambda /= lambda.maxCoeff();
                    edit.drift = SymMatrix(Matrix::Identity(d, d) +
                                           config.drift_strength * (q * lambda.asDiagonal() * q.transpose()));
                }
                edit.shift = para.mean + object_shift - edit.drift.matrix() * para.mean;

                edit.target_clusters.clear();
                for (std::size_t j = 0; j < 4; ++j) {
                    edit.target_clusters.push_back(image_of(edit.source_clusters[j], edit.drift, edit.shift, model));
                }
                ok = edit.target_clusters[0].object_label == model.vocab()[o_new];
                for (const auto& t : edit.target_clusters) {
                    ok = ok && decode_margin(model, t.mean) >= config.min_image_margin;
                }
                if (ok) {
                    Rng mc = rng.split();
                    const auto& t = edit.target_clusters[0];
                    ok = decode_rate(model, t.mean, t.factor, o_new, 10000, mc) >= 0.99;
                }
            }
        }
        if (!ok) {
            fail(ErrorKind::GenerationRetryExhausted,
                 edit_id + ": no drift with decodable target clusters after " + std::to_string(config.max_attempts) +
                     " attempts");
        }

        // Scope channel.
        edit.scope_anchor = edit_anchors[e];
        const Vector alias_dir = config.alias_offset * random_direction(rng, s);
        const Vector ci_dir = config.implication_offset * random_direction(rng, s);
        const Vector cii_dir = config.implication_offset * random_direction(rng, s);
        const Vector rs_dir = config.relation_offset * random_direction(rng, s);
        auto scope_sample = [&](const Vector& center) -> Vector {
            return center + config.scope_noise * gaussian_vector(rng, s);
        };
        auto scope_center = [&](Category c) -> Vector {
            switch (c) {
                case Category::EditPrompt:
                case Category::Paraphrase: return edit.scope_anchor;
                case Category::SA: return edit.scope_anchor + alias_dir;
                case Category::CI: return edit.scope_anchor + ci_dir;
                case Category::CII: return edit.scope_anchor + cii_dir;
                case Category::RS: return edit.scope_anchor + rs_dir;
                case Category::Unrelated: return unrelated_anchors[e];
            }
            return edit.scope_anchor;
        };
        auto source_cluster = [&](Category c) -> const FactCluster& {
            switch (c) {
                case Category::EditPrompt:
                case Category::Paraphrase: return edit.source_clusters[0];
                case Category::SA: return edit.source_clusters[1];
                case Category::CI: return edit.source_clusters[2];
                case Category::CII: return edit.source_clusters[3];
                case Category::RS: return edit.source_clusters[4];
                case Category::Unrelated: return edit.source_clusters[5];
            }
            return edit.source_clusters[0];
        };

        // Training pool: paraphrases plus implications, shuffled so any prefix mixes categories.
        std::vector<Category> pool;
        pool.insert(pool.end(), layout.paraphrase, Category::Paraphrase);
        for (Category c : {Category::SA, Category::CI, Category::CII}) pool.insert(pool.end(), layout.implication, c);
        for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);

        BenchmarkEdit be;
        be.id = edit_id;
        be.spec = EditSpec{"subject_" + padded(e, 2), "relation_" + padded(e, 2), model.vocab()[o],
                           model.vocab()[o_new]};
        be.train_source_file = edit_id + ".source.jsonl";
        be.train_target_file = edit_id + ".target.jsonl";
        be.eval_file = edit_id + ".eval.jsonl";
        be.ground_truth = GroundTruth{edit.drift.matrix(), edit.shift};

        const std::string edit_header =
            "{\"id\":\"" + be.id + "\",\"subject\":\"" + be.spec.subject + "\",\"relation\":\"" + be.spec.relation +
            "\",\"old_object\":\"" + be.spec.old_object + "\",\"new_object\":\"" + be.spec.new_object + "\"}";
        for (ActivationSet* set : {&be.train_source, &be.train_target, &be.eval}) {
            set->dim = d;
            set->scope_dim = s;
            set->header_extra.emplace_back("edit", edit_header);
        }

        for (std::size_t i = 0; i < pool.size(); ++i) {
            const Vector x = source_cluster(pool[i]).sample(rng);
            const Vector scope = scope_sample(scope_center(pool[i]));
            const Vector y = edit.drift.matrix() * x + edit.shift;
            be.train_source.records.push_back(
                ActivationRecord{edit_id + "/source/" + padded(i, 3), Role::Source, pool[i], x, scope, {}, {}, {}});
            be.train_target.records.push_back(
                ActivationRecord{edit_id + "/target/" + padded(i, 3), Role::Target, pool[i], y, scope, {}, {}, {}});
        }

        const std::vector<std::pair<Category, std::size_t>> eval_plan = {
            {Category::EditPrompt, 1},
            {Category::Paraphrase, eval_count(layout.paraphrase)},
            {Category::SA, eval_count(layout.implication)},
            {Category::CI, eval_count(layout.implication)},
            {Category::CII, eval_count(layout.implication)},
            {Category::RS, config.eval_rs},
            {Category::Unrelated, config.eval_unrelated}};
        std::size_t counter = 0;
        for (const auto& [cat, count] : eval_plan) {
            for (std::size_t i = 0; i < count; ++i) {
                const Vector x = source_cluster(cat).sample(rng);
                const Vector scope = scope_sample(scope_center(cat));
                const std::string pre = model.decode(x);
                const std::string post =
                    is_in_scope(cat) ? model.decode(Vector(edit.drift.matrix() * x + edit.shift)) : pre;
                be.eval.records.push_back(ActivationRecord{edit_id + "/eval/" + padded(counter++, 3), Role::Eval,
                                                           cat, x, scope, pre, post, {}});
            }
        }

        bench.edits.push_back(std::move(be));
        out.edits.push_back(std::move(edit));
    }
    return out;
}

}  // namespace sake
