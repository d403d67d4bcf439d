// Acceptance suite: one line per criterion, non-zero exit if any fails.
// Every tolerance and time budget is pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sake/errors.hpp"
#include "sake/eval.hpp"
#include "sake/io.hpp"
#include "sake/ot_map.hpp"
#include "sake/registry.hpp"
#include "sake/steering.hpp"
#include "sake/toy_lm.hpp"

using namespace sake;
namespace fs = std::filesystem;

namespace {

// ---- pinned constants ----------------------------------------------------

constexpr std::uint64_t kBenchmarkSeed = 7;

constexpr int kOtPairs = 200;
constexpr double kOtCovTol = 1e-6;   // relative Frobenius
constexpr double kOtMeanTol = 1e-9;  // Euclidean
constexpr double kPsdTol = 1e-10;
constexpr double kOtBudget = 10.0;

constexpr double kExactTol = 1e-12;  // closed-form cases, relative
constexpr double kRecoveryTol = 1e-6;
constexpr double kOracleBudget = 1.0;

constexpr double kMinAccuracy = 95.0;
constexpr double kMinGenerality = 85.0;
constexpr double kMinSpecificity = 98.0;
constexpr double kMinRs = 98.0;
constexpr double kEndToEndBudget = 60.0;

constexpr double kMinGeneralityGain = 10.0;
constexpr double kZeroDriftAgreement = 1.0;
constexpr double kAblationBudget = 120.0;

constexpr double kSpecificityStepTol = 2.0;
constexpr double kMinGeneralityRise = 30.0;
constexpr double kEpsilonBudget = 120.0;
const std::vector<double> kEpsilonGrid = {0.5, 1, 2, 3, 4, 5, 6, 6.75, 8, 10, 12, 16, 20, 30, 40, 60, 80, 120};

const std::vector<std::size_t> kPromptSizes = {10, 25, 50, 100};
constexpr double kPromptDropTol = 2.0;
constexpr double kMaxSpecificitySpread = 3.0;
constexpr double kPromptBudget = 120.0;

constexpr std::size_t kMinProbes = 500;
constexpr int kOrderTrials = 5;
constexpr double kFlexBudget = 30.0;

constexpr double kRoundTripBudget = 5.0;

// ---- harness -------------------------------------------------------------

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    return buf;
}

double score(const MetricReport& r, Metric m) { return r.score(m).value_or(std::nan("")); }

struct Shared {
    std::optional<ToyBenchmark> toy;
    std::optional<Registry> registry;  // OT fit on the default benchmark
};

Shared& shared() {
    static Shared s;
    return s;
}

const ToyBenchmark& default_benchmark() {
    Shared& s = shared();
    if (!s.toy) {
        ToyConfig c;
        c.seed = kBenchmarkSeed;
        s.toy = generate_benchmark(c);
    }
    return *s.toy;
}

const Registry& default_registry() {
    Shared& s = shared();
    if (!s.registry) s.registry = build_registry(default_benchmark().data, FitOptions{});
    return *s.registry;
}

// ---- criteria ------------------------------------------------------------

Outcome ot_closed_form() {
    Rng rng(20240601);
    const Index dims[] = {2, 8, 64};
    double worst_cov = 0.0, worst_mean = 0.0, worst_eig = std::numeric_limits<double>::infinity();
    bool symmetric = true;
    for (int k = 0; k < kOtPairs; ++k) {
        const Index d = dims[k % 3];
        GaussianSummary s, t;
        s.mean = oracle::gaussian_vector(rng, d);
        t.mean = oracle::gaussian_vector(rng, d);
        s.cov = SymMatrix(oracle::random_spd(rng, d));
        t.cov = SymMatrix(oracle::random_spd(rng, d));
        const LinearMap m = fit_ot_map(s, t);
        const Matrix& a = m.linear().matrix();
        worst_cov = std::max(worst_cov, oracle::rel_frob(a * s.cov.matrix() * a, t.cov.matrix()));
        worst_mean = std::max(worst_mean, (a * s.mean + m.offset() - t.mean).norm());
        worst_eig = std::min(worst_eig, smallest_eigenvalue(m.linear()));
        symmetric = symmetric && a == a.transpose();
    }
    const bool pass = worst_cov <= kOtCovTol && worst_mean <= kOtMeanTol && symmetric && worst_eig >= -kPsdTol;
    return {pass, "pairs=" + std::to_string(kOtPairs) + " max_cov_err=" + fmt(worst_cov) +
                      " max_mean_err=" + fmt(worst_mean) + " min_eig=" + fmt(worst_eig) +
                      (symmetric ? " symmetric" : " ASYMMETRIC")};
}

Outcome analytic_oracles() {
    Rng rng(99);
    double worst_1d = 0.0, worst_diag = 0.0, worst_rec = 0.0;

    // Scalar Monge map: A = sigma_t / sigma_s.
    {
        GaussianSummary s, t;
        s.mean = Vector::Constant(1, 1.0);
        t.mean = Vector::Constant(1, 3.0);
        s.cov = SymMatrix(Matrix::Constant(1, 1, 4.0));
        t.cov = SymMatrix(Matrix::Constant(1, 1, 9.0));
        const LinearMap m = fit_ot_map(s, t);
        if (m.linear()(0, 0) != 1.5 || m.offset()(0) != 1.5) worst_1d = 1.0;
    }
    for (int k = 0; k < 50; ++k) {
        const double vs = std::exp(rng.uniform(-3, 3)), vt = std::exp(rng.uniform(-3, 3));
        GaussianSummary s, t;
        s.mean = Vector::Constant(1, rng.normal());
        t.mean = Vector::Constant(1, rng.normal());
        s.cov = SymMatrix(Matrix::Constant(1, 1, vs));
        t.cov = SymMatrix(Matrix::Constant(1, 1, vt));
        const double want = std::sqrt(vt) / std::sqrt(vs);
        worst_1d = std::max(worst_1d, std::abs(fit_ot_map(s, t).linear()(0, 0) - want) / want);
    }

    // Commuting diagonal case: A = S_t^{1/2} S_s^{-1/2}.
    for (int k = 0; k < 50; ++k) {
        const Index d = 2 + static_cast<Index>(rng.below(10));
        Vector ls(d), lt(d), want(d);
        for (Index i = 0; i < d; ++i) {
            ls(i) = std::exp(rng.uniform(-2, 2));
            lt(i) = std::exp(rng.uniform(-2, 2));
            want(i) = std::sqrt(lt(i)) / std::sqrt(ls(i));
        }
        GaussianSummary s, t;
        s.mean = oracle::gaussian_vector(rng, d);
        t.mean = oracle::gaussian_vector(rng, d);
        s.cov = SymMatrix::diagonal(ls);
        t.cov = SymMatrix::diagonal(lt);
        const Matrix expected = want.asDiagonal();
        worst_diag = std::max(worst_diag, oracle::rel_frob(fit_ot_map(s, t).linear().matrix(), expected));
    }

    // Affine recovery from exact moments.
    for (int k = 0; k < 50; ++k) {
        const Index d = 2 + static_cast<Index>(rng.below(20));
        const Matrix big_m = oracle::random_spd(rng, d, 0.3);
        const Vector c = oracle::gaussian_vector(rng, d);
        GaussianSummary s, t;
        s.mean = oracle::gaussian_vector(rng, d);
        s.cov = SymMatrix(oracle::random_spd(rng, d));
        t.mean = big_m * s.mean + c;
        t.cov = SymMatrix(big_m * s.cov.matrix() * big_m);
        const LinearMap m = fit_ot_map(s, t);
        worst_rec = std::max({worst_rec, oracle::rel_frob(m.linear().matrix(), big_m),
                              (m.offset() - c).norm() / std::max(1.0, c.norm())});
    }
    const bool pass = worst_1d <= kExactTol && worst_diag <= kExactTol && worst_rec <= kRecoveryTol;
    return {pass, "scalar_err=" + fmt(worst_1d) + " commuting_err=" + fmt(worst_diag) +
                      " recovery_err=" + fmt(worst_rec)};
}

// First user of the shared benchmark, so its time includes generation.
Outcome end_to_end() {
    const ToyBenchmark& tb = default_benchmark();
    const auto backend = make_backend(tb.data);
    const auto records = tb.data.eval_records();
    FitOptions opt;
    const MetricReport r = evaluate(*backend, default_registry(), records, report_config(opt, tb.data));
    const double acc = score(r, Metric::Accuracy), gen = score(r, Metric::Generality);
    const double spec = score(r, Metric::Specificity), rs = score(r, Metric::RS);
    const bool pass = acc >= kMinAccuracy && gen >= kMinGenerality && spec >= kMinSpecificity && rs >= kMinRs;
    return {pass, "accuracy=" + fmt(acc, 4) + " generality=" + fmt(gen, 4) + " specificity=" + fmt(spec, 4) +
                      " rs=" + fmt(rs, 4) + " ci=" + fmt(score(r, Metric::CI), 4) +
                      " cii=" + fmt(score(r, Metric::CII), 4) + " sa=" + fmt(score(r, Metric::SA), 4)};
}

Outcome ablation() {
    const ToyBenchmark& tb = default_benchmark();
    const auto backend = make_backend(tb.data);
    const MapComparison drifted = compare_map_kinds(*backend, tb.data, FitOptions{});
    const double gain =
        score(drifted.optimal_transport, Metric::Generality) - score(drifted.uniform_shift, Metric::Generality);

    ToyConfig flat;
    flat.seed = kBenchmarkSeed;
    flat.drift_strength = 0.0;
    const ToyBenchmark still = generate_benchmark(flat);
    const auto still_backend = make_backend(still.data);
    const MapComparison same = compare_map_kinds(*still_backend, still.data, FitOptions{});
    double worst = 0.0;
    for (Metric m : kAllMetrics) {
        worst = std::max(worst, std::abs(score(same.optimal_transport, m) - score(same.uniform_shift, m)));
    }
    const bool pass = gain >= kMinGeneralityGain && worst <= kZeroDriftAgreement;
    return {pass, "ot_generality=" + fmt(score(drifted.optimal_transport, Metric::Generality), 4) +
                      " uniform_generality=" + fmt(score(drifted.uniform_shift, Metric::Generality), 4) +
                      " gain=" + fmt(gain, 4) + " zero_drift_max_diff=" + fmt(worst, 4)};
}

Outcome epsilon_shape() {
    const ToyBenchmark& tb = default_benchmark();
    const auto backend = make_backend(tb.data);
    const auto table = sweep_epsilon(*backend, tb.data, kEpsilonGrid, FitOptions{});
    bool monotone = true, spec_ok = true;
    for (std::size_t i = 1; i < table.size(); ++i) {
        monotone = monotone && table[i].report.steered >= table[i - 1].report.steered;
        spec_ok = spec_ok && score(table[i].report, Metric::Specificity) <=
                                 score(table[i - 1].report, Metric::Specificity) + kSpecificityStepTol;
    }
    const bool spans = table.front().report.steered == 0 && table.back().report.steered == table.back().report.total;
    const double rise =
        score(table.back().report, Metric::Generality) - score(table.front().report, Metric::Generality);
    const bool pass = monotone && spec_ok && spans && rise >= kMinGeneralityRise;
    std::ostringstream steered;
    for (std::size_t i = 0; i < table.size(); ++i) steered << (i ? "," : "") << table[i].report.steered;
    return {pass, std::string(monotone ? "matched_nondecreasing" : "MATCHED_DECREASES") +
                      (spec_ok ? " specificity_ok" : " SPECIFICITY_RISES") +
                      (spans ? " spans_none_to_all" : " DOES_NOT_SPAN") + " generality_rise=" + fmt(rise, 4) +
                      " matched=[" + steered.str() + "]/" + std::to_string(table.back().report.total)};
}

Outcome prompt_shape() {
    const ToyBenchmark& tb = default_benchmark();
    const auto backend = make_backend(tb.data);
    const auto table = sweep_num_prompts(*backend, tb.data, kPromptSizes, FitOptions{});
    const MetricReport& lo = table.front().report;
    const MetricReport& hi = table.back().report;
    double smin = 1e9, smax = -1e9;
    for (const auto& p : table) {
        smin = std::min(smin, score(p.report, Metric::Specificity));
        smax = std::max(smax, score(p.report, Metric::Specificity));
    }
    const double acc_lo = score(lo, Metric::Accuracy), acc_hi = score(hi, Metric::Accuracy);
    const double gen_lo = score(lo, Metric::Generality), gen_hi = score(hi, Metric::Generality);
    const bool pass = acc_hi >= acc_lo - kPromptDropTol && gen_hi >= gen_lo - kPromptDropTol &&
                      smax - smin <= kMaxSpecificitySpread;
    return {pass, "accuracy " + fmt(acc_lo, 4) + "->" + fmt(acc_hi, 4) + " generality " + fmt(gen_lo, 4) + "->" +
                      fmt(gen_hi, 4) + " specificity_spread=" + fmt(smax - smin, 4)};
}

// Everything edited_forward reports, compared bit for bit.
struct Probe {
    std::string label;
    bool steered;
    std::optional<std::string> id;
    Vector post;
    bool operator==(const Probe&) const = default;
};

std::vector<Probe> run_probes(const LanguageModelBackend& backend, const Registry& r,
                              const std::vector<PromptRecord>& probes) {
    std::vector<Probe> out;
    out.reserve(probes.size());
    for (const auto& p : probes) {
        SteeringOutcome o = edited_forward(backend, r, p);
        out.push_back({std::move(o.output_label), o.steered, std::move(o.matched_edit_id),
                       std::move(o.post_map_activation)});
    }
    return out;
}

Outcome flexibility() {
    const ToyBenchmark& tb = default_benchmark();
    const auto backend = make_backend(tb.data);
    const Registry& full = default_registry();
    const auto probes = tb.data.eval_records();
    if (probes.size() < kMinProbes) return {false, "only " + std::to_string(probes.size()) + " probes"};
    const auto reference = run_probes(*backend, full, probes);

    std::size_t undo_ok = 0;
    for (const auto& e : full.entries()) {
        const Registry without = remove_edit(full, e->id);
        const auto base = run_probes(*backend, without, probes);
        const bool restored = run_probes(*backend, remove_edit(add_edit(without, *e), e->id), probes) == base;
        const bool readded = run_probes(*backend, add_edit(without, *e), probes) == reference;
        undo_ok += restored && readded;
    }

    Rng rng(404);
    int order_ok = 0;
    for (int trial = 0; trial < kOrderTrials; ++trial) {
        std::vector<std::shared_ptr<const EditEntry>> order(full.entries().begin(), full.entries().end());
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        Registry shuffled(full.activation_dim(), full.scope_dim());
        for (const auto& e : order) shuffled.add(*e);
        order_ok += run_probes(*backend, shuffled, probes) == reference;
    }
    const bool pass = undo_ok == full.size() && order_ok == kOrderTrials;
    return {pass, "probes=" + std::to_string(probes.size()) + " undo_identical=" + std::to_string(undo_ok) + "/" +
                      std::to_string(full.size()) + " orders_identical=" + std::to_string(order_ok) + "/" +
                      std::to_string(kOrderTrials)};
}

Outcome round_trips() {
    const ToyBenchmark& tb = default_benchmark();
    const Registry& reg = default_registry();
    std::vector<std::string> failed;

    const std::string r1 = save_registry(reg);
    if (save_registry(load_registry(r1)) != r1) failed.push_back("registry");

    const std::string a1 = format_activation_set(tb.data.edits[0].eval);
    if (format_activation_set(parse_activation_set(a1)) != a1) failed.push_back("activation-set");

    const fs::path dir = fs::temp_directory_path() / "sake_acceptance_roundtrip";
    fs::remove_all(dir);
    write_benchmark(tb.data, dir / "first");
    write_benchmark(read_benchmark(dir / "first" / "manifest.json"), dir / "second");
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir / "first")) {
        ++files;
        if (read_text_file(e.path()) != read_text_file(dir / "second" / e.path().filename())) {
            failed.push_back("benchmark:" + e.path().filename().string());
        }
    }
    fs::remove_all(dir);

    const auto backend = make_backend(tb.data);
    const auto records = tb.data.eval_records();
    const std::string p1 = format_report(evaluate(*backend, reg, records, report_config(FitOptions{}, tb.data)));
    if (format_report(parse_report(p1)) != p1) failed.push_back("report");

    std::string detail = "registry, activation-set, benchmark (" + std::to_string(files) + " files), report";
    for (const auto& f : failed) detail += " DIFFERS:" + f;
    return {failed.empty(), detail};
}

struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"ot-closed-form", kOtBudget, ot_closed_form},
        {"analytic-oracles", kOracleBudget, analytic_oracles},
        {"end-to-end-toy-editing", kEndToEndBudget, end_to_end},
        {"ot-vs-uniform-ablation", kAblationBudget, ablation},
        {"epsilon-sweep-shape", kEpsilonBudget, epsilon_shape},
        {"prompt-count-sweep-shape", kPromptBudget, prompt_shape},
        {"add-remove-flexibility", kFlexBudget, flexibility},
        {"format-round-trips", kRoundTripBudget, round_trips},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = c.run();
        } catch (const Error& e) {
            o = {false, std::string("error ") + std::string(e.name()) + ": " + e.what()};
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = seconds_since(t0);
        const bool in_time = elapsed < c.budget_seconds;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s %-26s %s time=%.2fs/%.0fs%s\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), elapsed,
                    c.budget_seconds, in_time ? "" : " OVER_BUDGET");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
