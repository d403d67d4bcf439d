// sake: fit, combine, apply and evaluate activation-steering edits.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sake/errors.hpp"
#include "sake/eval.hpp"
#include "sake/io.hpp"
#include "sake/registry.hpp"
#include "sake/steering.hpp"
#include "sake/toy_lm.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int report_error(std::string_view code, std::string_view message, int status) {
    json j;
    j["code"] = code;
    j["message"] = message;
    std::cerr << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    return status;
}

// Flag values parsed by the library: failures there are usage errors.
template <class F>
auto flag_value(const char* flag, F&& parse) {
    try {
        return parse();
    } catch (const sake::Error& e) {
        throw UsageError(std::string(flag) + ": " + e.what());
    }
}

// Outputs never overwrite an input of the same command.
void require_distinct(const std::string& out, std::initializer_list<std::string> inputs) {
    const fs::path o = fs::weakly_canonical(out);
    for (const auto& in : inputs) {
        if (!in.empty() && fs::weakly_canonical(in) == o) {
            throw UsageError("output '" + out + "' is also an input; write to a different path");
        }
    }
}

// ---- fit -----------------------------------------------------------------

struct FitArgs {
    std::string source, target, out;
    double reg = sake::kDefaultRegularization;
    std::string kind = "ot";
    double epsilon = sake::kDefaultEpsilon;
    std::string distance = "euclidean";
    std::string representation = "external";
    std::string id, subject, relation, old_object, new_object;
    std::optional<std::size_t> n_train;
    std::string created_at = std::string(sake::kEpochTimestamp);
};

// Edit fields from the "edit" header object, when the activation file has one.
void fill_from_header(const sake::ActivationSet& set, FitArgs& a) {
    for (const auto& [key, raw] : set.header_extra) {
        if (key != "edit") continue;
        const json e = json::parse(raw, nullptr, false);
        if (!e.is_object()) continue;
        auto take = [&](const char* field, std::string& dst) {
            if (dst.empty() && e.contains(field) && e[field].is_string()) dst = e[field].get<std::string>();
        };
        take("id", a.id);
        take("subject", a.subject);
        take("relation", a.relation);
        take("old_object", a.old_object);
        take("new_object", a.new_object);
    }
}

int run_fit(FitArgs a) {
    require_distinct(a.out, {a.source, a.target});
    sake::FitOptions opt;
    opt.kind = flag_value("--kind", [&] { return sake::parse_map_kind(a.kind); });
    if (opt.kind == sake::MapKind::Identity) throw UsageError("--kind must be ot or uniform");
    opt.reg = a.reg;
    opt.epsilon = a.epsilon;
    opt.distance = flag_value("--distance", [&] { return sake::parse_distance_kind(a.distance); });
    opt.representation =
        flag_value("--representation", [&] { return sake::parse_representation(a.representation); });
    opt.n_train = a.n_train;
    if (!sake::is_iso8601_timestamp(a.created_at)) throw UsageError("--created-at must be an ISO-8601 UTC timestamp");
    opt.created_at = a.created_at;

    const sake::ActivationSet source = sake::read_activation_set(a.source);
    const sake::ActivationSet target = sake::read_activation_set(a.target);
    fill_from_header(source, a);
    if (a.id.empty()) throw UsageError("no edit id: pass --id or use a source file whose header names the edit");
    sake::EditSpec spec{a.subject, a.relation, a.old_object, a.new_object};

    sake::EditDocument doc;
    doc.activation_dim = source.dim;
    doc.scope_dim = source.scope_dim;
    doc.entry = sake::fit_edit(a.id, std::move(spec), source, target, opt);
    sake::Registry(doc.activation_dim, doc.scope_dim).check_compatible(doc.entry);
    sake::write_text_file(a.out, sake::save_edit(doc));
    return kExitOk;
}

// ---- registry ------------------------------------------------------------

struct RegistryArgs {
    std::string registry, entry, id, out;
    bool create = false;
};

sake::Registry read_registry(const std::string& path) { return sake::load_registry(sake::read_text_file(path)); }

int run_registry_add(const RegistryArgs& a) {
    require_distinct(a.out, {a.registry, a.entry});
    const sake::EditDocument doc = sake::load_edit(sake::read_text_file(a.entry));
    std::optional<sake::Registry> reg;
    if (a.create && !fs::exists(a.registry)) {
        reg.emplace(doc.activation_dim, doc.scope_dim);
    } else {
        reg.emplace(read_registry(a.registry));
    }
    if (reg->activation_dim() != doc.activation_dim || reg->scope_dim() != doc.scope_dim) {
        sake::fail(sake::ErrorKind::DimensionMismatch,
                   "edit document is " + std::to_string(doc.activation_dim) + "/" + std::to_string(doc.scope_dim) +
                       ", registry is " + std::to_string(reg->activation_dim()) + "/" +
                       std::to_string(reg->scope_dim()));
    }
    const sake::Registry updated = sake::add_edit(std::move(*reg), doc.entry);
    sake::write_text_file(a.out, sake::save_registry(updated));
    return kExitOk;
}

int run_registry_remove(const RegistryArgs& a) {
    require_distinct(a.out, {a.registry});
    const sake::Registry updated = sake::remove_edit(read_registry(a.registry), a.id);
    sake::write_text_file(a.out, sake::save_registry(updated));
    return kExitOk;
}

int run_registry_list(const RegistryArgs& a) {
    const sake::Registry reg = read_registry(a.registry);
    for (const auto& e : reg.entries()) {
        std::cout << e->id << '\t' << sake::map_kind_name(e->map.kind()) << '\t'
                  << sake::format_double(e->detector.epsilon) << '\t' << e->spec.subject << '\t' << e->spec.relation
                  << '\t' << e->spec.old_object << " -> " << e->spec.new_object << '\n';
    }
    return kExitOk;
}

// ---- steer ---------------------------------------------------------------

struct SteerArgs {
    std::string registry, in, out;
    std::string policy = "every";
};

std::size_t record_step(const sake::ActivationRecord& rec) {
    for (const auto& [key, raw] : rec.extra) {
        if (key != "step") continue;
        const json j = json::parse(raw, nullptr, false);
        if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
            sake::fail(sake::ErrorKind::SchemaViolation, "record '" + rec.id + "': step must be a non-negative integer");
        }
        return j.get<std::size_t>();
    }
    return 0;
}

void set_extra(std::vector<sake::ExtraField>& extra, const std::string& key, std::string raw) {
    for (auto& [k, v] : extra) {
        if (k == key) {
            v = std::move(raw);
            return;
        }
    }
    extra.emplace_back(key, std::move(raw));
}

int run_steer(const SteerArgs& a) {
    require_distinct(a.out, {a.in, a.registry});
    const auto policy = flag_value("--policy", [&] { return sake::parse_steering_policy(a.policy); });
    const sake::Registry reg = read_registry(a.registry);
    sake::ActivationSet set = sake::read_activation_set(a.in);
    if (set.dim != reg.activation_dim() || set.scope_dim != reg.scope_dim()) {
        sake::fail(sake::ErrorKind::DimensionMismatch, "activation set is " + std::to_string(set.dim) + "/" +
                                                           std::to_string(set.scope_dim) + ", registry is " +
                                                           std::to_string(reg.activation_dim()) + "/" +
                                                           std::to_string(reg.scope_dim()));
    }
    const sake::Registry passthrough(reg.activation_dim(), reg.scope_dim());
    for (auto& rec : set.records) {
        const bool eligible = policy == sake::SteeringPolicy::EveryToken || record_step(rec) == 0;
        const sake::SteeringOutcome o =
            sake::steer_activation(eligible ? reg : passthrough, rec.vector, rec.scope());
        if (!rec.scope_vector && o.steered) rec.scope_vector = rec.vector;  // keep the scope channel intact
        rec.vector = o.post_map_activation;
        set_extra(rec.extra, "steered", o.steered ? "true" : "false");
        set_extra(rec.extra, "matched_edit_id", o.matched_edit_id ? json(*o.matched_edit_id).dump() : "null");
    }
    sake::write_activation_set(set, a.out);
    return kExitOk;
}

// ---- eval and sweeps -----------------------------------------------------

struct EvalArgs {
    std::string registry, benchmark, report;
};

void print_report(const sake::MetricReport& r) {
    for (sake::Metric m : sake::kAllMetrics) {
        const auto s = r.score(m);
        std::cout << sake::metric_name(m) << ' ' << (s ? sake::format_double(*s) : "null") << '\n';
    }
    std::cout << "steered " << r.steered << '/' << r.total << '\n';
}

int run_eval(const EvalArgs& a) {
    require_distinct(a.report, {a.registry, a.benchmark});
    const sake::Registry reg = read_registry(a.registry);
    const sake::Benchmark bench = sake::read_benchmark(a.benchmark);
    if (reg.activation_dim() != bench.activation_dim || reg.scope_dim() != bench.scope_dim) {
        sake::fail(sake::ErrorKind::DimensionMismatch, "registry and benchmark dimensions differ");
    }
    const auto backend = sake::make_backend(bench);
    const auto records = bench.eval_records();
    const sake::MetricReport report = sake::evaluate(*backend, reg, records, sake::report_config(reg, bench));
    sake::write_text_file(a.report, sake::format_report(report));
    print_report(report);
    return kExitOk;
}

struct SweepArgs {
    std::string benchmark, grid, sizes, plot;
    double reg = sake::kDefaultRegularization;
    std::string kind = "ot";
    double epsilon = sake::kDefaultEpsilon;
    std::string distance = "euclidean";
};

sake::FitOptions sweep_options(const SweepArgs& a) {
    sake::FitOptions opt;
    opt.kind = flag_value("--kind", [&] { return sake::parse_map_kind(a.kind); });
    if (opt.kind == sake::MapKind::Identity) throw UsageError("--kind must be ot or uniform");
    opt.reg = a.reg;
    opt.epsilon = a.epsilon;
    opt.distance = flag_value("--distance", [&] { return sake::parse_distance_kind(a.distance); });
    return opt;
}

int run_sweep_epsilon(const SweepArgs& a) {
    require_distinct(a.plot, {a.benchmark});
    const auto grid = flag_value("--grid", [&] { return sake::parse_grid(a.grid); });
    const sake::FitOptions opt = sweep_options(a);
    const sake::Benchmark bench = sake::read_benchmark(a.benchmark);
    const auto backend = sake::make_backend(bench);
    const auto table = sake::sweep_epsilon(*backend, bench, grid, opt);
    sake::emit_plot_data(table, a.plot);
    return kExitOk;
}

int run_sweep_prompts(const SweepArgs& a) {
    require_distinct(a.plot, {a.benchmark});
    const auto sizes = flag_value("--sizes", [&] { return sake::parse_sizes(a.sizes); });
    const sake::FitOptions opt = sweep_options(a);
    const sake::Benchmark bench = sake::read_benchmark(a.benchmark);
    const auto backend = sake::make_backend(bench);
    const auto table = sake::sweep_num_prompts(*backend, bench, sizes, opt);
    sake::emit_plot_data(table, a.plot);
    return kExitOk;
}

// ---- toy-gen -------------------------------------------------------------

struct ToyGenArgs {
    std::uint64_t seed = 0;
    sake::ToyConfig config;
    std::string out;
};

int run_toy_gen(ToyGenArgs a) {
    a.config.seed = a.seed;
    flag_value("toy-gen", [&] {
        a.config.validate();
        return 0;
    });
    const sake::ToyBenchmark toy = sake::generate_benchmark(a.config);
    fs::create_directories(a.out);
    sake::write_benchmark(toy.data, a.out);
    std::cout << (fs::path(a.out) / "manifest.json").string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge edits as affine maps on model activations, applied inside a scope."};
    app.set_version_flag("--version", "sake 0.1.0");
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit one edit from source and target activation sets");
    fit_cmd->add_option("--source", fit.source, "Source (pre-edit) activation set")->required();
    fit_cmd->add_option("--target", fit.target, "Target (post-edit) activation set")->required();
    fit_cmd->add_option("--out", fit.out, "Edit document to write")->required();
    fit_cmd->add_option("--reg", fit.reg, "Ridge added to both covariances")->capture_default_str();
    fit_cmd->add_option("--kind", fit.kind, "Map family: ot or uniform")->capture_default_str();
    fit_cmd->add_option("--epsilon", fit.epsilon, "Scope radius")->capture_default_str();
    fit_cmd->add_option("--distance", fit.distance, "Scope distance: euclidean or cosine")->capture_default_str();
    fit_cmd->add_option("--representation", fit.representation, "Scope channel: external or model")
        ->capture_default_str();
    fit_cmd->add_option("--n-train", fit.n_train, "Use only the first N source and target records");
    fit_cmd->add_option("--id", fit.id, "Edit id (default: from the source header)");
    fit_cmd->add_option("--subject", fit.subject, "Edit subject (default: from the source header)");
    fit_cmd->add_option("--relation", fit.relation, "Edit relation (default: from the source header)");
    fit_cmd->add_option("--old-object", fit.old_object, "Object before the edit (default: from the source header)");
    fit_cmd->add_option("--new-object", fit.new_object, "Object after the edit (default: from the source header)");
    fit_cmd->add_option("--created-at", fit.created_at, "Timestamp stored in the entry")->capture_default_str();

    RegistryArgs radd, rrem, rlist;
    auto* reg_cmd = app.add_subcommand("registry", "Add, remove or list the edits of a registry");
    reg_cmd->require_subcommand(1);
    auto* add_cmd = reg_cmd->add_subcommand("add", "Write a registry with one more edit");
    add_cmd->add_option("--registry", radd.registry, "Registry to read")->required();
    add_cmd->add_option("--entry", radd.entry, "Edit document written by fit")->required();
    add_cmd->add_option("--out", radd.out, "Registry to write")->required();
    add_cmd->add_flag("--create", radd.create, "Start from an empty registry if --registry does not exist");
    auto* rem_cmd = reg_cmd->add_subcommand("remove", "Write a registry without one edit");
    rem_cmd->add_option("--registry", rrem.registry, "Registry to read")->required();
    rem_cmd->add_option("--id", rrem.id, "Edit id to drop")->required();
    rem_cmd->add_option("--out", rrem.out, "Registry to write")->required();
    auto* list_cmd = reg_cmd->add_subcommand("list", "Print one line per edit");
    list_cmd->add_option("--registry", rlist.registry, "Registry to read")->required();

    SteerArgs steer;
    auto* steer_cmd = app.add_subcommand("steer", "Apply a registry to an activation set");
    steer_cmd->add_option("--registry", steer.registry, "Registry to apply")->required();
    steer_cmd->add_option("--in", steer.in, "Activation set to read")->required();
    steer_cmd->add_option("--out", steer.out, "Steered activation set to write")->required();
    steer_cmd->add_option("--policy", steer.policy,
                          "first: steer only records at step 0; every: steer every record")
        ->capture_default_str();

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Score a registry on a toy benchmark");
    eval_cmd->add_option("--registry", ev.registry, "Registry to evaluate")->required();
    eval_cmd->add_option("--benchmark", ev.benchmark, "Benchmark manifest")->required();
    eval_cmd->add_option("--report", ev.report, "Report to write")->required();

    SweepArgs se, sp;
    auto add_fit_flags = [](CLI::App* cmd, SweepArgs& s, bool with_epsilon) {
        cmd->add_option("--reg", s.reg, "Ridge added to both covariances")->capture_default_str();
        cmd->add_option("--kind", s.kind, "Map family: ot or uniform")->capture_default_str();
        cmd->add_option("--distance", s.distance, "Scope distance: euclidean or cosine")->capture_default_str();
        if (with_epsilon) cmd->add_option("--epsilon", s.epsilon, "Scope radius")->capture_default_str();
    };
    auto* se_cmd = app.add_subcommand("sweep-epsilon", "Metrics over a grid of scope radii");
    se_cmd->add_option("--benchmark", se.benchmark, "Benchmark manifest")->required();
    se_cmd->add_option("--grid", se.grid, "a:b:n, n evenly spaced radii from a to b")->required();
    se_cmd->add_option("--plot", se.plot, "CSV to write")->required();
    add_fit_flags(se_cmd, se, false);
    auto* sp_cmd = app.add_subcommand("sweep-prompts", "Metrics over training-set sizes");
    sp_cmd->add_option("--benchmark", sp.benchmark, "Benchmark manifest")->required();
    sp_cmd->add_option("--sizes", sp.sizes, "Comma-separated training sizes, e.g. 10,25,50,100")->required();
    sp_cmd->add_option("--plot", sp.plot, "CSV to write")->required();
    add_fit_flags(sp_cmd, sp, true);

    ToyGenArgs tg;
    auto* tg_cmd = app.add_subcommand("toy-gen", "Generate a seeded toy benchmark");
    tg_cmd->add_option("--seed", tg.seed, "Seed for every random draw")->required();
    tg_cmd->add_option("--dim", tg.config.dim, "Activation dimension")->capture_default_str();
    tg_cmd->add_option("--vocab", tg.config.vocab_size, "Number of object labels")->capture_default_str();
    tg_cmd->add_option("--edits", tg.config.n_edits, "Number of edits")->capture_default_str();
    tg_cmd->add_option("--drift", tg.config.drift_strength, "Strength of the covariance drift")
        ->capture_default_str();
    tg_cmd->add_option("--n-train", tg.config.n_train, "Training pairs per edit")->capture_default_str();
    tg_cmd->add_option("--out", tg.out, "Directory to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("UsageError", e.what(), kExitUsage);
    }

    try {
        if (*fit_cmd) return run_fit(fit);
        if (*add_cmd) return run_registry_add(radd);
        if (*rem_cmd) return run_registry_remove(rrem);
        if (*list_cmd) return run_registry_list(rlist);
        if (*steer_cmd) return run_steer(steer);
        if (*eval_cmd) return run_eval(ev);
        if (*se_cmd) return run_sweep_epsilon(se);
        if (*sp_cmd) return run_sweep_prompts(sp);
        if (*tg_cmd) return run_toy_gen(tg);
    } catch (const UsageError& e) {
        return report_error("UsageError", e.what(), kExitUsage);
    } catch (const sake::Error& e) {
        return report_error(e.name(), e.what(), sake::is_numerical(e.kind()) ? kExitNumerical : kExitData);
    } catch (const fs::filesystem_error& e) {
        return report_error("IoError", e.what(), kExitData);
    } catch (const std::exception& e) {
        return report_error("InternalError", e.what(), kExitData);
    }
    return kExitUsage;
}
