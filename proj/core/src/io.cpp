#include "sake/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace sake {

using json::Json;

// ---- files ---------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::IoError, "cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) fail(ErrorKind::IoError, "write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::IoError, "cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

// ---- activation sets -----------------------------------------------------

namespace {

Json record_to_json(const ActivationRecord& r) {
    Json j = {{"id", r.id},
              {"role", role_name(r.role)},
              {"category", category_name(r.category)},
              {"vector", json::from_vector(r.vector)}};
    if (r.scope_vector) j["scope_vector"] = json::from_vector(*r.scope_vector);
    if (r.expected_pre_edit) j["expected_pre_edit"] = *r.expected_pre_edit;
    if (r.expected_post_edit) j["expected_post_edit"] = *r.expected_post_edit;
    json::append_extra(j, r.extra);
    return j;
}

ActivationRecord record_from_json(const Json& j, const std::string& where) {
    ActivationRecord r;
    r.id = json::get_string(j, "id", where);
    r.role = parse_role(json::get_string(j, "role", where));
    r.category = parse_category(json::get_string(j, "category", where));
    r.vector = json::to_vector(json::field(j, "vector", where), where + " vector");
    if (const Json* s = json::optional_field(j, "scope_vector")) r.scope_vector = json::to_vector(*s, where + " scope_vector");
    if (const Json* s = json::optional_field(j, "expected_pre_edit")) {
        if (!s->is_string()) fail(ErrorKind::SchemaViolation, where + ": expected_pre_edit must be a string");
        r.expected_pre_edit = s->get<std::string>();
    }
    if (const Json* s = json::optional_field(j, "expected_post_edit")) {
        if (!s->is_string()) fail(ErrorKind::SchemaViolation, where + ": expected_post_edit must be a string");
        r.expected_post_edit = s->get<std::string>();
    }
    r.extra = json::collect_extra(
        j, {"id", "role", "category", "vector", "scope_vector", "expected_pre_edit", "expected_post_edit"});
    return r;
}

// Re-throws any error raised while reading one line with the line number prefixed.
template <typename F>
auto at_line(std::size_t line, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        const std::string prefix = "line " + std::to_string(line) + ": ";
        if (std::string_view(e.what()).starts_with("line ")) throw;
        throw Error(e.kind() == ErrorKind::DimensionMismatch ? ErrorKind::SchemaViolation : e.kind(),
                    prefix + e.what());
    }
}

}  // namespace

std::string format_activation_set(const ActivationSet& set) {
    set.validate();
    Json header = {{"format", "sake-activations"}, {"version", 1}, {"dim", set.dim}, {"scope_dim", set.scope_dim}};
    json::append_extra(header, set.header_extra);
    std::string out = json::dump(header);
    out += '\n';
    for (const auto& r : set.records) {
        out += json::dump(record_to_json(r));
        out += '\n';
    }
    return out;
}

ActivationSet parse_activation_set(std::string_view text) {
    ActivationSet set;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const std::string where = "line " + std::to_string(line_no);
        const Json j = json::parse(line, where);
        if (!have_header) {
            at_line(line_no, [&] {
                json::check_header(j, "sake-activations", where);
                set.dim = static_cast<Index>(json::get_integer(j, "dim", where));
                set.scope_dim = static_cast<Index>(json::get_integer(j, "scope_dim", where));
                if (set.dim <= 0 || set.scope_dim <= 0) {
                    fail(ErrorKind::SchemaViolation, where + ": dim and scope_dim must be positive");
                }
                set.header_extra = json::collect_extra(j, {"format", "version", "dim", "scope_dim"});
                return 0;
            });
            have_header = true;
            continue;
        }
        ActivationRecord r = at_line(line_no, [&] { return record_from_json(j, where); });
        if (r.vector.size() != set.dim) {
            fail(ErrorKind::SchemaViolation, where + ": vector has length " + std::to_string(r.vector.size()) +
                                                 ", header dim is " + std::to_string(set.dim));
        }
        if (r.scope_vector && r.scope_vector->size() != set.scope_dim) {
            fail(ErrorKind::SchemaViolation, where + ": scope_vector has length " +
                                                 std::to_string(r.scope_vector->size()) + ", header scope_dim is " +
                                                 std::to_string(set.scope_dim));
        }
        if (!r.scope_vector && set.scope_dim != set.dim) {
            fail(ErrorKind::SchemaViolation, where + ": scope_vector omitted but scope_dim != dim");
        }
        if (!r.vector.allFinite() || (r.scope_vector && !r.scope_vector->allFinite())) {
            fail(ErrorKind::SchemaViolation, where + ": non-finite value");
        }
        set.records.push_back(std::move(r));
    }
    if (!have_header) fail(ErrorKind::SchemaViolation, "line 1: missing activation-set header");
    return set;
}

ActivationSet read_activation_set(const std::filesystem::path& path) {
    try {
        return parse_activation_set(read_text_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

void write_activation_set(const ActivationSet& set, const std::filesystem::path& path) {
    write_text_file(path, format_activation_set(set));
}

// ---- benchmark manifests -------------------------------------------------

std::vector<PromptRecord> Benchmark::eval_records() const {
    std::vector<PromptRecord> out;
    for (const auto& e : edits) {
        auto recs = to_prompt_records(e.eval);
        out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
    }
    return out;
}

std::string format_manifest(const Benchmark& b) {
    Json edits = Json::array();
    for (const auto& e : b.edits) {
        Json j = {{"id", e.id},
                  {"spec",
                   {{"subject", e.spec.subject},
                    {"relation", e.spec.relation},
                    {"old_object", e.spec.old_object},
                    {"new_object", e.spec.new_object}}},
                  {"train_source_file", e.train_source_file},
                  {"train_target_file", e.train_target_file},
                  {"eval_file", e.eval_file}};
        if (e.ground_truth) {
            j["ground_truth"] = {{"M", json::from_matrix(e.ground_truth->M)},
                                 {"c", json::from_vector(e.ground_truth->c)}};
        }
        json::append_extra(j, e.extra);
        edits.push_back(std::move(j));
    }
    Json backend;
    if (b.backend.kind == BackendConfig::Kind::Toy) {
        backend = {{"kind", "toy"}, {"seed", b.backend.seed}, {"dim", b.backend.dim}, {"vocab", b.backend.vocab}};
    } else {
        backend = {{"kind", "external"}};
    }
    Json doc = {{"format", "sake-benchmark"}, {"version", 1},     {"activation_dim", b.activation_dim},
                {"scope_dim", b.scope_dim},   {"edits", edits}, {"backend", backend}};
    json::append_extra(doc, b.extra);
    return json::dump(doc) + "\n";
}

Benchmark parse_manifest(std::string_view text) {
    const std::string where = "manifest";
    const Json doc = json::parse(text, where);
    json::check_header(doc, "sake-benchmark", where);
    Benchmark b;
    b.activation_dim = static_cast<Index>(json::get_integer(doc, "activation_dim", where));
    b.scope_dim = static_cast<Index>(json::get_integer(doc, "scope_dim", where));
    if (b.activation_dim <= 0 || b.scope_dim <= 0) fail(ErrorKind::SchemaViolation, where + ": dims must be positive");
    const Json& backend = json::field(doc, "backend", where);
    const std::string kind = json::get_string(backend, "kind", where + " backend");
    if (kind == "toy") {
        b.backend.kind = BackendConfig::Kind::Toy;
        const Json& seed = json::field(backend, "seed", where + " backend");
        if (!seed.is_number_unsigned()) fail(ErrorKind::SchemaViolation, where + ": backend seed must be unsigned");
        b.backend.seed = seed.get<std::uint64_t>();
        b.backend.dim = static_cast<Index>(json::get_integer(backend, "dim", where + " backend"));
        const Json& vocab = json::field(backend, "vocab", where + " backend");
        if (!vocab.is_array()) fail(ErrorKind::SchemaViolation, where + ": backend vocab must be an array");
        for (const auto& v : vocab) {
            if (!v.is_string()) fail(ErrorKind::SchemaViolation, where + ": vocab labels must be strings");
            b.backend.vocab.push_back(v.get<std::string>());
        }
        if (b.backend.dim != b.activation_dim) {
            fail(ErrorKind::DimensionMismatch, where + ": toy backend dim differs from activation_dim");
        }
    } else if (kind == "external") {
        b.backend.kind = BackendConfig::Kind::External;
    } else {
        fail(ErrorKind::SchemaViolation, where + ": unknown backend kind '" + kind + "'");
    }
    const Json& edits = json::field(doc, "edits", where);
    if (!edits.is_array()) fail(ErrorKind::SchemaViolation, where + ": 'edits' must be an array");
    for (std::size_t i = 0; i < edits.size(); ++i) {
        const std::string w = where + " edit " + std::to_string(i);
        const Json& j = edits[i];
        BenchmarkEdit e;
        e.id = json::get_string(j, "id", w);
        const Json& spec = json::field(j, "spec", w);
        e.spec = EditSpec{json::get_string(spec, "subject", w), json::get_string(spec, "relation", w),
                          json::get_string(spec, "old_object", w), json::get_string(spec, "new_object", w)};
        e.spec.validate();
        e.train_source_file = json::get_string(j, "train_source_file", w);
        e.train_target_file = json::get_string(j, "train_target_file", w);
        e.eval_file = json::get_string(j, "eval_file", w);
        if (const Json* gt = json::optional_field(j, "ground_truth")) {
            if (b.backend.kind != BackendConfig::Kind::Toy) {
                fail(ErrorKind::SchemaViolation, w + ": ground_truth is only allowed for toy benchmarks");
            }
            GroundTruth g{json::to_matrix(json::field(*gt, "M", w), w + " ground_truth.M"),
                          json::to_vector(json::field(*gt, "c", w), w + " ground_truth.c")};
            if (g.M.rows() != b.activation_dim || g.M.cols() != b.activation_dim || g.c.size() != b.activation_dim) {
                fail(ErrorKind::DimensionMismatch, w + ": ground_truth dimensions differ from activation_dim");
            }
            e.ground_truth = std::move(g);
        }
        e.extra = json::collect_extra(
            j, {"id", "spec", "train_source_file", "train_target_file", "eval_file", "ground_truth"});
        b.edits.push_back(std::move(e));
    }
    b.extra = json::collect_extra(doc, {"format", "version", "activation_dim", "scope_dim", "edits", "backend"});
    return b;
}

void write_benchmark(const Benchmark& b, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& e : b.edits) {
        write_activation_set(e.train_source, dir / e.train_source_file);
        write_activation_set(e.train_target, dir / e.train_target_file);
        write_activation_set(e.eval, dir / e.eval_file);
    }
    write_text_file(dir / "manifest.json", format_manifest(b));
}

Benchmark read_benchmark(const std::filesystem::path& manifest_path) {
    Benchmark b = parse_manifest(read_text_file(manifest_path));
    const auto dir = manifest_path.parent_path();
    auto load = [&](const std::string& name) {
        ActivationSet set = read_activation_set(dir / name);
        if (set.dim != b.activation_dim || set.scope_dim != b.scope_dim) {
            fail(ErrorKind::DimensionMismatch, name + ": header dims (" + std::to_string(set.dim) + ", " +
                                                   std::to_string(set.scope_dim) + ") differ from the manifest");
        }
        return set;
    };
    for (auto& e : b.edits) {
        e.train_source = load(e.train_source_file);
        e.train_target = load(e.train_target_file);
        e.eval = load(e.eval_file);
    }
    return b;
}

// ---- reports -------------------------------------------------------------

namespace {

template <typename T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string format_report(const MetricReport& r) {
    Json config = {{"epsilon", optional_json(r.config.epsilon)},
                   {"reg", optional_json(r.config.reg)},
                   {"n_train", optional_json(r.config.n_train)},
                   {"map_kind", r.config.map_kind},
                   {"seed", optional_json(r.config.seed)}};
    json::append_extra(config, r.config.extra);
    Json metrics = Json::object();
    for (Metric m : kAllMetrics) metrics[std::string(metric_name(m))] = optional_json(r.score(m));
    Json counts = Json::object();
    for (Category c : kAllCategories) {
        counts[std::string(category_name(c))] = {{"evaluated", r.count(c).evaluated}, {"passed", r.count(c).passed}};
    }
    counts["steered"] = r.steered;
    counts["total"] = r.total;
    const Json doc = {
        {"format", "sake-report"}, {"version", 1}, {"config", config}, {"metrics", metrics}, {"counts", counts}};
    return json::dump(doc) + "\n";
}

MetricReport parse_report(std::string_view text) {
    const std::string where = "report";
    const Json doc = json::parse(text, where);
    json::check_header(doc, "sake-report", where);
    MetricReport r;
    const Json& config = json::field(doc, "config", where);
    if (const Json* v = json::optional_field(config, "epsilon")) r.config.epsilon = v->get<double>();
    if (const Json* v = json::optional_field(config, "reg")) r.config.reg = v->get<double>();
    if (const Json* v = json::optional_field(config, "n_train")) r.config.n_train = v->get<std::size_t>();
    r.config.map_kind = json::get_string(config, "map_kind", where);
    if (const Json* v = json::optional_field(config, "seed")) r.config.seed = v->get<std::uint64_t>();
    r.config.extra = json::collect_extra(config, {"epsilon", "reg", "n_train", "map_kind", "seed"});
    const Json& counts = json::field(doc, "counts", where);
    for (Category c : kAllCategories) {
        const std::string name(category_name(c));
        const Json& entry = json::field(counts, name.c_str(), where);
        r.count(c).evaluated = static_cast<std::size_t>(json::get_integer(entry, "evaluated", where));
        r.count(c).passed = static_cast<std::size_t>(json::get_integer(entry, "passed", where));
        if (r.count(c).passed > r.count(c).evaluated) fail(ErrorKind::SchemaViolation, where + ": passed > evaluated");
    }
    r.steered = static_cast<std::size_t>(json::get_integer(counts, "steered", where));
    r.total = static_cast<std::size_t>(json::get_integer(counts, "total", where));
    const Json& metrics = json::field(doc, "metrics", where);
    for (Metric m : kAllMetrics) {
        const Json& v = json::field(metrics, std::string(metric_name(m)).c_str(), where);
        const auto expected = r.score(m);
        if (v.is_null() != !expected.has_value() || (expected && (!v.is_number() || v.get<double>() != *expected))) {
            fail(ErrorKind::SchemaViolation, where + ": metric '" + std::string(metric_name(m)) +
                                                 "' disagrees with its counts");
        }
    }
    return r;
}

std::string format_plot_data(std::span<const SweepPoint> table) {
    if (table.empty()) fail(ErrorKind::InvalidArgument, "sweep table is empty");
    std::string out = "sweep_var";
    for (Metric m : kAllMetrics) {
        out += ',';
        out += metric_name(m);
    }
    out += '\n';
    for (const auto& p : table) {
        out += format_double(p.value);
        for (Metric m : kAllMetrics) {
            out += ',';
            if (const auto s = p.report.score(m)) out += format_double(*s);
        }
        out += '\n';
    }
    return out;
}

void emit_plot_data(std::span<const SweepPoint> table, const std::filesystem::path& path) {
    write_text_file(path, format_plot_data(table));
}

}  // namespace sake
