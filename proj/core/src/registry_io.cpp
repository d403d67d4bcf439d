#include <string>

#include "json_util.hpp"
#include "sake/registry.hpp"

namespace sake {

namespace {

using json::Json;

Json entry_to_json(const EditEntry& e) {
    Json spec = {{"subject", e.spec.subject},
                 {"relation", e.spec.relation},
                 {"old_object", e.spec.old_object},
                 {"new_object", e.spec.new_object}};
    Json detector = {{"centroid", json::from_vector(e.detector.centroid)},
                     {"epsilon", e.detector.epsilon},
                     {"distance", distance_kind_name(e.detector.distance)},
                     {"representation", representation_name(e.detector.representation)}};
    Json map = {{"kind", map_kind_name(e.map.kind())},
                {"A", json::from_matrix(e.map.linear().matrix())},
                {"b", json::from_vector(e.map.offset())}};
    return Json{{"id", e.id}, {"spec", spec}, {"detector", detector}, {"map", map}, {"created_at", e.created_at}};
}

EditEntry entry_from_json(const Json& j, const std::string& where) {
    EditEntry e;
    e.id = json::get_string(j, "id", where);
    const std::string w = where + " (edit '" + e.id + "')";
    const Json& spec = json::field(j, "spec", w);
    e.spec = EditSpec{json::get_string(spec, "subject", w), json::get_string(spec, "relation", w),
                      json::get_string(spec, "old_object", w), json::get_string(spec, "new_object", w)};
    const Json& det = json::field(j, "detector", w);
    e.detector.centroid = json::to_vector(json::field(det, "centroid", w), w + " centroid");
    e.detector.epsilon = json::get_number(det, "epsilon", w);
    e.detector.distance = parse_distance_kind(json::get_string(det, "distance", w));
    e.detector.representation = parse_representation(json::get_string(det, "representation", w));
    const Json& map = json::field(j, "map", w);
    const MapKind kind = parse_map_kind(json::get_string(map, "kind", w));
    Matrix a = json::to_matrix(json::field(map, "A", w), w + " map.A");
    Vector b = json::to_vector(json::field(map, "b", w), w + " map.b");
    if (a.rows() != a.cols() || a.rows() != b.size()) {
        fail(ErrorKind::DimensionMismatch, w + ": map.A and map.b dimensions disagree");
    }
    if (a != a.transpose()) fail(ErrorKind::SchemaViolation, w + ": map.A must be symmetric");
    e.map = LinearMap::restore(kind, SymMatrix(a), std::move(b));
    e.created_at = json::get_string(j, "created_at", w);
    return e;
}

Index get_dim(const Json& doc, const char* key, const std::string& where) {
    const auto v = json::get_integer(doc, key, where);
    if (v <= 0) fail(ErrorKind::SchemaViolation, where + ": '" + key + "' must be positive");
    return static_cast<Index>(v);
}

}  // namespace

std::string save_registry(const Registry& registry) {
    Json entries = Json::array();
    for (const auto& e : registry.entries()) entries.push_back(entry_to_json(*e));
    const Json doc = {{"format", "sake-registry"},
                      {"version", 1},
                      {"activation_dim", registry.activation_dim()},
                      {"scope_dim", registry.scope_dim()},
                      {"entries", entries}};
    return json::dump(doc) + "\n";
}

Registry load_registry(std::string_view document) {
    const std::string where = "registry";
    const Json doc = json::parse(document, where);
    json::check_header(doc, "sake-registry", where);
    Registry registry(get_dim(doc, "activation_dim", where), get_dim(doc, "scope_dim", where));
    const Json& entries = json::field(doc, "entries", where);
    if (!entries.is_array()) fail(ErrorKind::SchemaViolation, where + ": 'entries' must be an array");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        registry.add(entry_from_json(entries[i], where + " entry " + std::to_string(i)));
    }
    return registry;
}

std::string save_edit(const EditDocument& doc) {
    const Json j = {{"format", "sake-edit"},
                    {"version", 1},
                    {"activation_dim", doc.activation_dim},
                    {"scope_dim", doc.scope_dim},
                    {"entry", entry_to_json(doc.entry)}};
    return json::dump(j) + "\n";
}

EditDocument load_edit(std::string_view document) {
    const std::string where = "edit document";
    const Json j = json::parse(document, where);
    json::check_header(j, "sake-edit", where);
    EditDocument doc;
    doc.activation_dim = get_dim(j, "activation_dim", where);
    doc.scope_dim = get_dim(j, "scope_dim", where);
    doc.entry = entry_from_json(json::field(j, "entry", where), where);
    Registry(doc.activation_dim, doc.scope_dim).check_compatible(doc.entry);
    return doc;
}

}  // namespace sake
