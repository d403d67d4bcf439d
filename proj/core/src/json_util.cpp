#include "json_util.hpp"

#include <algorithm>

namespace sake::json {

Json parse(std::string_view text, const std::string& where) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::SchemaViolation, where + ": malformed JSON (" + e.what() + ")");
    }
}

std::string dump(const Json& j) { return j.dump(); }

const Json& field(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) fail(ErrorKind::SchemaViolation, where + ": expected a JSON object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(ErrorKind::SchemaViolation, where + ": missing field '" + key + "'");
    return *it;
}

const Json* optional_field(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
}

std::string get_string(const Json& obj, const char* key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (!v.is_string()) fail(ErrorKind::SchemaViolation, where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

double get_number(const Json& obj, const char* key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (!v.is_number()) fail(ErrorKind::SchemaViolation, where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::int64_t get_integer(const Json& obj, const char* key, const std::string& where) {
    const Json& v = field(obj, key, where);
    if (!v.is_number_integer()) fail(ErrorKind::SchemaViolation, where + ": field '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

Json from_vector(const Vector& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector to_vector(const Json& j, const std::string& where) {
    if (!j.is_array()) fail(ErrorKind::SchemaViolation, where + ": expected an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(ErrorKind::SchemaViolation, where + ": expected an array of numbers");
        v(static_cast<Index>(i)) = j[i].get<double>();
    }
    return v;
}

Json from_matrix(const Matrix& m) {
    Json out = Json::array();
    for (Index r = 0; r < m.rows(); ++r) out.push_back(from_vector(m.row(r).transpose()));
    return out;
}

Matrix to_matrix(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(ErrorKind::SchemaViolation, where + ": expected a nonempty array of rows");
    const auto rows = static_cast<Index>(j.size());
    Matrix m;
    for (Index r = 0; r < rows; ++r) {
        const Vector row = to_vector(j[static_cast<std::size_t>(r)], where);
        if (r == 0) m.resize(rows, row.size());
        if (row.size() != m.cols()) fail(ErrorKind::SchemaViolation, where + ": ragged matrix rows");
        m.row(r) = row.transpose();
    }
    return m;
}

void check_header(const Json& doc, std::string_view format, const std::string& where) {
    if (!doc.is_object()) fail(ErrorKind::SchemaViolation, where + ": document must be a JSON object");
    if (get_string(doc, "format", where) != format) {
        fail(ErrorKind::SchemaViolation, where + ": expected format '" + std::string(format) + "'");
    }
    if (get_integer(doc, "version", where) != 1) {
        fail(ErrorKind::VersionMismatch, where + ": unsupported version " + field(doc, "version", where).dump());
    }
}

std::vector<ExtraField> collect_extra(const Json& obj, std::initializer_list<std::string_view> known) {
    std::vector<ExtraField> out;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
        out.emplace_back(it.key(), it.value().dump());
    }
    return out;
}

void append_extra(Json& obj, const std::vector<ExtraField>& extra) {
    for (const auto& [key, raw] : extra) obj[key] = Json::parse(raw);
}

}  // namespace sake::json
