#pragma once

// Private helpers shared by the JSON readers and writers.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sake/errors.hpp"
#include "sake/linalg.hpp"
#include "sake/records.hpp"

namespace sake::json {

using Json = nlohmann::ordered_json;

Json parse(std::string_view text, const std::string& where);

// Compact serialization; doubles use the shortest round-trip representation.
std::string dump(const Json& j);

const Json& field(const Json& obj, const char* key, const std::string& where);
const Json* optional_field(const Json& obj, const char* key);

std::string get_string(const Json& obj, const char* key, const std::string& where);
double get_number(const Json& obj, const char* key, const std::string& where);
std::int64_t get_integer(const Json& obj, const char* key, const std::string& where);

Json from_vector(const Vector& v);
Vector to_vector(const Json& j, const std::string& where);
Json from_matrix(const Matrix& m);
Matrix to_matrix(const Json& j, const std::string& where);

// Checks "format" and "version" of a top-level document.
void check_header(const Json& doc, std::string_view format, const std::string& where);

// Copies every member of obj whose key is not in `known` as raw JSON text.
std::vector<ExtraField> collect_extra(const Json& obj, std::initializer_list<std::string_view> known);
void append_extra(Json& obj, const std::vector<ExtraField>& extra);

}  // namespace sake::json
