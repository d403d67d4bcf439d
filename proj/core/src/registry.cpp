#include "sake/registry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>

#include "sake/errors.hpp"

namespace sake {

void EditSpec::validate() const {
    if (subject.empty() || relation.empty() || old_object.empty() || new_object.empty()) {
        fail(ErrorKind::InvalidEdit, "edit subject, relation, old_object and new_object must all be nonempty");
    }
    if (old_object == new_object) fail(ErrorKind::InvalidEdit, "old_object and new_object must differ");
}

std::string_view distance_kind_name(DistanceKind kind) noexcept {
    return kind == DistanceKind::Cosine ? "cosine" : "euclidean";
}

DistanceKind parse_distance_kind(std::string_view name) {
    if (name == "euclidean") return DistanceKind::Euclidean;
    if (name == "cosine") return DistanceKind::Cosine;
    fail(ErrorKind::SchemaViolation, "unknown distance '" + std::string(name) + "'");
}

std::string_view representation_name(ScopeRepresentation rep) noexcept {
    return rep == ScopeRepresentation::ModelActivation ? "model" : "external";
}

ScopeRepresentation parse_representation(std::string_view name) {
    if (name == "model") return ScopeRepresentation::ModelActivation;
    if (name == "external") return ScopeRepresentation::ExternalEmbedding;
    fail(ErrorKind::SchemaViolation, "unknown scope representation '" + std::string(name) + "'");
}

double ScopeDetector::distance_to(const Vector& scope_vec) const {
    if (scope_vec.size() != centroid.size()) {
        fail(ErrorKind::DimensionMismatch, "scope vector has dimension " + std::to_string(scope_vec.size()) +
                                               ", detector expects " + std::to_string(centroid.size()));
    }
    if (distance == DistanceKind::Euclidean) return (scope_vec - centroid).norm();
    const double denom = scope_vec.norm() * centroid.norm();
    if (denom == 0.0) return 1.0;
    return 1.0 - scope_vec.dot(centroid) / denom;
}

bool is_iso8601_timestamp(std::string_view text) {
    static const std::regex pattern(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2}))");
    return std::regex_match(text.begin(), text.end(), pattern);
}

Registry::Registry(Index activation_dim, Index scope_dim) : activation_dim_(activation_dim), scope_dim_(scope_dim) {
    if (activation_dim <= 0 || scope_dim <= 0) {
        fail(ErrorKind::DimensionMismatch, "registry dimensions must be positive");
    }
}

const EditEntry* Registry::find(std::string_view id) const {
    for (const auto& e : entries_) {
        if (e->id == id) return e.get();
    }
    return nullptr;
}

void Registry::check_compatible(const EditEntry& entry) const {
    if (entry.map.dim() != activation_dim_) {
        fail(ErrorKind::DimensionMismatch, "edit '" + entry.id + "' maps " + std::to_string(entry.map.dim()) +
                                               "-dimensional activations, registry holds " +
                                               std::to_string(activation_dim_));
    }
    if (entry.detector.centroid.size() != scope_dim_) {
        fail(ErrorKind::DimensionMismatch, "edit '" + entry.id + "' has a " +
                                               std::to_string(entry.detector.centroid.size()) +
                                               "-dimensional centroid, registry scope_dim is " +
                                               std::to_string(scope_dim_));
    }
    if (entry.detector.representation == ScopeRepresentation::ModelActivation && scope_dim_ != activation_dim_) {
        fail(ErrorKind::DimensionMismatch, "edit '" + entry.id +
                                               "' detects scope on model activations but scope_dim != activation_dim");
    }
}

void Registry::add(EditEntry entry) {
    if (entry.id.empty()) fail(ErrorKind::InvalidEdit, "edit id must be nonempty");
    entry.spec.validate();
    if (!(entry.detector.epsilon > 0.0)) fail(ErrorKind::InvalidEdit, "edit '" + entry.id + "' needs epsilon > 0");
    if (!is_iso8601_timestamp(entry.created_at)) {
        fail(ErrorKind::InvalidEdit, "edit '" + entry.id + "' has a malformed created_at timestamp");
    }
    check_compatible(entry);
    if (find(entry.id) != nullptr) fail(ErrorKind::DuplicateEditId, "edit id '" + entry.id + "' already present");
    entries_.push_back(std::make_shared<const EditEntry>(std::move(entry)));
}

void Registry::remove(std::string_view id) {
    const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e->id == id; });
    if (it == entries_.end()) fail(ErrorKind::UnknownEditId, "no edit with id '" + std::string(id) + "'");
    entries_.erase(it);
}

const EditEntry* Registry::match_scope(const Vector& scope_vec) const {
    if (scope_vec.size() != scope_dim_) {
        fail(ErrorKind::DimensionMismatch, "scope vector has dimension " + std::to_string(scope_vec.size()) +
                                               ", registry scope_dim is " + std::to_string(scope_dim_));
    }
    const EditEntry* best = nullptr;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const auto& e : entries_) {
        const double d = e->detector.distance_to(scope_vec);
        if (!(d < e->detector.epsilon)) continue;
        if (best == nullptr || d < best_distance || (d == best_distance && e->id < best->id)) {
            best = e.get();
            best_distance = d;
        }
    }
    return best;
}

Registry add_edit(Registry registry, EditEntry entry) {
    registry.add(std::move(entry));
    return registry;
}

Registry remove_edit(Registry registry, std::string_view id) {
    registry.remove(id);
    return registry;
}

const EditEntry* match_scope(const Registry& registry, const Vector& scope_vec) {
    return registry.match_scope(scope_vec);
}

SharedRegistry::SharedRegistry(Registry initial)
    : current_(std::make_shared<const Registry>(std::move(initial))) {}

std::shared_ptr<const Registry> SharedRegistry::snapshot() const {
    std::shared_lock lock(mutex_);
    return current_;
}

void SharedRegistry::add(EditEntry entry) {
    std::unique_lock lock(mutex_);
    current_ = std::make_shared<const Registry>(add_edit(*current_, std::move(entry)));
}

void SharedRegistry::remove(std::string_view id) {
    std::unique_lock lock(mutex_);
    current_ = std::make_shared<const Registry>(remove_edit(*current_, id));
}

}  // namespace sake
