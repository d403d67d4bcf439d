#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sake/linalg.hpp"
#include "sake/ot_map.hpp"

namespace sake {

// Default scope radius on the external-embedding channel (Euclidean).
inline constexpr double kDefaultEpsilon = 6.75;

struct EditSpec {
    std::string subject;
    std::string relation;
    std::string old_object;
    std::string new_object;

    // Throws InvalidEdit on empty fields or old_object == new_object.
    void validate() const;

    friend bool operator==(const EditSpec&, const EditSpec&) = default;
};

enum class DistanceKind { Euclidean, Cosine };
enum class ScopeRepresentation { ModelActivation, ExternalEmbedding };

std::string_view distance_kind_name(DistanceKind kind) noexcept;  // "euclidean" | "cosine"
DistanceKind parse_distance_kind(std::string_view name);
std::string_view representation_name(ScopeRepresentation rep) noexcept;  // "model" | "external"
ScopeRepresentation parse_representation(std::string_view name);

// Membership test for one edit's input space: distance to the source centroid
// strictly below epsilon.
struct ScopeDetector {
    Vector centroid;
    double epsilon = kDefaultEpsilon;
    DistanceKind distance = DistanceKind::Euclidean;
    ScopeRepresentation representation = ScopeRepresentation::ExternalEmbedding;

    double distance_to(const Vector& scope_vec) const;
    bool contains(const Vector& scope_vec) const { return distance_to(scope_vec) < epsilon; }

    friend bool operator==(const ScopeDetector& a, const ScopeDetector& b) {
        return a.centroid.size() == b.centroid.size() && a.centroid == b.centroid && a.epsilon == b.epsilon &&
               a.distance == b.distance && a.representation == b.representation;
    }
};

// Fixed timestamp used when the caller does not supply one; keeps documents
// reproducible from their inputs.
inline constexpr std::string_view kEpochTimestamp = "1970-01-01T00:00:00Z";

struct EditEntry {
    std::string id;
    EditSpec spec;
    ScopeDetector detector;
    LinearMap map = LinearMap::identity(1);
    std::string created_at = std::string(kEpochTimestamp);

    friend bool operator==(const EditEntry&, const EditEntry&) = default;
};

bool is_iso8601_timestamp(std::string_view text);

// Ordered set of edits sharing one activation and one scope dimension.
//
// Entries are immutable and shared between copies, so copying a registry is
// cheap and a copy stays valid while the original is modified.
class Registry {
public:
    Registry(Index activation_dim, Index scope_dim);

    Index activation_dim() const noexcept { return activation_dim_; }
    Index scope_dim() const noexcept { return scope_dim_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    std::span<const std::shared_ptr<const EditEntry>> entries() const noexcept { return entries_; }
    const EditEntry* find(std::string_view id) const;

    // Throws DimensionMismatch if the entry does not fit this registry.
    void check_compatible(const EditEntry& entry) const;

    void add(EditEntry entry);
    void remove(std::string_view id);

    // Nearest in-scope edit; ties go to the lexicographically lowest id.
    const EditEntry* match_scope(const Vector& scope_vec) const;

private:
    Index activation_dim_;
    Index scope_dim_;
    std::vector<std::shared_ptr<const EditEntry>> entries_;
};

Registry add_edit(Registry registry, EditEntry entry);
Registry remove_edit(Registry registry, std::string_view id);
const EditEntry* match_scope(const Registry& registry, const Vector& scope_vec);

// Registry shared between threads: readers take snapshots, writers swap in a
// new version under an exclusive lock.
class SharedRegistry {
public:
    explicit SharedRegistry(Registry initial);

    std::shared_ptr<const Registry> snapshot() const;
    void add(EditEntry entry);
    void remove(std::string_view id);

private:
    mutable std::shared_mutex mutex_;
    std::shared_ptr<const Registry> current_;
};

// {"format":"sake-registry","version":1,...}
std::string save_registry(const Registry& registry);
Registry load_registry(std::string_view document);

// Single fitted edit, as written by `sake fit`:
// {"format":"sake-edit","version":1,"activation_dim":D,"scope_dim":S,"entry":{...}}
struct EditDocument {
    Index activation_dim = 0;
    Index scope_dim = 0;
    EditEntry entry;
};

std::string save_edit(const EditDocument& doc);
EditDocument load_edit(std::string_view document);

}  // namespace sake
