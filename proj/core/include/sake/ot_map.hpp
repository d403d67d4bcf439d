#pragma once

#include <string_view>

#include "sake/linalg.hpp"

namespace sake {

enum class MapKind { OptimalTransport, UniformShift, Identity };

std::string_view map_kind_name(MapKind kind) noexcept;  // "ot" | "uniform" | "identity"
MapKind parse_map_kind(std::string_view name);

// Affine activation map h -> A h + b.
//
// Invariants are enforced by the factories: an OptimalTransport map has a
// symmetric PSD linear part, a UniformShift map has A = I exactly, and the
// Identity map additionally has b = 0.
class LinearMap {
public:
    static LinearMap identity(Index dim);
    static LinearMap uniform_shift(Vector offset);
    static LinearMap optimal_transport(SymMatrix linear, Vector offset);

    // Rebuilds a map read from storage and re-checks the kind invariants.
    static LinearMap restore(MapKind kind, SymMatrix linear, Vector offset);

    MapKind kind() const noexcept { return kind_; }
    const SymMatrix& linear() const noexcept { return linear_; }
    const Vector& offset() const noexcept { return offset_; }
    Index dim() const noexcept { return offset_.size(); }

    Vector apply(const Vector& h) const;

    friend bool operator==(const LinearMap& a, const LinearMap& b) {
        return a.kind_ == b.kind_ && a.linear_ == b.linear_ && a.offset_.size() == b.offset_.size() &&
               a.offset_ == b.offset_;
    }

private:
    LinearMap(MapKind kind, SymMatrix linear, Vector offset)
        : kind_(kind), linear_(std::move(linear)), offset_(std::move(offset)) {}

    MapKind kind_ = MapKind::Identity;
    SymMatrix linear_;
    Vector offset_;
};

// Gaussian Monge map between the two summaries:
//   A = S_s^{-1/2} (S_s^{1/2} S_t S_s^{1/2})^{1/2} S_s^{-1/2},  b = mu_t - A mu_s.
// It pushes N(mu_s, S_s) forward onto N(mu_t, S_t) exactly.
LinearMap fit_ot_map(const GaussianSummary& source, const GaussianSummary& target);

// Mean-shift baseline: A = I, b = mu_t - mu_s.
LinearMap fit_uniform_shift(const GaussianSummary& source, const GaussianSummary& target);

LinearMap fit_map(MapKind kind, const GaussianSummary& source, const GaussianSummary& target);

Vector apply_map(const LinearMap& map, const Vector& h);

}  // namespace sake
