#include "sake/ot_map.hpp"

#include <string>

#include "sake/errors.hpp"

namespace sake {

std::string_view map_kind_name(MapKind kind) noexcept {
    switch (kind) {
        case MapKind::OptimalTransport: return "ot";
        case MapKind::UniformShift: return "uniform";
        case MapKind::Identity: return "identity";
    }
    return "identity";
}

MapKind parse_map_kind(std::string_view name) {
    if (name == "ot") return MapKind::OptimalTransport;
    if (name == "uniform") return MapKind::UniformShift;
    if (name == "identity") return MapKind::Identity;
    fail(ErrorKind::SchemaViolation, "unknown map kind '" + std::string(name) + "'");
}

LinearMap LinearMap::identity(Index dim) {
    if (dim <= 0) fail(ErrorKind::DimensionMismatch, "map dimension must be positive");
    return LinearMap(MapKind::Identity, SymMatrix::identity(dim), Vector::Zero(dim));
}

LinearMap LinearMap::uniform_shift(Vector offset) {
    if (offset.size() == 0) fail(ErrorKind::DimensionMismatch, "map dimension must be positive");
    require_finite(offset, "map offset");
    const Index d = offset.size();
    return LinearMap(MapKind::UniformShift, SymMatrix::identity(d), std::move(offset));
}

LinearMap LinearMap::optimal_transport(SymMatrix linear, Vector offset) {
    if (offset.size() == 0 || linear.dim() != offset.size()) {
        fail(ErrorKind::DimensionMismatch, "linear part is " + std::to_string(linear.dim()) +
                                               "-dimensional but offset has " + std::to_string(offset.size()) +
                                               " entries");
    }
    require_finite(offset, "map offset");
    if (!linear.matrix().allFinite()) fail(ErrorKind::InvalidArgument, "map matrix contains NaN or Inf");
    if (smallest_eigenvalue(linear) < -eigen_tolerance(linear)) {
        fail(ErrorKind::NotPositiveSemidefinite, "optimal-transport map must have a PSD linear part");
    }
    return LinearMap(MapKind::OptimalTransport, std::move(linear), std::move(offset));
}

LinearMap LinearMap::restore(MapKind kind, SymMatrix linear, Vector offset) {
    switch (kind) {
        case MapKind::Identity:
            if (linear.dim() != offset.size() || linear != SymMatrix::identity(offset.size()) || !offset.isZero(0.0)) {
                fail(ErrorKind::SchemaViolation, "identity map must have A = I and b = 0");
            }
            return identity(offset.size());
        case MapKind::UniformShift:
            if (linear.dim() != offset.size() || linear != SymMatrix::identity(offset.size())) {
                fail(ErrorKind::SchemaViolation, "uniform-shift map must have A = I exactly");
            }
            return uniform_shift(std::move(offset));
        case MapKind::OptimalTransport:
            if (linear.dim() == offset.size() && linear.matrix().allFinite() &&
                smallest_eigenvalue(linear) < -eigen_tolerance(linear)) {
                fail(ErrorKind::SchemaViolation, "optimal-transport map must have a PSD linear part");
            }
            return optimal_transport(std::move(linear), std::move(offset));
    }
    fail(ErrorKind::SchemaViolation, "unknown map kind");
}

Vector LinearMap::apply(const Vector& h) const {
    if (h.size() != dim()) {
        fail(ErrorKind::DimensionMismatch, "activation has dimension " + std::to_string(h.size()) +
                                               ", map expects " + std::to_string(dim()));
    }
    switch (kind_) {
        case MapKind::Identity: return h;
        case MapKind::UniformShift: return h + offset_;
        case MapKind::OptimalTransport: break;
    }
    Vector out = linear_.matrix() * h;
    out += offset_;
    return out;
}

namespace {

void check_pair(const GaussianSummary& source, const GaussianSummary& target) {
    if (source.dim() == 0 || source.dim() != target.dim() || source.cov.dim() != source.dim() ||
        target.cov.dim() != target.dim()) {
        fail(ErrorKind::DimensionMismatch, "source is " + std::to_string(source.dim()) + "-dimensional, target is " +
                                               std::to_string(target.dim()) + "-dimensional");
    }
}

}  // namespace

LinearMap fit_ot_map(const GaussianSummary& source, const GaussianSummary& target) {
    check_pair(source, target);
    const SymMatrix root = psd_sqrt(source.cov);
    const SymMatrix inv_root = psd_inv_sqrt(source.cov);
    const SymMatrix inner(root.matrix() * target.cov.matrix() * root.matrix());
    const SymMatrix middle = psd_sqrt(inner);
    SymMatrix linear(inv_root.matrix() * middle.matrix() * inv_root.matrix());
    Vector offset = target.mean - linear.matrix() * source.mean;
    return LinearMap::optimal_transport(std::move(linear), std::move(offset));
}

LinearMap fit_uniform_shift(const GaussianSummary& source, const GaussianSummary& target) {
    check_pair(source, target);
    return LinearMap::uniform_shift(target.mean - source.mean);
}

LinearMap fit_map(MapKind kind, const GaussianSummary& source, const GaussianSummary& target) {
    switch (kind) {
        case MapKind::OptimalTransport: return fit_ot_map(source, target);
        case MapKind::UniformShift: return fit_uniform_shift(source, target);
        case MapKind::Identity:
            check_pair(source, target);
            return LinearMap::identity(source.dim());
    }
    fail(ErrorKind::InvalidArgument, "unknown map kind");
}

Vector apply_map(const LinearMap& map, const Vector& h) { return map.apply(h); }

}  // namespace sake
