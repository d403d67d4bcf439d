#include <doctest.h>

#include <algorithm>
#include <string>
#include <atomic>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "sake/errors.hpp"
#include "sake/registry.hpp"
#include "sake/steering.hpp"

using namespace sake;

namespace {

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

EditEntry entry(std::string id, Vector centroid, double eps, LinearMap map) {
    EditEntry e;
    e.spec = EditSpec{"subject " + id, "relation", "old", "new"};
    e.id = std::move(id);
    e.detector.centroid = std::move(centroid);
    e.detector.epsilon = eps;
    e.map = std::move(map);
    return e;
}

EditEntry shift_entry(std::string id, Vector centroid, double eps, double shift) {
    const Index d = centroid.size();
    return entry(std::move(id), std::move(centroid), eps, LinearMap::uniform_shift(Vector::Constant(d, shift)));
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected sake::Error");
    return ErrorKind::IoError;
}

std::vector<Vector> outputs(const Registry& r, const std::vector<Vector>& probes) {
    std::vector<Vector> out;
    for (const auto& p : probes) out.push_back(steer_activation(r, p, p).post_map_activation);
    return out;
}

}  // namespace

TEST_CASE("edit fields and detector validation") {
    CHECK(kind_of([] { EditSpec{"", "r", "a", "b"}.validate(); }) == ErrorKind::InvalidEdit);
    CHECK(kind_of([] { EditSpec{"s", "r", "a", "a"}.validate(); }) == ErrorKind::InvalidEdit);
    CHECK_NOTHROW(EditSpec{"s", "r", "a", "b"}.validate());

    Registry r(2, 2);
    CHECK(kind_of([&] { r.add(shift_entry("e", v2(0, 0), 0.0, 1)); }) == ErrorKind::InvalidEdit);
    CHECK(kind_of([&] { r.add(shift_entry("e", Vector::Zero(3), 1.0, 1)); }) == ErrorKind::DimensionMismatch);
    CHECK(kind_of([&] { r.add(entry("e", v2(0, 0), 1.0, LinearMap::identity(3))); }) ==
          ErrorKind::DimensionMismatch);
}

TEST_CASE("model-activation scope requires matching dimensions") {
    Registry r(3, 2);
    EditEntry e = shift_entry("e", v2(0, 0), 1.0, 1);
    e.map = LinearMap::identity(3);
    e.detector.representation = ScopeRepresentation::ModelActivation;
    CHECK(kind_of([&] { r.add(e); }) == ErrorKind::DimensionMismatch);
    e.detector.representation = ScopeRepresentation::ExternalEmbedding;
    CHECK_NOTHROW(r.add(e));
}

TEST_CASE("add and remove") {
    Registry empty(2, 2);
    const Registry one = add_edit(empty, shift_entry("e1", v2(0, 0), 1, 1));
    REQUIRE(one.size() == 1);
    CHECK(one.entries()[0]->id == "e1");
    CHECK(empty.empty());

    CHECK(kind_of([&] { add_edit(one, shift_entry("e1", v2(5, 5), 1, 1)); }) == ErrorKind::DuplicateEditId);
    CHECK(kind_of([&] { remove_edit(one, "zz"); }) == ErrorKind::UnknownEditId);

    const Registry two = add_edit(one, shift_entry("e2", v2(10, 0), 1, 2));
    CHECK(save_registry(remove_edit(two, "e2")) == save_registry(one));
}

TEST_CASE("scope matching by hand distances") {
    Registry r(2, 2);
    r.add(shift_entry("a", v2(0, 0), 1.0, 1));
    CHECK(match_scope(r, v2(3, 4)) == nullptr);
    CHECK(match_scope(r, v2(0, 0))->id == "a");

    Registry two(2, 2);
    two.add(shift_entry("first", v2(0, 0), 2.0, 1));
    two.add(shift_entry("second", v2(10, 0), 2.0, 1));
    CHECK(match_scope(two, v2(1, 0))->id == "first");
    CHECK(match_scope(two, v2(9.5, 0))->id == "second");
    CHECK(match_scope(two, v2(5, 0)) == nullptr);
}

TEST_CASE("overlapping scopes: nearest wins, exact ties go to the lowest id") {
    Registry r(2, 2);
    r.add(shift_entry("zeta", v2(1, 0), 5.0, 1));
    r.add(shift_entry("alpha", v2(-1, 0), 5.0, 1));
    CHECK(match_scope(r, v2(0, 3))->id == "alpha");
    CHECK(match_scope(r, v2(0.5, 3))->id == "zeta");
}

TEST_CASE("distance is strict: a point exactly at epsilon is outside") {
    Registry r(2, 2);
    r.add(shift_entry("a", v2(0, 0), 5.0, 1));
    CHECK(match_scope(r, v2(3, 4)) == nullptr);
}

TEST_CASE("cosine distance") {
    ScopeDetector d;
    d.centroid = v2(1, 0);
    d.distance = DistanceKind::Cosine;
    d.epsilon = 0.5;
    CHECK(d.distance_to(v2(5, 0)) == doctest::Approx(0.0));
    CHECK(d.distance_to(v2(0, 2)) == doctest::Approx(1.0));
    CHECK(d.distance_to(v2(-1, 0)) == doctest::Approx(2.0));
    CHECK(d.contains(v2(1, 0.5)));
    CHECK_FALSE(d.contains(v2(0, 1)));
}

TEST_CASE("property: scope balls grow with epsilon") {
    Rng rng(40);
    const Index d = 6;
    const Vector c = oracle::gaussian_vector(rng, d);
    std::vector<Vector> probes;
    for (int i = 0; i < 400; ++i) probes.push_back(c + 2.0 * oracle::gaussian_vector(rng, d));
    for (DistanceKind kind : {DistanceKind::Euclidean, DistanceKind::Cosine}) {
        ScopeDetector lo, hi;
        lo.centroid = hi.centroid = c;
        lo.distance = hi.distance = kind;
        for (int k = 0; k < 50; ++k) {
            const double a = rng.uniform(0.0, 8.0), b = rng.uniform(0.0, 8.0);
            lo.epsilon = std::min(a, b);
            hi.epsilon = std::max(a, b);
            for (const auto& p : probes) {
                if (lo.contains(p)) CHECK(hi.contains(p));
            }
        }
    }
}

TEST_CASE("property: match_scope is pure") {
    Rng rng(41);
    Registry r(4, 4);
    for (int i = 0; i < 5; ++i) {
        r.add(shift_entry("e" + std::to_string(i), oracle::gaussian_vector(rng, 4) * 3.0, 2.5, i));
    }
    for (int i = 0; i < 200; ++i) {
        const Vector p = oracle::gaussian_vector(rng, 4) * 3.0;
        CHECK(match_scope(r, p) == match_scope(r, p));
    }
}

TEST_CASE("property: disjoint edits commute and undo exactly") {
    Rng rng(42);
    const Index d = 5;
    const double eps = 1.0;
    std::vector<EditEntry> edits;
    for (int i = 0; i < 6; ++i) {
        Vector c = Vector::Zero(d);
        c(i % d) = 10.0 * (i + 1);
        edits.push_back(entry("e" + std::to_string(i), c, eps,
                              LinearMap::optimal_transport(SymMatrix(oracle::random_spd(rng, d)),
                                                           oracle::gaussian_vector(rng, d))));
    }
    std::vector<Vector> probes;
    for (const auto& e : edits)
        for (int k = 0; k < 20; ++k) probes.push_back(e.detector.centroid + 0.4 * oracle::gaussian_vector(rng, d));
    for (int k = 0; k < 40; ++k) probes.push_back(oracle::gaussian_vector(rng, d) * 30.0);

    Registry forward(d, d), backward(d, d);
    for (const auto& e : edits) forward.add(e);
    for (auto it = edits.rbegin(); it != edits.rend(); ++it) backward.add(*it);
    CHECK(outputs(forward, probes) == outputs(backward, probes));

    Registry base(d, d);
    for (std::size_t i = 0; i + 1 < edits.size(); ++i) base.add(edits[i]);
    const Registry undone = remove_edit(add_edit(base, edits.back()), edits.back().id);
    CHECK(outputs(undone, probes) == outputs(base, probes));

    // Remove then re-add: same outputs as never removing.
    const Registry readded = add_edit(remove_edit(forward, "e2"), edits[2]);
    CHECK(outputs(readded, probes) == outputs(forward, probes));

    // e1, e2 then drop e1: same as a fresh registry with only e2.
    Registry pair(d, d), only(d, d);
    pair.add(edits[1]);
    pair.add(edits[2]);
    only.add(edits[2]);
    CHECK(outputs(remove_edit(pair, "e1"), probes) == outputs(only, probes));

    // Removing the last edit leaves every input unchanged.
    Registry single(d, d);
    single.add(edits[0]);
    const Registry none = remove_edit(single, "e0");
    CHECK(outputs(none, probes) == probes);
}

TEST_CASE("copies stay valid while the original changes") {
    Registry r(2, 2);
    r.add(shift_entry("a", v2(0, 0), 1, 1));
    const Registry snapshot = r;
    r.remove("a");
    r.add(shift_entry("b", v2(5, 5), 1, 1));
    REQUIRE(snapshot.size() == 1);
    CHECK(snapshot.entries()[0]->id == "a");
}

TEST_CASE("shared registry: concurrent readers always see a consistent version") {
    SharedRegistry shared(Registry(2, 2));
    std::atomic<bool> stop{false};
    std::atomic<long> bad{0};
    std::vector<std::thread> readers;
    for (int t = 0; t < 4; ++t) {
        readers.emplace_back([&] {
            while (!stop.load()) {
                const auto snap = shared.snapshot();
                // Versions hold {}, {x} or {x, y}, in that order.
                const auto n = snap->size();
                if (n > 2 || (n >= 1 && snap->entries()[0]->id != "x")) ++bad;
                const auto out = steer_activation(*snap, v2(0, 0), v2(0, 0));
                if (out.steered != (n >= 1)) ++bad;
            }
        });
    }
    for (int i = 0; i < 300; ++i) {
        shared.add(shift_entry("x", v2(0, 0), 1, 1));
        shared.add(shift_entry("y", v2(9, 9), 1, 1));
        shared.remove("y");
        shared.remove("x");
    }
    stop = true;
    for (auto& th : readers) th.join();
    CHECK(bad.load() == 0);
    CHECK(shared.snapshot()->empty());
    CHECK_THROWS_AS(shared.remove("x"), Error);
}

TEST_CASE("persistence round-trip") {
    Rng rng(50);
    Registry r(3, 2);
    r.add(entry("e1", v2(0, 1), 2.0, LinearMap::identity(3)));
    r.add(entry("e2", v2(5, 1), 3.0, LinearMap::uniform_shift(oracle::gaussian_vector(rng, 3))));
    EditEntry e3 = entry("e3", v2(-5, 1), 6.75,
                         LinearMap::optimal_transport(SymMatrix(oracle::random_spd(rng, 3)),
                                                      oracle::gaussian_vector(rng, 3)));
    e3.detector.distance = DistanceKind::Cosine;
    e3.created_at = "2026-01-02T03:04:05Z";
    r.add(e3);

    const std::string doc = save_registry(r);
    const Registry back = load_registry(doc);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(*back.entries()[i] == *r.entries()[i]);
    CHECK(save_registry(back) == doc);
}

TEST_CASE("loading rejects bad documents and ignores unknown fields") {
    Registry r(2, 2);
    r.add(shift_entry("a", v2(0, 0), 1, 1));
    std::string doc = save_registry(r);

    std::string extra = doc;
    extra.insert(1, "\"comment\":\"hello\",");
    CHECK(load_registry(extra).size() == 1);

    std::string wrong_dim = doc;
    const auto pos = wrong_dim.find("\"activation_dim\":2");
    REQUIRE(pos != std::string::npos);
    wrong_dim.replace(pos, 18, "\"activation_dim\":3");
    CHECK(kind_of([&] { load_registry(wrong_dim); }) == ErrorKind::DimensionMismatch);

    std::string v2doc = doc;
    v2doc.replace(v2doc.find("\"version\":1"), 11, "\"version\":2");
    CHECK(kind_of([&] { load_registry(v2doc); }) == ErrorKind::VersionMismatch);

    CHECK(kind_of([] { load_registry("{not json"); }) == ErrorKind::SchemaViolation);
    CHECK(kind_of([] { load_registry("{\"format\":\"sake-registry\",\"version\":1}"); }) ==
          ErrorKind::SchemaViolation);
}

TEST_CASE("edit documents round-trip") {
    EditDocument doc{2, 2, shift_entry("a", v2(1, 2), 3, 4)};
    const std::string text = save_edit(doc);
    const EditDocument back = load_edit(text);
    CHECK(back.entry == doc.entry);
    CHECK(save_edit(back) == text);
}

TEST_CASE("timestamps") {
    CHECK(is_iso8601_timestamp("1970-01-01T00:00:00Z"));
    CHECK(is_iso8601_timestamp("2026-10-17T12:30:59Z"));
    CHECK_FALSE(is_iso8601_timestamp("2026-10-17 12:30:59"));
    CHECK_FALSE(is_iso8601_timestamp("yesterday"));
}
