#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tilingaf/geom.hpp"

namespace tilingaf {

// ---------------------------------------------------------------------------
// Core data model
// ---------------------------------------------------------------------------

// A prototile carries its outline with the puncture at the origin (required to
// be interior).  Distinct prototiles may share geometry and differ only in the
// label (labelled systems arise from collaring; for plain systems label == id).
struct Prototile {
    std::string id;
    std::string label;
    Polygon shape;
};

// A placed tile: prototile `proto` translated so its puncture sits at `pos`.
struct Tile {
    std::string proto;
    Vec2 pos;

    friend bool operator==(const Tile& l, const Tile& r) {
        return l.proto == r.proto && l.pos == r.pos;
    }
    // Deterministic order for normalized patches: (proto, pos) lexicographic.
    static bool key_less(const Tile& l, const Tile& r) {
        if (l.proto != r.proto) return l.proto < r.proto;
        return Vec2::key_less(l.pos, r.pos);
    }
};

struct Patch {
    std::vector<Tile> tiles;
    std::optional<std::size_t> marked;
};

// A polygonal substitution tiling system: prototiles, inflation factor, and a
// subdivision rule mapping each prototile p to the tiles whose union is
// lambda * shape(p).
struct SubstSystem {
    long field_d = 0;  // 0 = rational coefficients; else Q(sqrt(field_d))
    FieldElem lambda;
    std::vector<Prototile> prototiles;
    std::vector<std::vector<Tile>> rules;  // rules[i] subdivides prototiles[i]
    bool asserted_aperiodic = false;
    bool asserted_fpc = false;

    // Provenance for systems produced by power_system: analyses that are
    // invariants of the generated tiling space (corona classes) may be taken
    // from the base system.  Never serialized.
    std::shared_ptr<const SubstSystem> power_base;
    unsigned power_exp = 1;

    std::size_t size() const { return prototiles.size(); }
    // Index of a prototile id; throws ParseError when unknown.
    std::size_t index_of(const std::string& id) const;
    bool has_proto(const std::string& id) const;
    const Prototile& proto(const std::string& id) const { return prototiles[index_of(id)]; }
    const std::vector<Tile>& rule_of(const std::string& id) const { return rules[index_of(id)]; }
};

// Column-indexed by parent: entry (p, q) = number of tiles of type p in rule(q).
struct SubstMatrix {
    std::vector<std::string> ids;
    std::vector<std::vector<long>> m;  // m[p][q]

    long at(std::size_t p, std::size_t q) const { return m[p][q]; }
    std::size_t size() const { return ids.size(); }
    SubstMatrix times(const SubstMatrix& other) const;
    SubstMatrix power(unsigned n) const;
};

// ---------------------------------------------------------------------------
// Validation and hypothesis checks
// ---------------------------------------------------------------------------

struct Violation {
    std::string code;    // e.g. "structure", "origin", "cover", "P1", "P4"
    std::string detail;  // human-readable witness
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
    void fail(std::string code, std::string detail) {
        ok = false;
        violations.push_back({std::move(code), std::move(detail)});
    }
};

// Structural well-formedness: ids unique, rules well-typed and nonempty,
// lambda > 1, declared field respected, origin interior to every shape, and
// each rule an exact cover of the inflated prototile.
ValidationReport validate_system(const SubstSystem& s);

// Edge condition on subdivisions: every edge of every rule tile, scaled back
// by 1/lambda, lies either inside an edge of the parent or (except possibly
// its endpoints) strictly interior to the parent.  Partial edge-on-edge
// overlaps are violations.
ValidationReport check_P1(const SubstSystem& s);

// Length growth: lambda^2 * len^2(a1) > 4 * len^2(a2) for all prototile edges
// a1, a2 (squared comparison keeps arithmetic exact in the field).
ValidationReport check_P4(const SubstSystem& s);

// ---------------------------------------------------------------------------
// Expansion and preprocessing
// ---------------------------------------------------------------------------

// Level-n supertile of p, anchored so the level-n puncture is at the origin:
// paste(n, p) = union over rule tiles (q, v) of paste(n-1, q) + lambda^(n-1) v.
// Tiles cover lambda^n * shape(p).
Patch supertile(const SubstSystem& s, const std::string& p, unsigned n);

SubstMatrix subst_matrix(const SubstSystem& s);

// Replaces the rule by its N-fold iterate and lambda by lambda^N; the tiling
// space is unchanged.  Keeps a provenance pointer to s.
SubstSystem power_system(const SubstSystem& s, unsigned n);

struct PrimitivityResult {
    bool primitive = false;
    unsigned witness = 0;  // least m with M^m entrywise positive (when primitive)
};

// M is primitive iff M^m > 0 entrywise for some m <= dim^2.
PrimitivityResult check_primitive(const SubstSystem& s);

}  // namespace tilingaf
