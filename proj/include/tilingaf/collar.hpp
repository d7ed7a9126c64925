#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tilingaf/system.hpp"

namespace tilingaf {

// A translation class of an unordered edge-adjacent tile pair: proto_a at the
// origin, proto_b at rel.  Stored in canonical orientation: the key
// (proto_a, proto_b, rel) is not larger than that of the flipped pair
// (proto_b, proto_a, -rel).
struct AdjacencyClass {
    std::size_t proto_a = 0;
    std::size_t proto_b = 0;
    Vec2 rel;

    static AdjacencyClass canonical(std::size_t a, std::size_t b, const Vec2& rel);

    friend bool operator<(const AdjacencyClass& l, const AdjacencyClass& r) {
        if (l.proto_a != r.proto_a) return l.proto_a < r.proto_a;
        if (l.proto_b != r.proto_b) return l.proto_b < r.proto_b;
        return Vec2::key_less(l.rel, r.rel);
    }
    friend bool operator==(const AdjacencyClass& l, const AdjacencyClass& r) {
        return l.proto_a == r.proto_a && l.proto_b == r.proto_b && l.rel == r.rel;
    }

    std::string str(const SubstSystem& s) const;
};

// The least set of edge-adjacent two-tile translation classes that contains
// every adjacency inside a subdivision rule and is closed under substitution
// (edge-adjacent child pairs of adjacent parents).  Computed on the root base
// system when `s` is a power (the generated tilings coincide).  Throws
// ClosureTooLarge beyond `bound` classes.
std::vector<AdjacencyClass> adjacency_closure(const SubstSystem& s, std::size_t bound = 4096);

// Whether for every prototile p all occurrence contexts (neighbors ranging
// over adjacency_closure) induce the same pattern of outside level-0 tiles
// touching the boundary of the level-k supertile of p: any two contexts that
// place distinct overlapping tiles against the boundary break the forcing.
bool forces_border_check(const SubstSystem& s, unsigned k);

// The least k in [1, cap] at which the system forces its border, or 0 when
// none does.
unsigned least_forcing_level(const SubstSystem& s, unsigned cap = 4);

// The context-independent pattern of outside tiles edge-adjacent to the
// boundary of supertile(S, p, k), in supertile coordinates (region =
// lambda^k * shape(p) at the origin), sorted canonically.  Throws
// NotBorderForcing when contexts disagree or leave part of the boundary
// undetermined.
std::vector<Tile> forced_pattern(const SubstSystem& s, const std::string& p, unsigned k);

// A translation class of a tile together with its complete first corona:
// center prototile at the origin, corona tiles sorted canonically.
struct CoronaClass {
    std::size_t proto = 0;
    std::vector<Tile> corona;

    std::string key() const;  // canonical string (center index + corona tiles)
};

// All first-corona classes realized by the generated tilings: scans level-m
// supertiles for tiles with complete coronas, closes the set under
// substitution (children of a collared tile inherit complete coronas), and
// stops when the set is stable across consecutive levels.  Deterministic
// order (center prototile, corona key).  Throws ClosureTooLarge when the scan
// exceeds `bound` classes or fails to stabilize.
std::vector<CoronaClass> corona_classes(const SubstSystem& s, std::size_t bound = 4096);

// The collared system: one labelled prototile per corona class ("<base>~<j>",
// label = base id, geometry unchanged) with the substitution induced on
// collared tiles.  When the collared system forces its border only at some
// level k in (1, 4], the k-th power is returned so that the result always
// forces its border at level 1.
SubstSystem collar_system(const SubstSystem& s);

}  // namespace tilingaf
