#pragma once
// Boundary analysis for substitution tiling systems.
//
// Every edge e of the substitution graph carries a set A(e) of side pairs
// (a, b): side a of the child prototile s(e), side b of the parent prototile
// r(e), such that the child side, placed at the rule position and shrunk back
// by 1/lambda, lands inside the parent side.  Chains of such pairs along a
// path describe how a tile's side survives as part of ever larger supertile
// boundaries.  This module computes those pair sets, the associated side
// automaton, infinite boundary chains, corner (two-direction) chains, the
// classification of eventually periodic paths by the shape of the boundary
// of their expanding supertile chain, the distinguished self-loop edges whose
// periodic paths mark corner points, and the refined cylinder partition built
// from boundary-hitting indicator sequences.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tilingaf/geom.hpp"
#include "tilingaf/graph.hpp"
#include "tilingaf/system.hpp"

namespace tilingaf {

// One surviving side pair on a graph edge: child side `a` maps into parent
// side `b`.  Sides are edge indices of the respective prototile polygons.
struct APair {
    std::size_t a = 0;
    std::size_t b = 0;

    bool operator==(const APair& o) const { return a == o.a && b == o.b; }
    bool operator<(const APair& o) const {
        return a != o.a ? a < o.a : b < o.b;
    }
};

// Side-pair sets for every graph edge plus structural health checks.
//
//  - p2_ok: on each edge, pairs with parallel child sides coincide (the side
//    automaton is forward-deterministic).
//  - p3_ok: on each edge, pairs with non-parallel child sides use adjacent
//    sides in both the child and the parent polygon.
//  - p5_ok: every parent side is hit by some edge whose pair set is a single
//    pair landing on it (needed for boundary-forcing constructions).
struct APairsReport {
    // pairs[k] lists the side pairs of edge index k, sorted by (a, b).
    std::vector<std::vector<APair>> pairs;
    std::size_t max_cardinality = 0;
    bool p2_ok = true;
    bool p3_ok = true;
    bool p5_ok = true;
    std::vector<std::string> p2_violations;
    std::vector<std::string> p3_violations;
    std::vector<std::string> p5_missing;  // "proto.side" with no singleton hit
};

APairsReport a_pairs(const SubstGraph& g);

// Forward-deterministic side automaton: next[k] maps a child side a to the
// parent side b it survives into across edge k.  When an edge carries two
// pairs with the same child side (a health violation), the smallest parent
// side is kept and `deterministic` is cleared.
struct BorderAutomaton {
    std::vector<std::map<std::size_t, std::size_t>> next;
    bool deterministic = true;

    // Side reached after crossing edge k starting from side a, if any.
    std::optional<std::size_t> step(std::size_t k, std::size_t a) const;
};

BorderAutomaton border_automaton(const SubstGraph& g);

// Does some side of direction t at the base tile of x survive the first m
// levels?  Requires x to determine at least m coordinates.
bool um_member(const SubstGraph& g, const PathSpec& x, std::size_t m,
               const Direction& t);

// An infinite surviving side chain along an eventually periodic path: the
// side sequence is side_prefix followed by side_cycle repeated forever, and
// dir is the direction of the level-1 side (constant along the chain).
struct BorderChain {
    Direction dir;
    std::vector<std::size_t> side_prefix;
    std::vector<std::size_t> side_cycle;

    std::string str() const;
    bool operator==(const BorderChain& o) const {
        return dir == o.dir && side_prefix == o.side_prefix &&
               side_cycle == o.side_cycle;
    }
};

// All infinite side chains along x (x must be eventually periodic).  Chains
// are returned sorted by their starting side.
std::vector<BorderChain> borders_of(const SubstGraph& g, const PathSpec& x);

// All prototile side directions of the system, sorted in rotational order.
std::vector<Direction> edge_directions(const SubstSystem& s);

// Purely periodic paths along which a corner survives forever: at every
// level the base vertex of the path has consecutive sides (a, a+1) with
// directions (s, t), and both sides survive the next level as consecutive
// sides again.  Requires s != t and det(s, t) != 0; enumerates all periodic
// solutions with period at most the number of (vertex, side) corner states.
// Each distinct rotation of a periodic solution is reported separately.
// Output is sorted by path string.
std::vector<PathSpec> corner_enumerate(const SubstGraph& g, const Direction& s,
                                       const Direction& t);

// How the expanding supertile chain of an eventually periodic path meets the
// plane:
//   I:   the supertiles exhaust the plane (no side survives forever);
//   II:  the boundary of the limiting region is a full line (a side chain
//        survives but no corner does);
//   III: the limiting region is a sector or union of sectors; the boundary
//        is a finite union of half-lines from a common center point.
enum class TilingType { I, II, III };

struct TypeClass {
    TilingType type = TilingType::I;
    // Type II: direction of the surviving side chain(s).
    std::vector<Direction> border_dirs;
    // Type III: the common endpoint of the boundary half-lines, and their
    // directions sorted rotationally.
    std::optional<Vec2> center;
    std::vector<Direction> half_lines;
    // The half-line set is assembled by completing the sector observed at
    // the path itself with the sector shapes realized elsewhere in the
    // system, using as few half-lines as possible.  If several minimal
    // completions disagree, their union is reported and this flag is set.
    bool assembly_ambiguous = false;
    // Number of coordinates of x examined to certify the classification.
    std::size_t certified_radius = 0;

    std::string str() const;
};

TypeClass classify_type(const SubstGraph& g, const PathSpec& x);

// The distinguished self-loop edges: e is included when the constant path
// (e, e, ...) is of type III (its supertile chain pins a corner point).
// Also checks that each such loop's pair set is diagonal with one or two
// pairs, and that every parent side is reachable by a singleton pair on an
// edge outside the set (both needed downstream).
struct CReport {
    std::vector<std::size_t> c_edges;  // edge indices, sorted
    bool two_possibilities_ok = true;
    bool p6_ok = true;
    std::vector<std::string> two_possibilities_violations;
    std::vector<std::string> p6_missing;
};

// Throws NormalizationRequired unless every periodic corner path of the
// system has period 1 (see normalize_periods).
CReport compute_C(const SubstGraph& g);

// Self-loop edges whose constant path is of type III, without the period-1
// gate.  Sorted by edge index.
std::vector<std::size_t> type_iii_loops(const SubstGraph& g);

// Least common multiple of the minimal periods of all periodic corner paths
// (1 when there are none).
unsigned normalization_exponent(const SubstGraph& g);

// Replace the system by the power that turns every periodic corner path into
// a fixed point, so each corner class is marked by a self-loop edge.
SubstSystem normalize_periods(const SubstSystem& s);

// The unique purely periodic path in the translation class of x (x must be
// of type III).  Throws NotTypeIII otherwise.
PathSpec find_periodic_rep(const SubstGraph& g, const PathSpec& x);

// The boundary segment controlled by a diagonal self-loop edge e: for a
// single pair {(a,a)} the part of parent side a from its start vertex to the
// shrunk image of its end vertex; for a double pair {(a,a), (a+1,a+1)} the
// whole side a.  Requires e to be a self-loop with a diagonal pair set.
Segment delta_edge(const SubstGraph& g, std::size_t e);

// Boundary-hitting indicator of x at depth n relative to loop edge e:
// scan x_n, x_{n-1}, ...; coordinates equal to e are skipped; the first
// other coordinate decides (1 when its source tile has a side landing inside
// delta_edge(e) within the same parent, 0 otherwise); all-e prefixes fall
// back to the depth-1 test on x_1.  Requires x to determine n coordinates.
int mu(const SubstGraph& g, std::size_t e, const PathSpec& x, std::size_t n);

// Refinement of the depth-n cylinder partition: two length-n paths are
// related when they share the terminal vertex and all indicators mu(e, x, n)
// over the given loop edges.  Kind is "XPrimeN".
CylinderPartition xprime_partition(const SubstGraph& g, std::size_t n,
                                   const std::vector<std::size_t>& loop_edges);

// Same, with the loop edges taken from compute_C (inherits its gate).
CylinderPartition xprime_partition(const SubstGraph& g, std::size_t n);

// Reusable analysis handle.  Precomputes the pair tables and the side
// automaton for one graph and caches loop data, boundary segments, and
// realized sector shapes across queries.  The free functions above rebuild
// that state on every call, which is fine for one-shot use; inside loops a
// handle is orders of magnitude faster.  The graph must outlive the handle.
class BorderAnalysis {
  public:
    explicit BorderAnalysis(const SubstGraph& g);
    ~BorderAnalysis();
    BorderAnalysis(BorderAnalysis&&) noexcept;
    BorderAnalysis& operator=(BorderAnalysis&&) noexcept;
    BorderAnalysis(const BorderAnalysis&) = delete;
    BorderAnalysis& operator=(const BorderAnalysis&) = delete;

    const SubstGraph& graph() const;
    const APairsReport& pairs() const;
    const BorderAutomaton& automaton() const;
    bool um_member(const PathSpec& x, std::size_t m, const Direction& t) const;
    std::vector<BorderChain> borders_of(const PathSpec& x) const;
    std::vector<PathSpec> corner_enumerate(const Direction& s,
                                           const Direction& t) const;
    TypeClass classify_type(const PathSpec& x) const;
    CReport compute_C() const;
    std::vector<std::size_t> type_iii_loops() const;
    unsigned normalization_exponent() const;
    PathSpec find_periodic_rep(const PathSpec& x) const;
    Segment delta_edge(std::size_t e) const;
    int mu(std::size_t e, const PathSpec& x, std::size_t n) const;
    CylinderPartition xprime_partition(
        std::size_t n, const std::vector<std::size_t>& loop_edges) const;
    CylinderPartition xprime_partition(std::size_t n) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tilingaf
