#pragma once
// Translation charts between boundary cylinder sets.
//
// For a prototile side (p, a) whose direction is t, a chart packages a
// depth-3 cylinder domain U = {x : x_1 = e1, x_2 = e2, x_3 = e3} built from
// singleton side-pair edges, together with a translation vector u.  The
// translation moves the marked tile of any tiling in the domain onto the
// forced neighbour tile across the inflated side a3, so paths whose side
// chain survives in direction t are carried to paths whose mirrored chain
// survives in direction -t.  An atlas holds one chart per prototile side.
// The remaining operations verify, in finite exact form, the properties the
// charts need: the border flip law, the separation of chart domains and
// images inside the refined cylinder partition, the measure decay of border
// cylinder sets, and the gluing of boundary orbit classes.

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tilingaf/borders.hpp"
#include "tilingaf/geom.hpp"
#include "tilingaf/graph.hpp"
#include "tilingaf/system.hpp"

namespace tilingaf {

// One translation chart for prototile side (p, a), direction t = dir(a).
//
// Domain: paths starting (e1, e2, e3), where the pair tables are the
// singletons A(e1) = {(a1, a2)}, A(e2) = {(a2, a3)}, A(e3) = {(a3, a)},
// r(e3) = p, and e3 is not a corner loop.  Across the inflated side a3 of
// s(e3) sits the forced neighbour: prototile q at position v (in inflated
// s(e3) coordinates) with its side b on the inflated a3, dir(b) = -t.  The
// edge f has r(f) = q and singleton pair {(b_prime, b)}, so the image paths
// start with f and carry the mirrored side chain from b_prime.
//
// The chart translation, in marked-tile coordinates of a domain tiling, is
//   u = disp(f) + lambda v - lambda disp(e2) - disp(e1).
struct BetaChart {
    std::size_t p = 0;  // parent prototile index
    std::size_t a = 0;  // parent side index
    Direction t{Vec2(FieldElem(1), FieldElem(0))};

    std::size_t e1 = 0, e2 = 0, e3 = 0;  // domain cylinder edges
    std::size_t a1 = 0, a2 = 0, a3 = 0;  // forced side chain below a

    std::size_t q = 0;        // forced neighbour prototile
    Vec2 v;                   // its position in inflated s(e3) coordinates
    std::size_t b = 0;        // its side lying inside the inflated a3
    std::size_t f = 0;        // image first edge: r(f) = q, A(f) = {(b', b)}
    std::size_t b_prime = 0;  // child side opening the mirrored chain
    Vec2 u;                   // chart translation vector

    std::string str() const;
};

// One chart per (prototile, side), sorted by (p, a).
struct Atlas {
    std::vector<BetaChart> charts;

    // Chart for (prototile index, side index), or null.
    const BetaChart* find(std::size_t p, std::size_t a) const;
};

// Representative boundary directions.  `realized` lists every direction t
// for which an infinite side chain of direction t exists (the side automaton
// has a state of direction t on or reaching a cycle).  `dirs` keeps one of
// each opposite pair {t, -t}: the member with positive x, or positive y on
// the vertical axis.
struct DirectionSetF {
    std::vector<Direction> realized;  // rotational order
    std::vector<Direction> dirs;      // rotational order

    bool contains(const Direction& t) const;
};

// --- verification reports ---------------------------------------------------

// Border flip law, checked per chart.
//
// geometry_ok: the deflated image side lands inside the chart side,
//   (1/lambda^3)(segment(b') + u)  inside  segment(a) shifted by
//   -disp(e3)/lambda - disp(e2)/lambda^2 - disp(e1)/lambda^3.
// Each case takes an eventually periodic domain path x, computes the image
// path y = beta image of x, and compares: x carries a direction-t chain iff
// y carries a direction -t chain.  round_trip_ok: translating y back by -u
// recovers x exactly.
struct FlipCase {
    std::string chart;  // "proto.side"
    std::string path;
    std::string image;
    bool lhs = false;           // x has a t chain
    bool rhs = false;           // y has a -t chain
    bool round_trip_ok = false;
    bool ok = false;
};

struct FlipReport {
    std::size_t charts_checked = 0;
    std::size_t cases_checked = 0;
    std::size_t geometry_failures = 0;
    std::size_t violations = 0;  // flip mismatches + round trip failures
    std::vector<std::string> geometry_failed_charts;
    std::vector<FlipCase> failures;
    std::vector<FlipCase> cases;  // all cases, for reporting
    bool ok() const { return geometry_failures == 0 && violations == 0; }
};

// Depth-n certificates for membership in the boundary sets picked out by a
// direction set F.  A source certificate is a depth-n path that starts with
// a chart's (e1, e2, e3), where the chart direction t lies in F, and whose
// side chain from a1 survives all n levels.  An image certificate starts
// with a chart's f and carries the mirrored chain from b_prime for n levels.
// Each certificate records the block key of the refined depth-n cylinder
// partition: terminal vertex plus the boundary-hitting indicators over the
// corner loop edges.
struct CrossCert {
    std::string path;       // comma-joined edge ids, depth n
    std::string chart;      // "proto.side"
    std::string dir;        // chain direction at level 1
    bool image_side = false;
    std::string block_key;  // "v=<vertex>;mu=<bits>"
};

// Verifies that certificates with distinct chain directions never share a
// refined partition block, and that no source certificate shares a block
// with an image certificate.
struct CrossReport {
    unsigned depth = 0;
    std::size_t source_certs = 0;  // exact count (dynamic programming)
    std::size_t image_certs = 0;
    std::size_t direction_collisions = 0;  // certificate pairs, exact
    std::size_t cross_collisions = 0;
    // explicit certificates, capped at 20000 entries in enumeration order;
    // complete lists whenever certificates_complete is true
    std::vector<CrossCert> certificates;
    bool certificates_complete = true;
    std::vector<std::string> collisions;  // human-readable details
    bool ok() const {
        return direction_collisions == 0 && cross_collisions == 0;
    }
};

// Total invariant measure of the depth-m cylinder sets whose base side
// chain survives m levels in direction t, for m = 1..m_max.  Computed by a
// weighted automaton sum, not path enumeration, so large m is cheap.
struct DecayReport {
    Direction t{Vec2(FieldElem(1), FieldElem(0))};
    bool exact = true;
    std::vector<std::string> nu_exact;  // per m, exact rationals (if exact)
    std::vector<double> nu;             // per m
    std::vector<double> ratios;         // nu[m+1] / nu[m]
    double max_tail_ratio = 0.0;        // max ratio over the second half
};

// Orbit gluing summary.
//
// Corner loop edges whose constant paths pin the same boundary picture are
// grouped into families by their half-line direction set; each member is
// the corner class of one sector between consecutive half-lines.  For every
// half-line the report looks for a chart of matching direction, builds an
// eventually periodic witness path in its domain whose chain survives
// forever, computes its image, and confirms the flip; success glues the two
// sectors adjacent to that half-line.  residual_pairs counts the sector
// adjacencies left unglued (connected components of the sector cycle after
// gluing, minus one).  Line samples are non-corner self-loop paths whose
// boundary is a full line; gluing them needs one chart per direction.
struct RayGlue {
    std::string ray;  // direction
    bool glued = false;
    std::string chart;    // "proto.side" when glued
    std::string witness;  // domain path
    std::string image;    // image path
    std::string left_member, right_member;  // corner loop edge ids
};

struct SectorFamily {
    std::vector<std::string> rays;     // rotational order
    std::vector<std::string> members;  // corner loop edge ids, sector order
    std::vector<std::string> centers;  // member corner points
    bool counts_match = false;         // one member per sector
    std::vector<RayGlue> glues;
    std::size_t residual_pairs = 0;
};

struct LineSample {
    std::string path;  // "|loop"
    std::vector<std::string> dirs;
    bool glued = false;
    std::string chart;
    std::string witness;
    std::string image;
};

struct SplitReport {
    bool atlas_ok = false;
    std::string atlas_error;  // first build failure when not ok
    std::vector<SectorFamily> families;
    std::vector<LineSample> line_samples;
};

// --- operations -------------------------------------------------------------

// Builds the chart for prototile `p` (by label or id) and side index a.
// Throws NoChart when no admissible (e1, e2, e3, f) exists, and
// NotBorderForcing when the neighbour across the inflated side is
// context-dependent.  Ties are broken by least (e1, e2, e3, f) in edge
// index order.
BetaChart build_chart(const SubstGraph& g, const std::string& p,
                      std::size_t a);

// Charts for every (prototile, side).  Throws NoChart listing every failing
// pair when any chart is missing.
Atlas build_atlas(const SubstGraph& g);

DirectionSetF choose_F(const SubstGraph& g);

// Image path of x under the chart translation, at recoding depth n: the
// path of the same tiling re-marked at the tile u away.  Requires x_1..x_3
// = (e1, e2, e3) (else NotInDomain) and a common supertile with the target
// within n levels (else OutOfSupertile; paths whose side chain survives
// forever have none — use beta_apply_periodic).  Verifies that the image
// starts with f and that the source's level-3 supertile re-encodes inside
// the image's patch as a cell of type p across the flip side.
PathSpec beta_apply(const SubstGraph& g, const BetaChart& c, const PathSpec& x,
                    unsigned n);

// Image path of an eventually periodic x, including across an infinite
// boundary: ancestor cells of the target tile are read off the forced
// corona patterns level by level, and the tail cycle is certified by
// repetition of the finite ancestor state.  Falls back to plain recoding
// when a common supertile exists.
PathSpec beta_apply_periodic(const SubstGraph& g, const BetaChart& c,
                             const PathSpec& x);

// Flip law for every chart of the atlas: exact domain/image side geometry,
// plus enumerated eventually periodic cases (self-loop tails reachable from
// each chart, capped per chart) checked via beta_apply_periodic and exact
// round trips.
FlipReport verify_border_flip(const SubstGraph& g, const Atlas& atlas);

// Depth-n certificate separation (n >= 4).
CrossReport cross_relation_check(const SubstGraph& g, const Atlas& atlas,
                                 const DirectionSetF& F, unsigned n);

DecayReport thinness_decay(const SubstGraph& g, const Direction& t,
                           unsigned m_max);

// Orbit gluing on corner families and line samples; builds the atlas
// internally and reports families unglued when no atlas exists.
SplitReport splitting_report(const SubstGraph& g);

// Reusable handle: caches the boundary analysis, pair tables, corner data,
// forced corona patterns, and the chain reachability graph for one
// substitution graph, and exposes the chart operations as methods.  The
// graph must outlive the handle.
class ChartEngine {
  public:
    explicit ChartEngine(const SubstGraph& g);
    ~ChartEngine();
    ChartEngine(ChartEngine&&) noexcept;
    ChartEngine& operator=(ChartEngine&&) noexcept;
    ChartEngine(const ChartEngine&) = delete;
    ChartEngine& operator=(const ChartEngine&) = delete;

    const SubstGraph& graph() const;
    BorderAnalysis& analysis() const;

    BetaChart build_chart(const std::string& p, std::size_t a) const;
    Atlas build_atlas() const;
    DirectionSetF choose_F() const;
    PathSpec beta_apply(const BetaChart& c, const PathSpec& x,
                        unsigned n) const;
    PathSpec beta_apply_periodic(const BetaChart& c, const PathSpec& x) const;
    FlipReport verify_border_flip(const Atlas& atlas) const;
    CrossReport cross_relation_check(const Atlas& atlas,
                                     const DirectionSetF& F, unsigned n) const;
    DecayReport thinness_decay(const Direction& t, unsigned m_max) const;
    SplitReport splitting_report() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tilingaf
