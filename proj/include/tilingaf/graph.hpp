#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tilingaf/system.hpp"

namespace tilingaf {

// ---------------------------------------------------------------------------
// Substitution graph
// ---------------------------------------------------------------------------

// One edge per rule entry: the tile s(e) + disp inside the subdivision of the
// parent r(e).  Edge ids are "<parent>.<rule index>".
struct GraphEdge {
    std::string id;
    std::size_t src;         // child prototile index  (s(e))
    std::size_t dst;         // parent prototile index (r(e))
    std::size_t rule_index;  // position within rule(dst)
    Vec2 disp;               // the puncture of the rule tile
};

struct SubstGraph {
    SubstSystem system;                 // owning copy
    std::vector<std::string> vertices;  // prototile ids, in prototile order
    std::vector<GraphEdge> edges;       // structural order: (dst, rule_index)
    std::map<std::string, std::size_t> edge_ids;
    std::vector<std::vector<std::size_t>> out_edges;   // by src vertex
    std::vector<std::vector<std::size_t>> into_edges;  // by dst vertex

    std::size_t edge_of(const std::string& id) const;  // throws ParseError
    const GraphEdge& edge(const std::string& id) const { return edges[edge_of(id)]; }
};

SubstGraph build_graph(const SubstSystem& s);

// ---------------------------------------------------------------------------
// Path specifications
// ---------------------------------------------------------------------------

// A point of the path space, given as a finite prefix plus an optional cycle
// repeated forever: "e1,e2" or "e1,e2|c1,c2" (or "|c1,c2" with empty prefix).
struct PathSpec {
    std::vector<std::string> prefix;
    std::vector<std::string> cycle;

    bool eventually_periodic() const { return !cycle.empty(); }
    // Number of determined coordinates: prefix length, or unbounded with a cycle.
    bool determines(std::size_t n) const { return !cycle.empty() || n <= prefix.size(); }
    // Edge id at 0-based position k (k < prefix.size() or cycle present).
    const std::string& at(std::size_t k) const;

    std::string str() const;
    static PathSpec parse(const std::string& text);

    friend bool operator==(const PathSpec& l, const PathSpec& r) {
        return l.prefix == r.prefix && l.cycle == r.cycle;
    }
};

// Checks r(e_k) = s(e_{k+1}) along the prefix, across the prefix-cycle
// junction, and around the cycle; throws ParseError on violation.
void validate_path(const SubstGraph& g, const PathSpec& x);

// Anchor of the level-n supertile containing the origin-puncture tile:
// lambda^n v_n = -sum_{k=1..n} lambda^(k-1) disp(e_k).
Vec2 path_anchor(const SubstGraph& g, const PathSpec& x, std::size_t n);

// The level-n supertile patch around the coded tile; the marked tile has type
// s(e_1) and puncture at the origin.
Patch place_path(const SubstGraph& g, const std::vector<std::string>& prefix);

// Inverse coding: the unique path (e_1..e_n) with r(e_n) = q whose coded
// puncture inside supertile(S, q, n) is u.  Throws NotAPuncture.
std::vector<std::string> encode_position(const SubstGraph& g, const std::string& q, unsigned n,
                                         const Vec2& u);

// Recoding of x around the puncture at position v (coordinates of x's frame,
// origin = marked puncture).  Retries levels m = 0..n and recodes the first m
// coordinates; the tail beyond m is unchanged.  Throws OutOfSupertile when no
// level m <= n contains v strictly, NotAPuncture when v lies strictly inside
// the level-m region without being a puncture.
PathSpec recode_translation(const SubstGraph& g, const PathSpec& x, const Vec2& v, unsigned n);

// ---------------------------------------------------------------------------
// Path enumeration and partitions
// ---------------------------------------------------------------------------

// All length-n paths as edge-index sequences, in lexicographic structural
// order.  n >= 1.
std::vector<std::vector<std::size_t>> all_paths(const SubstGraph& g, unsigned n);

struct CylinderPartition {
    unsigned depth = 0;
    std::string kind;  // "Xn" or "XPrimeN"
    std::vector<std::vector<std::string>> blocks;  // paths as "e1,e2,..." strings
};

// Length-n paths grouped by terminal vertex r(e_n) (the tower structure of
// the n-th tail-equivalence approximant).
CylinderPartition xn_partition(const SubstGraph& g, unsigned n);

// ---------------------------------------------------------------------------
// Perron-Frobenius measure
// ---------------------------------------------------------------------------

struct PFMeasure {
    bool exact = false;            // true when computed over the rationals
    Rat lambda_pf_exact;           // valid when exact
    std::vector<Rat> xi_exact;     // valid when exact; sums to 1
    double lambda_pf = 0;          // always set
    std::vector<double> xi;        // always set; sums to 1
    bool matches_lambda_sq = false;  // lambda_PF == lambda^2 (exact or 1e-10)
};

// Right Perron-Frobenius eigenpair of the edge-count matrix, xi normalized to
// sum 1.  Exact rational arithmetic when lambda^2 is rational, else double
// power iteration (tolerance 1e-12).  Throws NotPrimitive.
PFMeasure pf_measure(const SubstSystem& s);

struct MeasureValue {
    bool exact = false;
    Rat exact_value;  // valid when exact
    double value = 0;
};

// nu(cyl(w)) = lambda_PF^(-n) * xi_{r(w_n)} for a length-n path w.
MeasureValue cylinder_measure(const SubstGraph& g, const PFMeasure& pf,
                              const std::vector<std::string>& path);

}  // namespace tilingaf
