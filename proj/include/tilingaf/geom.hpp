#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tilingaf/field.hpp"

namespace tilingaf {

// ---------------------------------------------------------------------------
// Vectors and points (exact coordinates)
// ---------------------------------------------------------------------------

struct Vec2 {
    FieldElem x, y;

    Vec2() = default;
    Vec2(FieldElem x, FieldElem y) : x(std::move(x)), y(std::move(y)) {}
    Vec2(long x, long y) : x(x), y(y) {}

    bool is_zero() const { return x.is_zero() && y.is_zero(); }

    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    friend Vec2 operator+(Vec2 l, const Vec2& r) { return l += r; }
    friend Vec2 operator-(Vec2 l, const Vec2& r) { return l -= r; }
    friend Vec2 operator*(const FieldElem& s, const Vec2& v) { return {s * v.x, s * v.y}; }
    friend Vec2 operator/(const Vec2& v, const FieldElem& s) { return {v.x / s, v.y / s}; }
    friend bool operator==(const Vec2& l, const Vec2& r) { return l.x == r.x && l.y == r.y; }
    friend bool operator!=(const Vec2& l, const Vec2& r) { return !(l == r); }

    // Canonical serialization "(x,y)" using FieldElem::str for each part.
    std::string str() const;
    static Vec2 parse(const std::string& s);

    // Lexicographic (x, y) by FieldElem::key_less — map key order, not geometric.
    static bool key_less(const Vec2& l, const Vec2& r);
};

// det [l r] = l.x*r.y - l.y*r.x; exact.
FieldElem det2(const Vec2& l, const Vec2& r);
FieldElem dot2(const Vec2& l, const Vec2& r);

// ---------------------------------------------------------------------------
// Directions (projective rays)
// ---------------------------------------------------------------------------

// A nonzero vector scaled so the first nonzero coordinate has absolute value 1.
// Directions compare by exact component equality; t and -t are distinct.
class Direction {
  public:
    explicit Direction(const Vec2& v);
    const Vec2& vec() const { return v_; }

    Direction opposite() const { return Direction(-v_); }

    friend bool operator==(const Direction& l, const Direction& r) { return l.v_ == r.v_; }
    friend bool operator!=(const Direction& l, const Direction& r) { return !(l == r); }

    std::string str() const { return v_.str(); }
    static Direction parse(const std::string& s) { return Direction(Vec2::parse(s)); }

    // Strict counter-clockwise angular order starting just above the positive
    // x-axis: (1,0) < (1,1) < (0,1) < (-1,0) < (-1,-1) < (0,-1) < (1,-1)...
    // Usable as a map key; exact.
    static bool angle_less(const Direction& l, const Direction& r);
    static bool key_less(const Direction& l, const Direction& r) { return angle_less(l, r); }

  private:
    Vec2 v_;
};

// ---------------------------------------------------------------------------
// Segments
// ---------------------------------------------------------------------------

struct Segment {
    Vec2 a, b;  // endpoints, a != b

    Segment(Vec2 a, Vec2 b);
    Vec2 delta() const { return b - a; }
    Direction direction() const { return Direction(delta()); }
    FieldElem length_sq() const;
    std::string str() const;
};

// True if `inner` lies (as a set) inside `outer`: collinear and both endpoints
// within the parameter range.  Degenerate inner (a == b) tests point-on-segment.
bool segment_contains(const Segment& outer, const Segment& inner);
bool segment_contains_point(const Segment& seg, const Vec2& p);

// Classification of how two segments meet.
enum class SegMeet {
    None,         // disjoint
    Point,        // exactly one common point (crossing or endpoint touch)
    Overlap,      // collinear with a common subsegment of positive length
};

struct SegMeetResult {
    SegMeet kind = SegMeet::None;
    std::optional<Vec2> point;          // set when kind == Point
    std::optional<Segment> overlap;     // set when kind == Overlap
    bool proper = false;                // Point in the relative interior of both
};

SegMeetResult segment_meet(const Segment& s, const Segment& t);

// ---------------------------------------------------------------------------
// Polygons
// ---------------------------------------------------------------------------

enum class Location { Interior, Boundary, Exterior };

std::string location_str(Location loc);

// Simple polygon with counter-clockwise vertex order.  Validation (in the
// constructor) rejects: fewer than 3 vertices, repeated vertices, zero-length
// or collinear consecutive edges, self-intersection, and clockwise order.
class Polygon {
  public:
    explicit Polygon(std::vector<Vec2> vertices);

    const std::vector<Vec2>& vertices() const { return vs_; }
    std::size_t size() const { return vs_.size(); }
    // Edge i runs from vertex i to vertex (i+1) mod n.
    Segment edge(std::size_t i) const;
    std::vector<Segment> edges() const;

    // Twice the signed area (positive for counter-clockwise order); exact.
    FieldElem twice_area() const;

    // Exact point location by boundary test + ray casting.
    Location locate(const Vec2& p) const;

    // A point in the polygon's interior, found exactly (no rounding).
    Vec2 representative_interior_point() const;

    Polygon translated(const Vec2& v) const;
    Polygon scaled(const FieldElem& s) const;

    std::string str() const;

  private:
    Location locate_exact(const Vec2& p) const;
    void refresh_double_cache();

    std::vector<Vec2> vs_;
    // Rounded vertex coordinates and their magnitude bound, used by the
    // floating-point filter in locate(); anything inconclusive at double
    // precision is re-decided exactly.
    std::vector<double> dvx_, dvy_;
    double dmag_ = 0;
};

// Result of testing whether `region` (scaled parent outline) is exactly the
// union of the `parts` outlines with pairwise disjoint interiors.
struct CoverReport {
    bool ok = false;
    std::string detail;  // human-readable reason on failure
};

CoverReport cover_check(const Polygon& region, const std::vector<Polygon>& parts);

// Conservative floating bounding box, padded outward; used only to prune
// exact tests, never to decide anything.
struct BBoxD {
    double lox = 1e300, loy = 1e300, hix = -1e300, hiy = -1e300;
    bool meets(const BBoxD& o) const {
        return lox <= o.hix && o.lox <= hix && loy <= o.hiy && o.loy <= hiy;
    }
};

BBoxD bbox_of(const Segment& s);
BBoxD bbox_of(const Polygon& p);

// Exact triangulation of a simple CCW polygon by ear clipping.
std::vector<std::array<Vec2, 3>> triangulate(const Polygon& poly);

// Whether the interiors of two simple polygons intersect (exact separating
// axis test over triangulations).
bool polygons_overlap(const Polygon& a, const Polygon& b);

// Whether two polygon boundaries share a segment of positive length.
bool polygons_edge_adjacent(const Polygon& a, const Polygon& b);

}  // namespace tilingaf
