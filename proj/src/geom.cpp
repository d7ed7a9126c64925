#include "tilingaf/geom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace tilingaf {

// ---------------------------------------------------------------------------
// Vec2
// ---------------------------------------------------------------------------

std::string Vec2::str() const { return "(" + x.str() + "," + y.str() + ")"; }

Vec2 Vec2::parse(const std::string& raw) {
    std::string s;
    s.reserve(raw.size());
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.size() < 5 || s.front() != '(' || s.back() != ')')
        throw ParseError("bad point '" + raw + "' (expected \"(x,y)\")");
    std::string inner = s.substr(1, s.size() - 2);
    // FieldElem serializations never contain a comma, so the first comma splits.
    std::size_t comma = inner.find(',');
    if (comma == std::string::npos) throw ParseError("bad point '" + raw + "' (missing comma)");
    return Vec2(FieldElem::parse(inner.substr(0, comma)), FieldElem::parse(inner.substr(comma + 1)));
}

bool Vec2::key_less(const Vec2& l, const Vec2& r) {
    if (FieldElem::key_less(l.x, r.x)) return true;
    if (FieldElem::key_less(r.x, l.x)) return false;
    return FieldElem::key_less(l.y, r.y);
}

FieldElem det2(const Vec2& l, const Vec2& r) { return l.x * r.y - l.y * r.x; }
FieldElem dot2(const Vec2& l, const Vec2& r) { return l.x * r.x + l.y * r.y; }

// ---------------------------------------------------------------------------
// Direction
// ---------------------------------------------------------------------------

Direction::Direction(const Vec2& v) : v_(v) {
    if (v_.is_zero()) throw ParseError("zero vector has no direction");
    const FieldElem& lead = v_.x.is_zero() ? v_.y : v_.x;
    FieldElem scale = lead.abs();
    v_.x /= scale;
    v_.y /= scale;
}

namespace {
// 0 for the closed upper half (y > 0, or y == 0 with x > 0), 1 for the rest.
int half_of(const Vec2& v) {
    int sy = v.y.sign();
    if (sy > 0) return 0;
    if (sy == 0 && v.x.sign() > 0) return 0;
    return 1;
}
}  // namespace

bool Direction::angle_less(const Direction& l, const Direction& r) {
    int hl = half_of(l.v_), hr = half_of(r.v_);
    if (hl != hr) return hl < hr;
    // Same open half-plane: angular gap is below pi, so the determinant decides.
    return det2(l.v_, r.v_).sign() > 0;
}

// ---------------------------------------------------------------------------
// Segment
// ---------------------------------------------------------------------------

Segment::Segment(Vec2 a_, Vec2 b_) : a(std::move(a_)), b(std::move(b_)) {
    if (a == b) throw ParseError("degenerate segment at " + a.str());
}

FieldElem Segment::length_sq() const {
    Vec2 d = delta();
    return dot2(d, d);
}

std::string Segment::str() const { return "[" + a.str() + " -> " + b.str() + "]"; }

bool segment_contains_point(const Segment& seg, const Vec2& p) {
    Vec2 d = seg.delta();
    Vec2 w = p - seg.a;
    if (det2(d, w).sign() != 0) return false;
    FieldElem t = dot2(d, w);
    return t.sign() >= 0 && t <= dot2(d, d);
}

bool segment_contains(const Segment& outer, const Segment& inner) {
    return segment_contains_point(outer, inner.a) && segment_contains_point(outer, inner.b);
}

SegMeetResult segment_meet(const Segment& s, const Segment& t) {
    SegMeetResult res;
    Vec2 d1 = s.delta(), d2 = t.delta();
    Vec2 w = t.a - s.a;
    FieldElem denom = det2(d1, d2);
    if (denom.sign() != 0) {
        FieldElem p = det2(w, d2) / denom;  // parameter along s
        FieldElem q = det2(w, d1) / denom;  // parameter along t
        if (p.sign() < 0 || p > FieldElem(1) || q.sign() < 0 || q > FieldElem(1)) return res;
        res.kind = SegMeet::Point;
        res.point = s.a + p * d1;
        res.proper = p.sign() > 0 && p < FieldElem(1) && q.sign() > 0 && q < FieldElem(1);
        return res;
    }
    if (det2(w, d1).sign() != 0) return res;  // parallel, distinct lines
    // Collinear: project t's endpoints onto s's parameterization.
    FieldElem len = dot2(d1, d1);
    FieldElem ta = dot2(d1, w) / len;
    FieldElem tb = dot2(d1, t.b - s.a) / len;
    if (tb < ta) std::swap(ta, tb);
    FieldElem lo = ta.sign() < 0 ? FieldElem(0) : ta;
    FieldElem hi = tb > FieldElem(1) ? FieldElem(1) : tb;
    int cmp = (hi - lo).sign();
    if (cmp < 0) return res;
    if (cmp == 0) {
        res.kind = SegMeet::Point;
        res.point = s.a + lo * d1;
        res.proper = false;
        return res;
    }
    res.kind = SegMeet::Overlap;
    res.overlap = Segment(s.a + lo * d1, s.a + hi * d1);
    return res;
}

// ---------------------------------------------------------------------------
// Polygon
// ---------------------------------------------------------------------------

std::string location_str(Location loc) {
    switch (loc) {
        case Location::Interior: return "interior";
        case Location::Boundary: return "boundary";
        case Location::Exterior: return "exterior";
    }
    return "?";
}

Polygon::Polygon(std::vector<Vec2> vertices) : vs_(std::move(vertices)) {
    const std::size_t n = vs_.size();
    if (n < 3) throw ParseError("polygon needs at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (vs_[i] == vs_[j])
                throw ParseError("polygon repeats vertex " + vs_[i].str());
    // Adjacent edges must turn (no zero-length or collinear consecutive edges).
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 e1 = vs_[(i + 1) % n] - vs_[i];
        Vec2 e2 = vs_[(i + 2) % n] - vs_[(i + 1) % n];
        if (det2(e1, e2).sign() == 0)
            throw ParseError("polygon has collinear consecutive edges at vertex " +
                             vs_[(i + 1) % n].str());
    }
    // Non-adjacent edges must not meet at all.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent around the wrap
            if (segment_meet(edge(i), edge(j)).kind != SegMeet::None)
                throw ParseError("polygon edges " + std::to_string(i) + " and " +
                                 std::to_string(j) + " intersect");
        }
    }
    if (twice_area().sign() <= 0)
        throw ParseError("polygon vertices must be in counter-clockwise order");
    refresh_double_cache();
}

void Polygon::refresh_double_cache() {
    const std::size_t n = vs_.size();
    dvx_.resize(n);
    dvy_.resize(n);
    dmag_ = 0;
    for (std::size_t i = 0; i < n; ++i) {
        dvx_[i] = vs_[i].x.to_double();
        dvy_[i] = vs_[i].y.to_double();
        dmag_ = std::max(dmag_, std::max(std::fabs(dvx_[i]), std::fabs(dvy_[i])));
    }
}

Segment Polygon::edge(std::size_t i) const { return Segment(vs_[i], vs_[(i + 1) % vs_.size()]); }

std::vector<Segment> Polygon::edges() const {
    std::vector<Segment> out;
    out.reserve(vs_.size());
    for (std::size_t i = 0; i < vs_.size(); ++i) out.push_back(edge(i));
    return out;
}

FieldElem Polygon::twice_area() const {
    FieldElem s(0);
    for (std::size_t i = 0; i < vs_.size(); ++i) s += det2(vs_[i], vs_[(i + 1) % vs_.size()]);
    return s;
}

namespace {

// Sign of a double quantity whose absolute rounding error is provably below
// thr: +1/-1 when certain, 0 when the magnitude is too small to trust.
inline int certain_sign(double v, double thr) {
    if (v > thr) return 1;
    if (v < -thr) return -1;
    return 0;
}

}  // namespace

Location Polygon::locate(const Vec2& p) const {
    // Filtered double pass.  Every sign decision carries a threshold that
    // dominates the accumulated rounding error (a handful of operations on
    // quantities bounded by M, resp. M^2); any inconclusive sign falls back
    // to the exact pass.  Points at or near the boundary always fall back.
    const std::size_t n = vs_.size();
    const double px = p.x.to_double();
    const double py = p.y.to_double();
    const double m = std::max(dmag_, std::max(std::fabs(px), std::fabs(py)));
    const double thr_lin = 1e-14 * (m + 1e-300);
    const double thr_quad = 1e-14 * (m + 1) * (m + 1);

    bool inside = false;
    int ys_i = certain_sign(dvy_[0] - py, thr_lin);
    const int ys_0 = ys_i;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1 == n) ? 0 : i + 1;
        const int ys_j = (j == 0) ? ys_0 : certain_sign(dvy_[j] - py, thr_lin);
        if (ys_i == 0 || ys_j == 0) return locate_exact(p);
        if (ys_i != ys_j) {
            // The edge crosses the horizontal line through p; it crosses the
            // +x ray iff sign(cross) matches sign of the edge's y step.
            const double t1 = (dvx_[j] - dvx_[i]) * (py - dvy_[i]);
            const double t2 = (dvy_[j] - dvy_[i]) * (px - dvx_[i]);
            const int cs = certain_sign(t1 - t2, thr_quad);
            if (cs == 0) return locate_exact(p);
            if (cs == ys_j) inside = !inside;
        }
        ys_i = ys_j;
    }
    return inside ? Location::Interior : Location::Exterior;
}

Location Polygon::locate_exact(const Vec2& p) const {
    // Single exact pass: collinearity (boundary) test and the +x ray cast
    // with the half-open rule on y, sharing the per-edge difference vectors.
    const std::size_t n = vs_.size();
    bool inside = false;
    int ys_i = (vs_[0].y - p.y).sign();
    const int ys_0 = ys_i;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1 == n) ? 0 : i + 1;
        const int ys_j = (j == 0) ? ys_0 : (vs_[j].y - p.y).sign();
        FieldElem ax = vs_[j].x - vs_[i].x;
        FieldElem ay = vs_[j].y - vs_[i].y;
        FieldElem bx = p.x - vs_[i].x;
        FieldElem by = p.y - vs_[i].y;
        FieldElem cross = ax * by - ay * bx;
        const int cs = cross.sign();
        if (cs == 0) {
            FieldElem dot = ax * bx + ay * by;
            if (dot.sign() >= 0 && (ax * ax + ay * ay - dot).sign() >= 0)
                return Location::Boundary;
        } else if ((ys_i > 0) != (ys_j > 0)) {
            if (cs == (ys_j > 0 ? 1 : -1)) inside = !inside;
        }
        ys_i = ys_j;
    }
    return inside ? Location::Interior : Location::Exterior;
}

Vec2 Polygon::representative_interior_point() const {
    // The lowest-leftmost vertex is convex; probe into its angular wedge with
    // exactly halved offsets until the exact point-location test certifies
    // interiority.
    const std::size_t n = vs_.size();
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        int cy = (vs_[i].y - vs_[best].y).sign();
        if (cy < 0 || (cy == 0 && vs_[i].x < vs_[best].x)) best = i;
    }
    const Vec2& v = vs_[best];
    const Vec2& prev = vs_[(best + n - 1) % n];
    const Vec2& next = vs_[(best + 1) % n];
    Vec2 m = ((prev - v) + (next - v)) / FieldElem(3);
    for (int k = 1; k <= 64; ++k) {
        m = m / FieldElem(2);
        Vec2 candidate = v + m;
        if (locate(candidate) == Location::Interior) return candidate;
    }
    throw std::logic_error("no interior point found near " + v.str());
}

Polygon Polygon::translated(const Vec2& t) const {
    Polygon p = *this;  // skip re-validation: translation preserves validity
    for (Vec2& v : p.vs_) v += t;
    p.refresh_double_cache();
    return p;
}

Polygon Polygon::scaled(const FieldElem& s) const {
    if (s.sign() <= 0) throw ParseError("polygon scale factor must be positive");
    Polygon p = *this;  // skip re-validation: positive scaling preserves validity
    for (Vec2& v : p.vs_) v = s * v;
    p.refresh_double_cache();
    return p;
}

std::string Polygon::str() const {
    std::string out = "[";
    for (std::size_t i = 0; i < vs_.size(); ++i) {
        if (i) out += " ";
        out += vs_[i].str();
    }
    return out + "]";
}

// ---------------------------------------------------------------------------
// Bounding boxes (float prefilter only)
// ---------------------------------------------------------------------------

namespace {

void pad_box(BBoxD& bb) {
    double pad = 1e-9 * (1.0 + std::max(std::abs(bb.lox) + std::abs(bb.hix),
                                        std::abs(bb.loy) + std::abs(bb.hiy)));
    bb.lox -= pad;
    bb.loy -= pad;
    bb.hix += pad;
    bb.hiy += pad;
}

}  // namespace

BBoxD bbox_of(const Segment& s) {
    double ax = s.a.x.to_double(), ay = s.a.y.to_double();
    double bx = s.b.x.to_double(), by = s.b.y.to_double();
    BBoxD bb{std::min(ax, bx), std::min(ay, by), std::max(ax, bx), std::max(ay, by)};
    pad_box(bb);
    return bb;
}

BBoxD bbox_of(const Polygon& p) {
    BBoxD bb;
    for (const Vec2& v : p.vertices()) {
        double x = v.x.to_double(), y = v.y.to_double();
        bb.lox = std::min(bb.lox, x);
        bb.loy = std::min(bb.loy, y);
        bb.hix = std::max(bb.hix, x);
        bb.hiy = std::max(bb.hiy, y);
    }
    pad_box(bb);
    return bb;
}

// ---------------------------------------------------------------------------
// cover_check
// ---------------------------------------------------------------------------

namespace {

struct EdgeRef {
    int owner;  // -1 for the region, else part index
    Segment seg;
    BBoxD box;
};

// Midpoints of the subdivision of `e` induced by its meets with other edges.
// Between consecutive cut points the location of the open subsegment relative
// to any polygon in the arrangement is constant, so these midpoints are sound
// sample points.
std::vector<Vec2> subdivision_midpoints(const EdgeRef& e, const std::vector<EdgeRef>& all) {
    std::vector<FieldElem> params;
    params.emplace_back(0);
    params.emplace_back(1);
    Vec2 d = e.seg.delta();
    FieldElem len = dot2(d, d);
    for (const EdgeRef& o : all) {
        if (o.owner == e.owner) continue;
        if (!e.box.meets(o.box)) continue;
        SegMeetResult m = segment_meet(e.seg, o.seg);
        if (m.kind == SegMeet::Point) {
            params.push_back(dot2(d, *m.point - e.seg.a) / len);
        } else if (m.kind == SegMeet::Overlap) {
            params.push_back(dot2(d, m.overlap->a - e.seg.a) / len);
            params.push_back(dot2(d, m.overlap->b - e.seg.a) / len);
        }
    }
    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end()), params.end());
    std::vector<Vec2> mids;
    mids.reserve(params.size() - 1);
    for (std::size_t i = 0; i + 1 < params.size(); ++i)
        mids.push_back(e.seg.a + ((params[i] + params[i + 1]) / FieldElem(2)) * d);
    return mids;
}

}  // namespace

CoverReport cover_check(const Polygon& region, const std::vector<Polygon>& parts) {
    CoverReport rep;

    FieldElem area_sum(0);
    for (const Polygon& p : parts) area_sum += p.twice_area();
    if (area_sum != region.twice_area()) {
        rep.detail = "area mismatch: parts sum to " + (area_sum / FieldElem(2)).str() +
                     ", region has " + (region.twice_area() / FieldElem(2)).str();
        return rep;
    }

    std::vector<EdgeRef> all;
    for (std::size_t i = 0; i < region.size(); ++i) {
        Segment s = region.edge(i);
        BBoxD b = bbox_of(s);
        all.push_back({-1, std::move(s), b});
    }
    for (std::size_t pi = 0; pi < parts.size(); ++pi)
        for (std::size_t i = 0; i < parts[pi].size(); ++i) {
            Segment s = parts[pi].edge(i);
            BBoxD b = bbox_of(s);
            all.push_back({static_cast<int>(pi), std::move(s), b});
        }

    std::vector<BBoxD> part_boxes;
    part_boxes.reserve(parts.size());
    for (const Polygon& p : parts) part_boxes.push_back(bbox_of(p));
    BBoxD region_box = bbox_of(region);

    // Every part edge must stay inside the closed region; every part vertex too.
    for (const EdgeRef& e : all) {
        if (e.owner < 0) continue;
        for (const Vec2& mid : subdivision_midpoints(e, all)) {
            if (region.locate(mid) == Location::Exterior) {
                rep.detail = "part " + std::to_string(e.owner) + " leaves the region near " +
                             mid.str();
                return rep;
            }
        }
    }
    for (std::size_t pi = 0; pi < parts.size(); ++pi)
        for (const Vec2& v : parts[pi].vertices())
            if (region.locate(v) == Location::Exterior) {
                rep.detail = "part " + std::to_string(pi) + " has vertex " + v.str() +
                             " outside the region";
                return rep;
            }

    // No part may cross the region boundary from inside out: region-boundary
    // sample points must not be interior to any part.
    for (const EdgeRef& e : all) {
        if (e.owner >= 0) continue;
        for (const Vec2& mid : subdivision_midpoints(e, all)) {
            for (std::size_t pi = 0; pi < parts.size(); ++pi) {
                if (!part_boxes[pi].meets(region_box)) continue;
                if (parts[pi].locate(mid) == Location::Interior) {
                    rep.detail = "part " + std::to_string(pi) +
                                 " crosses the region boundary near " + mid.str();
                    return rep;
                }
            }
        }
    }

    // Pairwise interior disjointness: an edge sample of one part strictly
    // inside another, or a representative interior point inside another
    // (coincident or nested parts), certifies overlap.
    for (const EdgeRef& e : all) {
        if (e.owner < 0) continue;
        std::vector<Vec2> mids;  // computed lazily
        bool mids_ready = false;
        for (std::size_t pj = 0; pj < parts.size(); ++pj) {
            if (static_cast<int>(pj) == e.owner) continue;
            if (!part_boxes[pj].meets(e.box)) continue;
            if (!mids_ready) {
                mids = subdivision_midpoints(e, all);
                mids_ready = true;
            }
            for (const Vec2& mid : mids)
                if (parts[pj].locate(mid) == Location::Interior) {
                    rep.detail = "parts " + std::to_string(e.owner) + " and " +
                                 std::to_string(pj) + " overlap near " + mid.str();
                    return rep;
                }
        }
    }
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        Vec2 ip = parts[pi].representative_interior_point();
        for (std::size_t pj = 0; pj < parts.size(); ++pj) {
            if (pi == pj) continue;
            if (!part_boxes[pi].meets(part_boxes[pj])) continue;
            if (parts[pj].locate(ip) == Location::Interior) {
                rep.detail = "parts " + std::to_string(pi) + " and " + std::to_string(pj) +
                             " overlap (nested interiors)";
                return rep;
            }
        }
    }

    rep.ok = true;
    rep.detail = "exact cover";
    return rep;
}

// ---------------------------------------------------------------------------
// Triangulation and interior overlap
// ---------------------------------------------------------------------------

namespace {

int orient(const Vec2& a, const Vec2& b, const Vec2& c) { return det2(b - a, c - a).sign(); }

// p in the closed triangle abc (abc counter-clockwise).
bool in_closed_tri(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    return orient(a, b, p) >= 0 && orient(b, c, p) >= 0 && orient(c, a, p) >= 0;
}

// Whether the interiors of two counter-clockwise triangles intersect: they do
// not exactly when some edge line of one has the whole other triangle on its
// closed outer side (separating axis over edge normals, exact).
bool tri_overlap(const std::array<Vec2, 3>& t, const std::array<Vec2, 3>& u) {
    const std::array<Vec2, 3>* tris[2] = {&t, &u};
    for (int w = 0; w < 2; ++w) {
        const auto& a = *tris[w];
        const auto& b = *tris[1 - w];
        for (int i = 0; i < 3; ++i) {
            const Vec2& p = a[i];
            const Vec2& q = a[(i + 1) % 3];
            bool all_out = true;
            for (int j = 0; j < 3 && all_out; ++j)
                if (orient(p, q, b[j]) > 0) all_out = false;
            if (all_out) return false;
        }
    }
    return true;
}

}  // namespace

std::vector<std::array<Vec2, 3>> triangulate(const Polygon& poly) {
    std::vector<Vec2> vs = poly.vertices();
    std::vector<std::array<Vec2, 3>> out;
    out.reserve(vs.size() - 2);
    while (vs.size() > 3) {
        const std::size_t n = vs.size();
        bool clipped = false;
        for (std::size_t i = 0; i < n && !clipped; ++i) {
            const Vec2& a = vs[(i + n - 1) % n];
            const Vec2& b = vs[i];
            const Vec2& c = vs[(i + 1) % n];
            if (orient(a, b, c) <= 0) continue;  // reflex or straight corner
            bool blocked = false;
            for (std::size_t j = 0; j < n && !blocked; ++j) {
                if (j == i || j == (i + n - 1) % n || j == (i + 1) % n) continue;
                if (in_closed_tri(a, b, c, vs[j])) blocked = true;
            }
            if (blocked) continue;
            out.push_back({a, b, c});
            vs.erase(vs.begin() + i);
            clipped = true;
        }
        if (!clipped) throw std::logic_error("triangulation failed for " + poly.str());
    }
    out.push_back({vs[0], vs[1], vs[2]});
    return out;
}

bool polygons_overlap(const Polygon& a, const Polygon& b) {
    if (!bbox_of(a).meets(bbox_of(b))) return false;
    const auto ta = triangulate(a);
    const auto tb = triangulate(b);
    for (const auto& x : ta)
        for (const auto& y : tb)
            if (tri_overlap(x, y)) return true;
    return false;
}

bool polygons_edge_adjacent(const Polygon& a, const Polygon& b) {
    if (!bbox_of(a).meets(bbox_of(b))) return false;
    // Per-edge prefilters: overlapping collinear edges must have meeting
    // bounding boxes and parallel deltas; both filters are conservative
    // (uncertain parallelism falls through to the exact test).
    std::vector<Segment> ea = a.edges(), eb = b.edges();
    std::vector<BBoxD> ba, bb;
    for (const Segment& s : ea) ba.push_back(bbox_of(s));
    for (const Segment& s : eb) bb.push_back(bbox_of(s));
    for (std::size_t i = 0; i < ea.size(); ++i) {
        const double dax = ea[i].b.x.to_double() - ea[i].a.x.to_double();
        const double day = ea[i].b.y.to_double() - ea[i].a.y.to_double();
        for (std::size_t j = 0; j < eb.size(); ++j) {
            if (!ba[i].meets(bb[j])) continue;
            const double dbx = eb[j].b.x.to_double() - eb[j].a.x.to_double();
            const double dby = eb[j].b.y.to_double() - eb[j].a.y.to_double();
            const double m = std::max({std::fabs(dax), std::fabs(day), std::fabs(dbx),
                                       std::fabs(dby)});
            if (std::fabs(dax * dby - day * dbx) > 2e-14 * (m + 1) * (m + 1))
                continue;  // certainly not parallel, hence no collinear overlap
            if (segment_meet(ea[i], eb[j]).kind == SegMeet::Overlap) return true;
        }
    }
    return false;
}

}  // namespace tilingaf
