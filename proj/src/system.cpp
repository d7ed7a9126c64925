#include "tilingaf/system.hpp"

#include <algorithm>
#include <set>

namespace tilingaf {

std::size_t SubstSystem::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < prototiles.size(); ++i)
        if (prototiles[i].id == id) return i;
    throw ParseError("unknown prototile '" + id + "'");
}

bool SubstSystem::has_proto(const std::string& id) const {
    for (const Prototile& p : prototiles)
        if (p.id == id) return true;
    return false;
}

SubstMatrix SubstMatrix::times(const SubstMatrix& other) const {
    SubstMatrix out;
    out.ids = ids;
    std::size_t n = ids.size();
    out.m.assign(n, std::vector<long>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            long v = m[i][k];
            if (v == 0) continue;
            for (std::size_t j = 0; j < n; ++j) out.m[i][j] += v * other.m[k][j];
        }
    return out;
}

SubstMatrix SubstMatrix::power(unsigned n) const {
    SubstMatrix out;
    out.ids = ids;
    std::size_t dim = ids.size();
    out.m.assign(dim, std::vector<long>(dim, 0));
    for (std::size_t i = 0; i < dim; ++i) out.m[i][i] = 1;
    SubstMatrix base = *this;
    while (n > 0) {
        if (n & 1u) out = out.times(base);
        base = base.times(base);
        n >>= 1u;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

void check_field_elem(const SubstSystem& s, const FieldElem& v, const std::string& where,
                      ValidationReport& rep) {
    if (v.d() != 0 && v.d() != s.field_d)
        rep.fail("field", where + " uses sqrt(" + std::to_string(v.d()) +
                              ") but the system field is " +
                              (s.field_d == 0 ? std::string("rational")
                                              : "sqrt(" + std::to_string(s.field_d) + ")"));
}

}  // namespace

ValidationReport validate_system(const SubstSystem& s) {
    ValidationReport rep;
    if (s.prototiles.empty()) {
        rep.fail("structure", "system has no prototiles");
        return rep;
    }
    if (s.rules.size() != s.prototiles.size()) {
        rep.fail("structure", "rule table size does not match prototile count");
        return rep;
    }
    std::set<std::string> ids;
    for (const Prototile& p : s.prototiles)
        if (!ids.insert(p.id).second) rep.fail("structure", "duplicate prototile id '" + p.id + "'");
    if (!(s.lambda > FieldElem(1)))
        rep.fail("structure", "inflation factor must exceed 1, got " + s.lambda.str());
    check_field_elem(s, s.lambda, "lambda", rep);

    for (std::size_t i = 0; i < s.prototiles.size(); ++i) {
        const Prototile& p = s.prototiles[i];
        for (const Vec2& v : p.shape.vertices()) {
            check_field_elem(s, v.x, "vertex of '" + p.id + "'", rep);
            check_field_elem(s, v.y, "vertex of '" + p.id + "'", rep);
        }
        if (p.shape.locate(Vec2(0, 0)) != Location::Interior)
            rep.fail("origin", "puncture (origin) is not interior to prototile '" + p.id + "'");
        if (s.rules[i].empty()) rep.fail("structure", "empty rule for prototile '" + p.id + "'");
        for (const Tile& t : s.rules[i]) {
            if (!s.has_proto(t.proto))
                rep.fail("structure",
                         "rule of '" + p.id + "' uses unknown prototile '" + t.proto + "'");
            check_field_elem(s, t.pos.x, "rule tile of '" + p.id + "'", rep);
            check_field_elem(s, t.pos.y, "rule tile of '" + p.id + "'", rep);
        }
    }
    if (!rep.ok) return rep;  // geometry checks need a structurally sound system

    for (std::size_t i = 0; i < s.prototiles.size(); ++i) {
        const Prototile& p = s.prototiles[i];
        std::vector<Polygon> parts;
        parts.reserve(s.rules[i].size());
        for (const Tile& t : s.rules[i])
            parts.push_back(s.proto(t.proto).shape.translated(t.pos));
        CoverReport cover = cover_check(p.shape.scaled(s.lambda), parts);
        if (!cover.ok)
            rep.fail("cover", "rule of '" + p.id + "' is not an exact subdivision: " + cover.detail);
    }
    return rep;
}

ValidationReport check_P1(const SubstSystem& s) {
    ValidationReport rep;
    FieldElem inv_lambda = s.lambda.inverse();
    for (std::size_t qi = 0; qi < s.prototiles.size(); ++qi) {
        const Prototile& q = s.prototiles[qi];
        std::vector<Segment> q_edges = q.shape.edges();
        for (const Tile& t : s.rules[qi]) {
            const Polygon& child = s.proto(t.proto).shape;
            for (std::size_t ei = 0; ei < child.size(); ++ei) {
                Segment a = child.edge(ei);
                // Child edge mapped into the parent frame.
                Segment seg(inv_lambda * (a.a + t.pos), inv_lambda * (a.b + t.pos));
                bool on_edge = false;
                for (const Segment& b : q_edges)
                    if (segment_contains(b, seg)) {
                        on_edge = true;
                        break;
                    }
                if (on_edge) continue;
                bool bad = false;
                for (const Segment& b : q_edges) {
                    SegMeetResult m = segment_meet(seg, b);
                    if (m.kind == SegMeet::Overlap) {
                        bad = true;  // partial edge-on-edge contact
                        break;
                    }
                    if (m.kind == SegMeet::Point && *m.point != seg.a && *m.point != seg.b) {
                        bad = true;  // relative interior touches the parent boundary
                        break;
                    }
                }
                Vec2 mid = (seg.a + seg.b) / FieldElem(2);
                if (!bad && q.shape.locate(mid) != Location::Interior) bad = true;
                if (bad)
                    rep.fail("P1", "edge " + std::to_string(ei) + " of tile " + t.proto +
                                       t.pos.str() + " in rule of '" + q.id +
                                       "' is neither on an edge of the parent nor interior");
            }
        }
    }
    return rep;
}

ValidationReport check_P4(const SubstSystem& s) {
    ValidationReport rep;
    FieldElem lambda_sq = s.lambda * s.lambda;
    for (const Prototile& p1 : s.prototiles)
        for (std::size_t i = 0; i < p1.shape.size(); ++i) {
            FieldElem l1 = p1.shape.edge(i).length_sq();
            for (const Prototile& p2 : s.prototiles)
                for (std::size_t j = 0; j < p2.shape.size(); ++j) {
                    FieldElem l2 = p2.shape.edge(j).length_sq();
                    if (!(lambda_sq * l1 > FieldElem(4) * l2))
                        rep.fail("P4", "lambda^2*len^2(edge " + std::to_string(i) + " of '" +
                                           p1.id + "') = " + (lambda_sq * l1).str() +
                                           " is not greater than 4*len^2(edge " +
                                           std::to_string(j) + " of '" + p2.id +
                                           "') = " + (FieldElem(4) * l2).str());
                }
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Expansion
// ---------------------------------------------------------------------------

Patch supertile(const SubstSystem& s, const std::string& p, unsigned n) {
    Patch patch;
    if (n == 0) {
        patch.tiles.push_back({p, Vec2(0, 0)});
        return patch;
    }
    FieldElem scale = s.lambda.pow(n - 1);
    for (const Tile& t : s.rule_of(p)) {
        Patch sub = supertile(s, t.proto, n - 1);
        Vec2 shift = scale * t.pos;
        for (Tile& st : sub.tiles) patch.tiles.push_back({st.proto, st.pos + shift});
    }
    return patch;
}

SubstMatrix subst_matrix(const SubstSystem& s) {
    SubstMatrix m;
    for (const Prototile& p : s.prototiles) m.ids.push_back(p.id);
    std::size_t n = m.ids.size();
    m.m.assign(n, std::vector<long>(n, 0));
    for (std::size_t q = 0; q < n; ++q)
        for (const Tile& t : s.rules[q]) ++m.m[s.index_of(t.proto)][q];
    return m;
}

SubstSystem power_system(const SubstSystem& s, unsigned n) {
    if (n == 0) throw ParseError("power exponent must be >= 1");
    if (n == 1) return s;
    SubstSystem out;
    out.field_d = s.field_d;
    out.lambda = s.lambda.pow(n);
    out.prototiles = s.prototiles;
    out.asserted_aperiodic = s.asserted_aperiodic;
    out.asserted_fpc = s.asserted_fpc;
    out.rules.reserve(s.prototiles.size());
    for (const Prototile& p : s.prototiles) {
        Patch patch = supertile(s, p.id, n);
        std::sort(patch.tiles.begin(), patch.tiles.end(), Tile::key_less);
        out.rules.push_back(std::move(patch.tiles));
    }
    // Provenance: analyses invariant under powering may consult the base.
    auto base = std::make_shared<SubstSystem>(s);
    base->power_base = nullptr;  // keep the chain one level deep from the root
    if (s.power_base) {
        out.power_base = s.power_base;
        out.power_exp = s.power_exp * n;
    } else {
        out.power_base = base;
        out.power_exp = n;
    }
    return out;
}

PrimitivityResult check_primitive(const SubstSystem& s) {
    SubstMatrix m = subst_matrix(s);
    std::size_t n = m.size();
    // Boolean reachability powers; a primitive matrix has a positive power with
    // exponent at most dim^2.
    std::vector<std::vector<bool>> cur(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cur[i][j] = m.m[i][j] > 0;
    unsigned bound = static_cast<unsigned>(n * n);
    std::vector<std::vector<bool>> base = cur;
    for (unsigned e = 1; e <= bound; ++e) {
        bool all = true;
        for (std::size_t i = 0; i < n && all; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (!cur[i][j]) {
                    all = false;
                    break;
                }
        if (all) return {true, e};
        // cur = cur * base (boolean)
        std::vector<std::vector<bool>> next(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                if (cur[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (base[k][j]) next[i][j] = true;
        cur = std::move(next);
    }
    return {false, 0};
}

}  // namespace tilingaf
