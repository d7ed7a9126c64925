#include "tilingaf/collar.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

#include "tilingaf/errors.hpp"

namespace tilingaf {

namespace {

// Analyses of the generated tiling space (adjacency and corona classes) are
// invariants under powering; compute them on the root base system.
const SubstSystem& root_base(const SubstSystem& s) {
    const SubstSystem* cur = &s;
    while (cur->power_base) cur = cur->power_base.get();
    return *cur;
}

// ---------------------------------------------------------------------------
// Indexed patch: translated tiles with cached doubles and a spatial hash
// ---------------------------------------------------------------------------

struct EdgeD {
    double dx, dy;  // rounded edge delta (parallelism prefilter)
    BBoxD box;
};

struct PlacedTile {
    Tile tile;
    std::size_t proto_idx;
    Polygon shape;  // translated into patch coordinates
    BBoxD box;
    std::vector<Segment> edges;
    std::vector<EdgeD> dedges;
};

struct PatchIndex {
    const SubstSystem& sys;
    std::vector<PlacedTile> tiles;
    double cell = 1.0;
    std::map<std::pair<long, long>, std::vector<std::size_t>> grid;

    PatchIndex(const SubstSystem& s, const std::vector<Tile>& ts) : sys(s) {
        tiles.reserve(ts.size());
        for (const Tile& t : ts) {
            PlacedTile pt{t, s.index_of(t.proto), s.proto(t.proto).shape.translated(t.pos),
                          BBoxD{}, {}, {}};
            pt.box = bbox_of(pt.shape);
            pt.edges = pt.shape.edges();
            for (const Segment& e : pt.edges) {
                EdgeD d{e.b.x.to_double() - e.a.x.to_double(),
                        e.b.y.to_double() - e.a.y.to_double(), bbox_of(e)};
                pt.dedges.push_back(d);
            }
            cell = std::max({cell, pt.box.hix - pt.box.lox, pt.box.hiy - pt.box.loy});
            tiles.push_back(std::move(pt));
        }
        for (std::size_t i = 0; i < tiles.size(); ++i) {
            const BBoxD& b = tiles[i].box;
            for (long cx = (long)std::floor(b.lox / cell); cx <= (long)std::floor(b.hix / cell);
                 ++cx)
                for (long cy = (long)std::floor(b.loy / cell);
                     cy <= (long)std::floor(b.hiy / cell); ++cy)
                    grid[{cx, cy}].push_back(i);
        }
    }

    // Indices j != i whose bounding box meets tile i's (deduplicated, sorted).
    std::vector<std::size_t> candidates(std::size_t i) const {
        std::vector<std::size_t> out;
        const BBoxD& b = tiles[i].box;
        for (long cx = (long)std::floor(b.lox / cell); cx <= (long)std::floor(b.hix / cell); ++cx)
            for (long cy = (long)std::floor(b.loy / cell); cy <= (long)std::floor(b.hiy / cell);
                 ++cy) {
                auto it = grid.find({cx, cy});
                if (it == grid.end()) continue;
                for (std::size_t j : it->second)
                    if (j != i && tiles[j].box.meets(b)) out.push_back(j);
            }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // Whether tiles i and j share a boundary segment of positive length.
    bool edge_adjacent(std::size_t i, std::size_t j) const {
        const PlacedTile& a = tiles[i];
        const PlacedTile& b = tiles[j];
        for (std::size_t ei = 0; ei < a.edges.size(); ++ei)
            for (std::size_t ej = 0; ej < b.edges.size(); ++ej) {
                if (!parallel_close(a.dedges[ei], b.dedges[ej])) continue;
                if (segment_meet(a.edges[ei], b.edges[ej]).kind == SegMeet::Overlap) return true;
            }
        return false;
    }

    // Complete first corona of tile i rebased to its puncture, or nothing if
    // some part of its boundary is uncovered within the patch.
    std::optional<std::vector<Tile>> corona_of(std::size_t i) const {
        const PlacedTile& me = tiles[i];
        std::vector<std::size_t> nbrs;
        for (std::size_t j : candidates(i))
            if (edge_adjacent(i, j)) nbrs.push_back(j);
        // Every edge of the tile must be exactly covered by neighbor contact.
        for (std::size_t ei = 0; ei < me.edges.size(); ++ei) {
            const Segment& e = me.edges[ei];
            Vec2 d = e.delta();
            FieldElem len2 = dot2(d, d);
            std::vector<std::pair<FieldElem, FieldElem>> ivals;
            for (std::size_t j : nbrs) {
                const PlacedTile& o = tiles[j];
                for (std::size_t ej = 0; ej < o.edges.size(); ++ej) {
                    if (!parallel_close(me.dedges[ei], o.dedges[ej])) continue;
                    SegMeetResult r = segment_meet(e, o.edges[ej]);
                    if (r.kind != SegMeet::Overlap) continue;
                    FieldElem t0 = dot2(r.overlap->a - e.a, d) / len2;
                    FieldElem t1 = dot2(r.overlap->b - e.a, d) / len2;
                    if (t1 < t0) std::swap(t0, t1);
                    ivals.emplace_back(std::move(t0), std::move(t1));
                }
            }
            std::sort(ivals.begin(), ivals.end(),
                      [](const auto& l, const auto& r) { return l.first < r.first; });
            FieldElem cur(0);
            for (const auto& iv : ivals) {
                if (iv.first > cur) return std::nullopt;  // uncovered gap
                if (iv.second > cur) cur = iv.second;
            }
            if (cur < FieldElem(1)) return std::nullopt;
        }
        std::vector<Tile> corona;
        corona.reserve(nbrs.size());
        for (std::size_t j : nbrs)
            corona.push_back({tiles[j].tile.proto, tiles[j].tile.pos - me.tile.pos});
        std::sort(corona.begin(), corona.end(), Tile::key_less);
        return corona;
    }

  private:
    static bool parallel_close(const EdgeD& a, const EdgeD& b) {
        if (!a.box.meets(b.box)) return false;
        const double m =
            std::max({std::fabs(a.dx), std::fabs(a.dy), std::fabs(b.dx), std::fabs(b.dy)});
        return std::fabs(a.dx * b.dy - a.dy * b.dx) <= 2e-14 * (m + 1) * (m + 1);
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Adjacency closure
// ---------------------------------------------------------------------------

AdjacencyClass AdjacencyClass::canonical(std::size_t a, std::size_t b, const Vec2& rel) {
    AdjacencyClass fwd{a, b, rel};
    AdjacencyClass rev{b, a, -rel};
    return rev < fwd ? rev : fwd;
}

std::string AdjacencyClass::str(const SubstSystem& s) const {
    return s.prototiles[proto_a].id + "+" + s.prototiles[proto_b].id + "@" + rel.str();
}

std::vector<AdjacencyClass> adjacency_closure(const SubstSystem& s_in, std::size_t bound) {
    const SubstSystem& s = root_base(s_in);
    std::set<AdjacencyClass> seen;
    std::vector<AdjacencyClass> todo;
    auto add = [&](std::size_t pa, const Vec2& posa, std::size_t pb, const Vec2& posb) {
        AdjacencyClass c = AdjacencyClass::canonical(pa, pb, posb - posa);
        if (seen.insert(c).second) {
            if (seen.size() > bound)
                throw ClosureTooLarge("adjacency closure exceeded " + std::to_string(bound) +
                                      " classes");
            todo.push_back(c);
        }
    };

    // Seed: adjacent pairs inside every subdivision rule.
    for (std::size_t p = 0; p < s.size(); ++p) {
        PatchIndex px(s, s.rules[p]);
        for (std::size_t i = 0; i < px.tiles.size(); ++i)
            for (std::size_t j : px.candidates(i))
                if (j > i && px.edge_adjacent(i, j))
                    add(px.tiles[i].proto_idx, px.tiles[i].tile.pos, px.tiles[j].proto_idx,
                        px.tiles[j].tile.pos);
    }

    // Close under substitution: adjacent child pairs across an adjacent
    // parent pair.
    while (!todo.empty()) {
        AdjacencyClass c = todo.back();
        todo.pop_back();
        std::vector<Tile> pattern = s.rules[c.proto_a];
        const std::size_t na = pattern.size();
        Vec2 shift = s.lambda * c.rel;
        for (const Tile& t : s.rules[c.proto_b]) pattern.push_back({t.proto, t.pos + shift});
        PatchIndex px(s, pattern);
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j : px.candidates(i))
                if (j >= na && px.edge_adjacent(i, j))
                    add(px.tiles[i].proto_idx, px.tiles[i].tile.pos, px.tiles[j].proto_idx,
                        px.tiles[j].tile.pos);
    }
    return {seen.begin(), seen.end()};
}

// ---------------------------------------------------------------------------
// Border forcing
// ---------------------------------------------------------------------------

namespace {

// Occurrence contexts of prototile p: the possible edge-adjacent neighbors
// (neighbor prototile, relative position), deduplicated and sorted.
std::vector<std::pair<std::size_t, Vec2>> contexts_for(const std::vector<AdjacencyClass>& classes,
                                                       std::size_t p) {
    std::vector<std::pair<std::size_t, Vec2>> out;
    for (const AdjacencyClass& c : classes) {
        if (c.proto_a == p) out.emplace_back(c.proto_b, c.rel);
        if (c.proto_b == p) out.emplace_back(c.proto_a, -c.rel);
    }
    std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
        if (l.first != r.first) return l.first < r.first;
        return Vec2::key_less(l.second, r.second);
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// For each context of p: the level-0 tiles of the neighbor's level-k
// supertile that touch the boundary of the level-k supertile of p from
// outside (coordinates of the latter's frame).
std::vector<std::vector<Tile>> context_patterns(const SubstSystem& s, std::size_t p, unsigned k,
                                                const std::vector<AdjacencyClass>& classes) {
    FieldElem scale = s.lambda.pow(k);
    Polygon region = s.prototiles[p].shape.scaled(scale);
    std::vector<std::vector<Tile>> out;
    for (const auto& [q, v] : contexts_for(classes, p)) {
        Patch sp = supertile(s, s.prototiles[q].id, k);
        Vec2 shift = scale * v;
        std::vector<Tile> touching;
        for (const Tile& t : sp.tiles) {
            Tile placed{t.proto, t.pos + shift};
            if (polygons_edge_adjacent(s.proto(placed.proto).shape.translated(placed.pos),
                                       region))
                touching.push_back(std::move(placed));
        }
        std::sort(touching.begin(), touching.end(), Tile::key_less);
        out.push_back(std::move(touching));
    }
    return out;
}

// Two outside patterns conflict when they place distinct tiles with
// overlapping interiors (different occurrences would then see different
// coronas along a shared boundary stretch).
bool patterns_conflict(const SubstSystem& s, const std::vector<Tile>& a,
                       const std::vector<Tile>& b, std::string* detail) {
    for (const Tile& t1 : a) {
        Polygon s1 = s.proto(t1.proto).shape.translated(t1.pos);
        BBoxD b1 = bbox_of(s1);
        for (const Tile& t2 : b) {
            if (t1 == t2) continue;
            Polygon s2 = s.proto(t2.proto).shape.translated(t2.pos);
            if (!b1.meets(bbox_of(s2))) continue;
            if (polygons_overlap(s1, s2)) {
                if (detail)
                    *detail = t1.proto + "@" + t1.pos.str() + " vs " + t2.proto + "@" +
                              t2.pos.str();
                return true;
            }
        }
    }
    return false;
}

}  // namespace

bool forces_border_check(const SubstSystem& s, unsigned k) {
    std::vector<AdjacencyClass> classes = adjacency_closure(s);
    for (std::size_t p = 0; p < s.size(); ++p) {
        std::vector<std::vector<Tile>> pats = context_patterns(s, p, k, classes);
        for (std::size_t i = 0; i < pats.size(); ++i)
            for (std::size_t j = i + 1; j < pats.size(); ++j)
                if (patterns_conflict(s, pats[i], pats[j], nullptr)) return false;
    }
    return true;
}

unsigned least_forcing_level(const SubstSystem& s, unsigned cap) {
    for (unsigned k = 1; k <= cap; ++k)
        if (forces_border_check(s, k)) return k;
    return 0;
}

std::vector<Tile> forced_pattern(const SubstSystem& s, const std::string& p, unsigned k) {
    std::size_t pi = s.index_of(p);
    std::vector<AdjacencyClass> classes = adjacency_closure(s);
    std::vector<std::vector<Tile>> pats = context_patterns(s, pi, k, classes);
    for (std::size_t i = 0; i < pats.size(); ++i)
        for (std::size_t j = i + 1; j < pats.size(); ++j) {
            std::string detail;
            if (patterns_conflict(s, pats[i], pats[j], &detail))
                throw NotBorderForcing("outside corona of " + p + " at level " +
                                       std::to_string(k) + " is context-dependent: " + detail);
        }
    std::set<Tile, decltype(&Tile::key_less)> all(&Tile::key_less);
    for (const auto& pat : pats) all.insert(pat.begin(), pat.end());

    // The union must determine the corona along the whole boundary.
    FieldElem scale = s.lambda.pow(k);
    Polygon region = s.prototiles[pi].shape.scaled(scale);
    std::vector<Polygon> shapes;
    for (const Tile& t : all) shapes.push_back(s.proto(t.proto).shape.translated(t.pos));
    for (std::size_t ei = 0; ei < region.size(); ++ei) {
        Segment e = region.edge(ei);
        Vec2 d = e.delta();
        FieldElem len2 = dot2(d, d);
        std::vector<std::pair<FieldElem, FieldElem>> ivals;
        for (const Polygon& sh : shapes)
            for (std::size_t ej = 0; ej < sh.size(); ++ej) {
                SegMeetResult r = segment_meet(e, sh.edge(ej));
                if (r.kind != SegMeet::Overlap) continue;
                FieldElem t0 = dot2(r.overlap->a - e.a, d) / len2;
                FieldElem t1 = dot2(r.overlap->b - e.a, d) / len2;
                if (t1 < t0) std::swap(t0, t1);
                ivals.emplace_back(std::move(t0), std::move(t1));
            }
        std::sort(ivals.begin(), ivals.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        FieldElem cur(0);
        for (const auto& iv : ivals) {
            if (iv.first > cur) break;
            if (iv.second > cur) cur = iv.second;
        }
        if (cur < FieldElem(1))
            throw NotBorderForcing("outside corona of " + p + " at level " + std::to_string(k) +
                                   " leaves boundary edge " + std::to_string(ei) +
                                   " undetermined");
    }
    return {all.begin(), all.end()};
}

// ---------------------------------------------------------------------------
// Corona classes and collaring
// ---------------------------------------------------------------------------

std::string CoronaClass::key() const {
    std::string out = std::to_string(proto) + "|";
    for (const Tile& t : corona) out += t.proto + "@" + t.pos.str() + ";";
    return out;
}

namespace {

// The corona classes of the children of a collared tile, in rule order.
// Requires the parent corona to be complete, which makes every child corona
// complete inside the substituted two-level patch.
std::vector<CoronaClass> corona_children(const SubstSystem& s, const CoronaClass& c) {
    std::vector<Tile> patch;
    patch.push_back({s.prototiles[c.proto].id, Vec2()});
    for (const Tile& t : c.corona) patch.push_back(t);
    std::vector<Tile> expanded;
    for (const Tile& pt : patch) {
        Vec2 shift = s.lambda * pt.pos;
        for (const Tile& ch : s.rule_of(pt.proto)) expanded.push_back({ch.proto, ch.pos + shift});
    }
    const std::size_t n_center = s.rules[c.proto].size();
    PatchIndex px(s, expanded);
    std::vector<CoronaClass> out;
    out.reserve(n_center);
    for (std::size_t i = 0; i < n_center; ++i) {
        auto cor = px.corona_of(i);
        if (!cor)
            throw std::logic_error("incomplete child corona while substituting a collared tile");
        out.push_back({px.tiles[i].proto_idx, std::move(*cor)});
    }
    return out;
}

}  // namespace

std::vector<CoronaClass> corona_classes(const SubstSystem& s_in, std::size_t bound) {
    const SubstSystem& s = root_base(s_in);
    std::map<std::string, CoronaClass> all;
    std::vector<CoronaClass> fresh;
    auto add = [&](CoronaClass c) {
        std::string k = c.key();
        if (all.emplace(std::move(k), c).second) {
            if (all.size() > bound)
                throw ClosureTooLarge("corona class set exceeded " + std::to_string(bound));
            fresh.push_back(std::move(c));
        }
    };

    unsigned stable = 0;
    for (unsigned m = 2; m <= 8 && stable < 2; ++m) {
        const std::size_t before = all.size();
        for (std::size_t p = 0; p < s.size(); ++p) {
            Patch sp = supertile(s, s.prototiles[p].id, m);
            PatchIndex px(s, sp.tiles);
            for (std::size_t i = 0; i < px.tiles.size(); ++i)
                if (auto cor = px.corona_of(i))
                    add(CoronaClass{px.tiles[i].proto_idx, std::move(*cor)});
        }
        while (!fresh.empty()) {  // close under substitution
            CoronaClass c = std::move(fresh.back());
            fresh.pop_back();
            for (CoronaClass& ch : corona_children(s, c)) add(std::move(ch));
        }
        stable = (all.size() == before) ? stable + 1 : 0;
    }
    if (stable < 2)
        throw ClosureTooLarge("corona class scan did not stabilize by supertile level 8");

    std::vector<CoronaClass> out;
    out.reserve(all.size());
    for (auto& [k, c] : all) out.push_back(std::move(c));
    std::sort(out.begin(), out.end(), [](const CoronaClass& l, const CoronaClass& r) {
        if (l.proto != r.proto) return l.proto < r.proto;
        return l.key() < r.key();
    });
    return out;
}

SubstSystem collar_system(const SubstSystem& s) {
    std::vector<CoronaClass> classes = corona_classes(s);

    SubstSystem out;
    out.field_d = s.field_d;
    out.lambda = s.lambda;
    out.asserted_aperiodic = s.asserted_aperiodic;
    out.asserted_fpc = s.asserted_fpc;

    std::map<std::string, std::size_t> lookup;  // corona key -> collared index
    std::vector<std::size_t> per_base(s.size(), 0);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const CoronaClass& c = classes[i];
        const Prototile& base = s.prototiles[c.proto];
        std::string id = base.id + "~" + std::to_string(per_base[c.proto]++);
        out.prototiles.push_back({id, base.id, base.shape});
        lookup[c.key()] = i;
    }
    for (const CoronaClass& c : classes) {
        std::vector<CoronaClass> children = corona_children(s, c);
        std::vector<Tile> rule;
        rule.reserve(children.size());
        for (std::size_t i = 0; i < children.size(); ++i) {
            auto it = lookup.find(children[i].key());
            if (it == lookup.end())
                throw std::logic_error("collared child class missing from the closure");
            rule.push_back({out.prototiles[it->second].id, s.rules[c.proto][i].pos});
        }
        out.rules.push_back(std::move(rule));
    }

    unsigned k = least_forcing_level(out, 4);
    if (k == 0)
        throw NotBorderForcing("collared system does not force its border by level 4");
    return k == 1 ? out : power_system(out, k);
}

}  // namespace tilingaf
