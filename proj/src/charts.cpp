#include "tilingaf/charts.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "tilingaf/collar.hpp"
#include "tilingaf/errors.hpp"

namespace tilingaf {
namespace {

std::string side_name(const SubstSystem& s, std::size_t p, std::size_t a) {
    return s.prototiles[p].id + "." + std::to_string(a);
}

Direction side_direction(const SubstSystem& s, std::size_t p, std::size_t a) {
    return s.prototiles[p].shape.edge(a).direction();
}

PathSpec make_path(const SubstGraph& g, const std::vector<std::size_t>& prefix,
                   const std::vector<std::size_t>& cycle) {
    PathSpec out;
    for (std::size_t e : prefix) out.prefix.push_back(g.edges[e].id);
    for (std::size_t e : cycle) out.cycle.push_back(g.edges[e].id);
    return out;
}

bool has_dir(const std::vector<BorderChain>& chains, const Direction& t) {
    for (const BorderChain& c : chains)
        if (c.dir == t) return true;
    return false;
}

// Coordinate-wise equality of paths whose representations may differ (cycle
// rotations, prefix/cycle split).
bool same_path(const PathSpec& a, const PathSpec& b) {
    if (a.eventually_periodic() != b.eventually_periodic()) return false;
    if (!a.eventually_periodic()) return a.prefix == b.prefix;
    std::size_t l = std::lcm(a.cycle.size(), b.cycle.size());
    std::size_t n = std::max(a.prefix.size(), b.prefix.size()) + 2 * l;
    for (std::size_t k = 0; k < n; ++k)
        if (a.at(k) != b.at(k)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Shared engine state
// ---------------------------------------------------------------------------

// A state of the infinite-chain search: side `side` of prototile `v`.
struct HNode {
    std::size_t v = 0;
    std::size_t side = 0;
    bool operator<(const HNode& o) const {
        return v != o.v ? v < o.v : side < o.side;
    }
    bool operator==(const HNode& o) const { return v == o.v && side == o.side; }
};

struct EngineState {
    const SubstGraph& g;
    BorderAnalysis an;
    std::vector<std::size_t> loops;  // corner loop edges, sorted
    std::set<std::size_t> loop_set;
    mutable std::map<std::size_t, std::vector<Tile>> fp_cache;

    // Chain graph: an arc (v, a) -> (r(e), b) for every pair (a, b) on an
    // edge e with s(e) = v; walking arcs forever is an infinite side chain.
    std::map<HNode, std::vector<std::pair<HNode, std::size_t>>> harcs;
    std::set<HNode> on_cycle;
    std::set<HNode> reach_cycle;

    explicit EngineState(const SubstGraph& graph) : g(graph), an(graph) {
        loops = an.type_iii_loops();
        loop_set.insert(loops.begin(), loops.end());
        build_chain_graph();
    }

    const SubstSystem& sys() const { return g.system; }
    const std::vector<std::vector<APair>>& pairs() const {
        return an.pairs().pairs;
    }

    // Level-0 tiles surrounding the level-1 supertile of `proto`, cached.
    const std::vector<Tile>& forced(std::size_t proto) const {
        auto it = fp_cache.find(proto);
        if (it == fp_cache.end())
            it = fp_cache
                     .emplace(proto, forced_pattern(
                                         sys(), sys().prototiles[proto].id, 1))
                     .first;
        return it->second;
    }

    void build_chain_graph() {
        for (std::size_t e = 0; e < g.edges.size(); ++e)
            for (const APair& pr : pairs()[e])
                harcs[HNode{g.edges[e].src, pr.a}].push_back(
                    {HNode{g.edges[e].dst, pr.b}, e});
        for (auto& [nd, arcs] : harcs)
            std::sort(arcs.begin(), arcs.end(),
                      [](const auto& l, const auto& r) {
                          return l.second != r.second ? l.second < r.second
                                                      : l.first < r.first;
                      });
        // nodes lying on a directed cycle
        for (const auto& [nd, arcs] : harcs) {
            std::deque<HNode> q{nd};
            std::set<HNode> vis;
            bool found = false;
            while (!q.empty() && !found) {
                HNode cur = q.front();
                q.pop_front();
                auto it = harcs.find(cur);
                if (it == harcs.end()) continue;
                for (const auto& [to, e] : it->second) {
                    if (to == nd) {
                        found = true;
                        break;
                    }
                    if (vis.insert(to).second) q.push_back(to);
                }
            }
            if (found) on_cycle.insert(nd);
        }
        // nodes reaching a cycle: reverse closure of the cycle nodes
        std::map<HNode, std::vector<HNode>> rev;
        for (const auto& [nd, arcs] : harcs)
            for (const auto& [to, e] : arcs) rev[to].push_back(nd);
        std::deque<HNode> q(on_cycle.begin(), on_cycle.end());
        reach_cycle = on_cycle;
        while (!q.empty()) {
            HNode cur = q.front();
            q.pop_front();
            auto it = rev.find(cur);
            if (it == rev.end()) continue;
            for (const HNode& from : it->second)
                if (reach_cycle.insert(from).second) q.push_back(from);
        }
    }

    // A connector path and a cycle of graph edges realizing an infinite
    // side chain from `start`, or nullopt when no chain survives forever.
    std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
    witness_tail(const HNode& start) const {
        if (!reach_cycle.count(start)) return std::nullopt;
        std::map<HNode, std::pair<HNode, std::size_t>> parent;
        std::deque<HNode> q{start};
        std::set<HNode> vis{start};
        std::optional<HNode> goal;
        if (on_cycle.count(start)) goal = start;
        while (!goal && !q.empty()) {
            HNode cur = q.front();
            q.pop_front();
            auto it = harcs.find(cur);
            if (it == harcs.end()) continue;
            for (const auto& [to, e] : it->second) {
                if (vis.count(to)) continue;
                vis.insert(to);
                parent[to] = {cur, e};
                if (on_cycle.count(to)) {
                    goal = to;
                    break;
                }
                q.push_back(to);
            }
        }
        if (!goal) return std::nullopt;
        std::vector<std::size_t> connector;
        for (HNode nd = *goal; !(nd == start);) {
            auto [pv, e] = parent.at(nd);
            connector.push_back(e);
            nd = pv;
        }
        std::reverse(connector.begin(), connector.end());
        // shortest cycle through the goal node
        std::map<HNode, std::pair<HNode, std::size_t>> par2;
        std::deque<HNode> q2{*goal};
        std::set<HNode> vis2;
        std::vector<std::size_t> cyc;
        while (!q2.empty() && cyc.empty()) {
            HNode cur = q2.front();
            q2.pop_front();
            auto it = harcs.find(cur);
            if (it == harcs.end()) continue;
            for (const auto& [to, e] : it->second) {
                if (to == *goal) {
                    std::vector<std::size_t> rc{e};
                    for (HNode nd = cur; !(nd == *goal);) {
                        auto [pv, pe] = par2.at(nd);
                        rc.push_back(pe);
                        nd = pv;
                    }
                    std::reverse(rc.begin(), rc.end());
                    cyc = rc;
                    break;
                }
                if (vis2.insert(to).second) {
                    par2[to] = {cur, e};
                    q2.push_back(to);
                }
            }
        }
        if (cyc.empty()) return std::nullopt;
        return std::make_pair(std::move(connector), std::move(cyc));
    }
};

// ---------------------------------------------------------------------------
// Chart construction
// ---------------------------------------------------------------------------

struct NbPick {
    std::size_t q = 0;
    Vec2 v;
    std::size_t b = 0;
    std::size_t f = 0;
    std::size_t bp = 0;
};

// The canonical forced neighbour across the inflated side a3 of p3: a corona
// tile with a side of direction -t lying inside the inflated side, carrying
// a singleton landing edge f.  Ties: least (f, v, b).
std::optional<NbPick> forced_neighbour(const EngineState& st, std::size_t p3,
                                       std::size_t a3, const Direction& t,
                                       bool* found_nb, bool* found_f) {
    const SubstSystem& s = st.sys();
    const SubstGraph& g = st.g;
    Segment sa3 = s.prototiles[p3].shape.edge(a3);
    Segment big(s.lambda * sa3.a, s.lambda * sa3.b);
    std::optional<NbPick> best;
    for (const Tile& tl : st.forced(p3)) {
        std::size_t qi = s.index_of(tl.proto);
        const Polygon& sh = s.prototiles[qi].shape;
        for (std::size_t b = 0; b < sh.size(); ++b) {
            Segment sb = sh.edge(b);
            Segment placed(sb.a + tl.pos, sb.b + tl.pos);
            if (placed.direction() != t.opposite()) continue;
            if (!segment_contains(big, placed)) continue;
            *found_nb = true;
            std::optional<std::size_t> f;
            for (std::size_t fe : g.into_edges[qi]) {
                const auto& pr = st.pairs()[fe];
                if (pr.size() == 1 && pr[0].b == b) {
                    f = fe;
                    break;
                }
            }
            if (!f) continue;
            *found_f = true;
            NbPick cand{qi, tl.pos, b, *f, st.pairs()[*f][0].a};
            auto less = [](const NbPick& l, const NbPick& r) {
                if (l.f != r.f) return l.f < r.f;
                if (Vec2::key_less(l.v, r.v)) return true;
                if (Vec2::key_less(r.v, l.v)) return false;
                return l.b < r.b;
            };
            if (!best || less(cand, *best)) best = cand;
        }
    }
    return best;
}

// The flipped image side must land inside the chart side of the level-3
// supertile: (1/lambda^3)(segment(b') + u) inside segment(a) + A3/lambda^3,
// where A3 = -(disp(e1) + lambda disp(e2) + lambda^2 disp(e3)).
bool flip_geometry_ok(const EngineState& st, const BetaChart& c) {
    const SubstSystem& s = st.sys();
    const SubstGraph& g = st.g;
    FieldElem l3 = s.lambda.pow(3);
    Vec2 a3x = -(g.edges[c.e1].disp + s.lambda * g.edges[c.e2].disp +
                 s.lambda.pow(2) * g.edges[c.e3].disp);
    Segment sa = s.prototiles[c.p].shape.edge(c.a);
    Segment outer(sa.a + a3x / l3, sa.b + a3x / l3);
    Segment sbp = s.prototiles[g.edges[c.f].src].shape.edge(c.b_prime);
    Segment inner((sbp.a + c.u) / l3, (sbp.b + c.u) / l3);
    return segment_contains(outer, inner);
}

BetaChart build_chart_impl(const EngineState& st, std::size_t pidx,
                           std::size_t a) {
    const SubstGraph& g = st.g;
    const SubstSystem& s = st.sys();
    const Polygon& shp = s.prototiles[pidx].shape;
    if (a >= shp.size())
        throw ParseError("side index " + std::to_string(a) +
                         " out of range for " + s.prototiles[pidx].id);
    Direction t = shp.edge(a).direction();
    bool found_e3 = false, found_nb = false, found_f = false;
    bool found_e2 = false, found_e1 = false;
    struct Cand {
        std::size_t e1, e2, e3, a1, a2, a3;
        NbPick nb;
    };
    std::vector<Cand> cands;
    for (std::size_t e3 : g.into_edges[pidx]) {
        const auto& pr3 = st.pairs()[e3];
        if (pr3.size() != 1 || pr3[0].b != a || st.loop_set.count(e3))
            continue;
        found_e3 = true;
        std::size_t a3 = pr3[0].a;
        std::size_t p3 = g.edges[e3].src;
        std::optional<NbPick> nb =
            forced_neighbour(st, p3, a3, t, &found_nb, &found_f);
        if (!nb) continue;
        for (std::size_t e2 : g.into_edges[p3]) {
            const auto& pr2 = st.pairs()[e2];
            if (pr2.size() != 1 || pr2[0].b != a3) continue;
            found_e2 = true;
            std::size_t a2 = pr2[0].a;
            std::size_t p2 = g.edges[e2].src;
            for (std::size_t e1 : g.into_edges[p2]) {
                const auto& pr1 = st.pairs()[e1];
                if (pr1.size() != 1 || pr1[0].b != a2) continue;
                found_e1 = true;
                cands.push_back({e1, e2, e3, pr1[0].a, a2, a3, *nb});
            }
        }
    }
    if (cands.empty()) {
        std::string why =
            !found_e3 ? "no singleton non-corner edge lands on the side"
            : !found_nb
                ? "no forced neighbour side lies inside the inflated child side"
            : !found_f ? "no singleton edge lands on the neighbour side"
            : !found_e2 ? "no singleton edge continues the chain at depth 2"
                        : "no singleton edge continues the chain at depth 3";
        throw NoChart("chart (" + side_name(s, pidx, a) + "): " + why);
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& l, const Cand& r) {
        return std::tie(l.e1, l.e2, l.e3, l.nb.f) <
               std::tie(r.e1, r.e2, r.e3, r.nb.f);
    });
    const Cand& c = cands.front();
    BetaChart out;
    out.p = pidx;
    out.a = a;
    out.t = t;
    out.e1 = c.e1;
    out.e2 = c.e2;
    out.e3 = c.e3;
    out.a1 = c.a1;
    out.a2 = c.a2;
    out.a3 = c.a3;
    out.q = c.nb.q;
    out.v = c.nb.v;
    out.b = c.nb.b;
    out.f = c.nb.f;
    out.b_prime = c.nb.bp;
    out.u = g.edges[c.nb.f].disp + s.lambda * c.nb.v -
            s.lambda * g.edges[c.e2].disp - g.edges[c.e1].disp;
    // construction invariants
    bool dirs_ok = side_direction(s, g.edges[c.e1].src, c.a1) == t &&
                   side_direction(s, g.edges[c.e2].src, c.a2) == t &&
                   side_direction(s, g.edges[c.e3].src, c.a3) == t &&
                   side_direction(s, c.nb.q, c.nb.b) == t.opposite() &&
                   side_direction(s, g.edges[c.nb.f].src, c.nb.bp) ==
                       t.opposite();
    if (!dirs_ok)
        throw std::logic_error("chart " + side_name(s, pidx, a) +
                               ": side chain directions are inconsistent");
    if (!flip_geometry_ok(st, out))
        throw std::logic_error("chart " + side_name(s, pidx, a) +
                               ": flip geometry check failed");
    return out;
}

Atlas build_atlas_impl(const EngineState& st) {
    const SubstSystem& s = st.sys();
    Atlas out;
    std::vector<std::string> fails;
    for (std::size_t p = 0; p < s.size(); ++p)
        for (std::size_t a = 0; a < s.prototiles[p].shape.size(); ++a) {
            try {
                out.charts.push_back(build_chart_impl(st, p, a));
            } catch (const NoChart&) {
                fails.push_back(side_name(s, p, a));
            }
        }
    if (!fails.empty()) {
        std::string msg = "no chart for " + std::to_string(fails.size()) +
                          " prototile sides:";
        for (const std::string& f : fails) msg += " " + f;
        throw NoChart(msg);
    }
    return out;
}

DirectionSetF choose_F_impl(const EngineState& st) {
    const SubstSystem& s = st.sys();
    DirectionSetF out;
    std::set<Direction, bool (*)(const Direction&, const Direction&)> rset(
        &Direction::angle_less);
    for (const HNode& nd : st.reach_cycle)
        rset.insert(side_direction(s, nd.v, nd.side));
    out.realized.assign(rset.begin(), rset.end());
    auto positive = [](const Direction& d) {
        int sx = d.vec().x.sign();
        return sx > 0 || (sx == 0 && d.vec().y.sign() > 0);
    };
    for (const Direction& d : out.realized) {
        if (rset.count(d.opposite()) && !positive(d)) continue;
        out.dirs.push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Translation of eventually periodic paths (including across a boundary)
// ---------------------------------------------------------------------------

// Ancestor-cell walk for a target puncture v outside every supertile level:
// entry cell found at stage n0 in the forced corona of the level-n0 region,
// then parents are read off the corona patterns; the tail cycle is certified
// by repetition of (input phase, cell type, cell offset).
PathSpec corona_walk(const EngineState& st, const PathSpec& x, const Vec2& v,
                     std::size_t n0, std::size_t r0, const Vec2& rel0,
                     const Vec2& anchor0, const FieldElem& scale0) {
    const SubstGraph& g = st.g;
    const SubstSystem& s = st.sys();
    const FieldElem& lam = s.lambda;
    Vec2 cellpos = anchor0 + scale0 * rel0;
    std::vector<std::string> ydes;
    if (n0 == 1) {
        if (!(v == cellpos))
            throw NotAPuncture(
                "translation target is not the puncture of its tile");
    } else {
        ydes = encode_position(g, s.prototiles[r0].id,
                               static_cast<unsigned>(n0 - 1), v - cellpos);
    }
    std::size_t xpre = x.prefix.size(), xcyc = x.cycle.size();
    std::vector<std::string> tail;
    struct Key {
        std::size_t phase, r;
        std::string rel;
        bool operator<(const Key& o) const {
            return std::tie(phase, r, rel) < std::tie(o.phase, o.r, o.rel);
        }
    };
    std::map<Key, std::size_t> seen;
    std::size_t n = n0, r = r0;
    Vec2 rel = rel0;
    const std::size_t itcap = xpre + 4096;
    while (true) {
        if (n >= xpre) {
            Key k{(n - xpre) % xcyc, r, rel.str()};
            auto it = seen.find(k);
            if (it != seen.end()) {
                PathSpec out;
                out.prefix = ydes;
                out.prefix.insert(out.prefix.end(), tail.begin(),
                                  tail.begin() +
                                      static_cast<std::ptrdiff_t>(it->second));
                out.cycle.assign(
                    tail.begin() + static_cast<std::ptrdiff_t>(it->second),
                    tail.end());
                validate_path(g, out);
                return out;
            }
            seen.emplace(k, tail.size());
        }
        if (tail.size() > itcap)
            throw std::logic_error("corona ascent failed to close a cycle");
        std::size_t en1 = g.edge_of(x.at(n));  // input coordinate x_{n+1}
        std::size_t qn1 = g.edges[en1].dst;
        Vec2 rho = rel + lam * g.edges[en1].disp;
        Vec2 pl = rho / lam;
        // cell puncture relative to the level-(n+1) region, region scale
        if (s.prototiles[qn1].shape.locate(pl / lam) == Location::Interior) {
            // the target cell is engulfed at the next level after all
            return recode_translation(g, x, v, static_cast<unsigned>(n + 1));
        }
        const Tile* parent = nullptr;
        std::size_t ri = 0;
        for (const Tile& tl : st.forced(qn1)) {
            std::size_t cand = s.index_of(tl.proto);
            if (s.prototiles[cand].shape.locate(pl - tl.pos) ==
                Location::Interior) {
                parent = &tl;
                ri = cand;
                break;
            }
        }
        if (!parent)
            throw std::logic_error(
                "corona ascent: parent cell not in the forced pattern");
        Vec2 d = rho - lam * parent->pos;
        std::optional<std::size_t> emb;
        for (std::size_t ce : g.into_edges[ri])
            if (g.edges[ce].src == r && g.edges[ce].disp == d) {
                emb = ce;
                break;
            }
        if (!emb)
            throw std::logic_error("corona ascent: cells are not nested");
        tail.push_back(g.edges[*emb].id);
        r = ri;
        rel = parent->pos;
        ++n;
    }
}

PathSpec translate_periodic_impl(const EngineState& st, const PathSpec& x,
                                 const Vec2& v) {
    const SubstGraph& g = st.g;
    validate_path(g, x);
    if (!x.eventually_periodic())
        throw ParseError("periodic translation requires an eventually "
                         "periodic path");
    if (v.is_zero()) return x;
    const SubstSystem& s = st.sys();
    const FieldElem& lam = s.lambda;
    FieldElem scale(1);  // lambda^(n-1)
    Vec2 anchor(FieldElem(0), FieldElem(0));
    const std::size_t cap = x.prefix.size() + 2 * x.cycle.size() + 64;
    for (std::size_t n = 1; n <= cap; ++n) {
        std::size_t en = g.edge_of(x.at(n - 1));
        anchor -= scale * g.edges[en].disp;
        std::size_t qn = g.edges[en].dst;
        Vec2 rlocal = (v - anchor) / (scale * lam);
        if (s.prototiles[qn].shape.locate(rlocal) == Location::Interior)
            return recode_translation(g, x, v, static_cast<unsigned>(n));
        Vec2 clocal = (v - anchor) / scale;
        for (const Tile& tl : st.forced(qn)) {
            std::size_t ri = s.index_of(tl.proto);
            if (s.prototiles[ri].shape.locate(clocal - tl.pos) ==
                Location::Interior)
                return corona_walk(st, x, v, n, ri, tl.pos, anchor, scale);
        }
        scale *= lam;
    }
    throw OutOfSupertile(
        "translation target is not reachable within the level cap");
}

// ---------------------------------------------------------------------------
// Chart application
// ---------------------------------------------------------------------------

void check_domain(const SubstGraph& g, const BetaChart& c, const PathSpec& x) {
    if (!x.determines(3))
        throw NotInDomain("path determines fewer than three coordinates");
    if (g.edge_of(x.at(0)) != c.e1 || g.edge_of(x.at(1)) != c.e2 ||
        g.edge_of(x.at(2)) != c.e3)
        throw NotInDomain(
            "path does not start with the chart cylinder (e1, e2, e3)");
}

// After recoding, the image must start with f, and the source's level-3
// supertile must re-encode inside the image patch as a genuine cell of type
// p whose puncture sits at the flip position A3 - u.
void check_image(const EngineState& st, const BetaChart& c, const PathSpec& y,
                 unsigned n) {
    const SubstGraph& g = st.g;
    const SubstSystem& s = st.sys();
    const FieldElem& lam = s.lambda;
    if (g.edge_of(y.at(0)) != c.f)
        throw std::logic_error(
            "chart image does not start with the forced edge f");
    Vec2 a3x = -(g.edges[c.e1].disp + lam * g.edges[c.e2].disp +
                 lam.pow(2) * g.edges[c.e3].disp);
    Vec2 pcell = a3x - c.u;
    for (unsigned m = 1; m <= n && y.determines(m); ++m) {
        Vec2 am = path_anchor(g, y, m);
        std::size_t qm = g.edge_of(y.at(m - 1));
        std::size_t qv = g.edges[qm].dst;
        Vec2 local = (pcell - am) / lam.pow(m);
        if (s.prototiles[qv].shape.locate(local) != Location::Interior)
            continue;
        std::vector<std::string> z;
        try {
            z = encode_position(g, s.prototiles[qv].id, m, pcell - am);
        } catch (const NotAPuncture&) {
            throw std::logic_error(
                "flip cell puncture is not a puncture of the image patch");
        }
        if (z.size() < 3)
            throw std::logic_error("flip cell sits too low in the hierarchy");
        std::size_t z1 = g.edge_of(z[0]), z2 = g.edge_of(z[1]),
                    z3 = g.edge_of(z[2]);
        Vec2 sum = g.edges[z1].disp + lam * g.edges[z2].disp +
                   lam.pow(2) * g.edges[z3].disp;
        if (g.edges[z3].dst != c.p || !sum.is_zero())
            throw std::logic_error(
                "image patch does not contain the flipped source cell");
        return;
    }
    throw std::logic_error("flip cell is not inside the image patch");
}

PathSpec beta_apply_impl(const EngineState& st, const BetaChart& c,
                         const PathSpec& x, unsigned n) {
    const SubstGraph& g = st.g;
    validate_path(g, x);
    check_domain(g, c, x);
    PathSpec y = recode_translation(g, x, c.u, n);
    check_image(st, c, y, n);
    return y;
}

PathSpec beta_apply_periodic_impl(const EngineState& st, const BetaChart& c,
                                  const PathSpec& x) {
    const SubstGraph& g = st.g;
    validate_path(g, x);
    if (!x.eventually_periodic())
        throw ParseError("beta_apply_periodic requires an eventually "
                         "periodic path");
    check_domain(g, c, x);
    PathSpec y = translate_periodic_impl(st, x, c.u);
    if (g.edge_of(y.at(0)) != c.f)
        throw std::logic_error(
            "chart image does not start with the forced edge f");
    return y;
}

// ---------------------------------------------------------------------------
// Flip verification
// ---------------------------------------------------------------------------

FlipReport verify_border_flip_impl(const EngineState& st, const Atlas& atlas) {
    const SubstGraph& g = st.g;
    FlipReport rep;
    for (const BetaChart& c : atlas.charts) {
        ++rep.charts_checked;
        std::string cname = side_name(st.sys(), c.p, c.a);
        if (!flip_geometry_ok(st, c)) {
            ++rep.geometry_failures;
            rep.geometry_failed_charts.push_back(cname);
        }
        // eventually periodic cases: all self-loop tails at p, plus a
        // surviving-chain witness when one exists
        std::vector<std::pair<std::vector<std::size_t>,
                              std::vector<std::size_t>>>
            tails;
        for (std::size_t e : g.into_edges[c.p])
            if (g.edges[e].src == c.p) tails.push_back({{}, {e}});
        if (auto wt = st.witness_tail(HNode{c.p, c.a}))
            tails.push_back(*wt);
        if (tails.size() > 24) tails.resize(24);
        std::set<std::string> dedupe;
        for (const auto& [conn, cyc] : tails) {
            std::vector<std::size_t> pre{c.e1, c.e2, c.e3};
            pre.insert(pre.end(), conn.begin(), conn.end());
            PathSpec x = make_path(g, pre, cyc);
            if (!dedupe.insert(x.str()).second) continue;
            FlipCase fc;
            fc.chart = cname;
            fc.path = x.str();
            ++rep.cases_checked;
            try {
                fc.lhs = has_dir(st.an.borders_of(x), c.t);
                PathSpec y = beta_apply_periodic_impl(st, c, x);
                fc.image = y.str();
                fc.rhs = has_dir(st.an.borders_of(y), c.t.opposite());
                PathSpec back = translate_periodic_impl(st, y, -c.u);
                fc.round_trip_ok = same_path(back, x);
                fc.ok = (fc.lhs == fc.rhs) && fc.round_trip_ok;
            } catch (const std::exception& ex) {
                fc.ok = false;
                fc.image = std::string("error: ") + ex.what();
            }
            if (!fc.ok) {
                ++rep.violations;
                rep.failures.push_back(fc);
            }
            rep.cases.push_back(std::move(fc));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Certificate separation
// ---------------------------------------------------------------------------

CrossReport cross_relation_check_impl(const EngineState& st, const Atlas& atlas,
                                      const DirectionSetF& F, unsigned n) {
    if (n < 4) throw ParseError("certificate depth must be at least 4");
    const SubstGraph& g = st.g;
    const BorderAutomaton& au = st.an.automaton();
    const std::vector<std::size_t> cedges = st.an.compute_C().c_edges;
    const std::size_t nc = cedges.size();
    if (nc > 64)
        throw ParseError("more than 64 corner loops are not supported");
    // boundary-hit table: does the child tile of an edge have a side landing
    // inside the controlled segment of a corner loop?
    std::vector<std::vector<char>> hit(nc,
                                       std::vector<char>(g.edges.size(), 0));
    for (std::size_t j = 0; j < nc; ++j)
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            PathSpec one;
            one.prefix = {g.edges[e].id};
            hit[j][e] = static_cast<char>(st.an.mu(cedges[j], one, 1));
        }
    // The block key of a depth-n path is its terminal vertex plus, per
    // corner loop j, the hit bit of the last coordinate different from the
    // loop edge (falling back to the first coordinate).  Both parts update
    // incrementally along the path, so blocks can be aggregated by dynamic
    // programming without enumerating the paths.
    auto upd_bits = [&](std::uint64_t bits, std::size_t e) {
        for (std::size_t j = 0; j < nc; ++j) {
            if (e == cedges[j]) continue;
            if (hit[j][e])
                bits |= (std::uint64_t{1} << j);
            else
                bits &= ~(std::uint64_t{1} << j);
        }
        return bits;
    };
    auto init_bits = [&](std::size_t e) {
        std::uint64_t bits = 0;
        for (std::size_t j = 0; j < nc; ++j)
            if (hit[j][e]) bits |= (std::uint64_t{1} << j);
        return bits;
    };
    auto key_str = [&](std::size_t vtx, std::uint64_t bits) {
        std::string key = "v=" + std::to_string(vtx) + ";mu=";
        for (std::size_t j = 0; j < nc; ++j)
            key += ((bits >> j) & 1) ? '1' : '0';
        return key;
    };
    struct StartSpec {
        std::size_t vtx = 0, side = 0;
        std::uint64_t bits = 0;
        std::size_t depth_done = 0;
        bool image = false;
        std::string chart, dir;
        std::vector<std::size_t> stem;
    };
    std::vector<StartSpec> starts;
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> src_seen;
    std::set<std::size_t> img_seen;
    for (const BetaChart& c : atlas.charts) {
        if (!F.contains(c.t)) continue;
        std::string cname = side_name(st.sys(), c.p, c.a);
        if (src_seen.insert({c.e1, c.e2, c.e3}).second) {
            std::uint64_t bits =
                upd_bits(upd_bits(init_bits(c.e1), c.e2), c.e3);
            starts.push_back({c.p, c.a, bits, 3, false, cname, c.t.str(),
                              {c.e1, c.e2, c.e3}});
        }
        // the image cylinder is determined by f alone (b' is its pair side)
        if (img_seen.insert(c.f).second) {
            if (std::optional<std::size_t> s1 = au.step(c.f, c.b_prime))
                starts.push_back({g.edges[c.f].dst, *s1, init_bits(c.f), 1,
                                  true, cname, c.t.opposite().str(), {c.f}});
        }
    }
    CrossReport rep;
    rep.depth = n;
    // per block key and side: certificate count and one sample path per dir
    struct Agg {
        std::map<std::string, std::size_t> cnt;
        std::map<std::string, std::string> sample;
    };
    std::map<std::string, std::array<Agg, 2>> agg;
    using DPKey = std::tuple<std::size_t, std::size_t, std::uint64_t>;
    for (const StartSpec& sp : starts) {
        std::map<DPKey, std::size_t> cur;
        cur[{sp.vtx, sp.side, sp.bits}] = 1;
        for (std::size_t lv = sp.depth_done; lv < n; ++lv) {
            std::map<DPKey, std::size_t> nxt;
            for (const auto& [key, cnt] : cur) {
                const auto& [v, a, bits] = key;
                for (std::size_t e : g.out_edges[v]) {
                    std::optional<std::size_t> ns = au.step(e, a);
                    if (!ns) continue;
                    nxt[{g.edges[e].dst, *ns, upd_bits(bits, e)}] += cnt;
                }
            }
            cur = std::move(nxt);
        }
        std::size_t total = 0;
        for (const auto& [key, cnt] : cur) {
            const auto& [v, a, bits] = key;
            agg[key_str(v, bits)][sp.image ? 1 : 0].cnt[sp.dir] += cnt;
            total += cnt;
        }
        (sp.image ? rep.image_certs : rep.source_certs) += total;
    }
    // bounded explicit enumeration for the certificate list and the
    // collision sample paths; counts above remain exact
    const std::size_t kCap = 20000;
    bool full = false;
    for (const StartSpec& sp : starts) {
        if (full) break;
        std::function<void(std::size_t, std::size_t, std::uint64_t,
                           std::vector<std::size_t>&)>
            dfs = [&](std::size_t v, std::size_t a, std::uint64_t bits,
                      std::vector<std::size_t>& w) {
                if (full) return;
                if (w.size() == n) {
                    CrossCert cert;
                    cert.path = make_path(g, w, {}).str();
                    cert.chart = sp.chart;
                    cert.dir = sp.dir;
                    cert.image_side = sp.image;
                    cert.block_key = key_str(v, bits);
                    Agg& ag = agg[cert.block_key][sp.image ? 1 : 0];
                    ag.sample.emplace(sp.dir, cert.path);
                    rep.certificates.push_back(std::move(cert));
                    if (rep.certificates.size() >= kCap) full = true;
                    return;
                }
                for (std::size_t e : g.out_edges[v]) {
                    std::optional<std::size_t> ns = au.step(e, a);
                    if (!ns) continue;
                    w.push_back(e);
                    dfs(g.edges[e].dst, *ns, upd_bits(bits, e), w);
                    w.pop_back();
                    if (full) return;
                }
            };
        std::vector<std::size_t> w = sp.stem;
        dfs(sp.vtx, sp.side, sp.bits, w);
    }
    rep.certificates_complete = !full;
    auto sample_of = [](const Agg& ag) {
        return ag.sample.empty() ? std::string("(beyond sample cap)")
                                 : ag.sample.begin()->second;
    };
    for (const auto& [key, sides] : agg) {
        const Agg& S = sides[0];
        const Agg& I = sides[1];
        std::size_t stot = 0, itot = 0;
        for (const auto& [d, cnt] : S.cnt) stot += cnt;
        for (const auto& [d, cnt] : I.cnt) itot += cnt;
        if (stot && itot) {
            rep.cross_collisions += stot * itot;
            if (rep.collisions.size() < 100)
                rep.collisions.push_back("source/image share block " + key +
                                         ": " + sample_of(S) + " vs " +
                                         sample_of(I));
        }
        if (S.cnt.size() >= 2) {
            for (auto i1 = S.cnt.begin(); i1 != S.cnt.end(); ++i1)
                for (auto i2 = std::next(i1); i2 != S.cnt.end(); ++i2) {
                    rep.direction_collisions += i1->second * i2->second;
                    if (rep.collisions.size() < 100)
                        rep.collisions.push_back(
                            "directions " + i1->first + "/" + i2->first +
                            " share block " + key + ": " +
                            (S.sample.count(i1->first)
                                 ? S.sample.at(i1->first)
                                 : "(beyond sample cap)") +
                            " vs " +
                            (S.sample.count(i2->first)
                                 ? S.sample.at(i2->first)
                                 : "(beyond sample cap)"));
                }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Measure decay of boundary cylinders
// ---------------------------------------------------------------------------

DecayReport thinness_decay_impl(const EngineState& st, const Direction& t,
                                unsigned m_max) {
    const SubstGraph& g = st.g;
    const SubstSystem& s = st.sys();
    const BorderAutomaton& au = st.an.automaton();
    PFMeasure pf = pf_measure(s);
    DecayReport rep;
    rep.t = t;
    rep.exact = pf.exact;
    if (m_max == 0) return rep;
    // weighted count of surviving chain states, advanced one level at a time
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, Int> states;
    for (std::size_t vtx = 0; vtx < s.size(); ++vtx) {
        std::vector<std::size_t> alive;
        const Polygon& sh = s.prototiles[vtx].shape;
        for (std::size_t a = 0; a < sh.size(); ++a)
            if (sh.edge(a).direction() == t) alive.push_back(a);
        if (!alive.empty()) states[{vtx, alive}] += 1;
    }
    std::vector<Rat> outm_exact(s.size(), Rat(0));
    std::vector<double> outm_dbl(s.size(), 0.0);
    for (const GraphEdge& e : g.edges) {
        if (pf.exact) outm_exact[e.src] += pf.xi_exact[e.dst];
        outm_dbl[e.src] += pf.xi[e.dst];
    }
    Rat pow_exact(1);
    double pow_dbl = 1.0;
    for (unsigned m = 1; m <= m_max; ++m) {
        if (pf.exact) pow_exact /= pf.lambda_pf_exact;
        pow_dbl /= pf.lambda_pf;
        Rat acc_exact(0);
        double acc_dbl = 0.0;
        for (const auto& [key, cnt] : states) {
            if (pf.exact) acc_exact += Rat(cnt) * outm_exact[key.first];
            acc_dbl += cnt.convert_to<double>() * outm_dbl[key.first];
        }
        if (pf.exact) {
            acc_exact *= pow_exact;
            rep.nu_exact.push_back(acc_exact.str());
            rep.nu.push_back(acc_exact.convert_to<double>());
        } else {
            rep.nu.push_back(acc_dbl * pow_dbl);
        }
        if (m == m_max) break;
        std::map<std::pair<std::size_t, std::vector<std::size_t>>, Int> next;
        for (const auto& [key, cnt] : states) {
            for (std::size_t e : g.out_edges[key.first]) {
                std::set<std::size_t> img;
                for (std::size_t a : key.second)
                    if (std::optional<std::size_t> ns = au.step(e, a))
                        img.insert(*ns);
                if (img.empty()) continue;
                next[{g.edges[e].dst,
                      std::vector<std::size_t>(img.begin(), img.end())}] +=
                    cnt;
            }
        }
        states = std::move(next);
    }
    for (std::size_t i = 0; i + 1 < rep.nu.size(); ++i)
        rep.ratios.push_back(rep.nu[i] > 0 ? rep.nu[i + 1] / rep.nu[i] : 0.0);
    for (std::size_t i = rep.ratios.size() / 2; i < rep.ratios.size(); ++i)
        rep.max_tail_ratio = std::max(rep.max_tail_ratio, rep.ratios[i]);
    return rep;
}

// ---------------------------------------------------------------------------
// Orbit gluing
// ---------------------------------------------------------------------------

// Tries every chart whose direction matches the given boundary direction (or
// its opposite) and returns the first confirmed glue witness.
std::optional<RayGlue> glue_for_direction(const EngineState& st,
                                          const Atlas& atlas,
                                          const Direction& ray) {
    const SubstGraph& g = st.g;
    for (const BetaChart& c : atlas.charts) {
        if (!(c.t == ray || c.t == ray.opposite())) continue;
        auto wt = st.witness_tail(HNode{c.p, c.a});
        if (!wt) continue;
        std::vector<std::size_t> pre{c.e1, c.e2, c.e3};
        pre.insert(pre.end(), wt->first.begin(), wt->first.end());
        PathSpec x = make_path(g, pre, wt->second);
        try {
            if (!has_dir(st.an.borders_of(x), c.t)) continue;
            PathSpec y = beta_apply_periodic_impl(st, c, x);
            if (!has_dir(st.an.borders_of(y), c.t.opposite())) continue;
            RayGlue out;
            out.ray = ray.str();
            out.glued = true;
            out.chart = side_name(st.sys(), c.p, c.a);
            out.witness = x.str();
            out.image = y.str();
            return out;
        } catch (const std::exception&) {
            continue;
        }
    }
    return std::nullopt;
}

SplitReport splitting_report_impl(const EngineState& st) {
    const SubstGraph& g = st.g;
    const SubstSystem& s = st.sys();
    SplitReport rep;
    Atlas atlas;
    try {
        atlas = build_atlas_impl(st);
        rep.atlas_ok = true;
    } catch (const NoChart& e) {
        rep.atlas_error = e.what();
    } catch (const NotBorderForcing& e) {
        rep.atlas_error = e.what();
    }
    // corner families, grouped by their half-line direction sets
    struct Member {
        std::size_t edge;
        Vec2 center;
        Direction tile_dir{Vec2(FieldElem(1), FieldElem(0))};
    };
    std::map<std::string, std::pair<std::vector<Direction>,
                                    std::vector<Member>>>
        fams;
    for (std::size_t e : st.loops) {
        PathSpec x = make_path(g, {}, {e});
        TypeClass cls = st.an.classify_type(x);
        if (cls.type != TilingType::III || !cls.center) continue;
        std::string key;
        for (const Direction& d : cls.half_lines) key += d.str() + ";";
        Vec2 rp =
            s.prototiles[g.edges[e].src].shape.representative_interior_point();
        Member mb{e, *cls.center,
                  Direction(rp - *cls.center)};
        auto it = fams.find(key);
        if (it == fams.end())
            fams.emplace(key,
                         std::make_pair(cls.half_lines,
                                        std::vector<Member>{mb}));
        else
            it->second.second.push_back(mb);
    }
    for (const auto& [key, fam] : fams) {
        const std::vector<Direction>& rays = fam.first;
        const std::vector<Member>& members = fam.second;
        SectorFamily out;
        for (const Direction& d : rays) out.rays.push_back(d.str());
        std::size_t nrays = rays.size();
        // sector of each member: position of its tile direction between
        // consecutive rays in rotational order
        std::vector<std::vector<std::size_t>> by_sector(
            std::max<std::size_t>(nrays, 1));
        bool degenerate = false;
        for (std::size_t mi = 0; mi < members.size(); ++mi) {
            const Member& mb = members[mi];
            std::size_t cnt = 0;
            for (const Direction& r : rays) {
                if (r == mb.tile_dir) degenerate = true;
                if (Direction::angle_less(r, mb.tile_dir)) ++cnt;
            }
            std::size_t sector = nrays ? (cnt + nrays - 1) % nrays : 0;
            by_sector[sector].push_back(mi);
        }
        bool bijective = !degenerate && members.size() == nrays;
        if (bijective)
            for (const auto& sec : by_sector)
                if (sec.size() != 1) bijective = false;
        out.counts_match = bijective;
        if (bijective) {
            for (const auto& sec : by_sector) {
                out.members.push_back(g.edges[members[sec[0]].edge].id);
                out.centers.push_back(members[sec[0]].center.str());
            }
        } else {
            for (const Member& mb : members) {
                out.members.push_back(g.edges[mb.edge].id);
                out.centers.push_back(mb.center.str());
            }
        }
        std::size_t glued = 0;
        for (std::size_t i = 0; i < nrays; ++i) {
            RayGlue rg;
            rg.ray = rays[i].str();
            if (rep.atlas_ok) {
                if (auto got = glue_for_direction(st, atlas, rays[i])) {
                    rg = *got;
                    ++glued;
                }
            }
            if (bijective) {
                rg.left_member =
                    g.edges[members[by_sector[(i + nrays - 1) % nrays][0]]
                                .edge]
                        .id;
                rg.right_member =
                    g.edges[members[by_sector[i][0]].edge].id;
            }
            out.glues.push_back(std::move(rg));
        }
        if (nrays > 1) {
            std::size_t components = glued >= nrays ? 1 : nrays - glued;
            out.residual_pairs = components - 1;
        }
        rep.families.push_back(std::move(out));
    }
    // full-line samples: non-corner self-loops with a surviving chain
    std::size_t samples = 0;
    for (std::size_t e = 0; e < g.edges.size() && samples < 4; ++e) {
        if (g.edges[e].src != g.edges[e].dst || st.loop_set.count(e)) continue;
        PathSpec x = make_path(g, {}, {e});
        if (st.an.borders_of(x).empty()) continue;
        TypeClass cls = st.an.classify_type(x);
        if (cls.type != TilingType::II) continue;
        LineSample smp;
        smp.path = x.str();
        for (const Direction& d : cls.border_dirs) smp.dirs.push_back(d.str());
        if (rep.atlas_ok) {
            for (const Direction& d : cls.border_dirs) {
                if (auto got = glue_for_direction(st, atlas, d)) {
                    smp.glued = true;
                    smp.chart = got->chart;
                    smp.witness = got->witness;
                    smp.image = got->image;
                    break;
                }
            }
        }
        rep.line_samples.push_back(std::move(smp));
        ++samples;
    }
    return rep;
}

std::size_t resolve_proto(const SubstSystem& s, const std::string& p) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.prototiles[i].id == p || s.prototiles[i].label == p) return i;
    throw ParseError("unknown prototile: " + p);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

std::string BetaChart::str() const {
    std::ostringstream os;
    os << "p=" << p << " a=" << a << " t=" << t.str() << " e=(" << e1 << ","
       << e2 << "," << e3 << ")"
       << " chain=(" << a1 << "," << a2 << "," << a3 << ")"
       << " q=" << q << " v=" << v.str() << " b=" << b << " f=" << f
       << " b'=" << b_prime << " u=" << u.str();
    return os.str();
}

const BetaChart* Atlas::find(std::size_t p, std::size_t a) const {
    for (const BetaChart& c : charts)
        if (c.p == p && c.a == a) return &c;
    return nullptr;
}

bool DirectionSetF::contains(const Direction& t) const {
    for (const Direction& d : dirs)
        if (d == t) return true;
    return false;
}

BetaChart build_chart(const SubstGraph& g, const std::string& p,
                      std::size_t a) {
    EngineState st(g);
    return build_chart_impl(st, resolve_proto(g.system, p), a);
}

Atlas build_atlas(const SubstGraph& g) {
    EngineState st(g);
    return build_atlas_impl(st);
}

DirectionSetF choose_F(const SubstGraph& g) {
    EngineState st(g);
    return choose_F_impl(st);
}

PathSpec beta_apply(const SubstGraph& g, const BetaChart& c, const PathSpec& x,
                    unsigned n) {
    EngineState st(g);
    return beta_apply_impl(st, c, x, n);
}

PathSpec beta_apply_periodic(const SubstGraph& g, const BetaChart& c,
                             const PathSpec& x) {
    EngineState st(g);
    return beta_apply_periodic_impl(st, c, x);
}

FlipReport verify_border_flip(const SubstGraph& g, const Atlas& atlas) {
    EngineState st(g);
    return verify_border_flip_impl(st, atlas);
}

CrossReport cross_relation_check(const SubstGraph& g, const Atlas& atlas,
                                 const DirectionSetF& F, unsigned n) {
    EngineState st(g);
    return cross_relation_check_impl(st, atlas, F, n);
}

DecayReport thinness_decay(const SubstGraph& g, const Direction& t,
                           unsigned m_max) {
    EngineState st(g);
    return thinness_decay_impl(st, t, m_max);
}

SplitReport splitting_report(const SubstGraph& g) {
    EngineState st(g);
    return splitting_report_impl(st);
}

// ---------------------------------------------------------------------------
// ChartEngine
// ---------------------------------------------------------------------------

struct ChartEngine::Impl {
    EngineState st;
    explicit Impl(const SubstGraph& g) : st(g) {}
};

ChartEngine::ChartEngine(const SubstGraph& g)
    : impl_(std::make_unique<Impl>(g)) {}
ChartEngine::~ChartEngine() = default;
ChartEngine::ChartEngine(ChartEngine&&) noexcept = default;
ChartEngine& ChartEngine::operator=(ChartEngine&&) noexcept = default;

const SubstGraph& ChartEngine::graph() const { return impl_->st.g; }
BorderAnalysis& ChartEngine::analysis() const { return impl_->st.an; }

BetaChart ChartEngine::build_chart(const std::string& p, std::size_t a) const {
    return build_chart_impl(impl_->st, resolve_proto(impl_->st.sys(), p), a);
}

Atlas ChartEngine::build_atlas() const { return build_atlas_impl(impl_->st); }

DirectionSetF ChartEngine::choose_F() const {
    return choose_F_impl(impl_->st);
}

PathSpec ChartEngine::beta_apply(const BetaChart& c, const PathSpec& x,
                                 unsigned n) const {
    return beta_apply_impl(impl_->st, c, x, n);
}

PathSpec ChartEngine::beta_apply_periodic(const BetaChart& c,
                                          const PathSpec& x) const {
    return beta_apply_periodic_impl(impl_->st, c, x);
}

FlipReport ChartEngine::verify_border_flip(const Atlas& atlas) const {
    return verify_border_flip_impl(impl_->st, atlas);
}

CrossReport ChartEngine::cross_relation_check(const Atlas& atlas,
                                              const DirectionSetF& F,
                                              unsigned n) const {
    return cross_relation_check_impl(impl_->st, atlas, F, n);
}

DecayReport ChartEngine::thinness_decay(const Direction& t,
                                        unsigned m_max) const {
    return thinness_decay_impl(impl_->st, t, m_max);
}

SplitReport ChartEngine::splitting_report() const {
    return splitting_report_impl(impl_->st);
}

}  // namespace tilingaf
