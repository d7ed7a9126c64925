#include "tilingaf/borders.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tilingaf/errors.hpp"

namespace tilingaf {

namespace {

std::size_t sides_of(const SubstGraph& g, std::size_t v) {
    return g.system.prototiles[v].shape.size();
}

Direction side_dir(const SubstGraph& g, std::size_t v, std::size_t a) {
    return g.system.prototiles[v].shape.edge(a).direction();
}

// The child side a of edge k, placed at the rule position and shrunk back
// into the parent's coordinates.
Segment side_image(const SubstGraph& g, std::size_t k, std::size_t a) {
    const GraphEdge& e = g.edges[k];
    Segment ca = g.system.prototiles[e.src].shape.edge(a);
    return Segment((ca.a + e.disp) / g.system.lambda,
                   (ca.b + e.disp) / g.system.lambda);
}

// Side pairs of a single edge, sorted by (a, b).
std::vector<APair> pair_set(const SubstGraph& g, std::size_t k) {
    const GraphEdge& e = g.edges[k];
    const Polygon& child = g.system.prototiles[e.src].shape;
    const Polygon& parent = g.system.prototiles[e.dst].shape;
    std::vector<APair> out;
    for (std::size_t a = 0; a < child.size(); ++a) {
        Segment img = side_image(g, k, a);
        for (std::size_t b = 0; b < parent.size(); ++b) {
            Segment pb = parent.edge(b);
            if (!segment_contains(pb, img)) continue;
            // A genuine pair keeps the boundary orientation: the child's
            // interior and the parent's interior lie on the same side.
            if (img.direction() != pb.direction()) continue;
            out.push_back({a, b});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string side_name(const SubstGraph& g, std::size_t v, std::size_t a) {
    return g.vertices[v] + "." + std::to_string(a);
}

// Shared per-call context: pair sets plus the deterministic successor maps.
struct BorderCtx {
    const SubstGraph& g;
    std::vector<std::vector<APair>> pairs;
    BorderAutomaton au;
    // Realized sector shapes (see sector_shapes), computed on first use.
    mutable std::optional<std::vector<std::pair<Direction, Direction>>>
        shapes_cache;

    explicit BorderCtx(const SubstGraph& graph) : g(graph) {
        pairs.resize(g.edges.size());
        au.next.resize(g.edges.size());
        for (std::size_t k = 0; k < g.edges.size(); ++k) {
            pairs[k] = pair_set(g, k);
            for (const APair& p : pairs[k])
                if (!au.next[k].emplace(p.a, p.b).second)
                    au.deterministic = false;
        }
    }

    std::optional<std::size_t> step(std::size_t k, std::size_t a) const {
        auto it = au.next[k].find(a);
        if (it == au.next[k].end()) return std::nullopt;
        return it->second;
    }

    const std::vector<std::pair<Direction, Direction>>& sector_shapes() const;
};

// Edge index at 1-based position i of an eventually periodic path.
std::size_t edge_at(const SubstGraph& g, const PathSpec& x, std::size_t i) {
    return g.edge_of(x.at(i - 1));
}

std::string join_ids(const std::vector<std::size_t>& idx, const SubstGraph& g) {
    std::string out;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) out += ",";
        out += g.edges[idx[i]].id;
    }
    return out;
}

// --- corner chains ---------------------------------------------------------

// Does the consecutive-side pair (a, a+1) at the base of the purely periodic
// path given by cyc survive every level?  Decided by state repetition.
bool corner_survives(const BorderCtx& ctx, const std::vector<std::size_t>& cyc,
                     std::size_t a) {
    const SubstGraph& g = ctx.g;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::size_t phase = 0, cur = a;
    while (seen.insert({phase, cur}).second) {
        std::size_t e = cyc[phase];
        std::size_t nv = sides_of(g, g.edges[e].src);
        auto a2 = ctx.step(e, cur);
        auto b2 = ctx.step(e, (cur + 1) % nv);
        if (!a2 || !b2) return false;
        std::size_t nn = sides_of(g, g.edges[e].dst);
        if (*b2 != (*a2 + 1) % nn) return false;
        cur = *a2;
        phase = (phase + 1) % cyc.size();
    }
    return true;
}

std::vector<PathSpec> corner_enumerate_impl(const BorderCtx& ctx,
                                            const Direction& s,
                                            const Direction& t) {
    const SubstGraph& g = ctx.g;
    // Corner states: (vertex, side a) with consecutive sides of directions
    // (s, t).
    std::vector<std::pair<std::size_t, std::size_t>> nodes;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> node_id;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        std::size_t nv = sides_of(g, v);
        for (std::size_t a = 0; a < nv; ++a)
            if (side_dir(g, v, a) == s && side_dir(g, v, (a + 1) % nv) == t) {
                node_id[{v, a}] = nodes.size();
                nodes.push_back({v, a});
            }
    }
    // Transitions: both sides survive the edge and stay consecutive.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(
        nodes.size());  // (edge label, target node)
    for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
        auto [v, a] = nodes[ni];
        std::size_t nv = sides_of(g, v);
        for (std::size_t e : g.out_edges[v]) {
            auto a2 = ctx.step(e, a);
            auto b2 = ctx.step(e, (a + 1) % nv);
            if (!a2 || !b2) continue;
            std::size_t w = g.edges[e].dst;
            if (*b2 != (*a2 + 1) % sides_of(g, w)) continue;
            auto it = node_id.find({w, *a2});
            if (it == node_id.end()) continue;
            adj[ni].push_back({e, it->second});
        }
        std::sort(adj[ni].begin(), adj[ni].end());
    }
    // Closed walks of length <= #nodes whose minimal node is the start.
    std::vector<std::vector<std::size_t>> walks;
    const std::size_t cap_len = nodes.size();
    std::vector<std::size_t> path;
    auto dfs = [&](auto&& self, std::size_t u, std::size_t cur) -> void {
        for (const auto& [e, nj] : adj[cur]) {
            if (nj < u) continue;
            path.push_back(e);
            if (nj == u) {
                walks.push_back(path);
                if (walks.size() > 4096)
                    throw ClosureTooLarge(
                        "corner enumeration exceeded 4096 closed walks");
            }
            if (path.size() < cap_len) self(self, u, nj);
            path.pop_back();
        }
    };
    for (std::size_t u = 0; u < nodes.size(); ++u) dfs(dfs, u, u);
    // Emit every rotation of every walk, written at minimal period and
    // deduplicated (an unrolled repetition names the same infinite path).
    std::map<std::string, PathSpec> out;
    for (const std::vector<std::size_t>& full : walks) {
        std::size_t d = full.size();
        for (std::size_t c = 1; c < full.size(); ++c) {
            if (full.size() % c) continue;
            bool rep = true;
            for (std::size_t i = 0; i < full.size() && rep; ++i)
                rep = full[i] == full[(i + c) % full.size()];
            if (rep) { d = c; break; }
        }
        for (std::size_t r = 0; r < d; ++r) {
            PathSpec p;
            for (std::size_t i = 0; i < d; ++i)
                p.cycle.push_back(g.edges[full[(r + i) % d]].id);
            out.emplace(p.str(), p);
        }
    }
    std::vector<PathSpec> result;
    for (auto& [key, p] : out) result.push_back(std::move(p));
    return result;
}

// Sector shapes realized anywhere in the system: for each direction pair
// (s', t') carrying periodic corner chains, a counter-clockwise sweep from t'
// to -s'.
const std::vector<std::pair<Direction, Direction>>& BorderCtx::sector_shapes()
    const {
    if (!shapes_cache) {
        std::vector<std::pair<Direction, Direction>> sh;
        const std::vector<Direction> dirs = edge_directions(g.system);
        for (const Direction& sp : dirs)
            for (const Direction& tp : dirs) {
                if (sp == tp || det2(sp.vec(), tp.vec()).is_zero()) continue;
                if (corner_enumerate_impl(*this, sp, tp).empty()) continue;
                sh.push_back({tp, sp.opposite()});
            }
        shapes_cache = std::move(sh);
    }
    return *shapes_cache;
}

void require_corner_pair(const Direction& s, const Direction& t) {
    if (s == t)
        throw std::invalid_argument("corner directions must be distinct");
    if (det2(s.vec(), t.vec()).is_zero())
        throw std::invalid_argument("corner directions must not be parallel");
}

// --- fan assembly for sector boundaries ------------------------------------

// Whether the counter-clockwise sweep from d to d' (a sector of angular size
// strictly between 0 and a full turn) passes the angular origin of the
// rotational order.
bool sweep_wraps(const Direction& d, const Direction& dp) {
    return Direction::angle_less(dp, d);
}

struct FanResult {
    std::vector<Direction> rays;
    bool ambiguous = false;
    bool closed = true;
};

// Complete the sector [start -> end] (counter-clockwise) to a full turn using
// the available sector shapes, with as few rays as possible.  Each available
// shape is a sweep from its first direction to its second.
FanResult assemble_fan(const Direction& start, const Direction& end,
                       const std::vector<std::pair<Direction, Direction>>& shapes) {
    FanResult res;
    res.rays = {start, end};
    std::sort(res.rays.begin(), res.rays.end(), Direction::angle_less);
    int base_wrap = sweep_wraps(start, end) ? 1 : 0;
    // Breadth-first search over (direction, wraps so far); target: back at
    // `start` with exactly one full turn.
    struct State {
        Direction dir;
        int wraps;
    };
    auto key = [](const Direction& d, int w) { return d.str() + "#" + std::to_string(w); };
    std::map<std::string, std::vector<std::string>> preds;  // state -> predecessor states
    std::map<std::string, State> states;
    std::vector<std::string> frontier;
    std::string start_key = key(end, base_wrap);
    states.emplace(start_key, State{end, base_wrap});
    frontier.push_back(start_key);
    std::string goal_key = key(start, 1);
    bool found = (end == start && base_wrap == 1);  // degenerate: never (size > 0)
    std::size_t depth = 0;
    std::map<std::string, std::size_t> dist{{start_key, 0}};
    while (!frontier.empty() && !found) {
        ++depth;
        std::vector<std::string> next_frontier;
        for (const std::string& sk : frontier) {
            const State& st = states.at(sk);
            for (const auto& [d1, d2] : shapes) {
                if (!(d1 == st.dir)) continue;
                int w = st.wraps + (sweep_wraps(d1, d2) ? 1 : 0);
                if (w > 1) continue;
                std::string nk = key(d2, w);
                auto it = dist.find(nk);
                if (it == dist.end()) {
                    dist[nk] = depth;
                    states.emplace(nk, State{d2, w});
                    preds[nk].push_back(sk);
                    next_frontier.push_back(nk);
                } else if (it->second == depth) {
                    preds[nk].push_back(sk);
                }
            }
        }
        frontier = std::move(next_frontier);
        if (dist.count(goal_key)) found = true;
    }
    if (!found) {
        res.closed = false;
        res.ambiguous = true;
        return res;
    }
    // Collect the ray sets of all minimal completions by walking predecessor
    // chains back from the goal.
    std::set<std::string> ray_strs;
    std::vector<std::set<std::string>> solutions;
    std::vector<std::string> chain;
    auto walk = [&](auto&& self, const std::string& sk) -> void {
        chain.push_back(sk);
        if (sk == start_key) {
            std::set<std::string> sol;
            for (const std::string& c : chain) sol.insert(states.at(c).dir.str());
            solutions.push_back(std::move(sol));
        } else {
            for (const std::string& pk : preds[sk]) self(self, pk);
        }
        chain.pop_back();
    };
    walk(walk, goal_key);
    for (std::size_t i = 1; i < solutions.size(); ++i)
        if (solutions[i] != solutions[0]) res.ambiguous = true;
    std::set<std::string> all;
    for (const auto& sol : solutions) all.insert(sol.begin(), sol.end());
    std::vector<Direction> rays;
    for (const std::string& ds : all) rays.push_back(Direction::parse(ds));
    for (const Direction& d : res.rays)
        if (!std::count(rays.begin(), rays.end(), d)) rays.push_back(d);
    std::sort(rays.begin(), rays.end(), Direction::angle_less);
    res.rays = std::move(rays);
    return res;
}

// --- boundary chains along a path ------------------------------------------

std::vector<BorderChain> borders_impl(const BorderCtx& ctx, const PathSpec& x) {
    const SubstGraph& g = ctx.g;
    std::size_t n0 = x.prefix.size(), P = x.cycle.size();
    std::vector<std::size_t> pre_idx, cyc_idx;
    for (std::size_t i = 1; i <= n0; ++i) pre_idx.push_back(edge_at(g, x, i));
    for (std::size_t i = 0; i < P; ++i)
        cyc_idx.push_back(g.edge_of(x.cycle[i]));
    std::size_t base = g.edges[n0 ? pre_idx[0] : cyc_idx[0]].src;
    std::vector<BorderChain> out;
    for (std::size_t a = 0; a < sides_of(g, base); ++a) {
        std::vector<std::size_t> sides{a};
        std::size_t cur = a;
        bool alive = true;
        for (std::size_t i = 0; i < n0 && alive; ++i) {
            auto nxt = ctx.step(pre_idx[i], cur);
            if (!nxt) { alive = false; break; }
            cur = *nxt;
            sides.push_back(cur);
        }
        if (!alive) continue;
        // Periodic part: run until a (cycle phase, side) state repeats.
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
        seen[{0, cur}] = n0;  // state before crossing transition index n0+1
        std::size_t k = n0;
        std::size_t loop_start = 0, loop_end = 0;
        while (alive) {
            std::size_t phase = (k - n0) % P;
            auto nxt = ctx.step(cyc_idx[phase], cur);
            if (!nxt) { alive = false; break; }
            cur = *nxt;
            sides.push_back(cur);
            ++k;
            auto [it, fresh] = seen.emplace(std::make_pair((k - n0) % P, cur), k);
            if (!fresh) {
                loop_start = it->second;
                loop_end = k;
                break;
            }
        }
        if (!alive) continue;
        BorderChain ch{side_dir(g, base, a), {}, {}};
        ch.side_prefix.assign(sides.begin(), sides.begin() + loop_start + 1);
        ch.side_cycle.assign(sides.begin() + loop_start + 1,
                             sides.begin() + loop_end + 1);
        // Canonical form: absorb a prefix tail that merely repeats the cycle.
        while (!ch.side_prefix.empty() &&
               ch.side_prefix.back() == ch.side_cycle.back()) {
            ch.side_cycle.insert(ch.side_cycle.begin(), ch.side_cycle.back());
            ch.side_cycle.pop_back();
            ch.side_prefix.pop_back();
        }
        out.push_back(std::move(ch));
    }
    return out;
}

unsigned minimal_period(const std::vector<std::string>& cycle) {
    std::size_t n = cycle.size();
    for (std::size_t d = 1; d <= n; ++d) {
        if (n % d) continue;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i)
            ok = cycle[i] == cycle[(i + d) % n];
        if (ok) return static_cast<unsigned>(d);
    }
    return static_cast<unsigned>(n);
}

TypeClass classify_impl(const BorderCtx& ctx, const PathSpec& x) {
    const SubstGraph& g = ctx.g;
    validate_path(g, x);
    if (!x.eventually_periodic())
        throw ParseError("classification requires an eventually periodic path");
    std::size_t n0 = x.prefix.size(), P = x.cycle.size();
    std::vector<std::size_t> cyc_idx;
    for (const std::string& id : x.cycle) cyc_idx.push_back(g.edge_of(id));

    TypeClass tc;
    tc.certified_radius = n0 + 2 * P;

    // Scan every rotation of the tail cycle for surviving corner chains.
    std::vector<std::pair<Direction, Direction>> memberships;
    for (std::size_t r = 0; r < P; ++r) {
        std::vector<std::size_t> rot;
        for (std::size_t i = 0; i < P; ++i)
            rot.push_back(cyc_idx[(r + i) % P]);
        std::size_t v = g.edges[rot[0]].src;
        std::size_t nv = sides_of(g, v);
        for (std::size_t a = 0; a < nv; ++a) {
            Direction ds = side_dir(g, v, a);
            Direction dt = side_dir(g, v, (a + 1) % nv);
            if (det2(ds.vec(), dt.vec()).is_zero()) continue;
            if (!corner_survives(ctx, rot, a)) continue;
            if (!std::count(memberships.begin(), memberships.end(),
                            std::make_pair(ds, dt)))
                memberships.push_back({ds, dt});
        }
    }

    if (!memberships.empty()) {
        tc.type = TilingType::III;
        // Center: fixed point of the supertile chain.  The tail cycle pins
        // c_cyc with c_cyc = lambda^P c_cyc + anchor(P); the prefix conjugates
        // it by the level-n0 placement.
        const FieldElem& lam = g.system.lambda;
        Vec2 acc(FieldElem(0), FieldElem(0));
        FieldElem power(1);
        for (std::size_t i = 0; i < P; ++i) {
            acc += power * g.edges[cyc_idx[i]].disp;
            power = power * lam;
        }
        Vec2 c_cyc = acc / (lam.pow(static_cast<unsigned>(P)) - FieldElem(1));
        tc.center = lam.pow(static_cast<unsigned>(n0)) * c_cyc +
                    path_anchor(g, x, n0);
        if (memberships.size() > 1) tc.assembly_ambiguous = true;
        std::sort(memberships.begin(), memberships.end(),
                  [](const auto& l, const auto& r) {
                      if (l.first != r.first)
                          return Direction::angle_less(l.first, r.first);
                      return Direction::angle_less(l.second, r.second);
                  });
        Direction s0 = memberships[0].first, t0 = memberships[0].second;
        FanResult fan = assemble_fan(t0, s0.opposite(), ctx.sector_shapes());
        tc.half_lines = fan.rays;
        if (fan.ambiguous || !fan.closed) tc.assembly_ambiguous = true;
        return tc;
    }

    // No corner: look for surviving side chains along the tail.
    std::set<std::string> dirs_seen;
    std::vector<Direction> border_dirs;
    for (std::size_t r = 0; r < P; ++r) {
        PathSpec rot;
        for (std::size_t i = 0; i < P; ++i)
            rot.cycle.push_back(x.cycle[(r + i) % P]);
        for (const BorderChain& ch : borders_impl(ctx, rot))
            if (dirs_seen.insert(ch.dir.str()).second)
                border_dirs.push_back(ch.dir);
    }
    if (!border_dirs.empty()) {
        tc.type = TilingType::II;
        std::sort(border_dirs.begin(), border_dirs.end(), Direction::angle_less);
        tc.border_dirs = std::move(border_dirs);
    } else {
        tc.type = TilingType::I;
    }
    return tc;
}

std::vector<std::size_t> type_iii_loops_impl(const BorderCtx& ctx) {
    const SubstGraph& g = ctx.g;
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        if (g.edges[k].src != g.edges[k].dst) continue;
        PathSpec loop;
        loop.cycle.push_back(g.edges[k].id);
        if (classify_impl(ctx, loop).type == TilingType::III) out.push_back(k);
    }
    return out;
}

unsigned normalization_exponent_impl(const BorderCtx& ctx) {
    unsigned long n = 1;
    std::vector<Direction> dirs = edge_directions(ctx.g.system);
    for (const Direction& s : dirs)
        for (const Direction& t : dirs) {
            if (s == t || det2(s.vec(), t.vec()).is_zero()) continue;
            for (const PathSpec& p : corner_enumerate_impl(ctx, s, t))
                n = std::lcm(n, static_cast<unsigned long>(minimal_period(p.cycle)));
        }
    return static_cast<unsigned>(n);
}

Segment delta_impl(const BorderCtx& ctx, std::size_t e) {
    const SubstGraph& g = ctx.g;
    if (e >= g.edges.size())
        throw std::invalid_argument("edge index out of range");
    const GraphEdge& ge = g.edges[e];
    if (ge.src != ge.dst)
        throw std::invalid_argument("boundary segment requires a self-loop edge");
    const std::vector<APair>& ps = ctx.pairs[e];
    for (const APair& p : ps)
        if (p.a != p.b)
            throw std::invalid_argument(
                "boundary segment requires a diagonal pair set on edge " + ge.id);
    const Polygon& sh = g.system.prototiles[ge.dst].shape;
    std::size_t n = sh.size();
    if (ps.size() == 1) {
        Segment full = sh.edge(ps[0].a);
        return Segment(full.a, (full.b + ge.disp) / g.system.lambda);
    }
    if (ps.size() == 2) {
        std::size_t p = ps[0].a, q = ps[1].a;
        if ((p + 1) % n == q) return sh.edge(p);
        if ((q + 1) % n == p) return sh.edge(q);
        throw std::invalid_argument("pair sides of edge " + ge.id +
                                    " are not consecutive");
    }
    throw std::invalid_argument("edge " + ge.id + " carries " +
                                std::to_string(ps.size()) +
                                " pairs; expected one or two");
}

// Indicator of edge f contributing a side inside the boundary segment of the
// loop edge e (same parent required).
bool delta_hit(const BorderCtx& ctx, const Segment& delta, std::size_t loop_dst,
               std::size_t f) {
    const SubstGraph& g = ctx.g;
    if (g.edges[f].dst != loop_dst) return false;
    const Polygon& ch = g.system.prototiles[g.edges[f].src].shape;
    for (std::size_t a = 0; a < ch.size(); ++a)
        if (segment_contains(delta, side_image(g, f, a))) return true;
    return false;
}

int mu_impl(const BorderCtx& ctx, std::size_t e, const Segment& delta,
            const PathSpec& x, std::size_t n) {
    const SubstGraph& g = ctx.g;
    std::size_t loop_dst = g.edges[e].dst;
    for (std::size_t k = n; k >= 2; --k) {
        std::size_t idx = edge_at(g, x, k);
        if (idx != e) return delta_hit(ctx, delta, loop_dst, idx) ? 1 : 0;
    }
    return delta_hit(ctx, delta, loop_dst, edge_at(g, x, 1)) ? 1 : 0;
}

CylinderPartition xprime_impl(const BorderCtx& ctx, std::size_t n,
                              const std::vector<std::size_t>& loops) {
    const SubstGraph& g = ctx.g;
    if (n == 0) throw ParseError("partition depth must be >= 1");
    std::vector<Segment> deltas;
    deltas.reserve(loops.size());
    for (std::size_t e : loops) deltas.push_back(delta_impl(ctx, e));
    // hit[j][f]: edge f contributes a side inside the boundary segment of
    // loop j.
    std::vector<std::vector<char>> hit(loops.size(),
                                       std::vector<char>(g.edges.size(), 0));
    for (std::size_t j = 0; j < loops.size(); ++j)
        for (std::size_t f = 0; f < g.edges.size(); ++f)
            hit[j][f] =
                delta_hit(ctx, deltas[j], g.edges[loops[j]].dst, f) ? 1 : 0;
    CylinderPartition part;
    part.depth = static_cast<unsigned>(n);
    part.kind = "XPrimeN";
    std::map<std::pair<std::size_t, std::vector<int>>, std::vector<std::string>>
        blocks;
    for (const std::vector<std::size_t>& path : all_paths(g, static_cast<unsigned>(n))) {
        std::vector<int> bits(loops.size(), 0);
        for (std::size_t j = 0; j < loops.size(); ++j) {
            std::size_t decided = path[0];
            for (std::size_t k = n; k >= 2; --k)
                if (path[k - 1] != loops[j]) { decided = path[k - 1]; break; }
            bits[j] = hit[j][decided];
        }
        blocks[{g.edges[path.back()].dst, std::move(bits)}].push_back(
            join_ids(path, g));
    }
    for (auto& [key, block] : blocks) part.blocks.push_back(std::move(block));
    return part;
}

APairsReport a_pairs_impl(const BorderCtx& ctx) {
    const SubstGraph& g = ctx.g;
    APairsReport rep;
    rep.pairs = ctx.pairs;
    for (std::size_t k = 0; k < g.edges.size(); ++k)
        rep.max_cardinality = std::max(rep.max_cardinality, rep.pairs[k].size());
    // Determinism and adjacency checks per edge.
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const GraphEdge& e = g.edges[k];
        std::size_t nc = sides_of(g, e.src), np = sides_of(g, e.dst);
        const std::vector<APair>& ps = rep.pairs[k];
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (std::size_t j = i + 1; j < ps.size(); ++j) {
                Direction di = side_dir(g, e.src, ps[i].a);
                Direction dj = side_dir(g, e.src, ps[j].a);
                if (di == dj) {
                    rep.p2_ok = false;
                    rep.p2_violations.push_back(
                        e.id + ": sides " + std::to_string(ps[i].a) + "," +
                        std::to_string(ps[j].a) +
                        " survive with equal direction " + di.str());
                } else {
                    bool child_adj = (ps[i].a + 1) % nc == ps[j].a ||
                                     (ps[j].a + 1) % nc == ps[i].a;
                    bool parent_adj = (ps[i].b + 1) % np == ps[j].b ||
                                      (ps[j].b + 1) % np == ps[i].b;
                    if (!child_adj || !parent_adj) {
                        rep.p3_ok = false;
                        rep.p3_violations.push_back(
                            e.id + ": pairs (" + std::to_string(ps[i].a) + "," +
                            std::to_string(ps[i].b) + ") and (" +
                            std::to_string(ps[j].a) + "," +
                            std::to_string(ps[j].b) + ") are not adjacent");
                    }
                }
            }
    }
    // Every parent side must be the target of some singleton pair set.
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
        for (std::size_t b = 0; b < sides_of(g, v); ++b) {
            bool hitb = false;
            for (std::size_t k : g.into_edges[v])
                if (rep.pairs[k].size() == 1 && rep.pairs[k][0].b == b) {
                    hitb = true;
                    break;
                }
            if (!hitb) {
                rep.p5_ok = false;
                rep.p5_missing.push_back(side_name(g, v, b));
            }
        }
    return rep;
}

bool um_member_impl(const BorderCtx& ctx, const PathSpec& x, std::size_t m,
                    const Direction& t) {
    const SubstGraph& g = ctx.g;
    if (m == 0) throw ParseError("chain depth must be >= 1");
    if (!x.determines(m))
        throw ParseError("path does not determine " + std::to_string(m) +
                         " coordinates");
    validate_path(g, x);
    std::size_t base = g.edges[edge_at(g, x, 1)].src;
    for (std::size_t a = 0; a < sides_of(g, base); ++a) {
        if (side_dir(g, base, a) != t) continue;
        std::size_t cur = a;
        bool ok = true;
        for (std::size_t i = 1; i + 1 <= m && ok; ++i) {
            auto nxt = ctx.step(edge_at(g, x, i), cur);
            if (!nxt) ok = false;
            else cur = *nxt;
        }
        if (ok) return true;
    }
    return false;
}

CReport compute_c_impl(const BorderCtx& ctx) {
    const SubstGraph& g = ctx.g;
    unsigned n = normalization_exponent_impl(ctx);
    if (n != 1)
        throw NormalizationRequired(
            "periodic corner paths of period " + std::to_string(n) +
            " present; raise the system to that power first");
    CReport rep;
    rep.c_edges = type_iii_loops_impl(ctx);
    std::set<std::size_t> c_set(rep.c_edges.begin(), rep.c_edges.end());
    for (std::size_t e : rep.c_edges) {
        const std::vector<APair>& ps = ctx.pairs[e];
        bool diag = !ps.empty() && ps.size() <= 2;
        for (const APair& p : ps)
            if (p.a != p.b) diag = false;
        if (!diag) {
            rep.two_possibilities_ok = false;
            rep.two_possibilities_violations.push_back(
                g.edges[e].id + ": pair set is not diagonal with one or two pairs");
        }
    }
    // Every parent side must be forced by a singleton pair set on an edge
    // outside the distinguished loops.
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
        for (std::size_t b = 0; b < sides_of(g, v); ++b) {
            bool hitb = false;
            for (std::size_t k : g.into_edges[v]) {
                if (c_set.count(k)) continue;
                if (ctx.pairs[k].size() == 1 && ctx.pairs[k][0].b == b) {
                    hitb = true;
                    break;
                }
            }
            if (!hitb) {
                rep.p6_ok = false;
                rep.p6_missing.push_back(side_name(g, v, b));
            }
        }
    return rep;
}

PathSpec find_periodic_rep_impl(const BorderCtx& ctx, const PathSpec& x) {
    const SubstGraph& g = ctx.g;
    if (!x.eventually_periodic())
        throw NotTypeIII("path is not eventually periodic");
    if (classify_impl(ctx, x).type != TilingType::III)
        throw NotTypeIII("path " + x.str() + " is not of sector-boundary type");
    std::size_t n0 = x.prefix.size(), P = x.cycle.size();
    std::size_t r = (P - n0 % P) % P;
    PathSpec z;
    for (std::size_t i = 0; i < P; ++i)
        z.cycle.push_back(x.cycle[(r + i) % P]);
    validate_path(g, z);
    return z;
}

int mu_with_ctx(const BorderCtx& ctx, std::size_t e, const PathSpec& x,
                std::size_t n) {
    if (n == 0) throw ParseError("indicator depth must be >= 1");
    if (!x.determines(n))
        throw ParseError("path does not determine " + std::to_string(n) +
                         " coordinates");
    validate_path(ctx.g, x);
    Segment delta = delta_impl(ctx, e);
    return mu_impl(ctx, e, delta, x, n);
}

}  // namespace

// --- public API -------------------------------------------------------------

APairsReport a_pairs(const SubstGraph& g) { return a_pairs_impl(BorderCtx(g)); }

std::optional<std::size_t> BorderAutomaton::step(std::size_t k,
                                                 std::size_t a) const {
    auto it = next[k].find(a);
    if (it == next[k].end()) return std::nullopt;
    return it->second;
}

BorderAutomaton border_automaton(const SubstGraph& g) {
    return BorderCtx(g).au;
}

bool um_member(const SubstGraph& g, const PathSpec& x, std::size_t m,
               const Direction& t) {
    return um_member_impl(BorderCtx(g), x, m, t);
}

std::string BorderChain::str() const {
    std::string out = dir.str() + ":";
    for (std::size_t i = 0; i < side_prefix.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(side_prefix[i]);
    }
    out += "|";
    for (std::size_t i = 0; i < side_cycle.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(side_cycle[i]);
    }
    return out;
}

std::vector<BorderChain> borders_of(const SubstGraph& g, const PathSpec& x) {
    if (!x.eventually_periodic())
        throw ParseError("boundary chains require an eventually periodic path");
    validate_path(g, x);
    BorderCtx ctx(g);
    return borders_impl(ctx, x);
}

std::vector<Direction> edge_directions(const SubstSystem& s) {
    std::vector<Direction> out;
    for (const Prototile& p : s.prototiles)
        for (std::size_t i = 0; i < p.shape.size(); ++i) {
            Direction d = p.shape.edge(i).direction();
            if (!std::count(out.begin(), out.end(), d)) out.push_back(d);
        }
    std::sort(out.begin(), out.end(), Direction::angle_less);
    return out;
}

std::vector<PathSpec> corner_enumerate(const SubstGraph& g, const Direction& s,
                                       const Direction& t) {
    require_corner_pair(s, t);
    BorderCtx ctx(g);
    return corner_enumerate_impl(ctx, s, t);
}

std::string TypeClass::str() const {
    switch (type) {
        case TilingType::I:
            return "I";
        case TilingType::II: {
            std::string out = "II borders=";
            for (std::size_t i = 0; i < border_dirs.size(); ++i) {
                if (i) out += ";";
                out += border_dirs[i].str();
            }
            return out;
        }
        case TilingType::III: {
            std::string out = "III center=" + (center ? center->str() : "?") +
                              " rays=";
            for (std::size_t i = 0; i < half_lines.size(); ++i) {
                if (i) out += ";";
                out += half_lines[i].str();
            }
            if (assembly_ambiguous) out += " ambiguous";
            return out;
        }
    }
    return "?";
}

TypeClass classify_type(const SubstGraph& g, const PathSpec& x) {
    BorderCtx ctx(g);
    return classify_impl(ctx, x);
}

CReport compute_C(const SubstGraph& g) { return compute_c_impl(BorderCtx(g)); }

std::vector<std::size_t> type_iii_loops(const SubstGraph& g) {
    BorderCtx ctx(g);
    return type_iii_loops_impl(ctx);
}

unsigned normalization_exponent(const SubstGraph& g) {
    BorderCtx ctx(g);
    return normalization_exponent_impl(ctx);
}

SubstSystem normalize_periods(const SubstSystem& s) {
    SubstGraph g = build_graph(s);
    BorderCtx ctx(g);
    return power_system(s, normalization_exponent_impl(ctx));
}

PathSpec find_periodic_rep(const SubstGraph& g, const PathSpec& x) {
    return find_periodic_rep_impl(BorderCtx(g), x);
}

Segment delta_edge(const SubstGraph& g, std::size_t e) {
    BorderCtx ctx(g);
    return delta_impl(ctx, e);
}

int mu(const SubstGraph& g, std::size_t e, const PathSpec& x, std::size_t n) {
    return mu_with_ctx(BorderCtx(g), e, x, n);
}

CylinderPartition xprime_partition(const SubstGraph& g, std::size_t n,
                                   const std::vector<std::size_t>& loop_edges) {
    BorderCtx ctx(g);
    return xprime_impl(ctx, n, loop_edges);
}

CylinderPartition xprime_partition(const SubstGraph& g, std::size_t n) {
    BorderCtx ctx(g);
    CReport rep = compute_c_impl(ctx);
    return xprime_impl(ctx, n, rep.c_edges);
}

// --- BorderAnalysis ---------------------------------------------------------

struct BorderAnalysis::Impl {
    BorderCtx ctx;
    mutable std::optional<APairsReport> report;
    mutable std::optional<std::vector<std::size_t>> loops;
    mutable std::optional<unsigned> nexp;
    mutable std::optional<CReport> crep;
    mutable std::map<std::size_t, Segment> deltas;

    explicit Impl(const SubstGraph& graph) : ctx(graph) {}

    const Segment& delta(std::size_t e) const {
        auto it = deltas.find(e);
        if (it == deltas.end())
            it = deltas.emplace(e, delta_impl(ctx, e)).first;
        return it->second;
    }
};

BorderAnalysis::BorderAnalysis(const SubstGraph& g)
    : impl_(std::make_unique<Impl>(g)) {}
BorderAnalysis::~BorderAnalysis() = default;
BorderAnalysis::BorderAnalysis(BorderAnalysis&&) noexcept = default;
BorderAnalysis& BorderAnalysis::operator=(BorderAnalysis&&) noexcept = default;

const SubstGraph& BorderAnalysis::graph() const { return impl_->ctx.g; }

const APairsReport& BorderAnalysis::pairs() const {
    if (!impl_->report) impl_->report = a_pairs_impl(impl_->ctx);
    return *impl_->report;
}

const BorderAutomaton& BorderAnalysis::automaton() const {
    return impl_->ctx.au;
}

bool BorderAnalysis::um_member(const PathSpec& x, std::size_t m,
                               const Direction& t) const {
    return um_member_impl(impl_->ctx, x, m, t);
}

std::vector<BorderChain> BorderAnalysis::borders_of(const PathSpec& x) const {
    if (!x.eventually_periodic())
        throw ParseError("boundary chains require an eventually periodic path");
    validate_path(impl_->ctx.g, x);
    return borders_impl(impl_->ctx, x);
}

std::vector<PathSpec> BorderAnalysis::corner_enumerate(
    const Direction& s, const Direction& t) const {
    require_corner_pair(s, t);
    return corner_enumerate_impl(impl_->ctx, s, t);
}

TypeClass BorderAnalysis::classify_type(const PathSpec& x) const {
    return classify_impl(impl_->ctx, x);
}

CReport BorderAnalysis::compute_C() const {
    if (!impl_->crep) impl_->crep = compute_c_impl(impl_->ctx);
    return *impl_->crep;
}

std::vector<std::size_t> BorderAnalysis::type_iii_loops() const {
    if (!impl_->loops) impl_->loops = type_iii_loops_impl(impl_->ctx);
    return *impl_->loops;
}

unsigned BorderAnalysis::normalization_exponent() const {
    if (!impl_->nexp) impl_->nexp = normalization_exponent_impl(impl_->ctx);
    return *impl_->nexp;
}

PathSpec BorderAnalysis::find_periodic_rep(const PathSpec& x) const {
    return find_periodic_rep_impl(impl_->ctx, x);
}

Segment BorderAnalysis::delta_edge(std::size_t e) const {
    return impl_->delta(e);
}

int BorderAnalysis::mu(std::size_t e, const PathSpec& x, std::size_t n) const {
    if (n == 0) throw ParseError("indicator depth must be >= 1");
    if (!x.determines(n))
        throw ParseError("path does not determine " + std::to_string(n) +
                         " coordinates");
    validate_path(impl_->ctx.g, x);
    return mu_impl(impl_->ctx, e, impl_->delta(e), x, n);
}

CylinderPartition BorderAnalysis::xprime_partition(
    std::size_t n, const std::vector<std::size_t>& loop_edges) const {
    return xprime_impl(impl_->ctx, n, loop_edges);
}

CylinderPartition BorderAnalysis::xprime_partition(std::size_t n) const {
    return xprime_impl(impl_->ctx, n, compute_C().c_edges);
}

}  // namespace tilingaf
