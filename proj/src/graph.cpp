#include "tilingaf/graph.hpp"

#include <algorithm>
#include <cmath>

namespace tilingaf {

// ---------------------------------------------------------------------------
// Graph construction
// ---------------------------------------------------------------------------

std::size_t SubstGraph::edge_of(const std::string& id) const {
    auto it = edge_ids.find(id);
    if (it == edge_ids.end()) throw ParseError("unknown edge '" + id + "'");
    return it->second;
}

SubstGraph build_graph(const SubstSystem& s) {
    SubstGraph g;
    g.system = s;
    for (const Prototile& p : s.prototiles) g.vertices.push_back(p.id);
    g.out_edges.resize(s.size());
    g.into_edges.resize(s.size());
    for (std::size_t q = 0; q < s.size(); ++q) {
        for (std::size_t i = 0; i < s.rules[q].size(); ++i) {
            const Tile& t = s.rules[q][i];
            GraphEdge e;
            e.id = s.prototiles[q].id + "." + std::to_string(i);
            e.src = s.index_of(t.proto);
            e.dst = q;
            e.rule_index = i;
            e.disp = t.pos;
            std::size_t idx = g.edges.size();
            g.edge_ids[e.id] = idx;
            g.out_edges[e.src].push_back(idx);
            g.into_edges[e.dst].push_back(idx);
            g.edges.push_back(std::move(e));
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// PathSpec
// ---------------------------------------------------------------------------

const std::string& PathSpec::at(std::size_t k) const {
    if (k < prefix.size()) return prefix[k];
    if (cycle.empty()) throw ParseError("path position " + std::to_string(k) +
                                        " is beyond the prefix and no cycle is given");
    return cycle[(k - prefix.size()) % cycle.size()];
}

std::string PathSpec::str() const {
    std::string out;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (i) out += ",";
        out += prefix[i];
    }
    if (!cycle.empty()) {
        out += "|";
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            if (i) out += ",";
            out += cycle[i];
        }
    }
    return out;
}

namespace {

std::vector<std::string> split_ids(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        std::string piece =
            comma == std::string::npos ? s.substr(start) : s.substr(start, comma - start);
        // trim spaces
        std::size_t b = piece.find_first_not_of(" \t");
        std::size_t e = piece.find_last_not_of(" \t");
        if (b == std::string::npos) {
            if (!out.empty() || comma != std::string::npos)
                throw ParseError("empty edge id in path '" + s + "'");
            break;  // wholly empty string -> empty list
        }
        out.push_back(piece.substr(b, e - b + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

PathSpec PathSpec::parse(const std::string& text) {
    PathSpec x;
    std::size_t bar = text.find('|');
    if (bar == std::string::npos) {
        x.prefix = split_ids(text);
        if (x.prefix.empty()) throw ParseError("empty path spec");
        return x;
    }
    if (text.find('|', bar + 1) != std::string::npos)
        throw ParseError("path spec '" + text + "' has more than one '|'");
    x.prefix = split_ids(text.substr(0, bar));
    x.cycle = split_ids(text.substr(bar + 1));
    if (x.cycle.empty()) throw ParseError("path spec '" + text + "' has an empty cycle");
    return x;
}

void validate_path(const SubstGraph& g, const PathSpec& x) {
    if (x.prefix.empty() && x.cycle.empty()) throw ParseError("empty path spec");
    auto check_link = [&](const std::string& a, const std::string& b, const char* where) {
        const GraphEdge& ea = g.edges[g.edge_of(a)];
        const GraphEdge& eb = g.edges[g.edge_of(b)];
        if (ea.dst != eb.src)
            throw ParseError(std::string("incompatible edges ") + a + " -> " + b + " (" + where +
                             "): parent of the first is '" + g.vertices[ea.dst] +
                             "' but the second starts at '" + g.vertices[eb.src] + "'");
    };
    for (const std::string& id : x.prefix) g.edge_of(id);
    for (const std::string& id : x.cycle) g.edge_of(id);
    for (std::size_t i = 0; i + 1 < x.prefix.size(); ++i)
        check_link(x.prefix[i], x.prefix[i + 1], "prefix");
    if (!x.cycle.empty()) {
        if (!x.prefix.empty()) check_link(x.prefix.back(), x.cycle.front(), "junction");
        for (std::size_t i = 0; i + 1 < x.cycle.size(); ++i)
            check_link(x.cycle[i], x.cycle[i + 1], "cycle");
        check_link(x.cycle.back(), x.cycle.front(), "cycle wrap");
    }
}

Vec2 path_anchor(const SubstGraph& g, const PathSpec& x, std::size_t n) {
    Vec2 acc(0, 0);
    FieldElem scale(1);
    for (std::size_t k = 0; k < n; ++k) {
        acc -= scale * g.edge(x.at(k)).disp;
        scale *= g.system.lambda;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Coding
// ---------------------------------------------------------------------------

Patch place_path(const SubstGraph& g, const std::vector<std::string>& prefix) {
    if (prefix.empty()) throw ParseError("place_path needs at least one edge");
    PathSpec x;
    x.prefix = prefix;
    validate_path(g, x);
    const GraphEdge& last = g.edges[g.edge_of(prefix.back())];
    Patch patch = supertile(g.system, g.vertices[last.dst], static_cast<unsigned>(prefix.size()));
    Vec2 anchor = path_anchor(g, x, prefix.size());
    for (Tile& t : patch.tiles) t.pos += anchor;
    for (std::size_t i = 0; i < patch.tiles.size(); ++i)
        if (patch.tiles[i].pos.is_zero()) {
            patch.marked = i;
            break;
        }
    if (!patch.marked) throw std::logic_error("place_path lost the origin tile");
    return patch;
}

std::vector<std::string> encode_position(const SubstGraph& g, const std::string& q, unsigned n,
                                         const Vec2& u) {
    const SubstSystem& s = g.system;
    std::vector<std::string> rev(n);
    std::size_t cur = s.index_of(q);
    // Work with w_l = rest / lambda^(l-1); each descent step is
    // w := lambda * (w - disp), so the child loop performs no divisions.
    Vec2 w = n >= 2 ? u / s.lambda.pow(n - 1) : u;
    for (unsigned level = n; level >= 1; --level) {
        bool found = false;
        for (std::size_t k : g.into_edges[cur]) {
            const GraphEdge& e = g.edges[k];
            Vec2 local = w - e.disp;
            if (s.prototiles[e.src].shape.locate(local) == Location::Interior) {
                rev[level - 1] = e.id;
                w = s.lambda * local;
                cur = e.src;
                found = true;
                break;
            }
        }
        if (!found)
            throw NotAPuncture("position " + u.str() + " is not strictly inside any depth-" +
                               std::to_string(level) + " subdivision cell of supertile(" + q +
                               ", " + std::to_string(n) + ")");
    }
    if (!w.is_zero())
        throw NotAPuncture("position " + u.str() + " is interior to a tile of supertile(" + q +
                           ", " + std::to_string(n) + ") but is not its puncture");
    return rev;
}

PathSpec recode_translation(const SubstGraph& g, const PathSpec& x, const Vec2& v, unsigned n) {
    validate_path(g, x);
    if (!x.determines(n))
        throw ParseError("path determines only " + std::to_string(x.prefix.size()) +
                         " coordinates, need " + std::to_string(n));
    if (v.is_zero()) return x;  // level-0 supertile: v is the marked puncture itself
    Vec2 anchor;                         // accumulated level-m anchor
    FieldElem scale(1);                  // lambda^m
    for (unsigned m = 1; m <= n; ++m) {
        const GraphEdge& em = g.edges[g.edge_of(x.at(m - 1))];
        const std::string& q = g.vertices[em.dst];
        anchor -= scale * em.disp;  // anchor_m = anchor_{m-1} - lambda^(m-1) disp
        scale = scale * g.system.lambda;
        Vec2 local = (v - anchor) / scale;
        Location loc = g.system.proto(q).shape.locate(local);
        if (loc != Location::Interior) continue;  // not strictly inside level m
        // Strictly inside the level-m region: v is a puncture here or nowhere.
        std::vector<std::string> recoded = encode_position(g, q, m, v - anchor);
        PathSpec out;
        out.prefix = std::move(recoded);
        if (m < x.prefix.size()) {
            out.prefix.insert(out.prefix.end(), x.prefix.begin() + m, x.prefix.end());
            out.cycle = x.cycle;
        } else if (!x.cycle.empty()) {
            std::size_t k = (m - x.prefix.size()) % x.cycle.size();
            out.cycle.assign(x.cycle.begin() + k, x.cycle.end());
            out.cycle.insert(out.cycle.end(), x.cycle.begin(), x.cycle.begin() + k);
        }
        return out;
    }
    throw OutOfSupertile("position " + v.str() + " is not strictly inside the level-" +
                         std::to_string(n) + " supertile of the path");
}

// ---------------------------------------------------------------------------
// Enumeration and partitions
// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> all_paths(const SubstGraph& g, unsigned n) {
    std::vector<std::vector<std::size_t>> out;
    if (n == 0) return out;
    std::vector<std::size_t> cur;
    // Iterative DFS in structural order to keep lexicographic output.
    struct Frame {
        std::size_t next = 0;
    };
    std::vector<Frame> stack(1);
    cur.reserve(n);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (cur.size() == n) {
            out.push_back(cur);
            cur.pop_back();
            stack.pop_back();
            continue;
        }
        bool pushed = false;
        while (f.next < g.edges.size()) {
            std::size_t e = f.next++;
            if (!cur.empty() && g.edges[cur.back()].dst != g.edges[e].src) continue;
            cur.push_back(e);
            stack.emplace_back();
            pushed = true;
            break;
        }
        if (!pushed) {
            if (!cur.empty()) cur.pop_back();
            stack.pop_back();
        }
    }
    return out;
}

CylinderPartition xn_partition(const SubstGraph& g, unsigned n) {
    if (n == 0) throw ParseError("partition depth must be >= 1");
    CylinderPartition part;
    part.depth = n;
    part.kind = "Xn";
    std::vector<std::vector<std::string>> by_vertex(g.vertices.size());
    for (const std::vector<std::size_t>& path : all_paths(g, n)) {
        std::string joined;
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (i) joined += ",";
            joined += g.edges[path[i]].id;
        }
        by_vertex[g.edges[path.back()].dst].push_back(std::move(joined));
    }
    for (std::vector<std::string>& block : by_vertex)
        if (!block.empty()) part.blocks.push_back(std::move(block));
    return part;
}

// ---------------------------------------------------------------------------
// Perron-Frobenius
// ---------------------------------------------------------------------------

namespace {

// Exact kernel vector of (M - c I); empty when the kernel is trivial.
std::vector<Rat> rational_kernel(const SubstMatrix& m, const Rat& c) {
    std::size_t n = m.size();
    std::vector<std::vector<Rat>> a(n, std::vector<Rat>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = Rat(m.at(i, j));
            if (i == j) a[i][j] -= c;
        }
    // Gaussian elimination to row echelon form with column pivots.
    std::vector<std::size_t> pivot_col;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < n; ++col) {
        std::size_t sel = row;
        while (sel < n && a[sel][col].is_zero()) ++sel;
        if (sel == n) continue;
        std::swap(a[sel], a[row]);
        Rat inv = Rat(1) / a[row][col];
        for (std::size_t j = col; j < n; ++j) a[row][j] *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == row || a[i][col].is_zero()) continue;
            Rat f = a[i][col];
            for (std::size_t j = col; j < n; ++j) a[i][j] -= f * a[row][j];
        }
        pivot_col.push_back(col);
        ++row;
    }
    if (pivot_col.size() == n) return {};  // full rank: trivial kernel
    // Free column: first column that is not a pivot; set it to 1.
    std::vector<bool> is_pivot(n, false);
    for (std::size_t c2 : pivot_col) is_pivot[c2] = true;
    std::size_t free_col = 0;
    while (free_col < n && is_pivot[free_col]) ++free_col;
    std::vector<Rat> x(n, Rat(0));
    x[free_col] = 1;
    for (std::size_t r = 0; r < pivot_col.size(); ++r)
        x[pivot_col[r]] = -a[r][free_col];
    return x;
}

}  // namespace

PFMeasure pf_measure(const SubstSystem& s) {
    PrimitivityResult prim = check_primitive(s);
    if (!prim.primitive)
        throw NotPrimitive("the substitution matrix is not primitive; no Perron-Frobenius measure");
    SubstMatrix m = subst_matrix(s);
    std::size_t n = m.size();
    PFMeasure pf;

    // The area covering equation forces lambda_PF = lambda^2; when that value
    // is rational the eigenvector can be computed exactly.
    FieldElem lambda_sq = s.lambda * s.lambda;
    if (lambda_sq.is_rational()) {
        std::vector<Rat> kernel = rational_kernel(m, lambda_sq.a());
        if (!kernel.empty()) {
            Rat sum(0);
            for (const Rat& v : kernel) sum += v;
            if (!sum.is_zero()) {
                bool positive = true;
                for (Rat& v : kernel) {
                    v /= sum;
                    if (v.sign() <= 0) positive = false;
                }
                if (positive) {
                    pf.exact = true;
                    pf.lambda_pf_exact = lambda_sq.a();
                    pf.xi_exact = kernel;
                    pf.matches_lambda_sq = true;
                }
            }
        }
    }

    if (pf.exact) {
        pf.lambda_pf = pf.lambda_pf_exact.convert_to<double>();
        pf.xi.reserve(n);
        for (const Rat& v : pf.xi_exact) pf.xi.push_back(v.convert_to<double>());
        return pf;
    }

    // Power iteration (double).
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    double value = 0;
    for (int iter = 0; iter < 100000; ++iter) {
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) y[i] += static_cast<double>(m.at(i, j)) * x[j];
        double sum = 0;
        for (double v : y) sum += v;
        for (double& v : y) v /= sum;
        double delta = 0;
        for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::fabs(y[i] - x[i]));
        x = std::move(y);
        value = sum;  // since previous x summed to 1, sum(Mx) estimates lambda
        if (delta < 1e-12 && iter > 2) break;
    }
    pf.lambda_pf = value;
    pf.xi = std::move(x);
    double target = lambda_sq.to_double();
    pf.matches_lambda_sq = std::fabs(pf.lambda_pf - target) <= 1e-10 * std::max(1.0, target);
    return pf;
}

MeasureValue cylinder_measure(const SubstGraph& g, const PFMeasure& pf,
                              const std::vector<std::string>& path) {
    if (path.empty()) throw ParseError("cylinder_measure needs a non-empty path");
    PathSpec x;
    x.prefix = path;
    validate_path(g, x);
    std::size_t v = g.edges[g.edge_of(path.back())].dst;
    MeasureValue out;
    if (pf.exact) {
        out.exact = true;
        Rat lp = pf.lambda_pf_exact;
        Rat denom(1);
        for (std::size_t i = 0; i < path.size(); ++i) denom *= lp;
        out.exact_value = pf.xi_exact[v] / denom;
        out.value = out.exact_value.convert_to<double>();
    } else {
        out.value = pf.xi[v] * std::pow(pf.lambda_pf, -static_cast<double>(path.size()));
    }
    return out;
}

}  // namespace tilingaf
