#include "tilingaf/builtins.hpp"

namespace tilingaf {

namespace {

Vec2 half(long x2, long y2) { return Vec2(FieldElem::ratio(x2, 2), FieldElem::ratio(y2, 2)); }

Vec2 rot90(const Vec2& v) { return Vec2(-v.y, v.x); }

Vec2 rot(const Vec2& v, unsigned k) {
    Vec2 out = v;
    for (unsigned i = 0; i < k % 4; ++i) out = rot90(out);
    return out;
}

SubstSystem make_sq() {
    SubstSystem s;
    s.field_d = 0;
    s.lambda = FieldElem(2);
    Polygon square({half(-1, -1), half(1, -1), half(1, 1), half(-1, 1)});
    s.prototiles.push_back({"sq", "sq", square});
    s.rules.push_back({
        {"sq", half(-1, -1)},
        {"sq", half(1, -1)},
        {"sq", half(1, 1)},
        {"sq", half(-1, 1)},
    });
    s.asserted_aperiodic = false;
    s.asserted_fpc = true;
    return s;
}

SubstSystem make_chair() {
    SubstSystem s;
    s.field_d = 0;
    s.lambda = FieldElem(2);
    // Base chair: L-tromino of three unit cells with the corner cell centered
    // at the origin; p1..p3 are its rotations by 90, 180, 270 degrees.
    std::vector<Vec2> base = {half(-1, -1), half(3, -1), half(3, 1),
                              half(1, 1),   half(1, 3),  half(-1, 3)};
    for (unsigned k = 0; k < 4; ++k) {
        std::vector<Vec2> vs;
        vs.reserve(base.size());
        for (const Vec2& v : base) vs.push_back(rot(v, k));
        std::string id = "p" + std::to_string(k);
        s.prototiles.push_back({id, id, Polygon(std::move(vs))});
    }
    // Rule for p0; the rule for p_k is its tile-wise rotation.
    const std::vector<std::pair<unsigned, Vec2>> rule0 = {
        {0, half(-1, -1)},
        {1, half(5, -1)},
        {0, half(1, 1)},
        {3, half(-1, 5)},
    };
    for (unsigned k = 0; k < 4; ++k) {
        std::vector<Tile> tiles;
        for (const auto& [j, v] : rule0)
            tiles.push_back({"p" + std::to_string((j + k) % 4), rot(v, k)});
        s.rules.push_back(std::move(tiles));
    }
    s.asserted_aperiodic = true;
    s.asserted_fpc = true;
    return s;
}

}  // namespace

SubstSystem builtin_system(const std::string& name) {
    if (name == "sq") return make_sq();
    if (name == "chair") return make_chair();
    throw ParseError("unknown built-in system '" + name + "'");
}

std::vector<std::string> builtin_names() { return {"sq", "chair"}; }

}  // namespace tilingaf
