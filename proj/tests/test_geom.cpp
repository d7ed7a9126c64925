#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <vector>

#include "tilingaf/geom.hpp"

using namespace tilingaf;

static Vec2 v2(long x, long y) { return Vec2(x, y); }
static Vec2 vr(long xn, long xd, long yn, long yd) {
    return Vec2(FieldElem::ratio(xn, xd), FieldElem::ratio(yn, yd));
}

static Polygon unit_square_at(long x2, long y2) {  // doubled coords, side 1
    Vec2 o = vr(x2, 2, y2, 2);
    return Polygon({o, o + v2(1, 0), o + v2(1, 1), o + v2(0, 1)});
}

TEST_CASE("Vec2 basics and serialization") {
    Vec2 a = v2(1, 2), b = v2(3, -1);
    CHECK((a + b) == v2(4, 1));
    CHECK((a - b) == v2(-2, 3));
    CHECK((FieldElem(2) * a) == v2(2, 4));
    CHECK((a / FieldElem(2)) == vr(1, 2, 1, 1));
    CHECK(det2(a, b) == FieldElem(-7));
    CHECK(dot2(a, b) == FieldElem(1));
    CHECK(a.str() == "(1,2)");
    CHECK(vr(-1, 2, 3, 4).str() == "(-1/2,3/4)");
    CHECK(Vec2::parse("(-1/2,3/4)") == vr(-1, 2, 3, 4));
    CHECK(Vec2::parse(" ( 1 , 2 ) ") == a);
    Vec2 surd(FieldElem::parse("1+1*sqrt(2)"), FieldElem(0));
    CHECK(Vec2::parse(surd.str()) == surd);
    CHECK_THROWS_AS(Vec2::parse("1,2"), ParseError);
    CHECK_THROWS_AS(Vec2::parse("(1;2)"), ParseError);
}

TEST_CASE("direction canonicalization") {
    CHECK(Direction(v2(2, -3)).vec() == vr(1, 1, -3, 2));
    CHECK(Direction(v2(-4, 6)).vec() == vr(-1, 1, 3, 2));
    CHECK(Direction(v2(0, -5)).vec() == v2(0, -1));
    CHECK(Direction(v2(0, 7)).vec() == v2(0, 1));
    CHECK(Direction(v2(5, 0)).vec() == v2(1, 0));
    CHECK(Direction(v2(2, 4)) == Direction(v2(1, 2)));
    CHECK(Direction(v2(1, 2)) != Direction(v2(-1, -2)));
    CHECK(Direction(v2(1, 2)).opposite() == Direction(v2(-2, -4)));
    CHECK(Direction(v2(1, 2)).opposite().opposite() == Direction(v2(1, 2)));
    CHECK_THROWS_AS(Direction(v2(0, 0)), ParseError);
    CHECK(Direction::parse("(1,-3/2)") == Direction(v2(2, -3)));
}

TEST_CASE("exact counter-clockwise angular order") {
    std::vector<Direction> dirs = {
        Direction(v2(0, -1)), Direction(v2(1, 1)),  Direction(v2(-1, 0)),
        Direction(v2(1, 0)),  Direction(v2(-1, -1)), Direction(v2(0, 1)),
        Direction(v2(1, -1)), Direction(v2(-1, 1)),
    };
    std::sort(dirs.begin(), dirs.end(), Direction::angle_less);
    std::vector<Direction> want = {
        Direction(v2(1, 0)),  Direction(v2(1, 1)),   Direction(v2(0, 1)),
        Direction(v2(-1, 1)), Direction(v2(-1, 0)),  Direction(v2(-1, -1)),
        Direction(v2(0, -1)), Direction(v2(1, -1)),
    };
    REQUIRE(dirs.size() == want.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        CAPTURE(i);
        CHECK(dirs[i] == want[i]);
    }
    // irreflexive, and exact on nearly-parallel rays
    CHECK_FALSE(Direction::angle_less(Direction(v2(1, 0)), Direction(v2(1, 0))));
    CHECK(Direction::angle_less(Direction(v2(1000000, 1)), Direction(v2(999999, 1))));
}

TEST_CASE("segment containment") {
    Segment outer(v2(0, 0), v2(4, 2));
    CHECK(segment_contains_point(outer, v2(2, 1)));
    CHECK(segment_contains_point(outer, v2(0, 0)));
    CHECK(segment_contains_point(outer, v2(4, 2)));
    CHECK_FALSE(segment_contains_point(outer, v2(2, 2)));
    CHECK_FALSE(segment_contains_point(outer, v2(6, 3)));   // collinear, beyond end
    CHECK_FALSE(segment_contains_point(outer, v2(-2, -1)));
    CHECK(segment_contains(outer, Segment(v2(0, 0), v2(2, 1))));
    CHECK(segment_contains(outer, Segment(vr(1, 1, 1, 2), vr(3, 1, 3, 2))));
    CHECK(segment_contains(outer, outer));
    CHECK_FALSE(segment_contains(outer, Segment(v2(0, 0), v2(6, 3))));
    CHECK_FALSE(segment_contains(outer, Segment(v2(0, 0), v2(1, 1))));
    CHECK_THROWS_AS(Segment(v2(1, 1), v2(1, 1)), ParseError);
}

TEST_CASE("segment meets") {
    SUBCASE("proper crossing") {
        auto m = segment_meet(Segment(v2(0, 0), v2(2, 2)), Segment(v2(0, 2), v2(2, 0)));
        REQUIRE(m.kind == SegMeet::Point);
        CHECK(*m.point == v2(1, 1));
        CHECK(m.proper);
    }
    SUBCASE("endpoint touch") {
        auto m = segment_meet(Segment(v2(0, 0), v2(2, 0)), Segment(v2(2, 0), v2(3, 5)));
        REQUIRE(m.kind == SegMeet::Point);
        CHECK(*m.point == v2(2, 0));
        CHECK_FALSE(m.proper);
    }
    SUBCASE("T-touch (endpoint in relative interior)") {
        auto m = segment_meet(Segment(v2(0, 0), v2(4, 0)), Segment(v2(2, 0), v2(2, 3)));
        REQUIRE(m.kind == SegMeet::Point);
        CHECK(*m.point == v2(2, 0));
        CHECK_FALSE(m.proper);
    }
    SUBCASE("disjoint") {
        CHECK(segment_meet(Segment(v2(0, 0), v2(1, 0)), Segment(v2(0, 1), v2(1, 1))).kind ==
              SegMeet::None);
        CHECK(segment_meet(Segment(v2(0, 0), v2(1, 1)), Segment(v2(3, 0), v2(4, 0))).kind ==
              SegMeet::None);
    }
    SUBCASE("collinear overlap") {
        auto m = segment_meet(Segment(v2(0, 0), v2(2, 0)), Segment(v2(1, 0), v2(3, 0)));
        REQUIRE(m.kind == SegMeet::Overlap);
        CHECK(m.overlap->a == v2(1, 0));
        CHECK(m.overlap->b == v2(2, 0));
    }
    SUBCASE("collinear touch at a point") {
        auto m = segment_meet(Segment(v2(0, 0), v2(1, 0)), Segment(v2(1, 0), v2(2, 0)));
        REQUIRE(m.kind == SegMeet::Point);
        CHECK(*m.point == v2(1, 0));
        CHECK_FALSE(m.proper);
    }
    SUBCASE("collinear disjoint") {
        CHECK(segment_meet(Segment(v2(0, 0), v2(1, 0)), Segment(v2(2, 0), v2(3, 0))).kind ==
              SegMeet::None);
    }
}

TEST_CASE("polygon validation") {
    CHECK_NOTHROW(Polygon({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)}));
    // clockwise
    CHECK_THROWS_AS(Polygon({v2(0, 0), v2(0, 1), v2(1, 1), v2(1, 0)}), ParseError);
    // too few vertices
    CHECK_THROWS_AS(Polygon({v2(0, 0), v2(1, 0)}), ParseError);
    // repeated vertex
    CHECK_THROWS_AS(Polygon({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 0), v2(0, 1)}), ParseError);
    // collinear consecutive edges
    CHECK_THROWS_AS(Polygon({v2(0, 0), v2(1, 0), v2(2, 0), v2(2, 2), v2(0, 2)}), ParseError);
    // self-intersection (bow tie)
    CHECK_THROWS_AS(Polygon({v2(0, 0), v2(2, 2), v2(2, 0), v2(0, 2)}), ParseError);
    // non-adjacent edge touch
    CHECK_THROWS_AS(
        Polygon({v2(0, 0), v2(4, 0), v2(4, 2), v2(2, 0), v2(0, 2)}), ParseError);
    // L-shape (one reflex vertex) is fine
    CHECK_NOTHROW(Polygon({vr(-1, 2, -1, 2), vr(3, 2, -1, 2), vr(3, 2, 1, 2), vr(1, 2, 1, 2),
                           vr(1, 2, 3, 2), vr(-1, 2, 3, 2)}));
}

TEST_CASE("polygon area and edges") {
    Polygon sq({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)});
    CHECK(sq.twice_area() == FieldElem(2));
    CHECK(sq.size() == 4);
    CHECK(sq.edge(0).a == v2(0, 0));
    CHECK(sq.edge(3).b == v2(0, 0));
    CHECK(sq.edges().size() == 4);
    Polygon chair_shape({vr(-1, 2, -1, 2), vr(3, 2, -1, 2), vr(3, 2, 1, 2), vr(1, 2, 1, 2),
                         vr(1, 2, 3, 2), vr(-1, 2, 3, 2)});
    CHECK(chair_shape.twice_area() == FieldElem(6));  // area 3
    CHECK(sq.translated(v2(5, 5)).edge(0).a == v2(5, 5));
    CHECK(sq.scaled(FieldElem(2)).twice_area() == FieldElem(8));
    CHECK_THROWS_AS(sq.scaled(FieldElem(-1)), ParseError);
}

TEST_CASE("exact point location") {
    Polygon sq({v2(0, 0), v2(2, 0), v2(2, 2), v2(0, 2)});
    CHECK(sq.locate(v2(1, 1)) == Location::Interior);
    CHECK(sq.locate(v2(0, 0)) == Location::Boundary);
    CHECK(sq.locate(v2(1, 0)) == Location::Boundary);
    CHECK(sq.locate(v2(2, 1)) == Location::Boundary);
    CHECK(sq.locate(v2(3, 1)) == Location::Exterior);
    CHECK(sq.locate(v2(-1, 0)) == Location::Exterior);
    CHECK(sq.locate(vr(1, 1000000, 1, 1000000)) == Location::Interior);

    // Ray-through-vertex robustness: horizontal ray from p passes through two
    // vertices of the diamond.
    Polygon diamond({v2(1, 0), v2(2, -1), v2(3, 0), v2(2, 1)});
    CHECK(diamond.locate(v2(0, 0)) == Location::Exterior);
    CHECK(diamond.locate(v2(2, 0)) == Location::Interior);
    CHECK(diamond.locate(v2(4, 0)) == Location::Exterior);
    CHECK(diamond.locate(v2(1, 0)) == Location::Boundary);

    // Reflex shape: the notch is exterior.
    Polygon chair_shape({vr(-1, 2, -1, 2), vr(3, 2, -1, 2), vr(3, 2, 1, 2), vr(1, 2, 1, 2),
                         vr(1, 2, 3, 2), vr(-1, 2, 3, 2)});
    CHECK(chair_shape.locate(v2(0, 0)) == Location::Interior);
    CHECK(chair_shape.locate(v2(1, 0)) == Location::Interior);
    CHECK(chair_shape.locate(v2(0, 1)) == Location::Interior);
    CHECK(chair_shape.locate(v2(1, 1)) == Location::Exterior);  // inside the notch
    CHECK(chair_shape.locate(vr(1, 2, 1, 2)) == Location::Boundary);  // reflex corner
}

TEST_CASE("representative interior point is exact and interior") {
    Polygon sq({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)});
    Vec2 p = sq.representative_interior_point();
    CHECK(p == vr(1, 6, 1, 6));  // first halving of the corner-wedge probe
    CHECK(sq.locate(p) == Location::Interior);

    Polygon chair_shape({vr(-1, 2, -1, 2), vr(3, 2, -1, 2), vr(3, 2, 1, 2), vr(1, 2, 1, 2),
                         vr(1, 2, 3, 2), vr(-1, 2, 3, 2)});
    CHECK(chair_shape.locate(chair_shape.representative_interior_point()) == Location::Interior);

    // Thin sliver: probing must keep halving until certified interior.
    Polygon sliver({v2(0, 0), v2(100, 1), v2(100, 2)});
    CHECK(sliver.locate(sliver.representative_interior_point()) == Location::Interior);
}

TEST_CASE("cover_check accepts exact tilings") {
    Polygon region({v2(0, 0), v2(2, 0), v2(2, 2), v2(0, 2)});
    std::vector<Polygon> parts = {unit_square_at(0, 0), unit_square_at(2, 0),
                                  unit_square_at(0, 2), unit_square_at(2, 2)};
    auto rep = cover_check(region, parts);
    CHECK(rep.ok);

    // Inflated square prototile: region is the doubled tile, parts are the four
    // children translated by their displacements.
    Polygon proto({vr(-1, 2, -1, 2), vr(1, 2, -1, 2), vr(1, 2, 1, 2), vr(-1, 2, 1, 2)});
    Polygon doubled = proto.scaled(FieldElem(2));
    std::vector<Polygon> kids;
    for (long sx : {-1, 1})
        for (long sy : {-1, 1}) kids.push_back(proto.translated(vr(sx, 2, sy, 2)));
    CHECK(cover_check(doubled, kids).ok);
}

TEST_CASE("cover_check rejects bad tilings") {
    Polygon region({v2(0, 0), v2(2, 0), v2(2, 2), v2(0, 2)});

    SUBCASE("missing part -> area mismatch") {
        std::vector<Polygon> parts = {unit_square_at(0, 0), unit_square_at(2, 0),
                                      unit_square_at(0, 2)};
        auto rep = cover_check(region, parts);
        CHECK_FALSE(rep.ok);
        CHECK(rep.detail.find("area") != std::string::npos);
    }
    SUBCASE("overlap with matching area") {
        Polygon strip({v2(0, 0), v2(2, 0), v2(2, 1), v2(0, 1)});
        std::vector<Polygon> parts = {
            Polygon({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)}),
            Polygon({vr(1, 2, 0, 1), vr(3, 2, 0, 1), vr(3, 2, 1, 1), vr(1, 2, 1, 1)}),
        };
        auto rep = cover_check(strip, parts);
        CHECK_FALSE(rep.ok);
        CHECK(rep.detail.find("overlap") != std::string::npos);
    }
    SUBCASE("coincident duplicates with matching area (nesting)") {
        Polygon square({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)});
        Polygon lower({v2(0, 0), v2(1, 0), vr(1, 1, 1, 2), vr(0, 1, 1, 2)});
        std::vector<Polygon> parts = {lower, lower};
        auto rep = cover_check(square, parts);
        CHECK_FALSE(rep.ok);
        CHECK(rep.detail.find("overlap") != std::string::npos);
    }
    SUBCASE("detached part with matching area") {
        Polygon square({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)});
        Polygon lower({v2(0, 0), v2(1, 0), vr(1, 1, 1, 2), vr(0, 1, 1, 2)});
        Polygon outside({v2(0, 2), v2(1, 2), vr(1, 1, 5, 2), vr(0, 1, 5, 2)});
        auto rep = cover_check(square, {lower, outside});
        CHECK_FALSE(rep.ok);
    }
    SUBCASE("gap and overlap cancelling in area") {
        // Two parts overlap on [1/2,1]x[0,1] while [3/2,2]x[0,1] is uncovered:
        // total area matches but the cover is wrong.
        Polygon strip({v2(0, 0), v2(2, 0), v2(2, 1), v2(0, 1)});
        std::vector<Polygon> parts = {
            Polygon({v2(0, 0), v2(1, 0), v2(1, 1), v2(0, 1)}),
            Polygon({vr(1, 2, 0, 1), vr(3, 2, 0, 1), vr(3, 2, 1, 1), vr(1, 2, 1, 1)}),
        };
        CHECK_FALSE(cover_check(strip, parts).ok);
    }
}
