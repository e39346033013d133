#include <catch2/catch_amalgamated.hpp>

#include "fr/geometry.hpp"
#include "oracles.hpp"

using namespace fr;

TEST_CASE("build_domain: canned shapes and corner bookkeeping") {
    PlanarDomain disk = make_circle({0, 0}, 1.0);
    CHECK(disk.corners.empty());
    CHECK(disk.perimeter() == Catch::Approx(2 * kPi).epsilon(1e-3));
    CHECK(disk.area() == Catch::Approx(kPi).epsilon(1e-3));

    PlanarDomain sq = make_square({0, 0}, 1.0);
    REQUIRE(sq.corners.size() == 4);
    for (auto& c : sq.corners) CHECK(c.sigma == Catch::Approx(0.5).margin(0.02));
    CHECK(sq.corners_e0().size() == 4);
    CHECK(sq.corners_e1().empty());
    CHECK(sq.area() == Catch::Approx(1.0).epsilon(1e-6));

    PlanarDomain tri = make_regular_polygon({0, 0}, 1.0, 3, kPi / 2);
    REQUIRE(tri.corners.size() == 3);
    for (auto& c : tri.corners) CHECK(c.sigma == Catch::Approx(1.0 / 3).margin(0.02));
}

TEST_CASE("build_domain: tangent circles raise CuspError") {
    // outer circle radius 1 about 0 and inner circle radius 1/2 about (1/2,0),
    // internally tangent at (1,0); the crescent between them has a cusp there
    auto circle_pts = [](Vec2 c, double r, bool ccw, int n) {
        std::vector<Vec2> pts;
        for (int k = 0; k <= n; ++k) {
            double th = 2 * kPi * k / n * (ccw ? 1 : -1);
            pts.push_back({c.x + r * std::cos(th), c.y + r * std::sin(th)});
        }
        return pts;
    };
    PlanarDomain::Loop l;
    ParametricArc a1, a2;
    a1.pts = circle_pts({0, 0}, 1.0, true, 256);
    a2.pts = circle_pts({0.5, 0}, 0.5, false, 128);
    l.arcs = {a1, a2};
    std::vector<PlanarDomain::Loop> loops{l};
    CHECK_THROWS_AS(build_domain(std::move(loops)), CuspError);
}

TEST_CASE("rasterize: cell-counted areas match known areas") {
    Grid g = Grid::covering_disk(1.2, 0.01);
    PlanarDomain disk = make_circle({0, 0}, 1.0, 2048);
    RegionMask m = rasterize(disk, g);
    int64_t n_in = 0;
    for (auto b : m.center_inside) n_in += b;
    double area = n_in * g.h * g.h;
    CHECK(area == Catch::Approx(kPi).epsilon(0.005));

    PlanarDomain sq = make_square({0, 0}, 1.0, 512);
    RegionMask ms = rasterize(sq, g);
    int64_t s_in = 0;
    for (auto b : ms.center_inside) s_in += b;
    CHECK(s_in * g.h * g.h == Catch::Approx(1.0).epsilon(0.005));

    // empty region fully outside
    Grid far = Grid::covering_box(5, 6, 5, 6, 0.05);
    PlanarDomain small_disk = make_circle({5.5, 5.5}, 0.4);
    RegionMask mf = rasterize(small_disk, far);
    bool any_outside_cell = false;
    for (int64_t k = 0; k < far.size(); ++k)
        if (dist(far.center(k), {5.5, 5.5}) > 0.5 && !mf.outside(k)) any_outside_cell = true;
    CHECK_FALSE(any_outside_cell);
}

TEST_CASE("rasterize: band seals the boundary and resolution errors fire") {
    Grid g = Grid::covering_disk(1.2, 0.02);
    PlanarDomain disk = make_circle({0, 0}, 1.0);
    RegionMask m = rasterize(disk, g);
    // no Inside cell 4-adjacent to an Outside cell
    bool sealed = true;
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            int64_t k = g.idx(i, j);
            if (!m.inside(k)) continue;
            for (int64_t nb : {k - 1, k + 1, k - g.nx, k + g.nx})
                if (m.outside(nb)) sealed = false;
        }
    CHECK(sealed);
    // band arclength shares account for the full perimeter
    double wsum = 0;
    for (auto& b : m.band) wsum += b.arcw;
    CHECK(wsum == Catch::Approx(disk.perimeter()).epsilon(1e-6));

    PlanarDomain tiny = make_circle({0, 0}, 0.008);
    CHECK_THROWS_AS(rasterize(tiny, g), ResolutionError);
}

TEST_CASE("rasterize is monotone under domain inclusion") {
    Grid g = Grid::covering_disk(1.5, 0.02);
    RegionMask a = rasterize(make_circle({0.1, 0}, 0.6), g);
    RegionMask b = rasterize(make_circle({0, 0}, 1.0), g);
    for (int64_t k = 0; k < g.size(); ++k)
        if (a.inside(k)) CHECK(!b.outside(k));
}

TEST_CASE("boundary_sample: weights sum to boundary length") {
    PlanarDomain circ = make_circle({0, 0}, 1.0, 4096);
    BoundarySampling bs = boundary_sample(circ, 1000);
    double sum = 0;
    for (auto& s : bs.samples) sum += s.w;
    CHECK(sum == Catch::Approx(2 * kPi).epsilon(0.001));

    PlanarDomain sq = make_square({0, 0}, 1.0);
    BoundarySampling bq = boundary_sample(sq, 100);
    double sq_sum = 0;
    for (auto& s : bq.samples) sq_sum += s.w;
    CHECK(sq_sum == Catch::Approx(4.0).epsilon(0.001));

    // outward normals point away from the interior
    for (size_t k = 0; k < bs.samples.size(); k += 37) {
        auto& s = bs.samples[k];
        CHECK(circ.inside(s.p - s.n * 0.05));
        CHECK_FALSE(circ.inside(s.p + s.n * 0.05));
    }
}

TEST_CASE("hausdorff_distance basics and brute-force oracle") {
    PlanarDomain d1 = make_circle({0, 0}, 1.0, 2048);
    PlanarDomain d2 = make_circle({0, 0}, 1.1, 2048);
    PlanarDomain d3 = make_circle({0.05, 0}, 1.0, 2048);
    CHECK(hausdorff_distance(d1, d1) == 0.0);
    CHECK(hausdorff_distance(d1, d2) == Catch::Approx(0.1).margin(2e-3));

    // brute force over dense samples for the shifted disk
    double brute = 0;
    for (int k = 0; k < 720; ++k) {
        double th = 2 * kPi * k / 720;
        Vec2 p{std::cos(th), std::sin(th)};
        brute = std::max(brute, d3.boundary_distance(p));
    }
    CHECK(hausdorff_distance(d1, d3) == Catch::Approx(brute).margin(2e-3));
    CHECK(hausdorff_distance(d1, d3) == Catch::Approx(0.05).margin(2e-3));
}

TEST_CASE("hausdorff triangle inequality within grid slack") {
    double h = 0.02;
    PlanarDomain a = make_circle({0, 0}, 1.0);
    PlanarDomain b = make_square({0.1, 0}, 1.6);
    PlanarDomain c = make_circle({0.2, 0.1}, 0.8);
    double ab = hausdorff_distance(a, b), bc = hausdorff_distance(b, c),
           ac = hausdorff_distance(a, c);
    CHECK(ac <= ab + bc + 2 * h);
}

TEST_CASE("offset_outward: circles offset to circles, distance bracket holds") {
    PlanarDomain disk = make_circle({0, 0}, 1.0);
    double h = 0.01;
    PlanarDomain grown = offset_outward(disk, 0.1, 4 * h);
    CHECK(hausdorff_distance(grown, make_circle({0, 0}, 1.1)) < 5 * h);
    // boundary distance bracket [t/2, 2t] for smooth arcs
    for (auto& l : grown.loops)
        for (auto& arc : l.arcs)
            for (size_t k = 0; k < arc.pts.size(); k += 50) {
                double d = disk.boundary_distance(arc.pts[k]);
                CHECK(d >= 0.05 - 1e-6);
                CHECK(d <= 0.2 + 1e-6);
            }
}

TEST_CASE("neumann oval construction") {
    PlanarDomain oval = make_neumann_oval(1.0, 0.5, 1024);
    // t -> 0 gives the circle of radius sqrt(2) r
    PlanarDomain nearly = make_neumann_oval(1.0, 1e-6, 1024);
    CHECK(hausdorff_distance(nearly, make_circle({0, 0}, std::sqrt(2.0), 1024)) < 1e-3);
    // x-extent exceeds y-extent
    CHECK(oval.bb_hi.x > oval.bb_hi.y);
    // symmetry under both reflections
    for (auto& l : oval.loops)
        for (auto& arc : l.arcs)
            for (size_t k = 0; k < arc.pts.size(); k += 64) {
                Vec2 p = arc.pts[k];
                CHECK(oval.boundary_distance({-p.x, p.y}) < 1e-6);
                CHECK(oval.boundary_distance({p.x, -p.y}) < 1e-6);
            }
    CHECK_THROWS_AS(make_neumann_oval(1.0, 1.0), RegimeError);
}

TEST_CASE("eye domain: corners at +-sqrt(e) with sigma = 1/2") {
    PlanarDomain eye = make_eye(256);
    REQUIRE(eye.corners.size() == 2);
    double a = std::sqrt(kE);
    for (auto& c : eye.corners) {
        CHECK(std::abs(std::abs(c.p.x) - a) < 1e-9);
        CHECK(c.sigma == Catch::Approx(0.5).margin(0.05));
    }
    CHECK(eye.inside({0, 0}));
    CHECK(eye.inside({1.5, 0}));
    CHECK_FALSE(eye.inside({0, 1.0}));
    // boundary satisfies |z| e^{-Re z^2/(2e)} = 1
    for (auto& l : eye.loops)
        for (auto& arc : l.arcs)
            for (size_t k = 5; k + 5 < arc.pts.size(); k += 17) {
                Complex z = to_complex(arc.pts[k]);
                double mod = std::abs(z * std::exp(-z * z / (2 * kE)));
                CHECK(mod == Catch::Approx(1.0).margin(1e-6));
            }
}

TEST_CASE("two-disk domains and JSON specs") {
    PlanarDomain td = make_two_disks(2.0, 1.0);
    CHECK(td.loops.size() == 2);
    CHECK(td.inside({2.0, 0}));
    CHECK(td.inside({-2.0, 0}));
    CHECK_FALSE(td.inside({0, 0}));

    nlohmann::json j = {{"type", "circle"}, {"radius", 1.0}};
    PlanarDomain d = domain_from_json(j);
    CHECK(d.area() == Catch::Approx(kPi).epsilon(1e-3));

    nlohmann::json js = {{"type", "square"}, {"side", 2.0}, {"center", {0.5, 0.5}}};
    PlanarDomain s = domain_from_json(js);
    CHECK(s.inside({0.5, 0.5}));
    REQUIRE(s.corners.size() == 4);

    CHECK_THROWS_AS(domain_from_json(nlohmann::json{{"type", "pentagon?"}}), ParameterError);
}
