#pragma once

// Hole domains: piecewise-smooth Jordan curves (possibly several disjoint
// components), rasterization onto grids, boundary sampling, Hausdorff
// distance and outward parallel-curve offsets.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fr/common.hpp"
#include "fr/grid.hpp"

namespace fr {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;

// ---------------------------------------------------------------------------

struct ParametricArc {
    std::vector<Vec2> pts;      // open polyline; the next arc continues at pts.back()
    std::vector<double> s;      // cumulative arclength from the arc start
    std::vector<Vec2> normal;   // per-sample unit outward normal

    double length() const { return s.empty() ? 0.0 : s.back(); }

    void build_tables() {
        if (pts.size() < 2) throw GeometryError("arc needs at least 2 samples");
        s.assign(pts.size(), 0.0);
        for (size_t k = 1; k < pts.size(); ++k) {
            double d = dist(pts[k], pts[k - 1]);
            if (d <= 0) throw GeometryError("consecutive arc samples coincide");
            s[k] = s[k - 1] + d;
        }
    }

    Vec2 point_at(double t) const {  // t in [0, length]
        auto it = std::upper_bound(s.begin(), s.end(), t);
        size_t k = std::min(pts.size() - 1, size_t(it - s.begin()));
        if (k == 0) k = 1;
        double seg = s[k] - s[k - 1];
        double a = seg > 0 ? (t - s[k - 1]) / seg : 0.0;
        a = std::clamp(a, 0.0, 1.0);
        return pts[k - 1] + (pts[k] - pts[k - 1]) * a;
    }
};

struct Corner {
    int component = 0;
    Vec2 p;
    double sigma = 1.0;  // interior angle = sigma * pi
};

struct BoundarySample {
    Vec2 p;
    double w = 0;  // arclength weight
    Vec2 n;        // unit outward normal
    int component = 0;
    int arc = 0;
    double s = 0;  // arclength along the component
};

struct BoundarySampling {
    std::vector<BoundarySample> samples;
    double total_length = 0;
};

struct PlanarDomain {
    struct Loop {
        std::vector<ParametricArc> arcs;
        double perimeter = 0;
        double area = 0;  // positive (loops are stored counterclockwise)
        Vec2 bb_lo, bb_hi;

        // Arclength offset of each arc start within the loop.
        std::vector<double> arc_offset;
    };

    std::vector<Loop> loops;
    std::vector<Corner> corners;
    Vec2 bb_lo, bb_hi;

    double perimeter() const {
        double t = 0;
        for (auto& l : loops) t += l.perimeter;
        return t;
    }
    double area() const {
        double t = 0;
        for (auto& l : loops) t += l.area;
        return t;
    }

    bool inside(const Vec2& q) const {
        bool in = false;
        for (auto& l : loops) {
            for (auto& a : l.arcs) {
                for (size_t k = 1; k < a.pts.size(); ++k) {
                    const Vec2& p0 = a.pts[k - 1];
                    const Vec2& p1 = a.pts[k];
                    if ((p0.y <= q.y) != (p1.y <= q.y)) {
                        double xint = p0.x + (q.y - p0.y) * (p1.x - p0.x) / (p1.y - p0.y);
                        if (xint > q.x) in = !in;
                    }
                }
            }
        }
        return in;
    }

    double boundary_distance(const Vec2& q) const {
        double best = HUGE_VAL;
        for (auto& l : loops)
            for (auto& a : l.arcs)
                for (size_t k = 1; k < a.pts.size(); ++k) {
                    Vec2 d = a.pts[k] - a.pts[k - 1];
                    double len2 = d.norm2();
                    double t = len2 > 0 ? std::clamp((q - a.pts[k - 1]).dot(d) / len2, 0.0, 1.0) : 0.0;
                    best = std::min(best, dist(q, a.pts[k - 1] + d * t));
                }
        return best;
    }

    // Corner sets split by opening angle: E0 has sigma < 1, E1 has sigma >= 1.
    std::vector<Corner> corners_e0() const {
        std::vector<Corner> v;
        for (auto& c : corners)
            if (c.sigma < 1.0) v.push_back(c);
        return v;
    }
    std::vector<Corner> corners_e1() const {
        std::vector<Corner> v;
        for (auto& c : corners)
            if (c.sigma >= 1.0) v.push_back(c);
        return v;
    }

    double max_radius() const {
        return std::sqrt(std::max(bb_lo.norm2(), std::max(bb_hi.norm2(),
                         std::max(Vec2{bb_lo.x, bb_hi.y}.norm2(), Vec2{bb_hi.x, bb_lo.y}.norm2()))));
    }
};

// ---------------------------------------------------------------------------
// Internal geometry helpers.

namespace detail {

inline double loop_signed_area(const PlanarDomain::Loop& l) {
    double a = 0;
    for (auto& arc : l.arcs)
        for (size_t k = 1; k < arc.pts.size(); ++k)
            a += arc.pts[k - 1].cross(arc.pts[k]);
    return 0.5 * a;
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        double v = (q - p).cross(r - p);
        return (v > 0) - (v < 0);
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    return false;  // collinear touching handled as non-crossing at sample resolution
}

// Does a segment pass through the closed axis-aligned box [lo,hi]?
inline bool segment_hits_box(Vec2 p, Vec2 q, const Vec2& lo, const Vec2& hi) {
    double t0 = 0, t1 = 1;
    double dx = q.x - p.x, dy = q.y - p.y;
    const double den[4] = {-dx, dx, -dy, dy};
    const double num[4] = {p.x - lo.x, hi.x - p.x, p.y - lo.y, hi.y - p.y};
    for (int k = 0; k < 4; ++k) {
        if (den[k] == 0) {
            if (num[k] < 0) return false;
        } else {
            double t = num[k] / den[k];
            if (den[k] < 0)
                t0 = std::max(t0, t);
            else
                t1 = std::min(t1, t);
        }
    }
    return t0 <= t1;
}

inline void point_segment_foot(const Vec2& q, const Vec2& a, const Vec2& b, Vec2& foot, double& t) {
    Vec2 d = b - a;
    double len2 = d.norm2();
    t = len2 > 0 ? std::clamp((q - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    foot = a + d * t;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Domain construction.

namespace detail {

inline void finalize_loop(PlanarDomain::Loop& l) {
    for (auto& a : l.arcs) a.build_tables();
    if (dist(l.arcs.back().pts.back(), l.arcs.front().pts.front()) > 1e-9)
        throw GeometryError("boundary chain does not close");
    // enforce counterclockwise orientation
    if (loop_signed_area(l) < 0) {
        std::reverse(l.arcs.begin(), l.arcs.end());
        for (auto& a : l.arcs) {
            std::reverse(a.pts.begin(), a.pts.end());
            a.build_tables();
        }
    }
    l.area = loop_signed_area(l);
    l.perimeter = 0;
    l.arc_offset.clear();
    l.bb_lo = {HUGE_VAL, HUGE_VAL};
    l.bb_hi = {-HUGE_VAL, -HUGE_VAL};
    for (auto& a : l.arcs) {
        l.arc_offset.push_back(l.perimeter);
        l.perimeter += a.length();
        for (auto& p : a.pts) {
            l.bb_lo.x = std::min(l.bb_lo.x, p.x);
            l.bb_lo.y = std::min(l.bb_lo.y, p.y);
            l.bb_hi.x = std::max(l.bb_hi.x, p.x);
            l.bb_hi.y = std::max(l.bb_hi.y, p.y);
        }
    }
    // outward normals: CCW tangent rotated by -90 degrees
    for (auto& a : l.arcs) {
        a.normal.assign(a.pts.size(), Vec2{0, 0});
        for (size_t k = 0; k < a.pts.size(); ++k) {
            Vec2 t;
            if (k == 0)
                t = a.pts[1] - a.pts[0];
            else if (k + 1 == a.pts.size())
                t = a.pts[k] - a.pts[k - 1];
            else
                t = a.pts[k + 1] - a.pts[k - 1];
            double n = t.norm();
            if (n > 0) a.normal[k] = Vec2{t.y, -t.x} * (1.0 / n);
        }
    }
}

// Interior angle (in units of pi) between the incoming direction at the end of
// arc j and the outgoing direction at the start of arc j+1.
inline double measured_sigma(const PlanarDomain::Loop& l, size_t j) {
    const auto& a = l.arcs[j];
    const auto& b = l.arcs[(j + 1) % l.arcs.size()];
    Vec2 tin = a.pts[a.pts.size() - 1] - a.pts[a.pts.size() - 2];
    Vec2 tout = b.pts[1] - b.pts[0];
    double turn = std::atan2(tin.cross(tout), tin.dot(tout));  // in (-pi, pi]
    double interior = kPi - turn;                              // in (0, 2 pi)
    return interior / kPi;
}

}  // namespace detail

struct DomainValidation {
    double cusp_tol_sigma = 0.02;  // reject declared/measured sigma within this of {0, 2}
    bool check_simple = true;
};

// Assemble and validate a domain from explicit loops.  Corner angles are the
// declared ones; junction angles are measured as a validator and compared
// against declarations where present.
inline PlanarDomain build_domain(std::vector<PlanarDomain::Loop> loops,
                                 std::vector<Corner> declared_corners = {},
                                 const DomainValidation& opt = {}) {
    if (loops.empty()) throw GeometryError("domain has no boundary loops");
    PlanarDomain dom;
    dom.loops = std::move(loops);
    for (auto& l : dom.loops) detail::finalize_loop(l);

    // measured junction angles; smooth junctions (sigma ~ 1) are not corners
    for (int li = 0; li < (int)dom.loops.size(); ++li) {
        auto& l = dom.loops[li];
        for (size_t j = 0; j < l.arcs.size(); ++j) {
            double sig = detail::measured_sigma(l, j);
            Vec2 p = l.arcs[(j + 1) % l.arcs.size()].pts.front();
            if (sig < opt.cusp_tol_sigma || sig > 2.0 - opt.cusp_tol_sigma)
                throw CuspError("cusp detected at boundary junction (sigma = " +
                                std::to_string(sig) + ")");
            bool declared = false;
            for (auto& c : declared_corners)
                if (c.component == li && dist(c.p, p) < 1e-7) declared = true;
            if (!declared && std::abs(sig - 1.0) > 0.05 && l.arcs.size() > 1)
                declared_corners.push_back({li, p, sig});
        }
    }
    for (auto& c : declared_corners) {
        if (c.sigma <= 0.0 + opt.cusp_tol_sigma || c.sigma >= 2.0 - opt.cusp_tol_sigma)
            throw CuspError("declared corner angle outside (0, 2 pi)");
    }
    dom.corners = std::move(declared_corners);

    if (opt.check_simple) {
        // all boundary segments across all loops must be pairwise non-crossing
        struct Seg {
            Vec2 a, b;
            int loop;
            int arc;
            size_t k;
        };
        std::vector<Seg> segs;
        for (int li = 0; li < (int)dom.loops.size(); ++li) {
            auto& l = dom.loops[li];
            for (int ai = 0; ai < (int)l.arcs.size(); ++ai)
                for (size_t k = 1; k < l.arcs[ai].pts.size(); ++k)
                    segs.push_back({l.arcs[ai].pts[k - 1], l.arcs[ai].pts[k], li, ai, k});
        }
        for (size_t i = 0; i < segs.size(); ++i)
            for (size_t j = i + 1; j < segs.size(); ++j) {
                // skip neighbours sharing an endpoint
                if (dist(segs[i].b, segs[j].a) < 1e-12 || dist(segs[j].b, segs[i].a) < 1e-12)
                    continue;
                if (std::max(segs[i].a.x, segs[i].b.x) < std::min(segs[j].a.x, segs[j].b.x) ||
                    std::max(segs[j].a.x, segs[j].b.x) < std::min(segs[i].a.x, segs[i].b.x) ||
                    std::max(segs[i].a.y, segs[i].b.y) < std::min(segs[j].a.y, segs[j].b.y) ||
                    std::max(segs[j].a.y, segs[j].b.y) < std::min(segs[i].a.y, segs[i].b.y))
                    continue;
                if (detail::segments_intersect(segs[i].a, segs[i].b, segs[j].a, segs[j].b))
                    throw GeometryError("boundary curve is not simple");
            }
        // nested loops would make the hole multiply connected
        for (size_t i = 0; i < dom.loops.size(); ++i)
            for (size_t j = 0; j < dom.loops.size(); ++j) {
                if (i == j) continue;
                PlanarDomain probe;
                probe.loops = {dom.loops[j]};
                if (probe.inside(dom.loops[i].arcs[0].pts[0]))
                    throw GeometryError("nested boundary loops (multiply connected hole)");
            }
    }

    dom.bb_lo = {HUGE_VAL, HUGE_VAL};
    dom.bb_hi = {-HUGE_VAL, -HUGE_VAL};
    for (auto& l : dom.loops) {
        dom.bb_lo.x = std::min(dom.bb_lo.x, l.bb_lo.x);
        dom.bb_lo.y = std::min(dom.bb_lo.y, l.bb_lo.y);
        dom.bb_hi.x = std::max(dom.bb_hi.x, l.bb_hi.x);
        dom.bb_hi.y = std::max(dom.bb_hi.y, l.bb_hi.y);
    }
    return dom;
}

// --- canned shapes ----------------------------------------------------------

inline int samples_for_length(double len, int minimum = 64) {
    return std::max(minimum, int(std::ceil(32.0 * len)));  // >= 32 per unit length
}

inline PlanarDomain::Loop make_circle_loop(Vec2 c, double r, int n = 0) {
    if (r <= 0) throw ParameterError("circle radius must be positive");
    if (n == 0) n = samples_for_length(2 * kPi * r, 256);
    PlanarDomain::Loop l;
    ParametricArc a;
    a.pts.reserve(n + 1);
    for (int k = 0; k <= n; ++k) {
        double th = 2 * kPi * k / n;
        a.pts.push_back({c.x + r * std::cos(th), c.y + r * std::sin(th)});
    }
    a.pts.back() = a.pts.front();
    a.pts.pop_back();
    a.pts.push_back(a.pts.front());  // exact closure
    l.arcs.push_back(std::move(a));
    return l;
}

inline PlanarDomain make_circle(Vec2 c, double r, int n = 0) {
    std::vector<PlanarDomain::Loop> loops{make_circle_loop(c, r, n)};
    return build_domain(std::move(loops));
}

inline PlanarDomain make_polygon(const std::vector<Vec2>& verts, int per_edge = 0) {
    if (verts.size() < 3) throw GeometryError("polygon needs >= 3 vertices");
    PlanarDomain::Loop l;
    size_t m = verts.size();
    for (size_t v = 0; v < m; ++v) {
        Vec2 a = verts[v], b = verts[(v + 1) % m];
        int n = per_edge ? per_edge : samples_for_length(dist(a, b), 32);
        ParametricArc arc;
        for (int k = 0; k <= n; ++k) arc.pts.push_back(a + (b - a) * (double(k) / n));
        l.arcs.push_back(std::move(arc));
    }
    std::vector<PlanarDomain::Loop> loops{std::move(l)};
    PlanarDomain dom = build_domain(std::move(loops));
    return dom;  // corners are measured at junctions and recorded by build_domain
}

inline PlanarDomain make_square(Vec2 c, double side, int per_edge = 0) {
    double a = side / 2;
    return make_polygon({{c.x - a, c.y - a}, {c.x + a, c.y - a}, {c.x + a, c.y + a}, {c.x - a, c.y + a}},
                        per_edge);
}

inline PlanarDomain make_two_disks(double t, double r, int n = 0) {
    if (t <= r) throw GeometryError("two_disks: components overlap; use a single Jordan hole");
    std::vector<PlanarDomain::Loop> loops;
    loops.push_back(make_circle_loop({-t, 0}, r, n));
    loops.push_back(make_circle_loop({t, 0}, r, n));
    return build_domain(std::move(loops));
}

// Neumann oval boundary traced from the quartic
//   (x^2+y^2)^2 - 2 r^2 (x^2+y^2) - 2 t^2 (x^2-y^2) = 0,
// i.e. in polar form s^2 = 2 r^2 + 2 t^2 cos(2 theta).
inline PlanarDomain make_neumann_oval(double r, double t, int n = 0) {
    if (r <= 0 || t < 0) throw ParameterError("neumann_oval: need r > 0, t >= 0");
    if (t >= r) throw RegimeError("neumann_oval: pinched/disconnected regime (t >= r)");
    if (n == 0) n = samples_for_length(2 * kPi * std::sqrt(2.0) * r, 512);
    PlanarDomain::Loop l;
    ParametricArc a;
    for (int k = 0; k <= n; ++k) {
        double th = 2 * kPi * k / n;
        double s2 = 2 * r * r + 2 * t * t * std::cos(2 * th);
        double s = std::sqrt(s2);
        a.pts.push_back({s * std::cos(th), s * std::sin(th)});
    }
    a.pts.back() = a.pts.front();
    l.arcs.push_back(std::move(a));
    std::vector<PlanarDomain::Loop> loops{std::move(l)};
    return build_domain(std::move(loops));
}

// The eye domain bounded by {|z e^{-z^2/(2e)}| = 1}, with corners at +-sqrt(e).
inline PlanarDomain make_eye(int n_half = 512) {
    double a = std::sqrt(kE);
    auto upper_y = [&](double x) {
        // solve (1/2) log(x^2+y^2) - (x^2-y^2)/(2e) = 0 for y > 0
        double lo = 0, hi = 1.0;
        auto F = [&](double y) {
            return 0.5 * std::log(x * x + y * y) - (x * x - y * y) / (2 * kE);
        };
        while (F(hi) < 0) hi *= 2;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            (F(mid) < 0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    ParametricArc up, down;
    for (int k = 0; k <= n_half; ++k) {
        // cosine spacing clusters samples near the corners
        double x = a * std::cos(kPi * k / n_half);
        double y = (k == 0 || k == n_half) ? 0.0 : upper_y(x);
        up.pts.push_back({x, y});
    }
    for (int k = 0; k <= n_half; ++k) {
        double x = -a * std::cos(kPi * k / n_half);
        double y = (k == 0 || k == n_half) ? 0.0 : -upper_y(x);
        down.pts.push_back({x, y});
    }
    PlanarDomain::Loop l;
    // orient counterclockwise: upper arc right-to-left, lower arc left-to-right
    l.arcs.push_back(std::move(down));
    l.arcs.push_back(std::move(up));
    std::reverse(l.arcs[1].pts.begin(), l.arcs[1].pts.end());
    std::reverse(l.arcs[0].pts.begin(), l.arcs[0].pts.end());
    std::vector<PlanarDomain::Loop> loops{std::move(l)};
    std::vector<Corner> corners{{0, {a, 0}, 0.5}, {0, {-a, 0}, 0.5}};
    return build_domain(std::move(loops), corners);
}

inline PlanarDomain make_regular_polygon(Vec2 c, double circumradius, int sides, double phase = 0) {
    std::vector<Vec2> v;
    for (int k = 0; k < sides; ++k) {
        double th = phase + 2 * kPi * k / sides;
        v.push_back({c.x + circumradius * std::cos(th), c.y + circumradius * std::sin(th)});
    }
    return make_polygon(v);
}

// --- JSON domain spec --------------------------------------------------------
// {type: "circle"|"square"|"polygon"|"arcs"|"neumann_oval"|"two_disks"|"eye",
//  parameters..., corners: [{s, sigma}]}

inline PlanarDomain domain_from_json(const nlohmann::json& j) {
    std::string type = j.at("type").get<std::string>();
    auto vec2 = [](const nlohmann::json& a) { return Vec2{a.at(0).get<double>(), a.at(1).get<double>()}; };
    if (type == "circle") {
        Vec2 c = j.contains("center") ? vec2(j["center"]) : Vec2{0, 0};
        return make_circle(c, j.at("radius").get<double>(), j.value("n", 0));
    }
    if (type == "square") {
        Vec2 c = j.contains("center") ? vec2(j["center"]) : Vec2{0, 0};
        return make_square(c, j.at("side").get<double>(), j.value("per_edge", 0));
    }
    if (type == "polygon") {
        std::vector<Vec2> v;
        for (auto& p : j.at("vertices")) v.push_back(vec2(p));
        return make_polygon(v, j.value("per_edge", 0));
    }
    if (type == "two_disks")
        return make_two_disks(j.at("t").get<double>(), j.value("radius", 1.0), j.value("n", 0));
    if (type == "neumann_oval")
        return make_neumann_oval(j.at("r").get<double>(), j.at("t").get<double>(), j.value("n", 0));
    if (type == "eye") return make_eye(j.value("n_half", 512));
    if (type == "arcs") {
        PlanarDomain::Loop l;
        for (auto& arc : j.at("arcs")) {
            ParametricArc a;
            for (auto& p : arc) a.pts.push_back(vec2(p));
            l.arcs.push_back(std::move(a));
        }
        std::vector<Corner> corners;
        if (j.contains("corners")) {
            // declared by arclength position along the chain
            PlanarDomain::Loop tmp = l;
            detail::finalize_loop(tmp);
            for (auto& c : j["corners"]) {
                double s = c.at("s").get<double>();
                double sig = c.at("sigma").get<double>();
                double acc = 0;
                Vec2 p = tmp.arcs[0].pts[0];
                for (auto& a : tmp.arcs) {
                    if (s <= acc + a.length()) {
                        p = a.point_at(s - acc);
                        break;
                    }
                    acc += a.length();
                }
                corners.push_back({0, p, sig});
            }
        }
        std::vector<PlanarDomain::Loop> loops{std::move(l)};
        return build_domain(std::move(loops), corners);
    }
    throw ParameterError("unknown domain type: " + type);
}

// ---------------------------------------------------------------------------
// Rasterization (even-odd scanline fill at cell centers + sealed boundary band).

inline RegionMask rasterize(const PlanarDomain& dom, const Grid& grid) {
    if (dom.bb_lo.x < grid.xmin() || dom.bb_hi.x > grid.xmax() || dom.bb_lo.y < grid.ymin() ||
        dom.bb_hi.y > grid.ymax())
        throw ResolutionError("grid does not cover the domain bounding box");

    RegionMask m;
    m.grid = grid;
    m.label.assign(grid.size(), CellLabel::Outside);
    m.band_of_cell.assign(grid.size(), -1);

    // scanline fill
    struct Seg {
        Vec2 a, b;
    };
    std::vector<Seg> segs;
    for (auto& l : dom.loops)
        for (auto& a : l.arcs)
            for (size_t k = 1; k < a.pts.size(); ++k) segs.push_back({a.pts[k - 1], a.pts[k]});

    std::vector<double> xs;
    for (int j = 0; j < grid.ny; ++j) {
        double y = grid.y0 + j * grid.h;
        xs.clear();
        for (auto& s : segs) {
            if ((s.a.y <= y) != (s.b.y <= y)) {
                xs.push_back(s.a.x + (y - s.a.y) * (s.b.x - s.a.x) / (s.b.y - s.a.y));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (size_t c = 0; c + 1 < xs.size(); c += 2) {
            // half-open [xl, xr) so boundary-aligned centers are not doubled
            int i0 = std::max(0, int(std::ceil((xs[c] - grid.x0) / grid.h - 1e-9)));
            int i1 = std::min(grid.nx - 1, int(std::floor((xs[c + 1] - grid.x0) / grid.h - 1e-9)));
            for (int i = i0; i <= i1; ++i) m.label[grid.idx(i, j)] = CellLabel::Inside;
        }
    }
    m.center_inside.assign(grid.size(), 0);
    for (int64_t k = 0; k < grid.size(); ++k)
        m.center_inside[k] = (m.label[k] == CellLabel::Inside);

    // band: any cell whose square intersects a boundary segment
    struct BandAcc {
        double best = HUGE_VAL;
        int component = 0, arc = 0;
        double s = 0;
        Vec2 foot;
    };
    std::map<int64_t, BandAcc> acc;
    for (int li = 0; li < (int)dom.loops.size(); ++li) {
        auto& l = dom.loops[li];
        for (int ai = 0; ai < (int)l.arcs.size(); ++ai) {
            auto& a = l.arcs[ai];
            for (size_t k = 1; k < a.pts.size(); ++k) {
                Vec2 p = a.pts[k - 1], q = a.pts[k];
                int i0, j0, i1, j1;
                grid.nearest({std::min(p.x, q.x) - grid.h, std::min(p.y, q.y) - grid.h}, i0, j0);
                grid.nearest({std::max(p.x, q.x) + grid.h, std::max(p.y, q.y) + grid.h}, i1, j1);
                for (int j = j0; j <= j1; ++j)
                    for (int i = i0; i <= i1; ++i) {
                        Vec2 c = grid.center(i, j);
                        Vec2 lo{c.x - grid.h / 2, c.y - grid.h / 2};
                        Vec2 hi{c.x + grid.h / 2, c.y + grid.h / 2};
                        if (!detail::segment_hits_box(p, q, lo, hi)) continue;
                        Vec2 foot;
                        double t;
                        detail::point_segment_foot(c, p, q, foot, t);
                        double d = dist(c, foot);
                        auto& e = acc[grid.idx(i, j)];
                        if (d < e.best) {
                            e.best = d;
                            e.component = li;
                            e.arc = ai;
                            e.s = l.arc_offset[ai] + a.s[k - 1] + t * (a.s[k] - a.s[k - 1]);
                            e.foot = foot;
                        }
                    }
            }
        }
    }
    for (auto& [cell, e] : acc) {
        m.label[cell] = CellLabel::Band;
        BandCell bc;
        bc.cell = cell;
        bc.component = e.component;
        bc.arc = e.arc;
        bc.s = e.s;
        bc.foot = e.foot;
        m.band_of_cell[cell] = int32_t(m.band.size());
        m.band.push_back(bc);
    }

    // attribute arclength shares to band cells by walking the boundary finely
    double step = grid.h / 4;
    for (auto& l : dom.loops)
        for (auto& a : l.arcs) {
            int nsub = std::max(1, int(std::ceil(a.length() / step)));
            double ds = a.length() / nsub;
            for (int k = 0; k < nsub; ++k) {
                Vec2 p = a.point_at((k + 0.5) * ds);
                int i, j;
                grid.nearest(p, i, j);
                int64_t cell = grid.idx(i, j);
                int32_t b = m.band_of_cell[cell];
                if (b < 0) {
                    // nearest cell center may sit just off the band; search the
                    // 3x3 neighbourhood
                    double best = HUGE_VAL;
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int di = -1; di <= 1; ++di) {
                            if (!grid.contains(i + di, j + dj)) continue;
                            int32_t bb = m.band_of_cell[grid.idx(i + di, j + dj)];
                            if (bb < 0) continue;
                            double d = dist(p, grid.center(i + di, j + dj));
                            if (d < best) {
                                best = d;
                                b = bb;
                            }
                        }
                }
                if (b >= 0) m.band[b].arcw += ds;
            }
        }

    // every component must keep interior cells, else the band swallowed it
    for (int li = 0; li < (int)dom.loops.size(); ++li) {
        bool has_inside = false;
        auto& l = dom.loops[li];
        int i0, j0, i1, j1;
        grid.nearest(l.bb_lo, i0, j0);
        grid.nearest(l.bb_hi, i1, j1);
        for (int j = j0; j <= j1 && !has_inside; ++j)
            for (int i = i0; i <= i1; ++i)
                if (m.label[grid.idx(i, j)] == CellLabel::Inside &&
                    dom.inside(grid.center(i, j))) {
                    has_inside = true;
                    break;
                }
        if (!has_inside)
            throw ResolutionError("grid too coarse: boundary band covers a hole component");
    }
    return m;
}

// ---------------------------------------------------------------------------
// Boundary sampling.

inline BoundarySampling boundary_sample(const PlanarDomain& dom, int n_per_arc) {
    if (n_per_arc < 8) throw ParameterError("boundary_sample: n_per_arc >= 8 required");
    BoundarySampling bs;
    for (int li = 0; li < (int)dom.loops.size(); ++li) {
        auto& l = dom.loops[li];
        for (int ai = 0; ai < (int)l.arcs.size(); ++ai) {
            auto& a = l.arcs[ai];
            double ds = a.length() / n_per_arc;
            for (int k = 0; k < n_per_arc; ++k) {
                double s = (k + 0.5) * ds;
                BoundarySample smp;
                smp.p = a.point_at(s);
                smp.w = ds;
                smp.component = li;
                smp.arc = ai;
                smp.s = l.arc_offset[ai] + s;
                // normal interpolated from the nearest polyline sample
                auto it = std::upper_bound(a.s.begin(), a.s.end(), s);
                size_t kk = std::min(a.pts.size() - 1, size_t(it - a.s.begin()));
                if (kk == 0) kk = 1;
                smp.n = a.normal[kk - 1];
                bs.samples.push_back(smp);
                bs.total_length += ds;
            }
        }
    }
    return bs;
}

// ---------------------------------------------------------------------------
// Hausdorff distance between boundaries (symmetric max-min over samples).

inline double hausdorff_distance(const PlanarDomain& a, const PlanarDomain& b) {
    auto gather = [](const PlanarDomain& d) {
        std::vector<Vec2> pts;
        for (auto& l : d.loops)
            for (auto& arc : l.arcs)
                for (auto& p : arc.pts) pts.push_back(p);
        return pts;
    };
    std::vector<Vec2> pa = gather(a), pb = gather(b);
    auto side = [](const std::vector<Vec2>& from, const PlanarDomain& to) {
        double worst = 0;
        for (auto& p : from) worst = std::max(worst, to.boundary_distance(p));
        return worst;
    };
    return std::max(side(pa, b), side(pb, a));
}

// ---------------------------------------------------------------------------
// Outward offset: smoothed parallel curve.  The tangent is averaged over an
// eps-neighbourhood before rotating, which rounds corners at scale eps.

inline PlanarDomain offset_outward(const PlanarDomain& dom, double t, double eps) {
    if (t < 0) throw ParameterError("offset_outward: t >= 0");
    if (t == 0) return dom;
    std::vector<PlanarDomain::Loop> out_loops;
    for (auto& l : dom.loops) {
        // resample whole loop uniformly
        double step = std::min(eps / 2, l.perimeter / 256);
        int n = std::max(256, int(std::ceil(l.perimeter / step)));
        std::vector<Vec2> pts(n);
        {
            int ai = 0;
            double base = 0;
            for (int k = 0; k < n; ++k) {
                double s = l.perimeter * k / n;
                while (ai + 1 < (int)l.arcs.size() && s > l.arc_offset[ai] + l.arcs[ai].length()) {
                    base = l.arc_offset[++ai];
                }
                pts[k] = l.arcs[ai].point_at(s - (ai ? l.arc_offset[ai] : 0));
                (void)base;
            }
        }
        double ds = l.perimeter / n;
        int w = std::max(1, int(std::round(eps / ds)));
        std::vector<Vec2> off(n);
        for (int k = 0; k < n; ++k) {
            // averaged tangent over the eps window
            Vec2 tsum{0, 0};
            for (int q = -w; q < w; ++q) {
                Vec2 d = pts[(k + q + 1 + 2 * n) % n] - pts[(k + q + 2 * n) % n];
                tsum = tsum + d;
            }
            double nn = tsum.norm();
            if (nn == 0) throw GeometryError("offset: degenerate averaged tangent");
            Vec2 nrm{tsum.y / nn, -tsum.x / nn};  // outward for CCW loops
            off[k] = pts[k] + nrm * t;
        }
        PlanarDomain::Loop ol;
        ParametricArc a;
        a.pts = off;
        a.pts.push_back(off[0]);
        ol.arcs.push_back(std::move(a));
        out_loops.push_back(std::move(ol));
    }
    // carry over reflex corners (convex ones are rounded by the smoothing)
    std::vector<Corner> corners;
    for (auto& c : dom.corners)
        if (c.sigma > 1.0) corners.push_back(c);
    return build_domain(std::move(out_loops), corners);
}

}  // namespace fr
