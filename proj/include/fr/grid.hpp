#pragma once

// Uniform cell-centered grids and scalar fields on them.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fr/common.hpp"

namespace fr {

struct Grid {
    double x0 = 0, y0 = 0;  // center of cell (0,0)
    double h = 1;           // cell spacing
    int nx = 0, ny = 0;

    int64_t size() const { return int64_t(nx) * ny; }
    int64_t idx(int i, int j) const { return int64_t(j) * nx + i; }
    Vec2 center(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
    Vec2 center(int64_t k) const { return center(int(k % nx), int(k / nx)); }

    bool contains(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

    // Cell whose center is nearest to p (clamped to the grid).
    void nearest(const Vec2& p, int& i, int& j) const {
        i = std::clamp(int(std::lround((p.x - x0) / h)), 0, nx - 1);
        j = std::clamp(int(std::lround((p.y - y0) / h)), 0, ny - 1);
    }

    double xmin() const { return x0 - 0.5 * h; }
    double ymin() const { return y0 - 0.5 * h; }
    double xmax() const { return x0 + (nx - 0.5) * h; }
    double ymax() const { return y0 + (ny - 0.5) * h; }

    bool same_layout(const Grid& o, double tol = 1e-12) const {
        return nx == o.nx && ny == o.ny && std::abs(h - o.h) < tol &&
               std::abs(x0 - o.x0) < tol && std::abs(y0 - o.y0) < tol;
    }

    // Symmetric grid covering the disk D(0,R) with margin >= 2h; z = 0 is a
    // cell center.
    static Grid covering_disk(double R, double h, double margin_cells = 2.0) {
        if (h <= 0 || R <= 0) throw ParameterError("grid: R and h must be positive");
        int half = int(std::ceil((R + margin_cells * h) / h));
        Grid g;
        g.h = h;
        g.nx = g.ny = 2 * half + 1;
        g.x0 = -half * h;
        g.y0 = -half * h;
        return g;
    }

    // Grid covering an axis-aligned box with the given margin (in cells).
    static Grid covering_box(double xmin, double xmax, double ymin, double ymax, double h,
                             double margin_cells = 2.0) {
        if (h <= 0) throw ParameterError("grid: h must be positive");
        Grid g;
        g.h = h;
        g.x0 = xmin - margin_cells * h;
        g.y0 = ymin - margin_cells * h;
        g.nx = int(std::ceil((xmax - xmin + 2 * margin_cells * h) / h)) + 1;
        g.ny = int(std::ceil((ymax - ymin + 2 * margin_cells * h) / h)) + 1;
        return g;
    }
};

struct Field {
    Grid grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

    double& operator()(int i, int j) { return v[grid.idx(i, j)]; }
    double operator()(int i, int j) const { return v[grid.idx(i, j)]; }
    double& operator[](int64_t k) { return v[k]; }
    double operator[](int64_t k) const { return v[k]; }
    bool empty() const { return v.empty(); }

    double max_value() const {
        double m = -HUGE_VAL;
        for (double x : v) m = std::max(m, x);
        return m;
    }

    // Bilinear interpolation at an arbitrary point (clamped to the grid).
    double interp(const Vec2& p) const {
        double fx = (p.x - grid.x0) / grid.h, fy = (p.y - grid.y0) / grid.h;
        int i = std::clamp(int(std::floor(fx)), 0, grid.nx - 2);
        int j = std::clamp(int(std::floor(fy)), 0, grid.ny - 2);
        double ax = std::clamp(fx - i, 0.0, 1.0), ay = std::clamp(fy - j, 0.0, 1.0);
        return (1 - ax) * (1 - ay) * (*this)(i, j) + ax * (1 - ay) * (*this)(i + 1, j) +
               (1 - ax) * ay * (*this)(i, j + 1) + ax * ay * (*this)(i + 1, j + 1);
    }

    // Deposit a point mass by bilinear (cloud-in-cell) weights.
    void deposit(const Vec2& p, double w) {
        double fx = (p.x - grid.x0) / grid.h, fy = (p.y - grid.y0) / grid.h;
        int i = std::clamp(int(std::floor(fx)), 0, grid.nx - 2);
        int j = std::clamp(int(std::floor(fy)), 0, grid.ny - 2);
        double ax = std::clamp(fx - i, 0.0, 1.0), ay = std::clamp(fy - j, 0.0, 1.0);
        (*this)(i, j) += w * (1 - ax) * (1 - ay);
        (*this)(i + 1, j) += w * ax * (1 - ay);
        (*this)(i, j + 1) += w * (1 - ax) * ay;
        (*this)(i + 1, j + 1) += w * ax * ay;
    }
};

// Per-cell region labels produced by rasterization.
enum class CellLabel : uint8_t { Outside = 0, Inside = 1, Band = 2 };

struct BandCell {
    int64_t cell = -1;   // grid index
    int component = 0;   // which Jordan component of the domain
    int arc = 0;         // nearest arc within that component
    double s = 0;        // arclength coordinate of the nearest boundary point
    double arcw = 0;     // share of boundary length attributed to this cell
    Vec2 foot;           // nearest boundary point
};

struct RegionMask {
    Grid grid;
    std::vector<CellLabel> label;
    std::vector<uint8_t> center_inside;   // even-odd test at the cell center
    std::vector<BandCell> band;           // one entry per Band cell
    std::vector<int32_t> band_of_cell;    // cell -> index into band, or -1

    CellLabel at(int64_t k) const { return label[k]; }
    bool inside(int64_t k) const { return label[k] == CellLabel::Inside; }
    bool outside(int64_t k) const { return label[k] == CellLabel::Outside; }
    bool is_band(int64_t k) const { return label[k] == CellLabel::Band; }

    int64_t count(CellLabel l) const {
        int64_t n = 0;
        for (auto x : label) n += (x == l);
        return n;
    }
};

}  // namespace fr
