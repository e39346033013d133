#pragma once

// Three-part measures: atoms + boundary line density + grid area density.

#include <memory>
#include <vector>

#include "fr/common.hpp"
#include "fr/geometry.hpp"
#include "fr/grid.hpp"

namespace fr {

struct Atom {
    Vec2 p;
    double w = 0;
};

struct DiscreteMeasure {
    std::vector<Atom> atoms;

    // boundary part: line density (mass per unit length) on a shared sampling
    std::shared_ptr<const BoundarySampling> boundary;
    std::vector<double> boundary_density;

    // area part: density (mass per unit area) on a grid
    Field area;

    bool allow_signed = false;

    double atom_mass() const {
        double t = 0;
        for (auto& a : atoms) t += a.w;
        return t;
    }
    double boundary_mass() const {
        double t = 0;
        if (boundary)
            for (size_t k = 0; k < boundary->samples.size(); ++k)
                t += boundary->samples[k].w * boundary_density[k];
        return t;
    }
    double area_mass() const {
        if (area.empty()) return 0;
        double t = 0;
        double h2 = area.grid.h * area.grid.h;
        for (double d : area.v) t += d * h2;
        return t;
    }
    double total_mass() const { return atom_mass() + boundary_mass() + area_mass(); }

    void check_positive() const {
        if (allow_signed) return;
        for (auto& a : atoms)
            if (a.w < 0) throw ParameterError("negative atom weight in positive measure");
        for (double d : boundary_density)
            if (d < 0) throw ParameterError("negative boundary density in positive measure");
        for (double d : area.v)
            if (d < 0) throw ParameterError("negative area density in positive measure");
    }

    DiscreteMeasure scaled(double c) const {
        DiscreteMeasure m = *this;
        for (auto& a : m.atoms) a.w *= c;
        for (auto& d : m.boundary_density) d *= c;
        for (auto& d : m.area.v) d *= c;
        return m;
    }

    // Cell-mass deposition onto a target grid (bilinear for points, resampled
    // for area densities).
    Field deposit(const Grid& g) const {
        Field mass(g, 0.0);
        for (auto& a : atoms) mass.deposit(a.p, a.w);
        if (boundary)
            for (size_t k = 0; k < boundary->samples.size(); ++k) {
                const auto& s = boundary->samples[k];
                mass.deposit(s.p, s.w * boundary_density[k]);
            }
        if (!area.empty()) {
            double h2 = area.grid.h * area.grid.h;
            if (g.same_layout(area.grid)) {
                for (int64_t k = 0; k < g.size(); ++k) mass[k] += area[k] * h2;
            } else {
                for (int64_t k = 0; k < area.grid.size(); ++k) {
                    double w = area[k] * h2;
                    if (w != 0) mass.deposit(area.grid.center(k), w);
                }
            }
        }
        return mass;
    }
};

// A measure made of a single unit atom.
inline DiscreteMeasure point_mass(Vec2 p, double w = 1.0) {
    DiscreteMeasure m;
    m.atoms.push_back({p, w});
    return m;
}

// Uniform line density on a boundary sampling with prescribed total mass.
inline DiscreteMeasure uniform_boundary_measure(std::shared_ptr<const BoundarySampling> bs,
                                                double total) {
    DiscreteMeasure m;
    m.boundary = std::move(bs);
    double den = total / m.boundary->total_length;
    m.boundary_density.assign(m.boundary->samples.size(), den);
    return m;
}

// Uniform area density c on cells of `grid` whose centers satisfy `pred`.
template <class Pred>
inline DiscreteMeasure uniform_area_measure(const Grid& grid, double density, Pred&& pred) {
    DiscreteMeasure m;
    m.area = Field(grid, 0.0);
    for (int64_t k = 0; k < grid.size(); ++k)
        if (pred(grid.center(k))) m.area[k] = density;
    return m;
}

}  // namespace fr
