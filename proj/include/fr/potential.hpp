#pragma once

// Logarithmic potentials on grids (FFT free-space convolution with the
// regularized kernel log max(|z-w|, h/2)), energies, the functional
// I_alpha = -Sigma + 2 B_alpha, grid Dirichlet solves, Green functions,
// harmonic measure, balayage and conformal level-curve offsets.

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "fr/geometry.hpp"
#include "fr/grid.hpp"
#include "fr/measure.hpp"

namespace fr {

inline double c_alpha(double alpha) { return 0.5 * (std::log(alpha) - 1.0); }
inline double psi_alpha(const Vec2& z, double alpha) { return z.norm2() / (2.0 * alpha); }

// ---------------------------------------------------------------------------
// FFT convolution with the log kernel.

namespace detail {

inline int next_fast_size(int n) {
    for (;; ++n) {
        int m = n;
        for (int f : {2, 3, 5, 7})
            while (m % f == 0) m /= f;
        if (m == 1) return n;
    }
}

inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

class LogConvolver {
  public:
    explicit LogConvolver(const Grid& g) : grid_(g) {
        px_ = detail::next_fast_size(2 * g.nx);
        py_ = detail::next_fast_size(2 * g.ny);
        cxs_ = px_ / 2 + 1;
        buf_ = fftw_alloc_real(int64_t(py_) * px_);
        spec_ = fftw_alloc_complex(int64_t(py_) * cxs_);
        kspec_ = fftw_alloc_complex(int64_t(py_) * cxs_);
        {
            std::lock_guard<std::mutex> lk(detail::fftw_mutex());
            fwd_ = fftw_plan_dft_r2c_2d(py_, px_, buf_, spec_, FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_2d(py_, px_, spec_, buf_, FFTW_ESTIMATE);
        }
        // kernel, wrapped offsets
        double h = g.h;
        for (int j = 0; j < py_; ++j) {
            int dj = (j <= py_ / 2) ? j : j - py_;
            for (int i = 0; i < px_; ++i) {
                int di = (i <= px_ / 2) ? i : i - px_;
                double r = h * std::sqrt(double(di) * di + double(dj) * dj);
                buf_[int64_t(j) * px_ + i] = std::log(std::max(r, h / 2));
            }
        }
        fftw_execute(fwd_);
        std::copy(&spec_[0][0], &spec_[0][0] + 2 * int64_t(py_) * cxs_, &kspec_[0][0]);
    }

    ~LogConvolver() {
        std::lock_guard<std::mutex> lk(detail::fftw_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
        fftw_free(spec_);
        fftw_free(kspec_);
    }

    LogConvolver(const LogConvolver&) = delete;
    LogConvolver& operator=(const LogConvolver&) = delete;

    const Grid& grid() const { return grid_; }

    // U(x) = sum_y K(x - y) mass(y); mass indexed like the grid.
    Field convolve(const std::vector<double>& mass) {
        std::fill(buf_, buf_ + int64_t(px_) * py_, 0.0);
        for (int j = 0; j < grid_.ny; ++j)
            for (int i = 0; i < grid_.nx; ++i)
                buf_[int64_t(j) * px_ + i] = mass[grid_.idx(i, j)];
        fftw_execute(fwd_);
        double scale = 1.0 / (double(px_) * py_);
        for (int64_t k = 0; k < int64_t(py_) * cxs_; ++k) {
            double re = spec_[k][0] * kspec_[k][0] - spec_[k][1] * kspec_[k][1];
            double im = spec_[k][0] * kspec_[k][1] + spec_[k][1] * kspec_[k][0];
            spec_[k][0] = re * scale;
            spec_[k][1] = im * scale;
        }
        fftw_execute(bwd_);
        Field u(grid_, 0.0);
        for (int j = 0; j < grid_.ny; ++j)
            for (int i = 0; i < grid_.nx; ++i)
                u(i, j) = buf_[int64_t(j) * px_ + i];
        return u;
    }

  private:
    Grid grid_;
    int px_, py_, cxs_;
    double* buf_;
    fftw_complex* spec_;
    fftw_complex* kspec_;
    fftw_plan fwd_, bwd_;
};

// Small process-wide cache (grids are reused heavily inside one pipeline).
inline std::shared_ptr<LogConvolver> get_convolver(const Grid& g) {
    static std::mutex mu;
    static std::vector<std::shared_ptr<LogConvolver>> cache;
    std::lock_guard<std::mutex> lk(mu);
    for (auto& c : cache)
        if (c->grid().same_layout(g)) return c;
    auto c = std::make_shared<LogConvolver>(g);
    cache.push_back(c);
    if (cache.size() > 2) cache.erase(cache.begin());
    return c;
}

// ---------------------------------------------------------------------------
// Potentials.

struct PotentialField {
    Field values;
    double source_mass = 0;
};

inline PotentialField log_potential(const DiscreteMeasure& m, const Grid& grid) {
    Field mass = m.deposit(grid);
    auto conv = get_convolver(grid);
    PotentialField out;
    out.values = conv->convolve(mass.v);
    out.source_mass = m.total_mass();
    return out;
}

// Direct kernel evaluation of the point parts (atoms + boundary) at z; the
// area part must be supplied via an already computed field, or summed cell
// by cell when `area_direct` is set.
inline double potential_at(const DiscreteMeasure& m, const Vec2& z, double reg = 0.0,
                           bool area_direct = false) {
    auto K = [&](double r) { return std::log(std::max(r, reg)); };
    double u = 0;
    for (auto& a : m.atoms) u += a.w * K(dist(z, a.p));
    if (m.boundary)
        for (size_t k = 0; k < m.boundary->samples.size(); ++k)
            u += m.boundary->samples[k].w * m.boundary_density[k] *
                 K(dist(z, m.boundary->samples[k].p));
    if (!m.area.empty()) {
        if (!area_direct) throw ParameterError("potential_at: area part requires a field");
        double h2 = m.area.grid.h * m.area.grid.h;
        for (int64_t k = 0; k < m.area.grid.size(); ++k)
            if (m.area[k] != 0) u += m.area[k] * h2 * K(dist(z, m.area.grid.center(k)));
    }
    return u;
}

// -Sigma(mu) = -int U^mu dmu with atom self-interaction excluded pairwise.
inline double log_energy(const DiscreteMeasure& m, const Grid* grid_hint = nullptr) {
    // pure atoms: discrete energy
    if ((!m.boundary || m.boundary_density.empty()) && m.area.empty()) {
        double e = 0;
        for (size_t i = 0; i < m.atoms.size(); ++i)
            for (size_t j = i + 1; j < m.atoms.size(); ++j) {
                double d = dist(m.atoms[i].p, m.atoms[j].p);
                if (d < 1e-14) throw CoincidentPointsError("coincident atoms in log_energy");
                e += 2 * m.atoms[i].w * m.atoms[j].w * std::log(d);
            }
        return -e;
    }
    Grid g;
    if (grid_hint)
        g = *grid_hint;
    else if (!m.area.empty())
        g = m.area.grid;
    else {
        // boundary (+ atoms) only: local grid around the support
        double lo_x = HUGE_VAL, lo_y = HUGE_VAL, hi_x = -HUGE_VAL, hi_y = -HUGE_VAL;
        auto upd = [&](const Vec2& p) {
            lo_x = std::min(lo_x, p.x);
            lo_y = std::min(lo_y, p.y);
            hi_x = std::max(hi_x, p.x);
            hi_y = std::max(hi_y, p.y);
        };
        for (auto& a : m.atoms) upd(a.p);
        for (auto& s : m.boundary->samples) upd(s.p);
        double ext = std::max(hi_x - lo_x, hi_y - lo_y);
        g = Grid::covering_box(lo_x, hi_x, lo_y, hi_y, std::max(ext / 512, 1e-6), 4.0);
    }
    PotentialField U = log_potential(m, g);
    double h2 = g.h * g.h;
    double sigma = 0;
    if (!m.area.empty() && g.same_layout(m.area.grid)) {
        for (int64_t k = 0; k < g.size(); ++k) sigma += U.values[k] * m.area[k] * h2;
    } else if (!m.area.empty()) {
        for (int64_t k = 0; k < m.area.grid.size(); ++k)
            if (m.area[k] != 0)
                sigma += U.values.interp(m.area.grid.center(k)) * m.area[k] *
                         m.area.grid.h * m.area.grid.h;
    }
    if (m.boundary)
        for (size_t k = 0; k < m.boundary->samples.size(); ++k)
            sigma += U.values.interp(m.boundary->samples[k].p) * m.boundary->samples[k].w *
                     m.boundary_density[k];
    double k0 = std::log(g.h / 2);
    for (auto& a : m.atoms) sigma += a.w * (U.values.interp(a.p) - a.w * k0);
    return -sigma;
}

// ---------------------------------------------------------------------------
// B_alpha and I_alpha.

struct BAlphaResult {
    double value = 0;
    std::vector<int64_t> tie_cells;  // cells within 10 h^2 of the max
    Vec2 argmax;
};

inline BAlphaResult b_alpha_from_potential(const Field& U, double alpha) {
    const Grid& g = U.grid;
    BAlphaResult r;
    r.value = -HUGE_VAL;
    int64_t best = 0;
    for (int64_t k = 0; k < g.size(); ++k) {
        double val = U[k] - psi_alpha(g.center(k), alpha);
        if (val > r.value) {
            r.value = val;
            best = k;
        }
    }
    double tol = 10 * g.h * g.h;
    for (int64_t k = 0; k < g.size(); ++k) {
        double val = U[k] - psi_alpha(g.center(k), alpha);
        if (val >= r.value - tol) r.tie_cells.push_back(k);
    }
    r.argmax = g.center(best);
    return r;
}

inline BAlphaResult b_alpha(const DiscreteMeasure& m, double alpha, const Grid& grid) {
    if (alpha <= 0) throw ParameterError("b_alpha: alpha must be positive");
    PotentialField U = log_potential(m, grid);
    return b_alpha_from_potential(U.values, alpha);
}

inline double i_alpha(const DiscreteMeasure& m, double alpha, const Grid& grid) {
    double mass = m.total_mass();
    if (std::abs(mass - 1.0) > 1e-6)
        throw NotProbabilityError("i_alpha: measure mass " + std::to_string(mass));
    PotentialField U = log_potential(m, grid);
    double b = b_alpha_from_potential(U.values, alpha).value;
    // -Sigma = -int U dmu computed against the same field
    double sigma = 0;
    double h2 = grid.h * grid.h;
    if (!m.area.empty() && grid.same_layout(m.area.grid)) {
        for (int64_t k = 0; k < grid.size(); ++k) sigma += U.values[k] * m.area[k] * h2;
    } else if (!m.area.empty()) {
        for (int64_t k = 0; k < m.area.grid.size(); ++k)
            if (m.area[k] != 0)
                sigma += U.values.interp(m.area.grid.center(k)) * m.area[k] * m.area.grid.h *
                         m.area.grid.h;
    }
    if (m.boundary)
        for (size_t k = 0; k < m.boundary->samples.size(); ++k)
            sigma += U.values.interp(m.boundary->samples[k].p) * m.boundary->samples[k].w *
                     m.boundary_density[k];
    double k0 = std::log(grid.h / 2);
    for (auto& a : m.atoms) sigma += a.w * (U.values.interp(a.p) - a.w * k0);
    return -sigma + 2 * b;
}

// ---------------------------------------------------------------------------
// Red-black SOR for the 5-point Laplacian.

struct SorOptions {
    double omega = 0;      // 0 -> auto from the unknown-region extent
    double tol = 1e-11;    // stop when max update < tol * (1 + max|u|)
    int max_sweeps = 0;    // 0 -> auto
};

// unknown[k] != 0 marks solved cells; u carries boundary values elsewhere.
// Solves lap(u) = rhs (rhs may be null for Laplace).  Returns sweep count.
inline int sor_solve(const std::vector<uint8_t>& unknown, Field& u, const Field* rhs,
                     SorOptions opt = {}) {
    const Grid& g = u.grid;
    int i_lo = g.nx, i_hi = -1, j_lo = g.ny, j_hi = -1;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (unknown[g.idx(i, j)]) {
                i_lo = std::min(i_lo, i);
                i_hi = std::max(i_hi, i);
                j_lo = std::min(j_lo, j);
                j_hi = std::max(j_hi, j);
            }
    if (i_hi < i_lo) return 0;
    if (i_lo == 0 || j_lo == 0 || i_hi == g.nx - 1 || j_hi == g.ny - 1)
        throw ParameterError("sor_solve: unknown region touches the grid edge");
    int n_eff = std::max(i_hi - i_lo, j_hi - j_lo) + 1;
    double omega = opt.omega > 0 ? opt.omega : 2.0 / (1.0 + std::sin(kPi / n_eff));
    int max_sweeps = opt.max_sweeps > 0 ? opt.max_sweeps : std::max(2000, 40 * n_eff);
    double scale = 1.0;
    for (int64_t k = 0; k < g.size(); ++k) scale = std::max(scale, std::abs(u[k]));
    double tol = opt.tol * scale;
    double h2 = g.h * g.h;

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double upd = 0;
        for (int color = 0; color < 2; ++color)
            for (int j = j_lo; j <= j_hi; ++j) {
                int i0 = i_lo + ((i_lo + j) % 2 == color ? 0 : 1);
                for (int i = i0; i <= i_hi; i += 2) {
                    int64_t k = g.idx(i, j);
                    if (!unknown[k]) continue;
                    double target = 0.25 * (u[k - 1] + u[k + 1] + u[k - g.nx] + u[k + g.nx] -
                                            (rhs ? h2 * (*rhs)[k] : 0.0));
                    double d = omega * (target - u[k]);
                    u[k] += d;
                    upd = std::max(upd, std::abs(d));
                }
            }
        if (upd < tol) return sweep;
    }
    throw ConvergenceError("sor_solve: no convergence in " + std::to_string(max_sweeps) +
                           " sweeps");
}

// ---------------------------------------------------------------------------
// Boundary-fitted interior Dirichlet solve (Shortley-Weller stencils).  The
// links from interior cells that cross the curve are cut at the true
// intersection point and carry the prescribed data evaluated there.

class InteriorDirichlet {
  public:
    // Solve lap(u) = 0 in the Inside component of `dom` containing `seed`,
    // with boundary values data(p) on the curve.
    InteriorDirichlet(const PlanarDomain& dom, const Grid& grid, const Vec2& seed)
        : grid_(grid) {
        mask_ = rasterize(dom, grid);
        const Grid& g = grid;
        in_comp_.assign(g.size(), 0);
        int pi, pj;
        g.nearest(seed, pi, pj);
        int64_t s0 = g.idx(pi, pj);
        if (!mask_.inside(s0)) throw PoleError("InteriorDirichlet: seed cell not interior");
        std::vector<int64_t> stack{s0};
        in_comp_[s0] = 1;
        while (!stack.empty()) {
            int64_t k = stack.back();
            stack.pop_back();
            for (int64_t nb : {k - 1, k + 1, k - g.nx, k + g.nx}) {
                if (nb < 0 || nb >= g.size()) continue;
                if (!in_comp_[nb] && mask_.inside(nb)) {
                    in_comp_[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }
        for (auto& bc : mask_.band) {
            int64_t k = bc.cell;
            for (int64_t nb : {k - 1, k + 1, k - g.nx, k + g.nx})
                if (nb >= 0 && nb < g.size() && in_comp_[nb]) component_ = bc.component;
        }

        // bucket boundary segments by the cells their inflated bbox touches
        std::map<int64_t, std::vector<std::array<Vec2, 2>>> buckets;
        for (auto& l : dom.loops)
            for (auto& a : l.arcs)
                for (size_t k = 1; k < a.pts.size(); ++k) {
                    Vec2 p = a.pts[k - 1], q = a.pts[k];
                    int i0, j0, i1, j1;
                    g.nearest({std::min(p.x, q.x) - 2 * g.h, std::min(p.y, q.y) - 2 * g.h}, i0, j0);
                    g.nearest({std::max(p.x, q.x) + 2 * g.h, std::max(p.y, q.y) + 2 * g.h}, i1, j1);
                    for (int j = j0; j <= j1; ++j)
                        for (int i = i0; i <= i1; ++i)
                            buckets[g.idx(i, j)].push_back({p, q});
                }

        auto ray_cut = [&](Vec2 c, Vec2 dir, int64_t cell) -> double {
            // smallest t in (0, 2] with c + t*h*dir on the curve
            double best = HUGE_VAL;
            for (int64_t probe : {cell, cell + int64_t(dir.x) + int64_t(dir.y) * g.nx,
                                  cell + 2 * (int64_t(dir.x) + int64_t(dir.y) * g.nx)}) {
                auto it = buckets.find(probe);
                if (it == buckets.end()) continue;
                for (auto& seg : it->second) {
                    Vec2 A = seg[0], B = seg[1];
                    Vec2 r = dir * (2 * g.h);
                    Vec2 sAB = B - A;
                    double den = r.cross(sAB);
                    if (den == 0) continue;
                    double t = (A - c).cross(sAB) / den;
                    double uu = (A - c).cross(r) / den;
                    if (t > 1e-12 && uu >= -1e-12 && uu <= 1 + 1e-12)
                        best = std::min(best, t * 2.0);
                }
            }
            return best;
        };

        static const Vec2 dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        irr_of_cell_.assign(g.size(), -1);
        for (int j = 1; j + 1 < g.ny; ++j)
            for (int i = 1; i + 1 < g.nx; ++i) {
                int64_t k = g.idx(i, j);
                if (!in_comp_[k]) continue;
                const int64_t nbs[4] = {k + 1, k - 1, k + g.nx, k - g.nx};
                bool irregular = false;
                for (int d = 0; d < 4; ++d) irregular |= !in_comp_[nbs[d]];
                if (!irregular) continue;
                IrrCell ic;
                ic.cell = k;
                Vec2 c = g.center(i, j);
                for (int d = 0; d < 4; ++d) {
                    if (in_comp_[nbs[d]]) {
                        ic.theta[d] = 1.0;
                        ic.cut[d] = false;
                        continue;
                    }
                    double t = ray_cut(c, dirs[d], k);
                    if (!std::isfinite(t)) t = 1.0;  // tangency fallback
                    ic.theta[d] = std::clamp(t, 0.05, 2.0);
                    ic.cut[d] = true;
                    ic.bpoint[d] = c + dirs[d] * (ic.theta[d] * g.h);
                }
                irr_of_cell_[k] = int32_t(irr_.size());
                irr_.push_back(ic);
            }
    }

    const RegionMask& mask() const { return mask_; }
    const std::vector<uint8_t>& in_comp() const { return in_comp_; }
    int component() const { return component_; }

    // Solve with the given boundary data; returns the field (0 outside the
    // component).
    template <class F>
    Field solve(F&& data, double tol = 1e-11) const {
        const Grid& g = grid_;
        Field u(g, 0.0);
        // boundary values at the cut points
        std::vector<std::array<double, 4>> bval(irr_.size());
        for (size_t q = 0; q < irr_.size(); ++q)
            for (int d = 0; d < 4; ++d)
                bval[q][d] = irr_[q].cut[d] ? data(irr_[q].bpoint[d]) : 0.0;

        int i_lo = g.nx, i_hi = -1, j_lo = g.ny, j_hi = -1;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (in_comp_[g.idx(i, j)]) {
                    i_lo = std::min(i_lo, i);
                    i_hi = std::max(i_hi, i);
                    j_lo = std::min(j_lo, j);
                    j_hi = std::max(j_hi, j);
                }
        int n_eff = std::max(i_hi - i_lo, j_hi - j_lo) + 1;
        double omega = 2.0 / (1.0 + std::sin(kPi / n_eff));
        int max_sweeps = std::max(4000, 60 * n_eff);
        // scale for the stopping rule
        double scale = 1.0;
        for (auto& bv : bval)
            for (double v : bv) scale = std::max(scale, std::abs(v));
        double tol_abs = tol * scale;

        for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
            double upd = 0;
            for (int color = 0; color < 2; ++color)
                for (int j = j_lo; j <= j_hi; ++j) {
                    int i0 = i_lo + ((i_lo + j) % 2 == color ? 0 : 1);
                    for (int i = i0; i <= i_hi; i += 2) {
                        int64_t k = g.idx(i, j);
                        if (!in_comp_[k]) continue;
                        int32_t q = irr_of_cell_[k];
                        double target;
                        if (q < 0) {
                            target = 0.25 * (u[k - 1] + u[k + 1] + u[k - g.nx] + u[k + g.nx]);
                        } else {
                            const IrrCell& ic = irr_[q];
                            const int64_t nbs[4] = {k + 1, k - 1, k + g.nx, k - g.nx};
                            double tE = ic.theta[0], tW = ic.theta[1], tN = ic.theta[2],
                                   tS = ic.theta[3];
                            double vE = ic.cut[0] ? bval[q][0] : u[nbs[0]];
                            double vW = ic.cut[1] ? bval[q][1] : u[nbs[1]];
                            double vN = ic.cut[2] ? bval[q][2] : u[nbs[2]];
                            double vS = ic.cut[3] ? bval[q][3] : u[nbs[3]];
                            double aE = 1.0 / (tE * (tE + tW)), aW = 1.0 / (tW * (tE + tW));
                            double aN = 1.0 / (tN * (tN + tS)), aS = 1.0 / (tS * (tN + tS));
                            double diag = 1.0 / (tE * tW) + 1.0 / (tN * tS);
                            target = (aE * vE + aW * vW + aN * vN + aS * vS) / diag;
                        }
                        double dlt = omega * (target - u[k]);
                        u[k] += dlt;
                        upd = std::max(upd, std::abs(dlt));
                    }
                }
            if (upd < tol_abs) break;
            if (sweep == max_sweeps)
                throw ConvergenceError("InteriorDirichlet: SOR did not converge");
        }
        return u;
    }

  private:
    struct IrrCell {
        int64_t cell;
        double theta[4];
        bool cut[4];
        Vec2 bpoint[4];
    };
    Grid grid_;
    RegionMask mask_;
    std::vector<uint8_t> in_comp_;
    std::vector<IrrCell> irr_;
    std::vector<int32_t> irr_of_cell_;
    int component_ = 0;
};

// ---------------------------------------------------------------------------
// Green functions.

struct GreenResult {
    Field G;            // log|z - pole| - h_reg inside the component, 0 elsewhere
    Field h_reg;        // harmonic extension of log|z - pole| boundary data
    RegionMask mask;    // rasterization used
    std::vector<uint8_t> in_comp;  // cells of the pole's component (solved set)
    int component = 0;
    Vec2 pole;
};

inline GreenResult green_function(const PlanarDomain& dom, const Vec2& pole, const Grid& grid) {
    if (!dom.inside(pole)) throw PoleError("green_function: pole not inside the domain");
    if (dom.boundary_distance(pole) <= 3 * grid.h)
        throw PoleError("green_function: pole too close to the boundary");
    InteriorDirichlet solver(dom, grid, pole);
    GreenResult res;
    res.pole = pole;
    res.mask = solver.mask();
    res.in_comp = solver.in_comp();
    res.component = solver.component();
    res.h_reg = solver.solve([&](Vec2 p) { return std::log(dist(p, pole)); });
    const Grid& g = grid;
    res.G = Field(g, 0.0);
    for (int64_t k = 0; k < g.size(); ++k)
        if (res.in_comp[k]) {
            double r = dist(g.center(k), pole);
            res.G[k] = std::log(std::max(r, g.h / 2)) - res.h_reg[k];
            if (res.G[k] > 0) res.G[k] = 0;
        }
    return res;
}

inline double conformal_radius(const PlanarDomain& dom, const Vec2& z0, const Grid& grid) {
    GreenResult gr = green_function(dom, z0, grid);
    // average G - log|z - z0| = -h_reg over a ring of radius 4h
    double acc = 0;
    int n = 32;
    for (int k = 0; k < n; ++k) {
        double th = 2 * kPi * k / n;
        Vec2 p{z0.x + 4 * grid.h * std::cos(th), z0.y + 4 * grid.h * std::sin(th)};
        acc += -gr.h_reg.interp(p);
    }
    return std::exp(-acc / n);
}

// ---------------------------------------------------------------------------
// Harmonic measure as the normal derivative of the Green function.  The
// derivative is read off in weak form: the glued field (log kernel outside,
// its harmonic extension inside) has its distributional Laplacian supported
// on the boundary band, and the per-cell Laplacian masses are the Neumann
// jump integrated over the cell.  Declared below, defined after balayage.

struct HarmonicMeasureOptions {
    int n_per_arc = 512;
    double grid_h = 0;  // 0 -> boundary-box diagonal / 600
};

inline DiscreteMeasure harmonic_measure(const PlanarDomain& dom, const Vec2& pole,
                                        HarmonicMeasureOptions opt = {});

// ---------------------------------------------------------------------------
// Balayage of a measure out of the hole: Bal(nu, G^c) = int omega_{G,z} dnu + nu|_{G^c}.
// Computed by the potential route: glue U^{nu_in} (outside) with its harmonic
// extension (inside) and read the Laplacian jump on the boundary band.

struct BalayageReport {
    double mass_in = 0;
    double mass_out = 0;
    double mass_result = 0;
    double potential_mismatch = 0;  // max |U^bal - U^nu| on a test ring
};

inline DiscreteMeasure balayage(const DiscreteMeasure& nu, const PlanarDomain& dom,
                                BalayageReport* report = nullptr, double grid_h = 0,
                                int n_per_arc = 512) {
    // split parts by location
    DiscreteMeasure in, out;
    in.allow_signed = out.allow_signed = nu.allow_signed;
    for (auto& a : nu.atoms) (dom.inside(a.p) ? in : out).atoms.push_back(a);
    if (nu.boundary) {
        out.boundary = nu.boundary;
        out.boundary_density = nu.boundary_density;  // boundary parts live on d(hole)
    }
    if (!nu.area.empty()) {
        in.area = Field(nu.area.grid, 0.0);
        out.area = Field(nu.area.grid, 0.0);
        for (int64_t k = 0; k < nu.area.grid.size(); ++k) {
            if (nu.area[k] == 0) continue;
            (dom.inside(nu.area.grid.center(k)) ? in.area[k] : out.area[k]) = nu.area[k];
        }
    }
    double mass_in = in.total_mass();
    if (report) {
        report->mass_in = mass_in;
        report->mass_out = out.total_mass();
    }
    if (mass_in == 0) {
        if (report) report->mass_result = out.total_mass();
        return out;
    }

    double hx = dom.bb_hi.x - dom.bb_lo.x, hy = dom.bb_hi.y - dom.bb_lo.y;
    double h = grid_h > 0 ? grid_h : std::max(hx, hy) / 600;
    Grid g = Grid::covering_box(dom.bb_lo.x, dom.bb_hi.x, dom.bb_lo.y, dom.bb_hi.y, h, 8.0);

    auto bs = std::make_shared<BoundarySampling>(boundary_sample(dom, n_per_arc));
    DiscreteMeasure swept;
    swept.boundary = bs;
    swept.boundary_density.assign(bs->samples.size(), 0.0);

    // sweep each Jordan component separately; disjoint components decouple
    for (int li = 0; li < (int)dom.loops.size(); ++li) {
        PlanarDomain comp;
        comp.loops = {dom.loops[li]};
        comp.bb_lo = dom.loops[li].bb_lo;
        comp.bb_hi = dom.loops[li].bb_hi;

        // the in-parts of this component
        DiscreteMeasure nu;
        nu.allow_signed = in.allow_signed;
        Vec2 seed;
        bool have_seed = false;
        for (auto& a : in.atoms)
            if (comp.inside(a.p)) {
                nu.atoms.push_back(a);
                seed = a.p;
                have_seed = true;
            }
        if (!in.area.empty()) {
            nu.area = Field(in.area.grid, 0.0);
            for (int64_t k = 0; k < in.area.grid.size(); ++k)
                if (in.area[k] != 0 && comp.inside(in.area.grid.center(k))) {
                    nu.area[k] = in.area[k];
                    if (!have_seed) {
                        seed = in.area.grid.center(k);
                        have_seed = dom.boundary_distance(seed) > 4 * h;
                    }
                }
        }
        double m_li = nu.total_mass();
        if (m_li == 0 || !have_seed) continue;

        Field Uarea;
        if (!nu.area.empty()) {
            DiscreteMeasure area_only;
            area_only.area = nu.area;
            Uarea = log_potential(area_only, g).values;
        }
        auto U_at = [&](const Vec2& p) {
            double u = 0;
            for (auto& a : nu.atoms) u += a.w * std::log(std::max(dist(p, a.p), g.h / 4));
            if (!Uarea.empty()) u += Uarea.interp(p);
            return u;
        };

        InteriorDirichlet solver(comp, g, seed);
        Field V = solver.solve(U_at);
        const auto& inc = solver.in_comp();
        auto interp_ok = [&](const Vec2& p) {
            double fx = (p.x - g.x0) / g.h, fy = (p.y - g.y0) / g.h;
            int i = std::clamp(int(std::floor(fx)), 0, g.nx - 2);
            int j = std::clamp(int(std::floor(fy)), 0, g.ny - 2);
            return inc[g.idx(i, j)] && inc[g.idx(i + 1, j)] && inc[g.idx(i, j + 1)] &&
                   inc[g.idx(i + 1, j + 1)];
        };

        double raw = 0;
        std::vector<double> dens(bs->samples.size(), 0.0);
        for (size_t s = 0; s < bs->samples.size(); ++s) {
            if (bs->samples[s].component != li) continue;
            const auto& smp = bs->samples[s];
            double delta = 3 * g.h;
            // outward one-sided derivative of U^nu
            double u0 = U_at(smp.p);
            double dn_out = (-3 * u0 + 4 * U_at(smp.p + smp.n * delta) -
                             U_at(smp.p + smp.n * (2 * delta))) /
                            (2 * delta);
            // inward one-sided derivative of the harmonic extension
            double d_in = delta;
            while (d_in < 8 * g.h &&
                   (!interp_ok(smp.p - smp.n * d_in) || !interp_ok(smp.p - smp.n * (2 * d_in))))
                d_in += g.h;
            double dn_in =
                (3 * u0 - 4 * V.interp(smp.p - smp.n * d_in) + V.interp(smp.p - smp.n * (2 * d_in))) /
                (2 * d_in);
            dens[s] = std::max(0.0, (dn_out - dn_in) / (2 * kPi));
            raw += dens[s] * smp.w;
        }
        if (raw <= 0) throw ParameterError("balayage: degenerate sweep");
        double c = m_li / raw;
        for (size_t s = 0; s < bs->samples.size(); ++s)
            if (bs->samples[s].component == li) swept.boundary_density[s] = dens[s] * c;
    }

    // combine with the untouched outside part
    DiscreteMeasure result = out;
    if (result.boundary && result.boundary != swept.boundary)
        throw ParameterError("balayage: incompatible boundary samplings");
    if (!result.boundary) {
        result.boundary = swept.boundary;
        result.boundary_density = swept.boundary_density;
    } else {
        for (size_t s = 0; s < swept.boundary_density.size(); ++s)
            result.boundary_density[s] += swept.boundary_density[s];
    }

    if (report) {
        report->mass_result = result.total_mass();
        // potential match on a test ring a fixed fraction outside the hole
        double mism = 0;
        double R = 0.8 * std::max(hx, hy) + 16 * h;
        Vec2 c{0.5 * (dom.bb_lo.x + dom.bb_hi.x), 0.5 * (dom.bb_lo.y + dom.bb_hi.y)};
        for (int q = 0; q < 64; ++q) {
            double th = 2 * kPi * q / 64;
            Vec2 z{c.x + R * std::cos(th), c.y + R * std::sin(th)};
            double u_orig = potential_at(in, z, 0.0, true);
            double u_swept = 0;
            for (size_t s = 0; s < bs->samples.size(); ++s)
                u_swept += bs->samples[s].w * swept.boundary_density[s] *
                           std::log(dist(z, bs->samples[s].p));
            mism = std::max(mism, std::abs(u_orig - u_swept));
        }
        report->potential_mismatch = mism;
    }
    return result;
}

inline DiscreteMeasure harmonic_measure(const PlanarDomain& dom, const Vec2& pole,
                                        HarmonicMeasureOptions opt) {
    if (!dom.inside(pole)) throw PoleError("harmonic_measure: pole not inside");
    BalayageReport rep;
    DiscreteMeasure m = balayage(point_mass(pole), dom, &rep, opt.grid_h, opt.n_per_arc);
    m.atoms.clear();
    double raw = m.boundary_mass();
    if (raw <= 0) throw PoleError("harmonic_measure: vanishing raw mass");
    if (std::abs(raw - 1.0) > 1e-3)
        log_info("harmonic_measure: raw mass %.6f renormalized", raw);
    for (auto& d : m.boundary_density) d /= raw;
    for (auto& d : m.boundary_density) d = std::max(0.0, d);
    return m;
}

// ---------------------------------------------------------------------------
// Offset family: inward offsets are conformal level curves {|phi| = e^{-t}},
// outward offsets are smoothed parallel curves.

inline PlanarDomain offset_family(const PlanarDomain& dom, double t, double h_ctx) {
    if (t == 0) return dom;
    if (t > 0) return offset_outward(dom, t, 4 * h_ctx);

    double tt = -t;
    std::vector<PlanarDomain::Loop> loops;
    for (auto& l : dom.loops) {
        // component centroid as the conformal center
        Vec2 c{0, 0};
        double m6 = 0;
        for (auto& a : l.arcs)
            for (size_t k = 1; k < a.pts.size(); ++k) {
                double w = a.pts[k - 1].cross(a.pts[k]);
                c = c + (a.pts[k - 1] + a.pts[k]) * w;
                m6 += w;
            }
        c = c * (1.0 / (3 * m6));
        PlanarDomain comp;
        comp.loops = {l};
        comp.bb_lo = l.bb_lo;
        comp.bb_hi = l.bb_hi;
        double h = std::max(l.bb_hi.x - l.bb_lo.x, l.bb_hi.y - l.bb_lo.y) / 600;
        Grid g = Grid::covering_box(l.bb_lo.x, l.bb_hi.x, l.bb_lo.y, l.bb_hi.y, h, 4.0);
        GreenResult gr = green_function(comp, c, g);
        // radial bisection for G = -t along rays from the center
        int n = 512;
        ParametricArc arc;
        for (int k = 0; k <= n; ++k) {
            double th = 2 * kPi * k / n;
            Vec2 dir{std::cos(th), std::sin(th)};
            double lo = 4 * g.h, hi = lo;
            // march outward until G > -t fails (G rises to 0 at the boundary)
            double G_lo = gr.G.interp(c + dir * lo);
            (void)G_lo;
            double step = 2 * g.h, r = lo;
            while (true) {
                double rn = r + step;
                Vec2 p = c + dir * rn;
                if (!comp.inside(p) || gr.G.interp(p) > -tt) break;
                r = rn;
            }
            lo = r;
            hi = r + step;
            for (int it = 0; it < 60; ++it) {
                double mid = 0.5 * (lo + hi);
                Vec2 p = c + dir * mid;
                bool still_in = comp.inside(p) && gr.G.interp(p) <= -tt;
                (still_in ? lo : hi) = mid;
            }
            arc.pts.push_back(c + dir * (0.5 * (lo + hi)));
        }
        arc.pts.back() = arc.pts.front();
        PlanarDomain::Loop ol;
        ol.arcs.push_back(std::move(arc));
        loops.push_back(std::move(ol));
    }
    return build_domain(std::move(loops));
}

}  // namespace fr
