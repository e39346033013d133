#pragma once

// Basic scalar types, error hierarchy, logging and RNG shared by all of fr/.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fr {

using Complex = std::complex<double>;

struct Vec2 {
    double x = 0, y = 0;
    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }
inline Complex to_complex(const Vec2& p) { return {p.x, p.y}; }

// ---------------------------------------------------------------------------
// Errors. One exception type per failure mode named in the module contracts.

struct FrError : std::runtime_error {
    explicit FrError(const std::string& m) : std::runtime_error(m) {}
};

#define FR_DEFINE_ERROR(NAME)                                   \
    struct NAME : FrError {                                     \
        explicit NAME(const std::string& m) : FrError(m) {}     \
    }

FR_DEFINE_ERROR(GeometryError);
FR_DEFINE_ERROR(CuspError);
FR_DEFINE_ERROR(ResolutionError);
FR_DEFINE_ERROR(CoincidentPointsError);
FR_DEFINE_ERROR(NotProbabilityError);
FR_DEFINE_ERROR(PoleError);
FR_DEFINE_ERROR(InfeasibleError);
FR_DEFINE_ERROR(ConvergenceError);
FR_DEFINE_ERROR(ParameterError);
FR_DEFINE_ERROR(DegenerateError);
FR_DEFINE_ERROR(RegimeError);
FR_DEFINE_ERROR(DomainTooSmallError);
FR_DEFINE_ERROR(QuadratureViolation);
FR_DEFINE_ERROR(RootError);
FR_DEFINE_ERROR(NoCornerError);
FR_DEFINE_ERROR(ReportError);

#undef FR_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Logging, controlled by FR_LOG={error,info,debug}.

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* e = std::getenv("FR_LOG");
        if (!e) return LogLevel::Error;
        std::string s(e);
        if (s == "debug") return LogLevel::Debug;
        if (s == "info") return LogLevel::Info;
        return LogLevel::Error;
    }();
    return lvl;
}

template <class... Args>
inline void log_at(LogLevel lvl, const char* fmt, Args... args) {
    if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
    std::fprintf(stderr, "[fr] ");
    std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

template <class... Args>
inline void log_info(const char* fmt, Args... args) { log_at(LogLevel::Info, fmt, args...); }
template <class... Args>
inline void log_debug(const char* fmt, Args... args) { log_at(LogLevel::Debug, fmt, args...); }

// ---------------------------------------------------------------------------
// Deterministic RNG.  splitmix64-seeded xoshiro256++ with explicit
// Box-Muller normals, so streams are reproducible independently of the
// standard library implementation.

class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& si : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            si = z ^ (z >> 31);
        }
    }

    uint64_t next_u64() {
        auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Standard complex Gaussian, E|xi|^2 = 1.
    Complex cnormal() {
        constexpr double k = 0.7071067811865476;  // 1/sqrt(2)
        return {normal() * k, normal() * k};
    }

    // Derive an independent child stream (for per-replica seeding).
    Rng child(uint64_t idx) { return Rng(next_u64() ^ (0x5851f42d4c957f2dULL * (idx + 1))); }

  private:
    uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Minimal parallel-for.  Modules that declare data-parallel sweeps use this;
// nthreads <= 1 degrades to a plain loop.

inline void parallel_for(int64_t n, int nthreads, const std::function<void(int64_t, int64_t)>& body) {
    if (nthreads <= 1 || n < 4 * nthreads) {
        body(0, n);
        return;
    }
    std::vector<std::thread> ts;
    int64_t chunk = (n + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
        int64_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        ts.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : ts) t.join();
}

// log-sum-exp over a vector of exponents.
inline double log_sum_exp(const std::vector<double>& xs) {
    double m = -HUGE_VAL;
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace fr
