#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvxmdp {

using Vec = std::vector<double>;

// Errors are typed so callers can distinguish contract violations from
// numerical refusals (e.g. multichain average-mode inputs are refused, not
// silently approximated).
struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AverageModeNotUnichain : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ExpertSupportViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroMixtureState : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BregmanDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IterationBudgetZero : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedOperation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Carries a dotted path to the offending field, e.g. "objective.objective".
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_path(field) {}
    std::string field_path;
};

inline void require(bool cond, const char* what) {
    if (!cond) throw std::logic_error(what);
}

// splitmix64, used to derive independent seed streams from one run seed.
inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    for (std::uint64_t i = 0; i <= stream; ++i) splitmix64(s);
    return std::mt19937_64(s);
}

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatch("dot: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double sup_norm(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

inline double l1_norm(const Vec& a) {
    double m = 0.0;
    for (double v : a) m += std::abs(v);
    return m;
}

inline double span(const Vec& a) {
    if (a.empty()) return 0.0;
    double lo = a[0], hi = a[0];
    for (double v : a) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

inline double vec_sum(const Vec& a) {
    double acc = 0.0;
    for (double v : a) acc += v;
    return acc;
}

}  // namespace cvxmdp
