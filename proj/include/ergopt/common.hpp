#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace ergopt {

inline constexpr double kPi = 3.14159265358979323846;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct NonDifferentiable : Error { using Error::Error; };
struct OrderTooHigh : Error { using Error::Error; };
struct NotExpanding : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct BranchStructureUnavailable : Error { using Error::Error; };
struct NewtonDiverged : Error { using Error::Error; };
struct PeriodChanged : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct SearchFailed : Error { using Error::Error; };
struct CaseSearchFailed : Error { using Error::Error; };
struct ZeroDerivativeAtBoundary : Error { using Error::Error; };
struct InvalidInput : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct NoCycle : Error { using Error::Error; };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Point distance on the state space: plain absolute difference on an interval,
// wrap-around distance on a circle of the given circumference.
struct Metric {
  bool circle = false;
  double period = 1.0;

  double dist(double x, double y) const {
    double d = std::fabs(x - y);
    if (!circle) return d;
    d = std::fmod(d, period);
    return std::min(d, period - d);
  }
};

// mt19937_64 with an explicit 53-bit uniform mapping: identical streams on every
// platform, unlike the std distributions.
struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  double sym() { return 2.0 * unit() - 1.0; }
};

inline std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t idx) {
  std::uint64_t z = seed ^ (idx * 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 17 significant digits: binary64 round-trips exactly.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ergopt
