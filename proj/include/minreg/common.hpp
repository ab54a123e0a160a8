#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace minreg {

inline constexpr const char* kVersion = "0.3.0";

/// Planar point / vector. Doubles throughout; all geometry lives in the
/// open positive quadrant.
struct vec2 {
  double x = 0.0;
  double y = 0.0;

  friend vec2 operator+(vec2 a, vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend vec2 operator-(vec2 a, vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend vec2 operator*(double s, vec2 a) { return {s * a.x, s * a.y}; }
  friend vec2 operator*(vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend vec2 operator/(vec2 a, double s) { return {a.x / s, a.y / s}; }
  vec2 operator-() const { return {-x, -y}; }
  friend bool operator==(vec2 a, vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(vec2 a, vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(vec2 a, vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(vec2 a) { return std::hypot(a.x, a.y); }
inline vec2 unit(vec2 a) { return a / norm(a); }
/// 90 degree counterclockwise rotation.
inline vec2 rot90(vec2 a) { return {-a.y, a.x}; }
inline bool positive(vec2 a) { return a.x > 0.0 && a.y > 0.0; }

inline bool nearly_equal(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Failure taxonomy shared by the library and the CLI exit-code mapping.
enum class errc {
  malformed_input,
  parallel_reactions,
  degenerate_slope,
  non_positive_point,
  epsilon_too_large,
  wrong_case,
  step_underflow,
  non_positive_excursion,
  schedule_out_of_box,
  trajectory_escaped,
  non_intersecting_trajectories,
  target_outside_region,
  budget_exceeded,
  region_invalid,
  equal_eigenvalues,
  internal,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::malformed_input: return "MalformedInput";
    case errc::parallel_reactions: return "ParallelReactions";
    case errc::degenerate_slope: return "DegenerateSlope";
    case errc::non_positive_point: return "NonPositivePoint";
    case errc::epsilon_too_large: return "EpsilonTooLarge";
    case errc::wrong_case: return "WrongCase";
    case errc::step_underflow: return "StepUnderflow";
    case errc::non_positive_excursion: return "NonPositiveExcursion";
    case errc::schedule_out_of_box: return "ScheduleOutOfBox";
    case errc::trajectory_escaped: return "TrajectoryEscaped";
    case errc::non_intersecting_trajectories: return "NonIntersectingTrajectories";
    case errc::target_outside_region: return "TargetOutsideRegion";
    case errc::budget_exceeded: return "BudgetExceeded";
    case errc::region_invalid: return "RegionInvalid";
    case errc::equal_eigenvalues: return "EqualEigenvalues";
    case errc::internal: return "InternalError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
  throw error(code, what);
}

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

/// 17 significant digits: enough for exact double round-trip in text formats.
inline std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace minreg
