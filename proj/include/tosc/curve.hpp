#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace tosc {

inline constexpr double kNoLambda = std::numeric_limits<double>::quiet_NaN();

/// One operating point. `lambda` is NaN for points that are not produced by a
/// multiplier (closed forms, merge-k).
struct CurvePoint {
  double lambda = kNoLambda;
  double rate = 0.0;
  double distortion = 0.0;
  std::string flags;
};

inline void add_flag(std::string& flags, const std::string& flag) {
  if (flag.empty()) return;
  if (flags.find(flag) != std::string::npos) return;
  if (!flags.empty()) flags += ';';
  flags += flag;
}

struct RDCurve {
  std::string method;
  std::vector<CurvePoint> points;

  bool empty() const noexcept { return points.empty(); }
  std::size_t size() const noexcept { return points.size(); }

  void sort_by_distortion() {
    std::stable_sort(points.begin(), points.end(),
                     [](const CurvePoint& a, const CurvePoint& b) {
                       return a.distortion < b.distortion;
                     });
  }

  /// Collapses points whose distortions agree within `tol`, keeping the
  /// smallest rate. Leaves the curve sorted by distortion.
  void dedupe_distortion(double tol = 1e-9) {
    sort_by_distortion();
    std::vector<CurvePoint> out;
    out.reserve(points.size());
    for (auto& p : points) {
      if (!out.empty() && std::abs(p.distortion - out.back().distortion) <= tol) {
        if (p.rate < out.back().rate) out.back() = std::move(p);
        continue;
      }
      out.push_back(std::move(p));
    }
    points = std::move(out);
  }

  double min_distortion() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : points) m = std::min(m, p.distortion);
    return m;
  }
  double max_distortion() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) m = std::max(m, p.distortion);
    return m;
  }
};

/// Monotone (Pareto) envelope of a curve as (distortion, rate) pairs sorted by
/// distortion: rate strictly decreasing along the result.
inline std::vector<std::pair<double, double>> monotone_envelope(const RDCurve& curve) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(curve.points.size());
  for (const auto& p : curve.points) pts.emplace_back(p.distortion, p.rate);
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> env;
  for (const auto& [d, r] : pts) {
    if (!env.empty() && r >= env.back().second) continue;
    if (!env.empty() && d == env.back().first) {
      env.back().second = r;
      continue;
    }
    env.emplace_back(d, r);
  }
  return env;
}

/// Piecewise-linear rate of the monotone envelope at distortion `d`. Outside
/// the sampled range the nearest endpoint rate is returned.
inline double interpolate_rate(const RDCurve& curve, double d) {
  const auto env = monotone_envelope(curve);
  if (env.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (d <= env.front().first) return env.front().second;
  if (d >= env.back().first) return env.back().second;
  auto hi = std::lower_bound(env.begin(), env.end(), std::make_pair(d, -1.0),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
  auto lo = hi - 1;
  const double t = (d - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

/// True when `d` lies inside the sampled distortion range of the curve.
inline bool covers(const RDCurve& curve, double d) {
  return !curve.empty() && d >= curve.min_distortion() && d <= curve.max_distortion();
}

}  // namespace tosc
