#pragma once

#include <array>
#include <cmath>

namespace ebeam {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

inline double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
inline double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }

}  // namespace ebeam
