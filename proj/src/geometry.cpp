#include "mogi/geometry.hpp"

namespace mogi {

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

std::vector<Vec> circle_directions(int count, double offset) {
  std::vector<Vec> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(unit2(offset + kTwoPi * k / count));
  return out;
}

std::vector<Vec> fibonacci_directions(int count) {
  std::vector<Vec> out;
  out.reserve(count);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * k;
    out.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

Eigen::Matrix3d frame_from_axis(const Vec& axis) {
  Vec a = axis.normalized();
  Vec helper = std::abs(a.x()) < 0.9 ? Vec::UnitX() : Vec::UnitY();
  Vec e1 = (helper - helper.dot(a) * a).normalized();
  Vec e2 = a.cross(e1);
  Eigen::Matrix3d m;
  m.col(0) = e1;
  m.col(1) = e2;
  m.col(2) = a;
  return m;
}

}  // namespace mogi
