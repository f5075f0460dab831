#include "bevqa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bevqa {

namespace {
constexpr double kDegPerRad = 180.0 / std::numbers::pi;
constexpr double kUnitTolerance = 1e-9;
}  // namespace

bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

bool is_valid(const Box2& b) {
  return is_finite(b.min) && is_finite(b.max) && b.min.x <= b.max.x && b.min.y <= b.max.y;
}

bool is_valid(const Box3& b) {
  return is_finite(b.min) && is_finite(b.max) && b.min.x <= b.max.x &&
         b.min.y <= b.max.y && b.min.z <= b.max.z;
}

void validate(const Box2& b, const std::string& what) {
  if (!is_valid(b)) throw std::invalid_argument(what + ": min must not exceed max and all coordinates must be finite");
}

void validate(const Box3& b, const std::string& what) {
  if (!is_valid(b)) throw std::invalid_argument(what + ": min must not exceed max and all coordinates must be finite");
}

void validate(const ObserverFrame& frame) {
  if (!is_finite(frame.position) || !is_finite(frame.facing))
    throw std::invalid_argument("observer frame must be finite");
  const double norm = std::hypot(frame.facing.x, frame.facing.y);
  if (std::fabs(norm - 1.0) > kUnitTolerance)
    throw std::invalid_argument("observer facing must be a unit vector");
}

void validate(const LayoutMap& m) {
  for (const auto& obj : m.objects) {
    if (obj.label.empty()) throw std::invalid_argument("layout object label must be non-empty");
    validate(obj.box, "layout object '" + obj.label + "'");
  }
}

Vec2 center(const Box2& b) {
  return {(b.min.x + b.max.x) / 2.0, (b.min.y + b.max.y) / 2.0};
}

std::pair<double, double> dims(const Box2& b) {
  return {b.max.x - b.min.x, b.max.y - b.min.y};
}

double center_distance(const Box2& a, const Box2& b) {
  const Vec2 ca = center(a);
  const Vec2 cb = center(b);
  const double dx = cb.x - ca.x;
  const double dy = cb.y - ca.y;
  return std::sqrt(dx * dx + dy * dy);
}

double min_box_distance(const Box2& a, const Box2& b) {
  const double gx = std::max({0.0, a.min.x - b.max.x, b.min.x - a.max.x});
  const double gy = std::max({0.0, a.min.y - b.max.y, b.min.y - a.max.y});
  return std::hypot(gx, gy);
}

DirectionClass relative_direction(const ObserverFrame& frame, const Vec2& target) {
  validate(frame);
  const double dx = target.x - frame.position.x;
  const double dy = target.y - frame.position.y;
  if (dx == 0.0 && dy == 0.0) throw std::invalid_argument("degenerate direction");
  const double fwd = dx * frame.facing.x + dy * frame.facing.y;
  const double lat = frame.facing.x * dy - frame.facing.y * dx;
  if (std::fabs(fwd) >= std::fabs(lat))
    return fwd > 0.0 ? DirectionClass::Front : DirectionClass::Behind;
  return lat > 0.0 ? DirectionClass::Left : DirectionClass::Right;
}

double bearing(const Vec2& from, const Vec2& to) {
  if (from.x == to.x && from.y == to.y) throw std::invalid_argument("degenerate bearing");
  double deg = std::atan2(to.y - from.y, to.x - from.x) * kDegPerRad;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg = 0.0;
  return deg + 0.0;  // flush -0
}

VerticalClass vertical_relation(const Box3& a, const Box3& b) {
  const bool above = a.min.z >= b.max.z;
  const bool below = a.max.z <= b.min.z;
  if (above && below) return VerticalClass::SameLevel;
  if (above) return VerticalClass::Above;
  if (below) return VerticalClass::Below;
  return VerticalClass::SameLevel;
}

Box2 bev_project(const Box3& b) {
  return {{b.min.x, b.min.y}, {b.max.x, b.max.y}};
}

ObserverFrame observer_from_yaw(const Vec2& position, double yaw_deg) {
  const double rad = yaw_deg / kDegPerRad;
  return {position, {-std::sin(rad), std::cos(rad)}};
}

Vec2 rotate_quarter(const Vec2& v, int turns) {
  switch (((turns % 4) + 4) % 4) {
    case 0: return v;
    case 1: return {-v.y, v.x};
    case 2: return {-v.x, -v.y};
    default: return {v.y, -v.x};
  }
}

Box2 rotate_quarter(const Box2& b, int turns) {
  const Vec2 p = rotate_quarter(b.min, turns);
  const Vec2 q = rotate_quarter(b.max, turns);
  return {{std::min(p.x, q.x), std::min(p.y, q.y)}, {std::max(p.x, q.x), std::max(p.y, q.y)}};
}

Box2 translate(const Box2& b, const Vec2& offset) {
  return {{b.min.x + offset.x, b.min.y + offset.y}, {b.max.x + offset.x, b.max.y + offset.y}};
}

const char* to_string(DirectionClass d) {
  switch (d) {
    case DirectionClass::Front: return "front";
    case DirectionClass::Behind: return "behind";
    case DirectionClass::Left: return "left";
    default: return "right";
  }
}

const char* to_string(VerticalClass v) {
  switch (v) {
    case VerticalClass::Above: return "above";
    case VerticalClass::Below: return "below";
    default: return "same level";
  }
}

}  // namespace bevqa
