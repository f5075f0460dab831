#pragma once

#include <string>
#include <utility>
#include <vector>

namespace bevqa {

// BEV frame convention used throughout: meters, observer-centered, +y is the
// observer's initial facing direction, +x its right, +z up. Yaw is measured
// counterclockwise from +y.

struct Vec2 {
  double x{0.0};
  double y{0.0};

  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

// Axis-aligned 2D box, min <= max componentwise. Zero-extent boxes are valid
// inputs everywhere (points and segments count as boxes).
struct Box2 {
  Vec2 min;
  Vec2 max;

  friend constexpr bool operator==(const Box2&, const Box2&) = default;
};

struct Box3 {
  Vec3 min;
  Vec3 max;

  friend constexpr bool operator==(const Box3&, const Box3&) = default;
};

enum class DirectionClass { Front, Behind, Left, Right };
enum class VerticalClass { Above, Below, SameLevel };

struct LayoutObject {
  std::string id;
  std::string label;
  Box2 box;

  friend bool operator==(const LayoutObject&, const LayoutObject&) = default;
};

// Metric-grounded layout map: labeled BEV boxes in meters. Duplicate labels
// are allowed (several instances of one category).
struct LayoutMap {
  std::vector<LayoutObject> objects;

  friend bool operator==(const LayoutMap&, const LayoutMap&) = default;
};

struct ObserverFrame {
  Vec2 position;
  Vec2 facing;  // unit vector, ||facing|| = 1 within 1e-9
};

bool is_finite(const Vec2& v);
bool is_finite(const Vec3& v);
bool is_valid(const Box2& b);
bool is_valid(const Box3& b);
void validate(const Box2& b, const std::string& what = "box");
void validate(const Box3& b, const std::string& what = "box3");
void validate(const ObserverFrame& frame);
void validate(const LayoutMap& m);

Vec2 center(const Box2& b);

/// Extents along x and y: {width, depth}.
std::pair<double, double> dims(const Box2& b);

double center_distance(const Box2& a, const Box2& b);

/// 0 when the boxes overlap or touch, else the Euclidean gap between them.
double min_box_distance(const Box2& a, const Box2& b);

/// Classifies the target into the 45-degree half-plane partition around the
/// observer: |forward| >= |lateral| picks Front/Behind, otherwise Left/Right.
/// Throws std::invalid_argument on a target coincident with the observer.
DirectionClass relative_direction(const ObserverFrame& frame, const Vec2& target);

/// Angle of (to - from) counterclockwise from +x, degrees in [0, 360).
/// Throws std::invalid_argument on coincident points.
double bearing(const Vec2& from, const Vec2& to);

/// Above iff a's z-interval sits at or past b's top, Below symmetrically;
/// overlapping intervals are SameLevel. Coincident degenerate intervals
/// (both boxes flat at the same z) are SameLevel so the relation stays
/// irreflexive.
VerticalClass vertical_relation(const Box3& a, const Box3& b);

/// Drops z: the xy shadow of the box.
Box2 bev_project(const Box3& b);

/// yaw_deg = 0 faces +y; positive yaw turns counterclockwise.
ObserverFrame observer_from_yaw(const Vec2& position, double yaw_deg);

// Quarter-turn rotation about the origin and translation. These are the
// rigid motions that keep axis-aligned boxes axis-aligned.
Vec2 rotate_quarter(const Vec2& v, int turns);
Box2 rotate_quarter(const Box2& b, int turns);
Box2 translate(const Box2& b, const Vec2& offset);

const char* to_string(DirectionClass d);
const char* to_string(VerticalClass v);

}  // namespace bevqa
