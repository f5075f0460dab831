#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bevqa/geometry.hpp"

namespace bevqa {

struct Intrinsics {
  double fx{0}, fy{0};  // focal lengths, pixels
  double cx{0}, cy{0};  // principal point, pixels
  double width{0}, height{0};

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

struct CameraPose {
  double t{0};  // seconds
  Vec3 position;
  double yaw_deg{0};  // 0 faces +y, counterclockwise positive
  Intrinsics intr;

  friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

struct SceneObject {
  std::string id;
  std::string label;
  Box3 box;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct SceneRecord {
  std::string scene_id;
  std::vector<SceneObject> objects;
  std::vector<CameraPose> trajectory;
  // Precomputed per-frame visible object ids, keyed by trajectory index.
  // When absent, visibility is derived by pinhole projection.
  std::optional<std::map<std::size_t, std::set<std::string>>> visibility;

  const SceneObject& object_by_id(std::string_view id) const;  // throws on miss

  friend bool operator==(const SceneRecord&, const SceneRecord&) = default;
};

// A contiguous window into the resampled trajectory. frame_indices are
// positions in the resampled frame list (see resample_indices), so
// consecutive entries differ by exactly 1.
struct FrameSequence {
  std::string scene_id;
  std::vector<std::size_t> frame_indices;

  std::size_t length() const { return frame_indices.size(); }

  friend bool operator==(const FrameSequence&, const FrameSequence&) = default;
};

inline constexpr std::array<int, 5> kSequenceLengths = {1, 4, 8, 12, 16};
inline constexpr double kDefaultFps = 20.0;
inline constexpr double kDefaultMinAreaFraction = 0.005;

bool is_sequence_length(int n);

/// Parses and validates one scene document. `origin` names the source in
/// error messages.
SceneRecord load_scene(const std::string& text, const std::string& origin = "scene");
SceneRecord load_scene_file(const std::filesystem::path& path);

/// Canonical JSON for a SceneRecord; load_scene(serialize_scene(r)) == r.
std::string serialize_scene(const SceneRecord& rec);

/// Nearest-pose resampling onto the tick grid t0 + k/target_fps. Ties pick
/// the earlier pose. The grid extends half a period past the last timestamp,
/// which makes resampling a fixpoint: resampling the output at the same rate
/// returns it unchanged.
std::vector<std::size_t> resample_indices(const std::vector<CameraPose>& traj,
                                          double target_fps);
std::vector<CameraPose> resample_fps(const std::vector<CameraPose>& traj, double target_fps);

/// Ids of objects visible in one trajectory frame: the precomputed set when
/// the scene carries one, else every object whose center projects in front of
/// the camera and whose clipped corner-projection rectangle covers at least
/// min_area_fraction of the image.
std::set<std::string> frame_visibility(const SceneRecord& scene, std::size_t frame,
                                       double min_area_fraction);

/// Pixel position of a world point, or nullopt when it lies at or behind the
/// camera plane.
std::optional<Vec2> project_point(const CameraPose& pose, const Vec3& p);

/// Clipped bounding rectangle of the projected box corners, as a fraction of
/// image area.
double projected_area_fraction(const CameraPose& pose, const Box3& box);

struct SamplerConfig {
  double fps = kDefaultFps;
  double min_area_fraction = kDefaultMinAreaFraction;
  int max_redraws = 100;
};

/// Draws per_length contiguous windows per requested length from the
/// resampled trajectory, keeping only windows with at least one frame where
/// two or more objects are visible. Deterministic in seed.
std::vector<FrameSequence> sample_sequences(const SceneRecord& scene,
                                            const std::vector<int>& lengths, int per_length,
                                            std::uint64_t seed, const SamplerConfig& cfg = {});

/// Observer frame of a pose: BEV position plus facing from yaw.
ObserverFrame observer_at(const CameraPose& pose);

/// Ground-truth layout for a sequence: every object visible in at least one
/// frame, BEV-projected and expressed in the first frame's observer frame
/// (axis-aligned bounds of the rotated box). Objects keep scene order.
LayoutMap ground_truth_layout(const SceneRecord& scene, const FrameSequence& seq,
                              const SamplerConfig& cfg = {});

}  // namespace bevqa
