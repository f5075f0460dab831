#include "bevqa/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bevqa/rng.hpp"
#include "json.hpp"

namespace bevqa {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kDepthEps = 1e-9;

[[noreturn]] void fail(const std::string& origin, const std::string& path,
                       const std::string& msg) {
  throw std::runtime_error(origin + ": " + path + ": " + msg);
}

const json& require(const json& j, const char* key, const std::string& origin,
                    const std::string& path) {
  if (!j.is_object()) fail(origin, path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(origin, path, std::string("missing field '") + key + "'");
  return *it;
}

double require_finite_number(const json& j, const std::string& origin, const std::string& path) {
  if (!j.is_number()) fail(origin, path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(origin, path, "number must be finite");
  return v;
}

std::vector<double> require_number_array(const json& j, std::size_t n, const std::string& origin,
                                         const std::string& path) {
  if (!j.is_array() || j.size() != n)
    fail(origin, path, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(require_finite_number(j[i], origin, path + "[" + std::to_string(i) + "]"));
  return out;
}

struct Basis {
  Vec3 forward, right;  // horizontal unit vectors; up is +z
};

Basis camera_basis(double yaw_deg) {
  const double rad = yaw_deg * std::numbers::pi / 180.0;
  return {{-std::sin(rad), std::cos(rad), 0.0}, {std::cos(rad), std::sin(rad), 0.0}};
}

std::array<Vec3, 8> box_corners(const Box3& b) {
  return {{{b.min.x, b.min.y, b.min.z},
           {b.max.x, b.min.y, b.min.z},
           {b.min.x, b.max.y, b.min.z},
           {b.max.x, b.max.y, b.min.z},
           {b.min.x, b.min.y, b.max.z},
           {b.max.x, b.min.y, b.max.z},
           {b.min.x, b.max.y, b.max.z},
           {b.max.x, b.max.y, b.max.z}}};
}

double camera_depth(const CameraPose& pose, const Vec3& p) {
  const Basis basis = camera_basis(pose.yaw_deg);
  const double dx = p.x - pose.position.x;
  const double dy = p.y - pose.position.y;
  return dx * basis.forward.x + dy * basis.forward.y;
}

}  // namespace

const SceneObject& SceneRecord::object_by_id(std::string_view id) const {
  for (const auto& obj : objects)
    if (obj.id == id) return obj;
  throw std::out_of_range("no object with id '" + std::string(id) + "' in scene " + scene_id);
}

bool is_sequence_length(int n) {
  return std::find(kSequenceLengths.begin(), kSequenceLengths.end(), n) !=
         kSequenceLengths.end();
}

SceneRecord load_scene(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": not valid JSON: " + e.what());
  }

  SceneRecord rec;
  const json& id = require(doc, "scene_id", origin, "$");
  if (!id.is_string() || id.get<std::string>().empty())
    fail(origin, "$.scene_id", "must be a non-empty string");
  rec.scene_id = id.get<std::string>();

  const json& objects = require(doc, "objects", origin, "$");
  if (!objects.is_array()) fail(origin, "$.objects", "must be an array");
  std::set<std::string> seen_ids;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = "$.objects[" + std::to_string(i) + "]";
    const json& obj = objects[i];
    SceneObject out;
    const json& oid = require(obj, "id", origin, path);
    if (!oid.is_string() || oid.get<std::string>().empty())
      fail(origin, path + ".id", "must be a non-empty string");
    out.id = oid.get<std::string>();
    if (!seen_ids.insert(out.id).second) fail(origin, path + ".id", "duplicate object id");
    const json& label = require(obj, "label", origin, path);
    if (!label.is_string() || label.get<std::string>().empty())
      fail(origin, path + ".label", "must be a non-empty string");
    out.label = label.get<std::string>();
    const auto b = require_number_array(require(obj, "box3", origin, path), 6, origin,
                                        path + ".box3");
    out.box = {{b[0], b[1], b[2]}, {b[3], b[4], b[5]}};
    if (!is_valid(out.box)) fail(origin, path + ".box3", "min exceeds max");
    rec.objects.push_back(std::move(out));
  }

  const json& traj = require(doc, "trajectory", origin, "$");
  if (!traj.is_array() || traj.empty()) fail(origin, "$.trajectory", "must be a non-empty array");
  double prev_t = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const std::string path = "$.trajectory[" + std::to_string(i) + "]";
    const json& p = traj[i];
    CameraPose pose;
    pose.t = require_finite_number(require(p, "t", origin, path), origin, path + ".t");
    if (i > 0 && pose.t <= prev_t) fail(origin, path + ".t", "timestamps must strictly increase");
    prev_t = pose.t;
    const auto pos = require_number_array(require(p, "pos", origin, path), 3, origin,
                                          path + ".pos");
    pose.position = {pos[0], pos[1], pos[2]};
    pose.yaw_deg =
        require_finite_number(require(p, "yaw_deg", origin, path), origin, path + ".yaw_deg");
    const auto k = require_number_array(require(p, "intrinsics", origin, path), 6, origin,
                                        path + ".intrinsics");
    pose.intr = {k[0], k[1], k[2], k[3], k[4], k[5]};
    if (k[0] <= 0 || k[1] <= 0 || k[2] <= 0 || k[3] <= 0 || k[4] <= 0 || k[5] <= 0)
      fail(origin, path + ".intrinsics", "all intrinsics must be positive");
    rec.trajectory.push_back(pose);
  }

  if (doc.contains("visibility") && !doc["visibility"].is_null()) {
    const json& vis = doc["visibility"];
    if (!vis.is_object()) fail(origin, "$.visibility", "must be an object");
    std::map<std::size_t, std::set<std::string>> table;
    for (const auto& [key, ids] : vis.items()) {
      std::size_t frame = 0;
      try {
        frame = static_cast<std::size_t>(std::stoull(key));
      } catch (...) {
        fail(origin, "$.visibility", "frame key '" + key + "' is not an index");
      }
      if (frame >= rec.trajectory.size())
        fail(origin, "$.visibility", "frame key '" + key + "' is out of range");
      if (!ids.is_array()) fail(origin, "$.visibility['" + key + "']", "must be an array");
      std::set<std::string> frame_ids;
      for (const auto& v : ids) {
        if (!v.is_string()) fail(origin, "$.visibility['" + key + "']", "ids must be strings");
        const std::string sid = v.get<std::string>();
        if (!seen_ids.count(sid))
          fail(origin, "$.visibility['" + key + "']", "unknown object id '" + sid + "'");
        frame_ids.insert(sid);
      }
      table.emplace(frame, std::move(frame_ids));
    }
    rec.visibility = std::move(table);
  }

  return rec;
}

SceneRecord load_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scene file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scene(buf.str(), path.filename().string());
}

std::string serialize_scene(const SceneRecord& rec) {
  ojson doc;
  doc["scene_id"] = rec.scene_id;
  doc["objects"] = ojson::array();
  for (const auto& obj : rec.objects) {
    ojson o;
    o["id"] = obj.id;
    o["label"] = obj.label;
    o["box3"] = {obj.box.min.x, obj.box.min.y, obj.box.min.z,
                 obj.box.max.x, obj.box.max.y, obj.box.max.z};
    doc["objects"].push_back(std::move(o));
  }
  doc["trajectory"] = ojson::array();
  for (const auto& pose : rec.trajectory) {
    ojson p;
    p["t"] = pose.t;
    p["pos"] = {pose.position.x, pose.position.y, pose.position.z};
    p["yaw_deg"] = pose.yaw_deg;
    p["intrinsics"] = {pose.intr.fx, pose.intr.fy, pose.intr.cx,
                       pose.intr.cy, pose.intr.width, pose.intr.height};
    doc["trajectory"].push_back(std::move(p));
  }
  if (rec.visibility) {
    ojson vis = ojson::object();
    for (const auto& [frame, ids] : *rec.visibility)
      vis[std::to_string(frame)] = std::vector<std::string>(ids.begin(), ids.end());
    doc["visibility"] = std::move(vis);
  }
  return doc.dump(2) + "\n";
}

std::vector<std::size_t> resample_indices(const std::vector<CameraPose>& traj,
                                          double target_fps) {
  if (!(target_fps > 0.0)) throw std::invalid_argument("target_fps must be positive");
  if (traj.empty()) throw std::invalid_argument("trajectory is empty");

  const double t0 = traj.front().t;
  const double dt = 1.0 / target_fps;
  // Number of ticks: all k with k*dt < duration + dt/2.
  const double tick_limit = (traj.back().t - t0) / dt + 0.5;

  std::vector<std::size_t> out;
  for (std::size_t k = 0; static_cast<double>(k) < tick_limit; ++k) {
    const double tick = t0 + static_cast<double>(k) * dt;
    auto it = std::lower_bound(traj.begin(), traj.end(), tick,
                               [](const CameraPose& p, double t) { return p.t < t; });
    std::size_t best;
    if (it == traj.begin()) {
      best = 0;
    } else if (it == traj.end()) {
      best = traj.size() - 1;
    } else {
      const std::size_t hi = static_cast<std::size_t>(it - traj.begin());
      const std::size_t lo = hi - 1;
      best = (tick - traj[lo].t <= traj[hi].t - tick) ? lo : hi;
    }
    out.push_back(best);
  }
  return out;
}

std::vector<CameraPose> resample_fps(const std::vector<CameraPose>& traj, double target_fps) {
  std::vector<CameraPose> out;
  for (std::size_t i : resample_indices(traj, target_fps)) out.push_back(traj[i]);
  return out;
}

std::optional<Vec2> project_point(const CameraPose& pose, const Vec3& p) {
  const Basis basis = camera_basis(pose.yaw_deg);
  const double dx = p.x - pose.position.x;
  const double dy = p.y - pose.position.y;
  const double dz = p.z - pose.position.z;
  const double depth = dx * basis.forward.x + dy * basis.forward.y;
  if (depth <= kDepthEps) return std::nullopt;
  const double lateral = dx * basis.right.x + dy * basis.right.y;
  const double u = pose.intr.fx * lateral / depth + pose.intr.cx;
  const double v = pose.intr.fy * (-dz) / depth + pose.intr.cy;  // image y grows downward
  return Vec2{u, v};
}

double projected_area_fraction(const CameraPose& pose, const Box3& box) {
  double u_min = 0, u_max = 0, v_min = 0, v_max = 0;
  bool any = false;
  for (const Vec3& corner : box_corners(box)) {
    const auto px = project_point(pose, corner);
    if (!px) continue;
    if (!any) {
      u_min = u_max = px->x;
      v_min = v_max = px->y;
      any = true;
    } else {
      u_min = std::min(u_min, px->x);
      u_max = std::max(u_max, px->x);
      v_min = std::min(v_min, px->y);
      v_max = std::max(v_max, px->y);
    }
  }
  if (!any) return 0.0;
  const double w = std::max(0.0, std::min(u_max, pose.intr.width) - std::max(u_min, 0.0));
  const double h = std::max(0.0, std::min(v_max, pose.intr.height) - std::max(v_min, 0.0));
  return (w * h) / (pose.intr.width * pose.intr.height);
}

std::set<std::string> frame_visibility(const SceneRecord& scene, std::size_t frame,
                                       double min_area_fraction) {
  if (frame >= scene.trajectory.size())
    throw std::out_of_range("frame index " + std::to_string(frame) + " out of range for scene " +
                            scene.scene_id);
  if (min_area_fraction < 0.0 || min_area_fraction > 1.0)
    throw std::invalid_argument("min_area_fraction must lie in [0, 1]");

  if (scene.visibility) {
    auto it = scene.visibility->find(frame);
    return it != scene.visibility->end() ? it->second : std::set<std::string>{};
  }

  const CameraPose& pose = scene.trajectory[frame];
  std::set<std::string> out;
  for (const auto& obj : scene.objects) {
    const Vec3 c = {(obj.box.min.x + obj.box.max.x) / 2.0, (obj.box.min.y + obj.box.max.y) / 2.0,
                    (obj.box.min.z + obj.box.max.z) / 2.0};
    if (camera_depth(pose, c) <= kDepthEps) continue;
    if (projected_area_fraction(pose, obj.box) >= min_area_fraction) out.insert(obj.id);
  }
  return out;
}

std::vector<FrameSequence> sample_sequences(const SceneRecord& scene,
                                            const std::vector<int>& lengths, int per_length,
                                            std::uint64_t seed, const SamplerConfig& cfg) {
  if (per_length < 0) throw std::invalid_argument("per_length must be >= 0");
  std::vector<int> wanted = lengths;
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  for (int n : wanted)
    if (!is_sequence_length(n))
      throw std::invalid_argument("unsupported sequence length " + std::to_string(n));

  const std::vector<std::size_t> frames = resample_indices(scene.trajectory, cfg.fps);
  for (int n : wanted)
    if (frames.size() < static_cast<std::size_t>(n))
      throw std::runtime_error("trajectory of scene " + scene.scene_id + " is too short for length " +
                               std::to_string(n) + " (" + std::to_string(frames.size()) +
                               " resampled frames)");

  // Salience cache: position -> has two or more visible objects.
  std::vector<signed char> salient(frames.size(), -1);
  const auto is_salient = [&](std::size_t pos) {
    if (salient[pos] < 0)
      salient[pos] =
          frame_visibility(scene, frames[pos], cfg.min_area_fraction).size() >= 2 ? 1 : 0;
    return salient[pos] == 1;
  };

  Rng rng(seed);
  std::vector<FrameSequence> out;
  for (int n : wanted) {
    const std::size_t starts = frames.size() - static_cast<std::size_t>(n) + 1;
    for (int k = 0; k < per_length; ++k) {
      bool found = false;
      for (int attempt = 0; attempt < cfg.max_redraws && !found; ++attempt) {
        const std::size_t start = rng.below(starts);
        bool ok = false;
        for (std::size_t pos = start; pos < start + static_cast<std::size_t>(n); ++pos)
          if (is_salient(pos)) {
            ok = true;
            break;
          }
        if (!ok) continue;
        FrameSequence seq;
        seq.scene_id = scene.scene_id;
        for (std::size_t pos = start; pos < start + static_cast<std::size_t>(n); ++pos)
          seq.frame_indices.push_back(pos);
        out.push_back(std::move(seq));
        found = true;
      }
      if (!found)
        throw std::runtime_error("no salient window of length " + std::to_string(n) +
                                 " in scene " + scene.scene_id);
    }
  }
  return out;
}

ObserverFrame observer_at(const CameraPose& pose) {
  return observer_from_yaw({pose.position.x, pose.position.y}, pose.yaw_deg);
}

LayoutMap ground_truth_layout(const SceneRecord& scene, const FrameSequence& seq,
                              const SamplerConfig& cfg) {
  if (seq.frame_indices.empty()) throw std::invalid_argument("empty frame sequence");
  const std::vector<std::size_t> frames = resample_indices(scene.trajectory, cfg.fps);
  std::set<std::string> visible;
  for (std::size_t pos : seq.frame_indices) {
    if (pos >= frames.size())
      throw std::out_of_range("sequence position " + std::to_string(pos) +
                              " out of range for scene " + scene.scene_id);
    const auto ids = frame_visibility(scene, frames[pos], cfg.min_area_fraction);
    visible.insert(ids.begin(), ids.end());
  }

  const CameraPose& first = scene.trajectory[frames[seq.frame_indices.front()]];
  const double rad = first.yaw_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  // World -> observer: rotate so the camera faces +y.
  const auto to_observer = [&](double x, double y) {
    const double dx = x - first.position.x;
    const double dy = y - first.position.y;
    return Vec2{c * dx + s * dy, -s * dx + c * dy};
  };

  LayoutMap map;
  for (const auto& obj : scene.objects) {
    if (!visible.count(obj.id)) continue;
    const Box2 bev = bev_project(obj.box);
    const std::array<Vec2, 4> corners = {to_observer(bev.min.x, bev.min.y),
                                         to_observer(bev.max.x, bev.min.y),
                                         to_observer(bev.min.x, bev.max.y),
                                         to_observer(bev.max.x, bev.max.y)};
    Box2 out = {corners[0], corners[0]};
    for (const Vec2& p : corners) {
      out.min.x = std::min(out.min.x, p.x);
      out.min.y = std::min(out.min.y, p.y);
      out.max.x = std::max(out.max.x, p.x);
      out.max.y = std::max(out.max.y, p.y);
    }
    map.objects.push_back({obj.id, obj.label, out});
  }
  return map;
}

}  // namespace bevqa
