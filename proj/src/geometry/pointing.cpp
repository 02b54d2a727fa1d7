#include "ctrlroom/geometry/pointing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "ctrlroom/errors.hpp"

namespace ctrlroom::geometry {

using nlohmann::json;

namespace {

Eigen::Matrix3d sensor_rotation(double tilt) {
    return Eigen::AngleAxisd(-tilt, Vec3::UnitX()).toRotationMatrix();
}

Vec3 sensor_translation(const SensorConfig& c) {
    return {c.lateral_offset, c.sensor_height, c.user_distance};
}

std::string_view hand_joint(Side s) {
    return s == Side::left ? joint_name::hand_left : joint_name::hand_right;
}

std::string_view shoulder_joint(Side s) {
    return s == Side::left ? joint_name::shoulder_left : joint_name::shoulder_right;
}

double horizontal_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x();
    const double dz = a.z() - b.z();
    return std::hypot(dx, dz);
}

std::string_view state_name(TrackingState s) {
    switch (s) {
        case TrackingState::tracked: return "tracked";
        case TrackingState::inferred: return "inferred";
        case TrackingState::not_tracked: return "not_tracked";
    }
    return "tracked";
}

TrackingState parse_state(const std::string& s) {
    if (s == "tracked") return TrackingState::tracked;
    if (s == "inferred") return TrackingState::inferred;
    if (s == "not_tracked") return TrackingState::not_tracked;
    throw InvalidFrameError("unknown tracking state '" + s + "'");
}

}  // namespace

const Joint& SkeletonFrame::at(std::string_view name) const {
    auto it = joints.find(name);
    if (it == joints.end()) {
        throw InvalidFrameError("frame at t=" + std::to_string(timestamp.count()) +
                                " ms is missing joint " + std::string(name));
    }
    return it->second;
}

void require_joints(const SkeletonFrame& frame) {
    for (auto name : kRequiredJoints) (void)frame.at(name);
}

bool fully_tracked(const SkeletonFrame& frame) {
    for (auto name : kRequiredJoints) {
        auto it = frame.joints.find(name);
        if (it == frame.joints.end() || it->second.state == TrackingState::not_tracked) {
            return false;
        }
    }
    return true;
}

void SensorConfig::validate() const {
    if (!(std::abs(tilt) < std::numbers::pi / 2)) {
        throw InvalidInputError("sensor tilt must lie strictly inside (-pi/2, pi/2)");
    }
    if (sensor_height < 0.0) throw InvalidInputError("sensor height must be non-negative");
}

std::optional<MonitorId> ScreenLayout::cell_at(double x, double y) const {
    const double half = width / 2.0;
    if (!(x >= -half && x <= half && y >= 0.0 && y <= height)) return std::nullopt;
    int col = static_cast<int>(std::floor((x + half) / cell_width()));
    int row = static_cast<int>(std::floor((height - y) / cell_height()));
    col = std::clamp(col, 0, cols - 1);
    row = std::clamp(row, 0, rows - 1);
    return MonitorId{row * cols + col + 1};
}

CellBounds ScreenLayout::bounds(MonitorId m) const {
    if (!is_valid_monitor(m, monitor_count())) {
        throw OutOfGridError("monitor " + std::to_string(m.value) + " is not in the layout");
    }
    const int row = (m.value - 1) / cols;
    const int col = (m.value - 1) % cols;
    const double x0 = -width / 2.0 + col * cell_width();
    const double y1 = height - row * cell_height();
    return {x0, x0 + cell_width(), y1 - cell_height(), y1};
}

Vec3 ScreenLayout::center(MonitorId m) const {
    const auto b = bounds(m);
    return {(b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0, 0.0};
}

void ScreenLayout::validate() const {
    if (!(width > 0.0 && height > 0.0)) throw InvalidInputError("screen size must be positive");
    if (rows < 1 || cols < 1) throw InvalidInputError("grid needs at least one row and column");
}

Side active_hand(const SkeletonFrame& frame) {
    const Vec3& spine = frame.at(joint_name::spine_mid).position;
    const double left = horizontal_distance(frame.at(joint_name::hand_left).position, spine);
    const double right = horizontal_distance(frame.at(joint_name::hand_right).position, spine);
    return left > right ? Side::left : Side::right;
}

SkeletonFrame transform_skeleton(const SkeletonFrame& frame, const SensorConfig& config) {
    require_joints(frame);
    const Eigen::Matrix3d rot = sensor_rotation(config.tilt);
    const Vec3 shift = sensor_translation(config);
    SkeletonFrame out = frame;
    for (auto& [name, j] : out.joints) j.position = rot * j.position + shift;
    return out;
}

SkeletonFrame to_sensor_frame(const SkeletonFrame& env_frame, const SensorConfig& config) {
    const Eigen::Matrix3d rot_inv = sensor_rotation(config.tilt).transpose();
    const Vec3 shift = sensor_translation(config);
    SkeletonFrame out = env_frame;
    for (auto& [name, j] : out.joints) j.position = rot_inv * (j.position - shift);
    return out;
}

double mean_hand_speed(std::span<const SkeletonFrame> frames, Side hand, Millis lookback) {
    if (frames.size() < 2) {
        throw InsufficientDataError("speed needs at least two frames");
    }
    const Millis newest = frames.back().timestamp;
    std::size_t first = frames.size() - 2;
    while (first > 0 && frames[first - 1].timestamp >= newest - lookback) --first;

    double path = 0.0;
    for (std::size_t i = first + 1; i < frames.size(); ++i) {
        if (frames[i].timestamp <= frames[i - 1].timestamp) {
            throw InvalidFrameError("frame timestamps must strictly increase");
        }
        path += (frames[i].at(hand_joint(hand)).position -
                 frames[i - 1].at(hand_joint(hand)).position)
                    .norm();
    }
    return path / to_seconds(newest - frames[first].timestamp);
}

bool detect_pointing(std::span<const SkeletonFrame> recent_frames, const DetectionParams& params) {
    if (recent_frames.size() < 2) {
        throw InsufficientDataError("pointing detection needs at least two frames");
    }
    const SkeletonFrame& newest = recent_frames.back();
    const Side hand = active_hand(newest);
    const double rel_height =
        newest.at(hand_joint(hand)).position.y() - newest.at(joint_name::spine_mid).position.y();
    if (rel_height < params.band_low || rel_height > params.band_high) return false;
    return mean_hand_speed(recent_frames, hand, params.lookback) <= params.speed_max;
}

PointingSample cast_ray(Millis timestamp, const Vec3& shoulder, const Vec3& hand,
                        const ScreenLayout& layout) {
    const Vec3 arm = hand - shoulder;
    const double len = arm.norm();
    if (!(len > 1e-12)) throw DegenerateRayError("shoulder and hand coincide");

    PointingSample s;
    s.timestamp = timestamp;
    s.ray_origin = shoulder;
    s.ray_direction = arm / len;
    if (s.ray_direction.z() < 0.0) {
        const double t = -shoulder.z() / s.ray_direction.z();
        if (t > 0.0) {
            const Vec3 p = shoulder + t * s.ray_direction;
            s.hit = layout.cell_at(p.x(), p.y());
        }
    }
    return s;
}

std::optional<PointingSample> cast_ray(const SkeletonFrame& frame, const ScreenLayout& layout) {
    const Side side = active_hand(frame);
    const Joint& shoulder = frame.at(shoulder_joint(side));
    const Joint& hand = frame.at(hand_joint(side));
    if (shoulder.state == TrackingState::not_tracked || hand.state == TrackingState::not_tracked) {
        return std::nullopt;
    }
    return cast_ray(frame.timestamp, shoulder.position, hand.position, layout);
}

PointingDistribution window_distribution(std::span<const PointingSample> samples, Millis window) {
    PointingDistribution dist;
    if (samples.empty()) return dist;
    dist.window_end = samples.back().timestamp;
    dist.window_start = dist.window_end - window;

    std::map<MonitorId, int> counts;
    int hits = 0;
    for (const auto& s : samples) {
        if (s.timestamp < dist.window_start || s.timestamp > dist.window_end || !s.hit) continue;
        ++counts[*s.hit];
        ++hits;
    }
    for (const auto& [m, n] : counts) dist.probs[m] = static_cast<double>(n) / hits;
    return dist;
}

std::optional<GestureEvent> emit_gesture_event(const PointingDistribution& dist, double min_prob) {
    std::optional<std::pair<MonitorId, double>> best;
    for (const auto& [m, p] : dist.probs) {
        if (!best || p > best->second) best = {m, p};
    }
    if (!best || best->second < min_prob) return std::nullopt;
    return GestureEvent{best->first, best->second, dist.window_start, dist.window_end};
}

void to_json(json& j, const SkeletonFrame& f) {
    j = json::object();
    j["t_ms"] = f.timestamp.count();
    json joints = json::object();
    json states = json::object();
    for (const auto& [name, jt] : f.joints) {
        joints[name] = {jt.position.x(), jt.position.y(), jt.position.z()};
        if (jt.state != TrackingState::tracked) states[name] = std::string(state_name(jt.state));
    }
    j["joints"] = std::move(joints);
    if (!states.empty()) j["state"] = std::move(states);
}

void from_json(const json& j, SkeletonFrame& f) {
    f.timestamp = Millis{j.at("t_ms").get<std::int64_t>()};
    f.joints.clear();
    for (const auto& [name, value] : j.at("joints").items()) {
        if (!value.is_array() || value.size() != 3) {
            throw InvalidFrameError("joint " + name + " must be an [x, y, z] triple");
        }
        f.joints[name] =
            Joint{Vec3{value[0].get<double>(), value[1].get<double>(), value[2].get<double>()},
                  TrackingState::tracked};
    }
    if (auto it = j.find("state"); it != j.end()) {
        for (const auto& [name, value] : it->items()) {
            auto jt = f.joints.find(name);
            if (jt == f.joints.end()) {
                throw InvalidFrameError("tracking state given for unknown joint " + name);
            }
            jt->second.state = parse_state(value.get<std::string>());
        }
    }
}

void to_json(json& j, const PointingDistribution& d) {
    j = json::object();
    j["window_start"] = d.window_start.count();
    j["window_end"] = d.window_end.count();
    json probs = json::object();
    for (const auto& [m, p] : d.probs) probs[std::to_string(m.value)] = p;
    j["probs"] = std::move(probs);
}

void from_json(const json& j, PointingDistribution& d) {
    d.window_start = Millis{j.at("window_start").get<std::int64_t>()};
    d.window_end = Millis{j.at("window_end").get<std::int64_t>()};
    d.probs.clear();
    for (const auto& [key, value] : j.at("probs").items()) {
        d.probs[MonitorId{std::stoi(key)}] = value.get<double>();
    }
}

void to_json(json& j, const GestureEvent& e) {
    j = json{{"object", e.object},
             {"confidence", e.confidence},
             {"start", e.start.count()},
             {"end", e.end.count()}};
}

void from_json(const json& j, GestureEvent& e) {
    e.object = j.at("object").get<MonitorId>();
    e.confidence = j.at("confidence").get<double>();
    e.start = Millis{j.at("start").get<std::int64_t>()};
    e.end = Millis{j.at("end").get<std::int64_t>()};
    if (e.start > e.end) throw InvalidInputError("gesture start must not exceed its end");
    if (!(e.confidence >= 0.0 && e.confidence <= 1.0)) {
        throw InvalidInputError("gesture confidence must lie in [0, 1]");
    }
}

}  // namespace ctrlroom::geometry
