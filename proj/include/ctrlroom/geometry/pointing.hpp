#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <json.hpp>

#include "ctrlroom/types.hpp"

namespace ctrlroom::geometry {

// Environment frame: right-handed, x to the right when facing the screen, y up,
// z toward the user. The screen is the plane z = 0 with its bottom edge centered
// on the origin.
using Vec3 = Eigen::Vector3d;

enum class TrackingState { tracked, inferred, not_tracked };

struct Joint {
    Vec3 position = Vec3::Zero();
    TrackingState state = TrackingState::tracked;
};

namespace joint_name {
inline constexpr std::string_view spine_mid = "SpineMid";
inline constexpr std::string_view shoulder_left = "ShoulderLeft";
inline constexpr std::string_view shoulder_right = "ShoulderRight";
inline constexpr std::string_view hand_left = "HandLeft";
inline constexpr std::string_view hand_right = "HandRight";
}  // namespace joint_name

inline constexpr std::array<std::string_view, 5> kRequiredJoints = {
    joint_name::spine_mid,  joint_name::shoulder_left, joint_name::shoulder_right,
    joint_name::hand_left, joint_name::hand_right,
};

struct SkeletonFrame {
    Millis timestamp{0};
    std::map<std::string, Joint, std::less<>> joints;

    /// Throws InvalidFrameError when the joint is absent.
    const Joint& at(std::string_view name) const;
};

/// Throws InvalidFrameError if any required joint is missing.
void require_joints(const SkeletonFrame& frame);

/// True when every required joint is present and not marked not_tracked.
bool fully_tracked(const SkeletonFrame& frame);

// Sensor pose relative to the environment origin. Positive tilt pitches the
// sensor upward. Sensor coordinates are rotated by -tilt about x, then shifted
// by (lateral_offset, sensor_height, user_distance); user_distance is the depth
// of the sensor origin in front of the screen plane.
struct SensorConfig {
    double tilt = 0.0;
    double sensor_height = 0.0;
    double user_distance = 0.0;
    double lateral_offset = 0.0;

    void validate() const;
};

struct CellBounds {
    double x_min, x_max, y_min, y_max;
};

struct ScreenLayout {
    double width = 4.4;
    double height = 2.5;
    int rows = kGridRows;
    int cols = kGridCols;

    int monitor_count() const { return rows * cols; }
    double cell_width() const { return width / cols; }
    double cell_height() const { return height / rows; }

    /// Monitor containing the screen-plane point, or nullopt outside the screen.
    std::optional<MonitorId> cell_at(double x, double y) const;
    CellBounds bounds(MonitorId m) const;
    Vec3 center(MonitorId m) const;

    void validate() const;
};

// Height band is relative to SpineMid.y; speed is averaged over the frames
// inside the lookback interval.
struct DetectionParams {
    double band_low = -0.2;
    double band_high = 0.8;
    double speed_max = 0.8;  // m/s
    Millis lookback{200};
};

enum class Side { left, right };

/// The hand farther from SpineMid in the horizontal (x, z) plane; ties go right.
Side active_hand(const SkeletonFrame& frame);

struct PointingSample {
    Millis timestamp{0};
    Vec3 ray_origin = Vec3::Zero();
    Vec3 ray_direction = Vec3::UnitZ();
    std::optional<MonitorId> hit;
};

struct PointingDistribution {
    Millis window_start{0};
    Millis window_end{0};
    std::map<MonitorId, double> probs;

    bool empty() const { return probs.empty(); }
};

struct GestureEvent {
    MonitorId object;
    double confidence = 0.0;
    Millis start{0};
    Millis end{0};
    // Assigned by the fusion engine at ingestion; 0 means unassigned.
    std::uint64_t id = 0;
};

SkeletonFrame transform_skeleton(const SkeletonFrame& frame, const SensorConfig& config);

/// Inverse of transform_skeleton; used to synthesize sensor-space recordings.
SkeletonFrame to_sensor_frame(const SkeletonFrame& env_frame, const SensorConfig& config);

/// Pointing-pose test on the newest frame using the newest frame's active hand.
/// Throws InsufficientDataError with fewer than two frames.
bool detect_pointing(std::span<const SkeletonFrame> recent_frames, const DetectionParams& params);

/// Mean speed of one hand over frames inside the lookback ending at the newest frame.
double mean_hand_speed(std::span<const SkeletonFrame> recent_frames, Side hand, Millis lookback);

/// Ray from shoulder through hand; throws DegenerateRayError if they coincide.
PointingSample cast_ray(Millis timestamp, const Vec3& shoulder, const Vec3& hand,
                        const ScreenLayout& layout);

/// Uses the frame's active arm. Returns nullopt if that arm is not tracked.
std::optional<PointingSample> cast_ray(const SkeletonFrame& frame, const ScreenLayout& layout);

PointingDistribution window_distribution(std::span<const PointingSample> samples, Millis window);

std::optional<GestureEvent> emit_gesture_event(const PointingDistribution& dist, double min_prob);

void to_json(nlohmann::json& j, const SkeletonFrame& f);
void from_json(const nlohmann::json& j, SkeletonFrame& f);
void to_json(nlohmann::json& j, const PointingDistribution& d);
void from_json(const nlohmann::json& j, PointingDistribution& d);
void to_json(nlohmann::json& j, const GestureEvent& e);
void from_json(const nlohmann::json& j, GestureEvent& e);

}  // namespace ctrlroom::geometry
