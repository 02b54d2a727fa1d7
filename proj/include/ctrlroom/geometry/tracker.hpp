#pragma once

#include <deque>
#include <optional>

#include "ctrlroom/geometry/pointing.hpp"

namespace ctrlroom::geometry {

struct PointingConfig {
    SensorConfig sensor;
    ScreenLayout layout;
    DetectionParams detection;
    Millis window{1000};
    double min_prob = 0.5;

    void validate() const;
};

void to_json(nlohmann::json& j, const PointingConfig& c);
void from_json(const nlohmann::json& j, PointingConfig& c);

// Turns one skeleton (or pointer) stream into gesture events. An episode is a
// run of consecutive samples that passed detection; its window slides with
// every sample. An event is emitted once the episode spans a full window, and
// again only if the argmax object changes within the same episode.
class PointingTracker {
public:
    struct Update {
        std::optional<PointingSample> sample;
        std::optional<GestureEvent> gesture;
    };

    explicit PointingTracker(PointingConfig config);

    /// Frame in sensor coordinates. Timestamps must strictly increase.
    Update push_frame(const SkeletonFrame& sensor_frame);

    /// A sample that already passed detection (e.g. a held UI pointer).
    std::optional<GestureEvent> push_sample(const PointingSample& sample);

    void end_episode();

    PointingDistribution distribution() const;
    bool in_episode() const { return episode_start_.has_value(); }
    const PointingConfig& config() const { return config_; }

private:
    PointingConfig config_;
    std::deque<SkeletonFrame> frames_;
    std::deque<PointingSample> samples_;
    std::optional<Millis> episode_start_;
    std::optional<MonitorId> last_emitted_;
};

}  // namespace ctrlroom::geometry
