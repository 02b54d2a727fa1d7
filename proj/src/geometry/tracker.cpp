#include "ctrlroom/geometry/tracker.hpp"

#include <vector>

#include "ctrlroom/errors.hpp"

namespace ctrlroom::geometry {

using nlohmann::json;

void PointingConfig::validate() const {
    sensor.validate();
    layout.validate();
    if (detection.band_low > detection.band_high) {
        throw InvalidInputError("detection band_low exceeds band_high");
    }
    if (!(detection.speed_max > 0.0)) throw InvalidInputError("speed_max must be positive");
    if (detection.lookback <= Millis{0}) throw InvalidInputError("lookback must be positive");
    if (window <= Millis{0}) throw InvalidInputError("window_ms must be positive");
    if (!(min_prob >= 0.0 && min_prob <= 1.0)) throw InvalidInputError("min_prob must be in [0,1]");
}

void to_json(json& j, const PointingConfig& c) {
    j = json{
        {"tilt", c.sensor.tilt},
        {"sensor_height", c.sensor.sensor_height},
        {"user_distance", c.sensor.user_distance},
        {"lateral_offset", c.sensor.lateral_offset},
        {"screen",
         {{"width", c.layout.width},
          {"height", c.layout.height},
          {"rows", c.layout.rows},
          {"cols", c.layout.cols}}},
        {"detection",
         {{"band_low", c.detection.band_low},
          {"band_high", c.detection.band_high},
          {"speed_max", c.detection.speed_max},
          {"lookback_ms", c.detection.lookback.count()}}},
        {"window_ms", c.window.count()},
        {"min_prob", c.min_prob},
    };
}

// Missing keys keep their defaults so partial config files are accepted.
void from_json(const json& j, PointingConfig& c) {
    c.sensor.tilt = j.value("tilt", c.sensor.tilt);
    c.sensor.sensor_height = j.value("sensor_height", c.sensor.sensor_height);
    c.sensor.user_distance = j.value("user_distance", c.sensor.user_distance);
    c.sensor.lateral_offset = j.value("lateral_offset", c.sensor.lateral_offset);
    if (auto s = j.find("screen"); s != j.end()) {
        c.layout.width = s->value("width", c.layout.width);
        c.layout.height = s->value("height", c.layout.height);
        c.layout.rows = s->value("rows", c.layout.rows);
        c.layout.cols = s->value("cols", c.layout.cols);
    }
    if (auto d = j.find("detection"); d != j.end()) {
        c.detection.band_low = d->value("band_low", c.detection.band_low);
        c.detection.band_high = d->value("band_high", c.detection.band_high);
        c.detection.speed_max = d->value("speed_max", c.detection.speed_max);
        c.detection.lookback = Millis{d->value("lookback_ms", c.detection.lookback.count())};
    }
    c.window = Millis{j.value("window_ms", c.window.count())};
    c.min_prob = j.value("min_prob", c.min_prob);
    c.validate();
}

PointingTracker::PointingTracker(PointingConfig config) : config_(std::move(config)) {
    config_.validate();
}

PointingTracker::Update PointingTracker::push_frame(const SkeletonFrame& sensor_frame) {
    if (!frames_.empty() && sensor_frame.timestamp <= frames_.back().timestamp) {
        throw InvalidFrameError("skeleton timestamps must strictly increase");
    }
    Update update;
    if (!fully_tracked(sensor_frame)) {
        // An untracked body gives no usable pose; restart history from scratch.
        frames_.clear();
        end_episode();
        return update;
    }
    frames_.push_back(transform_skeleton(sensor_frame, config_.sensor));

    // Keep one frame older than the lookback so the speed estimate spans it.
    const Millis horizon = frames_.back().timestamp - config_.detection.lookback;
    while (frames_.size() > 2 && frames_[1].timestamp < horizon) frames_.pop_front();

    if (frames_.size() < 2) return update;
    const std::vector<SkeletonFrame> recent(frames_.begin(), frames_.end());
    if (!detect_pointing(recent, config_.detection)) {
        end_episode();
        return update;
    }
    update.sample = cast_ray(frames_.back(), config_.layout);
    if (update.sample) update.gesture = push_sample(*update.sample);
    return update;
}

std::optional<GestureEvent> PointingTracker::push_sample(const PointingSample& sample) {
    if (!samples_.empty() && sample.timestamp <= samples_.back().timestamp) {
        throw InvalidInputError("pointing samples must strictly increase in time");
    }
    if (!episode_start_) episode_start_ = sample.timestamp;
    samples_.push_back(sample);
    while (!samples_.empty() && samples_.front().timestamp < sample.timestamp - config_.window) {
        samples_.pop_front();
    }
    if (sample.timestamp - *episode_start_ < config_.window) return std::nullopt;

    auto event = emit_gesture_event(distribution(), config_.min_prob);
    if (!event || (last_emitted_ && *last_emitted_ == event->object)) return std::nullopt;
    last_emitted_ = event->object;
    return event;
}

void PointingTracker::end_episode() {
    samples_.clear();
    episode_start_.reset();
    last_emitted_.reset();
}

PointingDistribution PointingTracker::distribution() const {
    const std::vector<PointingSample> window(samples_.begin(), samples_.end());
    return window_distribution(window, config_.window);
}

}  // namespace ctrlroom::geometry
