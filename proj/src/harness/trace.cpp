#include <cmath>
#include <random>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/harness/generators.hpp"

namespace ctrlroom::harness {

using geometry::Joint;
using geometry::SkeletonFrame;
using geometry::Vec3;
using nlohmann::json;
namespace jn = geometry::joint_name;

void TraceProfile::validate() const {
    if (dwell.count() <= 0) throw InvalidInputError("dwell must be positive");
    if (!(jitter >= 0.0)) throw InvalidInputError("jitter must be non-negative");
    if (!(jitter_correlation >= 0.0 && jitter_correlation < 1.0)) {
        throw InvalidInputError("jitter correlation must lie in [0, 1)");
    }
    if (!(transition_speed > 0.0)) throw InvalidInputError("transition speed must be positive");
    if (!(rate_hz > 0.0)) throw InvalidInputError("frame rate must be positive");
    if (rest.count() < 0) throw InvalidInputError("rest must be non-negative");
    if (!(user_distance > 0.0)) throw InvalidInputError("user must stand in front of the screen");
    if (!(arm_length > 0.0 && shoulder_height > 0.0)) throw InvalidInputError("bad body dimensions");
}

void to_json(json& j, const TraceProfile& p) {
    j = json{{"dwell_ms", p.dwell.count()},
             {"jitter", p.jitter},
             {"jitter_correlation", p.jitter_correlation},
             {"transition_speed", p.transition_speed},
             {"rest_ms", p.rest.count()},
             {"rate_hz", p.rate_hz},
             {"seed", p.seed},
             {"user_distance", p.user_distance},
             {"lateral_position", p.lateral_position},
             {"shoulder_height", p.shoulder_height},
             {"arm_length", p.arm_length}};
}

void from_json(const json& j, TraceProfile& p) {
    p = TraceProfile{};
    p.dwell = Millis{j.value("dwell_ms", p.dwell.count())};
    p.jitter = j.value("jitter", p.jitter);
    p.jitter_correlation = j.value("jitter_correlation", p.jitter_correlation);
    p.transition_speed = j.value("transition_speed", p.transition_speed);
    p.rest = Millis{j.value("rest_ms", p.rest.count())};
    p.rate_hz = j.value("rate_hz", p.rate_hz);
    p.seed = j.value("seed", p.seed);
    p.user_distance = j.value("user_distance", p.user_distance);
    p.lateral_position = j.value("lateral_position", p.lateral_position);
    p.shoulder_height = j.value("shoulder_height", p.shoulder_height);
    p.arm_length = j.value("arm_length", p.arm_length);
    p.validate();
}

namespace {

struct Body {
    Vec3 spine, shoulder_l, shoulder_r, hand_l_rest, hand_r_rest;
};

Body make_body(const TraceProfile& p) {
    const double x = p.lateral_position, z = p.user_distance, sh = p.shoulder_height;
    Body b;
    b.spine = {x, sh - 0.30, z};
    b.shoulder_l = {x - 0.18, sh, z};
    b.shoulder_r = {x + 0.18, sh, z};
    // Arms hang well below the detection band.
    b.hand_l_rest = {x - 0.20, sh - 0.65, z + 0.02};
    b.hand_r_rest = {x + 0.21, sh - 0.65, z + 0.02};
    return b;
}

Vec3 aim_hand(const Body& b, const Vec3& aim, double arm) {
    return b.shoulder_r + arm * (aim - b.shoulder_r).normalized();
}

// One leg of the script: hold or move the right hand over [t_begin, t_end].
struct Leg {
    Millis t_begin, t_end;
    Vec3 from, to;
    std::optional<MonitorId> dwell_target;
};

}  // namespace

SkeletonTrace generate_skeleton_trace(std::span<const MonitorId> targets, const TraceProfile& profile,
                                      const geometry::SensorConfig& sensor,
                                      const geometry::ScreenLayout& layout, Millis t0) {
    profile.validate();
    sensor.validate();
    layout.validate();
    for (auto m : targets) {
        if (!is_valid_monitor(m, layout.monitor_count())) {
            throw InvalidInputError("trace target " + std::to_string(m.value) + " is not on the grid");
        }
    }

    const Body body = make_body(profile);
    std::vector<Leg> legs;
    Millis t = t0;
    auto hold = [&](const Vec3& at, Millis d, std::optional<MonitorId> target) {
        legs.push_back({t, t + d, at, at, target});
        t += d;
    };
    auto move = [&](const Vec3& from, const Vec3& to) {
        const auto d = Millis{static_cast<std::int64_t>(
            std::ceil((to - from).norm() / profile.transition_speed * 1000.0))};
        legs.push_back({t, t + d, from, to, std::nullopt});
        t += d;
    };

    hold(body.hand_r_rest, profile.rest, std::nullopt);
    Vec3 hand = body.hand_r_rest;
    for (auto m : targets) {
        const Vec3 pose = aim_hand(body, layout.center(m), profile.arm_length);
        move(hand, pose);
        hold(pose, profile.dwell, m);
        hand = pose;
    }
    move(hand, body.hand_r_rest);
    hold(body.hand_r_rest, profile.rest, std::nullopt);

    SkeletonTrace trace;
    for (const auto& leg : legs) {
        if (leg.dwell_target) trace.dwells.push_back({*leg.dwell_target, leg.t_begin, leg.t_end});
    }

    std::mt19937_64 rng(profile.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double a = profile.jitter_correlation;
    const double innovation = profile.jitter * std::sqrt(1.0 - a * a);
    double ox = profile.jitter * gauss(rng), oy = profile.jitter * gauss(rng);

    const double period_ms = 1000.0 / profile.rate_hz;
    std::size_t leg_i = 0;
    for (std::int64_t k = 0;; ++k) {
        const Millis ft = t0 + Millis{static_cast<std::int64_t>(std::llround(k * period_ms))};
        if (ft > t) break;
        while (leg_i + 1 < legs.size() && ft > legs[leg_i].t_end) ++leg_i;
        const Leg& leg = legs[leg_i];

        ox = a * ox + innovation * gauss(rng);
        oy = a * oy + innovation * gauss(rng);

        Vec3 hand_r;
        if (leg.dwell_target) {
            const Vec3 aim = layout.center(*leg.dwell_target) + Vec3(ox, oy, 0.0);
            hand_r = aim_hand(body, aim, profile.arm_length);
        } else {
            const double span = static_cast<double>((leg.t_end - leg.t_begin).count());
            const double s = span > 0.0 ? static_cast<double>((ft - leg.t_begin).count()) / span : 1.0;
            hand_r = leg.from + std::clamp(s, 0.0, 1.0) * (leg.to - leg.from);
        }

        SkeletonFrame env;
        env.timestamp = ft;
        env.joints.emplace(jn::spine_mid, Joint{body.spine});
        env.joints.emplace(jn::shoulder_left, Joint{body.shoulder_l});
        env.joints.emplace(jn::shoulder_right, Joint{body.shoulder_r});
        env.joints.emplace(jn::hand_left, Joint{body.hand_l_rest});
        env.joints.emplace(jn::hand_right, Joint{hand_r});
        trace.frames.push_back(geometry::to_sensor_frame(env, sensor));
    }
    return trace;
}

}  // namespace ctrlroom::harness
