#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctrlroom/geometry/pointing.hpp"
#include "ctrlroom/nlu/nlu.hpp"

namespace ctrlroom::harness {

// A synthetic operator: stands user_distance in front of the screen, raises the
// right arm from a rest pose, dwells on each target and lowers the arm again.
// Jitter is a slowly drifting aim offset on the screen plane (first-order
// autoregressive, stationary standard deviation `jitter` metres per axis), so
// a steady hand stays under the speed filter while the aim wanders.
struct TraceProfile {
    Millis dwell{1500};
    double jitter = 0.0;
    double jitter_correlation = 0.95;  // per-frame AR(1) coefficient
    double transition_speed = 1.5;     // m/s, hand speed between poses
    Millis rest{300};
    double rate_hz = 30.0;
    std::uint64_t seed = 1;
    double user_distance = 3.0;
    double lateral_position = 0.0;
    double shoulder_height = 1.45;
    double arm_length = 0.6;

    void validate() const;
};

void to_json(nlohmann::json& j, const TraceProfile& p);
void from_json(const nlohmann::json& j, TraceProfile& p);

struct DwellSegment {
    MonitorId target;
    Millis start{0};  // hand reaches the pointing pose
    Millis end{0};    // hand starts to leave it
};

struct SkeletonTrace {
    std::vector<geometry::SkeletonFrame> frames;  // sensor coordinates
    std::vector<DwellSegment> dwells;
};

/// Deterministic for a given profile (including seed). Throws InvalidInputError
/// on an invalid target or profile.
SkeletonTrace generate_skeleton_trace(std::span<const MonitorId> targets, const TraceProfile& profile,
                                      const geometry::SensorConfig& sensor,
                                      const geometry::ScreenLayout& layout, Millis t0 = Millis{0});

inline SkeletonTrace generate_skeleton_trace(MonitorId target, const TraceProfile& profile,
                                             const geometry::SensorConfig& sensor,
                                             const geometry::ScreenLayout& layout,
                                             Millis t0 = Millis{0}) {
    return generate_skeleton_trace(std::span<const MonitorId>(&target, 1), profile, sensor, layout, t0);
}

// Template grammar standing in for elicited questionnaire data. Each intent has
// paraphrase templates with placeholders:
//   {mon}   a monitor reference (explicit or deictic)
//   {pair}  two monitors ("these two", "{mon} and {mon}")
//   {dev}   an audio device
//   {time}  a time offset
struct CorpusGrammar {
    std::vector<std::pair<Intent, std::vector<std::string>>> templates;
    std::vector<std::string> devices;
    std::vector<std::pair<std::string, double>> times;
};

const CorpusGrammar& default_grammar();

/// Every monitor reference form the grammar can produce for a monitor.
std::vector<std::string> monitor_reference_forms(MonitorId m);

/// The first eight utterances cover one intent each; reference forms rotate so
/// every form appears once n is large enough. Requires n >= 8.
std::vector<nlu::LabeledUtterance> generate_corpus(const CorpusGrammar& grammar, std::size_t n,
                                                   std::uint64_t seed);

inline std::vector<nlu::LabeledUtterance> generate_corpus(std::size_t n, std::uint64_t seed) {
    return generate_corpus(default_grammar(), n, seed);
}

}  // namespace ctrlroom::harness
