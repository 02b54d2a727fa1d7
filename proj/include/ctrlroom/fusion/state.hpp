#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ctrlroom/geometry/pointing.hpp"
#include "ctrlroom/nlu/nlu.hpp"
#include "ctrlroom/types.hpp"

namespace ctrlroom::fusion {

using geometry::GestureEvent;

struct FusionConfig {
    Millis max_gap{4000};
    Millis grace{1500};
    double tau = 0.5;
    Millis reorder_bound{500};

    void validate() const;
};

void to_json(nlohmann::json& j, const FusionConfig& c);
void from_json(const nlohmann::json& j, FusionConfig& c);

/// Most recent first, ordered by end timestamp.
using PointedObjectHistory = std::list<GestureEvent>;

enum class SlotKind { monitor, device, time_offset };

struct SlotRequirement {
    std::vector<SlotKind> required;
    // audio and timeline commands may name (or point at) the monitor they act on
    bool optional_monitor = false;
};

const SlotRequirement& slot_requirement(Intent intent);

using SlotValue = std::variant<MonitorId, Device, double>;

struct SlotBinding {
    std::size_t slot = 0;  // index into required, or required.size() for the optional monitor
    SlotValue value;
    double confidence = 1.0;
    std::optional<std::uint64_t> gesture_id;
};

struct DialogueState {
    std::optional<nlu::NluResult> current_nlu;
    PointedObjectHistory pointed_history;
    std::map<Intent, double> intent_belief;
    std::vector<SlotBinding> slot_bindings;
    std::optional<Command> last_command;
    std::uint64_t revision = 0;
    std::uint64_t next_gesture_id = 1;
};

enum class IngestStatus { accepted, dropped_late };

/// Inserts by end timestamp. Events ending more than reorder_bound before the
/// newest event in the history are dropped. Accepted events get a fresh id.
IngestStatus ingest_gesture(DialogueState& state, GestureEvent ev, const FusionConfig& config);

/// Keeps exactly the events with end >= speech_start - max_gap.
PointedObjectHistory prune_stale(const PointedObjectHistory& history, Millis speech_start,
                                 Millis max_gap = Millis{4000});

/// Replaces any previous utterance; belief is the normalized intent confidences.
void ingest_nlu(DialogueState& state, nlu::NluResult result, const FusionConfig& config);

struct Interpretation {
    Intent intent = Intent::zoom_in;
    std::vector<SlotBinding> bindings;
    bool complete = false;           // every required slot bound
    bool awaiting_gesture = false;   // some deictic has no gesture yet
    double confidence = 0.0;
    std::optional<Command> command;  // set when complete, valid and >= tau
    std::string problem;             // why there is no command
};

/// Pure. Requires current_nlu.
Interpretation interpret(const DialogueState& state, const FusionConfig& config);

inline std::optional<Command> integrate(const DialogueState& state, const FusionConfig& config) {
    return interpret(state, config).command;
}

/// Product of the intent belief and the geometric mean of slot confidences.
double combined_confidence(double intent_confidence, const std::vector<double>& slot_confidences);

struct TickResult {
    std::optional<Command> command;
    std::vector<std::uint64_t> consumed;
    bool clarification_needed = false;
    std::string reason;
};

/// Emits at most one command per utterance. An incomplete interpretation waits
/// until speech_end + grace, then yields a clarification signal instead.
TickResult state_monitor_tick(DialogueState& state, Millis now, const FusionConfig& config);

}  // namespace ctrlroom::fusion
