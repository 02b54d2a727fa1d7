#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "ctrlroom/types.hpp"

namespace ctrlroom::environment {

namespace view {
struct Matrix {
    bool operator==(const Matrix&) const = default;
};
struct Zoomed {
    MonitorId monitor;
    bool operator==(const Zoomed&) const = default;
};
struct Split {
    MonitorId left;
    MonitorId right;
    bool operator==(const Split&) const = default;
};
}  // namespace view

using View = std::variant<view::Matrix, view::Zoomed, view::Split>;

namespace audio {
struct Off {
    bool operator==(const Off&) const = default;
};
struct Routed {
    MonitorId monitor;
    Device device = Device::headset;
    bool operator==(const Routed&) const = default;
};
}  // namespace audio

using Audio = std::variant<audio::Off, audio::Routed>;

// Cell-indexed state of the 3x3 wall. assignment[c] is the camera shown in
// cell c+1; playhead[c] is that cell's video offset in seconds.
struct RoomState {
    View view = view::Matrix{};
    Audio audio = audio::Off{};
    std::array<double, kMonitorCount> playhead{};
    std::array<int, kMonitorCount> assignment{1, 2, 3, 4, 5, 6, 7, 8, 9};

    double playhead_of(MonitorId m) const { return playhead.at(m.value - 1); }
    int camera_at(MonitorId m) const { return assignment.at(m.value - 1); }

    bool operator==(const RoomState&) const = default;
};

enum class RejectReason { already_matrix, swap_outside_matrix, no_focus_monitor, invalid_command };

std::string_view to_string(RejectReason r);

struct Rejection {
    RejectReason reason = RejectReason::invalid_command;
    std::string detail;
};

using ApplyResult = std::variant<RoomState, Rejection>;

/// Total: every (state, action) pair yields a new state or a reasoned rejection.
ApplyResult apply(const RoomState& state, const Action& action);

inline ApplyResult apply(const RoomState& state, const Command& cmd) {
    return apply(state, cmd.action);
}

/// Immutable copy of a room state, safe to hand to observers.
class RoomSnapshot {
public:
    explicit RoomSnapshot(RoomState state) : state_(std::move(state)) {}

    const RoomState& state() const { return state_; }
    const View& view() const { return state_.view; }
    const Audio& audio() const { return state_.audio; }

    bool operator==(const RoomSnapshot&) const = default;

private:
    RoomState state_;
};

RoomSnapshot snapshot(const RoomState& state);

/// True when the assignment is a permutation of camera ids 1..9.
bool is_permutation(const RoomState& state);

void to_json(nlohmann::json& j, const RoomState& s);
void from_json(const nlohmann::json& j, RoomState& s);

}  // namespace ctrlroom::environment
