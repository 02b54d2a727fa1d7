#include "ctrlroom/environment/room.hpp"

#include <algorithm>

#include "ctrlroom/errors.hpp"

namespace ctrlroom::environment {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Rejection reject(RejectReason r, std::string detail) { return Rejection{r, std::move(detail)}; }

// Zoomed target first, then the monitor named in the command.
std::optional<MonitorId> focus_monitor(const RoomState& s, const std::optional<MonitorId>& named) {
    if (const auto* z = std::get_if<view::Zoomed>(&s.view)) return z->monitor;
    return named;
}

std::size_t cell(MonitorId m) { return static_cast<std::size_t>(m.value - 1); }

ApplyResult seek(RoomState s, const std::optional<MonitorId>& named, double delta) {
    auto focus = focus_monitor(s, named);
    if (!focus) return reject(RejectReason::no_focus_monitor, "no monitor to seek on");
    auto& p = s.playhead[cell(*focus)];
    p = std::max(0.0, p + delta);
    return s;
}

}  // namespace

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::already_matrix: return "already-matrix";
        case RejectReason::swap_outside_matrix: return "swap-outside-matrix";
        case RejectReason::no_focus_monitor: return "no-focus-monitor";
        case RejectReason::invalid_command: return "invalid-command";
    }
    return "invalid-command";
}

ApplyResult apply(const RoomState& state, const Action& act) {
    try {
        validate(act);
    } catch (const InvalidInputError& e) {
        return reject(RejectReason::invalid_command, e.what());
    }
    RoomState next = state;
    return std::visit(
        overloaded{
            [&](const action::ZoomIn& z) -> ApplyResult {
                next.view = view::Zoomed{z.monitor};
                return next;
            },
            [&](const action::ZoomOut&) -> ApplyResult {
                if (std::holds_alternative<view::Matrix>(state.view)) {
                    return reject(RejectReason::already_matrix, "already in matrix view");
                }
                next.view = view::Matrix{};
                return next;
            },
            [&](const action::SplitScreen& s) -> ApplyResult {
                next.view = view::Split{s.left, s.right};
                return next;
            },
            [&](const action::Swap& s) -> ApplyResult {
                if (!std::holds_alternative<view::Matrix>(state.view)) {
                    return reject(RejectReason::swap_outside_matrix, "swap needs the matrix view");
                }
                // The video moves with its timeline.
                std::swap(next.assignment[cell(s.first)], next.assignment[cell(s.second)]);
                std::swap(next.playhead[cell(s.first)], next.playhead[cell(s.second)]);
                return next;
            },
            [&](const action::AudioToDevice& d) -> ApplyResult {
                auto focus = focus_monitor(state, d.monitor);
                if (!focus) return reject(RejectReason::no_focus_monitor, "no monitor to take audio from");
                next.audio = audio::Routed{*focus, d.device};
                return next;
            },
            [&](const action::AudioOff&) -> ApplyResult {
                next.audio = audio::Off{};
                return next;
            },
            [&](const action::Rewind& r) { return seek(next, r.monitor, -r.seconds); },
            [&](const action::Forward& f) { return seek(next, f.monitor, f.seconds); },
        },
        act);
}

RoomSnapshot snapshot(const RoomState& state) { return RoomSnapshot(state); }

bool is_permutation(const RoomState& state) {
    auto sorted = state.assignment;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < kMonitorCount; ++i) {
        if (sorted[static_cast<std::size_t>(i)] != i + 1) return false;
    }
    return true;
}

void to_json(json& j, const RoomState& s) {
    json v = std::visit(overloaded{
                            [](const view::Matrix&) { return json{{"mode", "matrix"}}; },
                            [](const view::Zoomed& z) {
                                return json{{"mode", "zoomed"}, {"monitor", z.monitor}};
                            },
                            [](const view::Split& sp) {
                                return json{{"mode", "split"}, {"monitors", {sp.left, sp.right}}};
                            },
                        },
                        s.view);
    json a = std::visit(overloaded{
                            [](const audio::Off&) { return json{{"mode", "off"}}; },
                            [](const audio::Routed& r) {
                                return json{{"mode", "routed"},
                                            {"monitor", r.monitor},
                                            {"device", r.device}};
                            },
                        },
                        s.audio);
    j = json{{"view", v}, {"audio", a}, {"playhead", s.playhead}, {"assignment", s.assignment}};
}

void from_json(const json& j, RoomState& s) {
    const auto& v = j.at("view");
    const auto mode = v.at("mode").get<std::string>();
    if (mode == "matrix") {
        s.view = view::Matrix{};
    } else if (mode == "zoomed") {
        s.view = view::Zoomed{v.at("monitor").get<MonitorId>()};
    } else if (mode == "split") {
        const auto& m = v.at("monitors");
        s.view = view::Split{m.at(0).get<MonitorId>(), m.at(1).get<MonitorId>()};
    } else {
        throw InvalidInputError("unknown view mode '" + mode + "'");
    }
    const auto& a = j.at("audio");
    if (a.at("mode").get<std::string>() == "off") {
        s.audio = audio::Off{};
    } else {
        s.audio = audio::Routed{a.at("monitor").get<MonitorId>(), a.at("device").get<Device>()};
    }
    s.playhead = j.at("playhead").get<std::array<double, kMonitorCount>>();
    s.assignment = j.at("assignment").get<std::array<int, kMonitorCount>>();
    if (!is_permutation(s)) throw InvalidInputError("assignment is not a permutation of 1..9");
}

}  // namespace ctrlroom::environment
