#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ctrlroom/environment/room.hpp"
#include "ctrlroom/fusion/engine.hpp"
#include "ctrlroom/geometry/pointing.hpp"

namespace ctrlroom::gateway {

inline constexpr int kProtocolVersion = 1;

enum class MessageKind {
    speech_event,
    pointer_event,
    scenario_control,
    state_snapshot,
    command_issued,
    distribution_update,
    clarification_needed,
    error,
};

std::string_view to_string(MessageKind k);
/// Throws ProtocolError for an unknown name.
MessageKind parse_kind(std::string_view s);

bool is_inbound(MessageKind k);

// One frame on the wire: {"v": 1, "kind": "...", "payload": {...}}.
struct WireMessage {
    int version = kProtocolVersion;
    MessageKind kind = MessageKind::error;
    nlohmann::json payload = nlohmann::json::object();

    bool operator==(const WireMessage&) const = default;
};

/// Validates the envelope only. Throws ProtocolError.
WireMessage parse_message(std::string_view text);

/// Compact JSON with sorted keys, so equal messages serialize identically.
std::string serialize(const WireMessage& m);

// Inbound payloads. Every decode_* validates the whole payload and throws
// ProtocolError naming the offending field; unknown fields are rejected.

struct SpeechEvent {
    std::string text;
    std::optional<std::int64_t> t_ms;  // client clock, logged only

    bool operator==(const SpeechEvent&) const = default;
};

struct PointerRay {
    std::array<double, 3> origin{};
    std::array<double, 3> direction{};

    bool operator==(const PointerRay&) const = default;
};

// Either normalized screen coordinates (u right, v down, both in [0,1]) or a
// ray in environment coordinates. A release (pressed false) may carry neither.
struct PointerEvent {
    std::optional<std::array<double, 2>> uv;
    std::optional<PointerRay> ray;
    bool pressed = true;
    std::optional<std::int64_t> t_ms;

    bool operator==(const PointerEvent&) const = default;
};

enum class ControlAction { reset, snapshot };

struct ScenarioControl {
    ControlAction action = ControlAction::snapshot;

    bool operator==(const ScenarioControl&) const = default;
};

SpeechEvent decode_speech(const nlohmann::json& payload);
PointerEvent decode_pointer(const nlohmann::json& payload);
ScenarioControl decode_control(const nlohmann::json& payload);

WireMessage encode(const SpeechEvent& e);
WireMessage encode(const PointerEvent& e);
WireMessage encode(const ScenarioControl& c);

// Outbound messages.

struct DialogueSummary {
    std::optional<std::string> utterance;  // awaiting completion
    std::optional<Intent> intent;
    std::vector<MonitorId> pointed;        // retained gestures, oldest first
};

DialogueSummary summarize(const fusion::DialogueState& state);

WireMessage state_snapshot(std::uint64_t revision, const environment::RoomState& room,
                           const DialogueSummary& dialogue);
WireMessage command_issued(const fusion::IssuedCommand& c);
WireMessage distribution_update(const geometry::PointingDistribution& d, bool pressed);
WireMessage clarification_needed(const fusion::Clarification& c);
WireMessage error_message(std::string_view code, std::string_view message);

}  // namespace ctrlroom::gateway
