#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

namespace ctrlroom {

/// Milliseconds since session start. All pipeline timestamps use this clock.
using Millis = std::chrono::milliseconds;

inline double to_seconds(Millis d) { return static_cast<double>(d.count()) / 1000.0; }

/// A cell of the monitor grid, numbered 1..rows*cols row-major with row 1 on top.
struct MonitorId {
    int value = 0;

    friend auto operator<=>(const MonitorId&, const MonitorId&) = default;
};

inline constexpr int kGridRows = 3;
inline constexpr int kGridCols = 3;
inline constexpr int kMonitorCount = kGridRows * kGridCols;

inline bool is_valid_monitor(MonitorId m, int count = kMonitorCount) {
    return m.value >= 1 && m.value <= count;
}

void to_json(nlohmann::json& j, const MonitorId& m);
void from_json(const nlohmann::json& j, MonitorId& m);

enum class Intent : std::uint8_t {
    zoom_in,
    zoom_out,
    split_screen,
    swap,
    audio_to_device,
    audio_off,
    rewind,
    forward,
};

inline constexpr std::array<Intent, 8> kAllIntents = {
    Intent::zoom_in,         Intent::zoom_out,  Intent::split_screen, Intent::swap,
    Intent::audio_to_device, Intent::audio_off, Intent::rewind,       Intent::forward,
};

std::string_view to_string(Intent intent);
std::optional<Intent> parse_intent(std::string_view name);

void to_json(nlohmann::json& j, Intent intent);
void from_json(const nlohmann::json& j, Intent& intent);

enum class Device : std::uint8_t { headset, speakers };

std::string_view to_string(Device device);
std::optional<Device> parse_device(std::string_view name);

void to_json(nlohmann::json& j, Device device);
void from_json(const nlohmann::json& j, Device& device);

namespace action {

struct ZoomIn {
    MonitorId monitor;
    bool operator==(const ZoomIn&) const = default;
};

struct ZoomOut {
    bool operator==(const ZoomOut&) const = default;
};

struct SplitScreen {
    MonitorId left;
    MonitorId right;
    bool operator==(const SplitScreen&) const = default;
};

struct Swap {
    MonitorId first;
    MonitorId second;
    bool operator==(const Swap&) const = default;
};

// The monitor on the audio/timeline actions is the explicit target named in the
// utterance, if any; the room falls back to the zoomed monitor.
struct AudioToDevice {
    Device device = Device::headset;
    std::optional<MonitorId> monitor;
    bool operator==(const AudioToDevice&) const = default;
};

struct AudioOff {
    bool operator==(const AudioOff&) const = default;
};

struct Rewind {
    double seconds = 0.0;
    std::optional<MonitorId> monitor;
    bool operator==(const Rewind&) const = default;
};

struct Forward {
    double seconds = 0.0;
    std::optional<MonitorId> monitor;
    bool operator==(const Forward&) const = default;
};

}  // namespace action

using Action = std::variant<action::ZoomIn, action::ZoomOut, action::SplitScreen, action::Swap,
                            action::AudioToDevice, action::AudioOff, action::Rewind,
                            action::Forward>;

Intent intent_of(const Action& a);

/// Throws InvalidInputError if operands break the command invariants
/// (distinct swap/split operands, monitors on the grid, positive seconds).
void validate(const Action& a);

/// Semantic equality: Swap(a, b) matches Swap(b, a); everything else is exact.
bool same_action(const Action& a, const Action& b);

std::string describe(const Action& a);

void action_to_json(nlohmann::json& j, const Action& a);
void action_from_json(const nlohmann::json& j, Action& a);

struct Command {
    Action action;
    Millis issued_at{0};
    double confidence = 1.0;

    bool operator==(const Command&) const = default;
};

void to_json(nlohmann::json& j, const Command& c);
void from_json(const nlohmann::json& j, Command& c);

}  // namespace ctrlroom

// Action is a std::variant, so ADL cannot find serializers in ctrlroom.
template <>
struct nlohmann::adl_serializer<ctrlroom::Action> {
    static void to_json(json& j, const ctrlroom::Action& a) { ctrlroom::action_to_json(j, a); }
    static void from_json(const json& j, ctrlroom::Action& a) { ctrlroom::action_from_json(j, a); }
};
