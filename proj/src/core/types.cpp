#include "ctrlroom/types.hpp"

#include <algorithm>
#include <sstream>

#include "ctrlroom/errors.hpp"

namespace ctrlroom {

using nlohmann::json;

void to_json(json& j, const MonitorId& m) { j = m.value; }

void from_json(const json& j, MonitorId& m) { m.value = j.get<int>(); }

namespace {

constexpr std::array<std::pair<Intent, std::string_view>, 8> kIntentNames = {{
    {Intent::zoom_in, "zoom_in"},
    {Intent::zoom_out, "zoom_out"},
    {Intent::split_screen, "split_screen"},
    {Intent::swap, "swap"},
    {Intent::audio_to_device, "audio_to_device"},
    {Intent::audio_off, "audio_off"},
    {Intent::rewind, "rewind"},
    {Intent::forward, "forward"},
}};

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::optional<MonitorId> optional_monitor(const json& j) {
    if (auto it = j.find("monitor"); it != j.end() && !it->is_null()) {
        return it->get<MonitorId>();
    }
    return std::nullopt;
}

std::pair<MonitorId, MonitorId> monitor_pair(const json& j) {
    const auto& arr = j.at("monitors");
    if (!arr.is_array() || arr.size() != 2) {
        throw InvalidInputError("expected exactly two monitors");
    }
    return {arr[0].get<MonitorId>(), arr[1].get<MonitorId>()};
}

void check_monitor(MonitorId m) {
    if (!is_valid_monitor(m)) {
        throw InvalidInputError("monitor " + std::to_string(m.value) + " is not on the grid");
    }
}

}  // namespace

std::string_view to_string(Intent intent) {
    for (const auto& [i, name] : kIntentNames) {
        if (i == intent) return name;
    }
    return "unknown";
}

std::optional<Intent> parse_intent(std::string_view name) {
    for (const auto& [i, n] : kIntentNames) {
        if (n == name) return i;
    }
    return std::nullopt;
}

void to_json(json& j, Intent intent) { j = std::string(to_string(intent)); }

void from_json(const json& j, Intent& intent) {
    auto parsed = parse_intent(j.get<std::string>());
    if (!parsed) throw InvalidInputError("unknown intent '" + j.get<std::string>() + "'");
    intent = *parsed;
}

std::string_view to_string(Device device) {
    return device == Device::headset ? "headset" : "speakers";
}

std::optional<Device> parse_device(std::string_view name) {
    if (name == "headset") return Device::headset;
    if (name == "speakers") return Device::speakers;
    return std::nullopt;
}

void to_json(json& j, Device device) { j = std::string(to_string(device)); }

void from_json(const json& j, Device& device) {
    auto parsed = parse_device(j.get<std::string>());
    if (!parsed) throw InvalidInputError("unknown device '" + j.get<std::string>() + "'");
    device = *parsed;
}

Intent intent_of(const Action& a) {
    return std::visit(overloaded{
                          [](const action::ZoomIn&) { return Intent::zoom_in; },
                          [](const action::ZoomOut&) { return Intent::zoom_out; },
                          [](const action::SplitScreen&) { return Intent::split_screen; },
                          [](const action::Swap&) { return Intent::swap; },
                          [](const action::AudioToDevice&) { return Intent::audio_to_device; },
                          [](const action::AudioOff&) { return Intent::audio_off; },
                          [](const action::Rewind&) { return Intent::rewind; },
                          [](const action::Forward&) { return Intent::forward; },
                      },
                      a);
}

void validate(const Action& a) {
    auto check_optional = [](const std::optional<MonitorId>& m) {
        if (m) check_monitor(*m);
    };
    auto check_seconds = [](double s) {
        if (!(s > 0.0)) throw InvalidInputError("time offset must be positive");
    };
    std::visit(overloaded{
                   [](const action::ZoomIn& z) { check_monitor(z.monitor); },
                   [](const action::ZoomOut&) {},
                   [](const action::SplitScreen& s) {
                       check_monitor(s.left);
                       check_monitor(s.right);
                       if (s.left == s.right) {
                           throw InvalidInputError("split screen needs two distinct monitors");
                       }
                   },
                   [](const action::Swap& s) {
                       check_monitor(s.first);
                       check_monitor(s.second);
                       if (s.first == s.second) {
                           throw InvalidInputError("swap needs two distinct monitors");
                       }
                   },
                   [&](const action::AudioToDevice& d) { check_optional(d.monitor); },
                   [](const action::AudioOff&) {},
                   [&](const action::Rewind& r) {
                       check_seconds(r.seconds);
                       check_optional(r.monitor);
                   },
                   [&](const action::Forward& f) {
                       check_seconds(f.seconds);
                       check_optional(f.monitor);
                   },
               },
               a);
}

bool same_action(const Action& a, const Action& b) {
    if (const auto* sa = std::get_if<action::Swap>(&a)) {
        const auto* sb = std::get_if<action::Swap>(&b);
        if (!sb) return false;
        return (sa->first == sb->first && sa->second == sb->second) ||
               (sa->first == sb->second && sa->second == sb->first);
    }
    return a == b;
}

std::string describe(const Action& a) {
    std::ostringstream out;
    auto suffix = [&](const std::optional<MonitorId>& m) {
        if (m) out << " @" << m->value;
    };
    std::visit(overloaded{
                   [&](const action::ZoomIn& z) { out << "ZoomIn(" << z.monitor.value << ")"; },
                   [&](const action::ZoomOut&) { out << "ZoomOut"; },
                   [&](const action::SplitScreen& s) {
                       out << "SplitScreen(" << s.left.value << ", " << s.right.value << ")";
                   },
                   [&](const action::Swap& s) {
                       out << "Swap(" << s.first.value << ", " << s.second.value << ")";
                   },
                   [&](const action::AudioToDevice& d) {
                       out << "AudioToDevice(" << to_string(d.device) << ")";
                       suffix(d.monitor);
                   },
                   [&](const action::AudioOff&) { out << "AudioOff"; },
                   [&](const action::Rewind& r) {
                       out << "Rewind(" << r.seconds << ")";
                       suffix(r.monitor);
                   },
                   [&](const action::Forward& f) {
                       out << "Forward(" << f.seconds << ")";
                       suffix(f.monitor);
                   },
               },
               a);
    return out.str();
}

void action_to_json(json& j, const Action& a) {
    j = json::object();
    j["type"] = std::string(to_string(intent_of(a)));
    auto put_monitor = [&](const std::optional<MonitorId>& m) {
        if (m) j["monitor"] = *m;
    };
    std::visit(overloaded{
                   [&](const action::ZoomIn& z) { j["monitor"] = z.monitor; },
                   [&](const action::ZoomOut&) {},
                   [&](const action::SplitScreen& s) { j["monitors"] = {s.left, s.right}; },
                   [&](const action::Swap& s) { j["monitors"] = {s.first, s.second}; },
                   [&](const action::AudioToDevice& d) {
                       j["device"] = d.device;
                       put_monitor(d.monitor);
                   },
                   [&](const action::AudioOff&) {},
                   [&](const action::Rewind& r) {
                       j["seconds"] = r.seconds;
                       put_monitor(r.monitor);
                   },
                   [&](const action::Forward& f) {
                       j["seconds"] = f.seconds;
                       put_monitor(f.monitor);
                   },
               },
               a);
}

void action_from_json(const json& j, Action& a) {
    const auto intent = j.at("type").get<Intent>();
    switch (intent) {
        case Intent::zoom_in:
            a = action::ZoomIn{j.at("monitor").get<MonitorId>()};
            break;
        case Intent::zoom_out:
            a = action::ZoomOut{};
            break;
        case Intent::split_screen: {
            auto [l, r] = monitor_pair(j);
            a = action::SplitScreen{l, r};
            break;
        }
        case Intent::swap: {
            auto [f, s] = monitor_pair(j);
            a = action::Swap{f, s};
            break;
        }
        case Intent::audio_to_device:
            a = action::AudioToDevice{j.at("device").get<Device>(), optional_monitor(j)};
            break;
        case Intent::audio_off:
            a = action::AudioOff{};
            break;
        case Intent::rewind:
            a = action::Rewind{j.at("seconds").get<double>(), optional_monitor(j)};
            break;
        case Intent::forward:
            a = action::Forward{j.at("seconds").get<double>(), optional_monitor(j)};
            break;
    }
    validate(a);
}

void to_json(json& j, const Command& c) {
    j = json::object();
    j["action"] = c.action;
    j["t_ms"] = c.issued_at.count();
    j["confidence"] = c.confidence;
}

void from_json(const json& j, Command& c) {
    c.action = j.at("action").get<Action>();
    c.issued_at = Millis{j.value("t_ms", std::int64_t{0})};
    c.confidence = j.value("confidence", 1.0);
}

}  // namespace ctrlroom
