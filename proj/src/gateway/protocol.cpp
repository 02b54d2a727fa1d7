#include "ctrlroom/gateway/protocol.hpp"

#include <cmath>
#include <initializer_list>

#include "ctrlroom/errors.hpp"

namespace ctrlroom::gateway {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<MessageKind, std::string_view>, 8> kKindNames{{
    {MessageKind::speech_event, "speech_event"},
    {MessageKind::pointer_event, "pointer_event"},
    {MessageKind::scenario_control, "scenario_control"},
    {MessageKind::state_snapshot, "state_snapshot"},
    {MessageKind::command_issued, "command_issued"},
    {MessageKind::distribution_update, "distribution_update"},
    {MessageKind::clarification_needed, "clarification_needed"},
    {MessageKind::error, "error"},
}};

void require_object(const json& j, std::string_view what) {
    if (!j.is_object()) throw ProtocolError(std::string(what) + " must be an object");
}

void only_fields(const json& j, std::initializer_list<std::string_view> allowed, std::string_view what) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ProtocolError(std::string(what) + ": unexpected field '" + key + "'");
    }
}

double finite_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ProtocolError(field + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ProtocolError(field + " must be finite");
    return v;
}

std::optional<std::int64_t> optional_time(const json& payload) {
    const auto it = payload.find("t_ms");
    if (it == payload.end()) return std::nullopt;
    if (!it->is_number_integer()) throw ProtocolError("t_ms must be an integer");
    return it->get<std::int64_t>();
}

std::array<double, 3> vec3(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) throw ProtocolError(field + " must be an array of 3 numbers");
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) out[i] = finite_number(j[i], field);
    return out;
}

WireMessage make(MessageKind kind, json payload) {
    return WireMessage{kProtocolVersion, kind, std::move(payload)};
}

}  // namespace

std::string_view to_string(MessageKind k) {
    for (const auto& [kind, name] : kKindNames) {
        if (kind == k) return name;
    }
    return "error";
}

MessageKind parse_kind(std::string_view s) {
    for (const auto& [kind, name] : kKindNames) {
        if (name == s) return kind;
    }
    throw ProtocolError("unknown message kind '" + std::string(s) + "'");
}

bool is_inbound(MessageKind k) {
    return k == MessageKind::speech_event || k == MessageKind::pointer_event ||
           k == MessageKind::scenario_control;
}

WireMessage parse_message(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("not JSON: ") + e.what());
    }
    require_object(j, "message");
    only_fields(j, {"v", "kind", "payload"}, "message");
    const auto v = j.find("v");
    if (v == j.end() || !v->is_number_integer()) throw ProtocolError("v must be an integer");
    if (v->get<std::int64_t>() != kProtocolVersion) {
        throw ProtocolError("unsupported protocol version " + v->dump());
    }
    const auto kind = j.find("kind");
    if (kind == j.end() || !kind->is_string()) throw ProtocolError("kind must be a string");
    const auto payload = j.find("payload");
    if (payload == j.end()) throw ProtocolError("payload is missing");
    require_object(*payload, "payload");
    return make(parse_kind(kind->get<std::string>()), *payload);
}

std::string serialize(const WireMessage& m) {
    return json{{"v", m.version}, {"kind", to_string(m.kind)}, {"payload", m.payload}}.dump();
}

SpeechEvent decode_speech(const json& payload) {
    require_object(payload, "speech_event payload");
    only_fields(payload, {"text", "t_ms"}, "speech_event");
    const auto text = payload.find("text");
    if (text == payload.end() || !text->is_string()) throw ProtocolError("text must be a string");
    SpeechEvent e{text->get<std::string>(), optional_time(payload)};
    if (e.text.find_first_not_of(" \t\r\n") == std::string::npos) throw ProtocolError("text is empty");
    return e;
}

PointerEvent decode_pointer(const json& payload) {
    require_object(payload, "pointer_event payload");
    only_fields(payload, {"u", "v", "ray", "pressed", "t_ms"}, "pointer_event");
    PointerEvent e;
    e.t_ms = optional_time(payload);
    if (const auto p = payload.find("pressed"); p != payload.end()) {
        if (!p->is_boolean()) throw ProtocolError("pressed must be a boolean");
        e.pressed = p->get<bool>();
    }
    const bool has_u = payload.contains("u"), has_v = payload.contains("v");
    if (has_u != has_v) throw ProtocolError("u and v must be given together");
    if (has_u) {
        const double u = finite_number(payload.at("u"), "u");
        const double v = finite_number(payload.at("v"), "v");
        if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) {
            throw ProtocolError("u and v must lie in [0, 1]");
        }
        e.uv = std::array<double, 2>{u, v};
    }
    if (const auto r = payload.find("ray"); r != payload.end()) {
        if (has_u) throw ProtocolError("give either (u, v) or ray, not both");
        require_object(*r, "ray");
        only_fields(*r, {"origin", "direction"}, "ray");
        if (!r->contains("origin") || !r->contains("direction")) {
            throw ProtocolError("ray needs origin and direction");
        }
        PointerRay ray{vec3(r->at("origin"), "ray.origin"), vec3(r->at("direction"), "ray.direction")};
        const auto& d = ray.direction;
        if (d[0] == 0.0 && d[1] == 0.0 && d[2] == 0.0) throw ProtocolError("ray.direction is zero");
        e.ray = ray;
    }
    if (e.pressed && !e.uv && !e.ray) throw ProtocolError("a pressed pointer needs (u, v) or ray");
    return e;
}

ScenarioControl decode_control(const json& payload) {
    require_object(payload, "scenario_control payload");
    only_fields(payload, {"action"}, "scenario_control");
    const auto a = payload.find("action");
    if (a == payload.end() || !a->is_string()) throw ProtocolError("action must be a string");
    const auto name = a->get<std::string>();
    if (name == "reset") return {ControlAction::reset};
    if (name == "snapshot") return {ControlAction::snapshot};
    throw ProtocolError("unknown scenario_control action '" + name + "'");
}

WireMessage encode(const SpeechEvent& e) {
    json p{{"text", e.text}};
    if (e.t_ms) p["t_ms"] = *e.t_ms;
    return make(MessageKind::speech_event, std::move(p));
}

WireMessage encode(const PointerEvent& e) {
    json p{{"pressed", e.pressed}};
    if (e.uv) {
        p["u"] = (*e.uv)[0];
        p["v"] = (*e.uv)[1];
    }
    if (e.ray) p["ray"] = json{{"origin", e.ray->origin}, {"direction", e.ray->direction}};
    if (e.t_ms) p["t_ms"] = *e.t_ms;
    return make(MessageKind::pointer_event, std::move(p));
}

WireMessage encode(const ScenarioControl& c) {
    return make(MessageKind::scenario_control,
                json{{"action", c.action == ControlAction::reset ? "reset" : "snapshot"}});
}

DialogueSummary summarize(const fusion::DialogueState& state) {
    DialogueSummary s;
    if (state.current_nlu) {
        s.utterance = state.current_nlu->utterance;
        s.intent = state.current_nlu->top_intent();
    }
    for (auto it = state.pointed_history.rbegin(); it != state.pointed_history.rend(); ++it) {
        s.pointed.push_back(it->object);
    }
    return s;
}

WireMessage state_snapshot(std::uint64_t revision, const environment::RoomState& room,
                           const DialogueSummary& dialogue) {
    json d{{"utterance", dialogue.utterance ? json(*dialogue.utterance) : json(nullptr)},
           {"intent", dialogue.intent ? json(*dialogue.intent) : json(nullptr)},
           {"pointed", dialogue.pointed}};
    return make(MessageKind::state_snapshot, json{{"revision", revision}, {"room", room}, {"dialogue", d}});
}

WireMessage command_issued(const fusion::IssuedCommand& c) {
    json p = c.command;
    p["description"] = describe(c.command.action);
    p["gestures"] = c.gestures;
    return make(MessageKind::command_issued, std::move(p));
}

WireMessage distribution_update(const geometry::PointingDistribution& d, bool pressed) {
    json p = d;
    p["pressed"] = pressed;
    return make(MessageKind::distribution_update, std::move(p));
}

WireMessage clarification_needed(const fusion::Clarification& c) {
    return make(MessageKind::clarification_needed,
                json{{"t_ms", c.t.count()}, {"utterance", c.utterance}, {"reason", c.reason}});
}

WireMessage error_message(std::string_view code, std::string_view message) {
    return make(MessageKind::error, json{{"code", code}, {"message", message}});
}

}  // namespace ctrlroom::gateway
