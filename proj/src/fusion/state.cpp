#include "ctrlroom/fusion/state.hpp"

#include <algorithm>
#include <cmath>

#include "ctrlroom/errors.hpp"

namespace ctrlroom::fusion {

using nlohmann::json;

void FusionConfig::validate() const {
    if (max_gap.count() < 0) throw InvalidInputError("max_gap must be non-negative");
    if (grace.count() < 0) throw InvalidInputError("grace must be non-negative");
    if (reorder_bound.count() < 0) throw InvalidInputError("reorder_bound must be non-negative");
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidInputError("tau must lie in [0, 1]");
}

void to_json(json& j, const FusionConfig& c) {
    j = json{{"max_gap_ms", c.max_gap.count()},
             {"grace_ms", c.grace.count()},
             {"tau", c.tau},
             {"reorder_bound_ms", c.reorder_bound.count()}};
}

void from_json(const json& j, FusionConfig& c) {
    c = FusionConfig{};
    c.max_gap = Millis{j.value("max_gap_ms", c.max_gap.count())};
    c.grace = Millis{j.value("grace_ms", c.grace.count())};
    c.tau = j.value("tau", c.tau);
    c.reorder_bound = Millis{j.value("reorder_bound_ms", c.reorder_bound.count())};
    c.validate();
}

const SlotRequirement& slot_requirement(Intent intent) {
    using K = SlotKind;
    static const SlotRequirement none{};
    static const SlotRequirement one_monitor{{K::monitor}, false};
    static const SlotRequirement two_monitors{{K::monitor, K::monitor}, false};
    static const SlotRequirement device{{K::device}, true};
    static const SlotRequirement time{{K::time_offset}, true};
    switch (intent) {
        case Intent::zoom_in: return one_monitor;
        case Intent::zoom_out:
        case Intent::audio_off: return none;
        case Intent::split_screen:
        case Intent::swap: return two_monitors;
        case Intent::audio_to_device: return device;
        case Intent::rewind:
        case Intent::forward: return time;
    }
    return none;
}

IngestStatus ingest_gesture(DialogueState& state, GestureEvent ev, const FusionConfig& config) {
    auto& h = state.pointed_history;
    if (!h.empty() && ev.end < h.front().end - config.reorder_bound) {
        return IngestStatus::dropped_late;
    }
    ev.id = state.next_gesture_id++;
    auto pos = std::find_if(h.begin(), h.end(), [&](const GestureEvent& g) { return g.end <= ev.end; });
    h.insert(pos, ev);
    if (state.current_nlu) {
        h = prune_stale(h, state.current_nlu->speech_start, config.max_gap);
    }
    ++state.revision;
    return IngestStatus::accepted;
}

PointedObjectHistory prune_stale(const PointedObjectHistory& history, Millis speech_start,
                                 Millis max_gap) {
    PointedObjectHistory kept;
    const Millis cutoff = speech_start - max_gap;
    for (const auto& g : history) {
        if (g.end >= cutoff) kept.push_back(g);
    }
    return kept;
}

void ingest_nlu(DialogueState& state, nlu::NluResult result, const FusionConfig& config) {
    state.intent_belief.clear();
    double total = 0.0;
    for (const auto& s : result.intents) total += std::max(0.0, s.confidence);
    for (auto i : kAllIntents) state.intent_belief[i] = total > 0.0 ? 0.0 : 1.0 / kAllIntents.size();
    if (total > 0.0) {
        for (const auto& s : result.intents) {
            state.intent_belief[s.intent] += std::max(0.0, s.confidence) / total;
        }
    }
    state.pointed_history = prune_stale(state.pointed_history, result.speech_start, config.max_gap);
    state.current_nlu = std::move(result);
    state.slot_bindings.clear();
    ++state.revision;
}

double combined_confidence(double intent_confidence, const std::vector<double>& slot_confidences) {
    if (slot_confidences.empty()) return intent_confidence;
    double log_sum = 0.0;
    for (double c : slot_confidences) {
        if (c <= 0.0) return 0.0;
        log_sum += std::log(c);
    }
    return intent_confidence * std::exp(log_sum / static_cast<double>(slot_confidences.size()));
}

namespace {

struct MonitorFiller {
    std::optional<MonitorId> explicit_value;  // empty for deictics and unresolvable references
    bool deictic = false;
    double confidence = 1.0;
};

Intent top_belief(const std::map<Intent, double>& belief) {
    Intent best = Intent::zoom_in;
    double best_p = -1.0;
    for (const auto& [intent, p] : belief) {
        if (p > best_p || (p == best_p && to_string(intent) < to_string(best))) {
            best = intent;
            best_p = p;
        }
    }
    return best;
}

Action build_action(Intent intent, const std::vector<SlotBinding>& b, std::size_t arity) {
    auto monitor = [&](std::size_t slot) { return std::get<MonitorId>(b.at(slot).value); };
    std::optional<MonitorId> extra;
    for (const auto& x : b) {
        if (x.slot == arity) extra = std::get<MonitorId>(x.value);
    }
    switch (intent) {
        case Intent::zoom_in: return action::ZoomIn{monitor(0)};
        case Intent::zoom_out: return action::ZoomOut{};
        case Intent::split_screen: return action::SplitScreen{monitor(0), monitor(1)};
        case Intent::swap: return action::Swap{monitor(0), monitor(1)};
        case Intent::audio_to_device: return action::AudioToDevice{std::get<Device>(b.at(0).value), extra};
        case Intent::audio_off: return action::AudioOff{};
        case Intent::rewind: return action::Rewind{std::get<double>(b.at(0).value), extra};
        case Intent::forward: return action::Forward{std::get<double>(b.at(0).value), extra};
    }
    return action::ZoomOut{};
}

Interpretation interpret_impl(const DialogueState& state, const FusionConfig& config, bool settle) {
    if (!state.current_nlu) throw InvalidInputError("no utterance to interpret");
    const auto& nlu = *state.current_nlu;

    Interpretation out;
    out.intent = top_belief(state.intent_belief);
    const auto& req = slot_requirement(out.intent);
    const std::size_t arity = req.required.size();

    std::vector<nlu::EntitySpan> entities = nlu.entities;
    std::stable_sort(entities.begin(), entities.end(),
                     [](const auto& a, const auto& b) { return a.start < b.start; });

    std::vector<MonitorFiller> fillers;
    std::optional<nlu::EntitySpan> device, time;
    for (const auto& e : entities) {
        switch (e.label) {
            case nlu::EntityLabel::monitor:
                fillers.push_back({e.monitor(), false, e.confidence});
                break;
            case nlu::EntityLabel::deictic_singular:
                fillers.push_back({std::nullopt, true, e.confidence});
                break;
            case nlu::EntityLabel::deictic_plural:
                fillers.push_back({std::nullopt, true, e.confidence});
                fillers.push_back({std::nullopt, true, e.confidence});
                break;
            case nlu::EntityLabel::device:
                if (!device && std::holds_alternative<Device>(e.value)) device = e;
                break;
            case nlu::EntityLabel::time_offset:
                if (!time && std::holds_alternative<double>(e.value)) time = e;
                break;
            default: break;
        }
    }

    // Chronological order: the history is newest first.
    std::vector<const GestureEvent*> gestures;
    for (auto it = state.pointed_history.rbegin(); it != state.pointed_history.rend(); ++it) {
        gestures.push_back(&*it);
    }
    std::size_t next_gesture = 0;
    std::size_t next_filler = 0;
    bool unresolved = false;

    auto fill_monitor = [&](std::size_t slot) -> bool {
        if (next_filler >= fillers.size()) return false;
        const auto& f = fillers[next_filler++];
        if (f.deictic) {
            if (next_gesture >= gestures.size()) {
                out.awaiting_gesture = true;
                return false;
            }
            const auto* g = gestures[next_gesture++];
            out.bindings.push_back({slot, g->object, std::clamp(g->confidence * f.confidence, 0.0, 1.0), g->id});
            return true;
        }
        if (!f.explicit_value) {
            unresolved = true;
            return false;
        }
        out.bindings.push_back({slot, *f.explicit_value, f.confidence, std::nullopt});
        return true;
    };

    bool required_ok = true;
    for (std::size_t slot = 0; slot < arity; ++slot) {
        switch (req.required[slot]) {
            case SlotKind::monitor:
                if (!fill_monitor(slot)) required_ok = false;
                break;
            case SlotKind::device:
                if (device) {
                    out.bindings.push_back({slot, std::get<Device>(device->value), device->confidence, std::nullopt});
                } else {
                    required_ok = false;
                }
                break;
            case SlotKind::time_offset:
                if (time) {
                    out.bindings.push_back({slot, std::get<double>(time->value), time->confidence, std::nullopt});
                } else {
                    required_ok = false;
                }
                break;
        }
    }
    bool optional_pending = false;
    if (req.optional_monitor && !fill_monitor(arity)) {
        optional_pending = out.awaiting_gesture;
        unresolved = false;  // an unusable optional reference is ignored
    }

    out.complete = required_ok;
    if (!out.complete) {
        out.problem = unresolved ? "unresolved monitor reference" : "missing slot";
        return out;
    }
    if (optional_pending && !settle) {
        out.problem = "waiting for a pointed monitor";
        return out;
    }
    out.awaiting_gesture = false;

    std::vector<double> confs;
    for (const auto& b : out.bindings) confs.push_back(b.confidence);
    const auto belief = state.intent_belief.find(out.intent);
    out.confidence = combined_confidence(belief == state.intent_belief.end() ? 0.0 : belief->second, confs);

    Action act = build_action(out.intent, out.bindings, arity);
    try {
        validate(act);
    } catch (const InvalidInputError& e) {
        out.problem = e.what();
        return out;
    }
    if (out.confidence < config.tau) {
        out.problem = "confidence below threshold";
        return out;
    }
    out.command = Command{act, nlu.speech_end, out.confidence};
    return out;
}

bool same_bindings(const std::vector<SlotBinding>& a, const std::vector<SlotBinding>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].slot != b[i].slot || a[i].value != b[i].value || a[i].confidence != b[i].confidence ||
            a[i].gesture_id != b[i].gesture_id) {
            return false;
        }
    }
    return true;
}

}  // namespace

Interpretation interpret(const DialogueState& state, const FusionConfig& config) {
    return interpret_impl(state, config, false);
}

TickResult state_monitor_tick(DialogueState& state, Millis now, const FusionConfig& config) {
    TickResult r;
    if (!state.current_nlu) return r;
    const Millis deadline = state.current_nlu->speech_end + config.grace;
    const bool expired = now >= deadline;
    auto interp = interpret_impl(state, config, expired);

    if (interp.command) {
        r.command = *interp.command;
        r.command->issued_at = std::max(now, state.current_nlu->speech_end);
        for (const auto& b : interp.bindings) {
            if (b.gesture_id) r.consumed.push_back(*b.gesture_id);
        }
        state.pointed_history.remove_if([&](const GestureEvent& g) {
            return std::find(r.consumed.begin(), r.consumed.end(), g.id) != r.consumed.end();
        });
        state.slot_bindings = std::move(interp.bindings);
        state.last_command = r.command;
        state.current_nlu.reset();
        ++state.revision;
        return r;
    }

    // Complete but unusable: later gestures cannot change the outcome.
    const bool hopeless = interp.complete && !interp.awaiting_gesture;
    if (hopeless || expired) {
        r.clarification_needed = true;
        r.reason = interp.problem.empty() ? "incomplete interpretation" : interp.problem;
        state.slot_bindings.clear();
        state.current_nlu.reset();
        ++state.revision;
        return r;
    }
    if (!same_bindings(state.slot_bindings, interp.bindings)) {
        state.slot_bindings = std::move(interp.bindings);
        ++state.revision;
    }
    return r;
}

}  // namespace ctrlroom::fusion
