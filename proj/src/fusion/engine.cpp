#include "ctrlroom/fusion/engine.hpp"

#include <algorithm>
#include <istream>
#include <sstream>
#include <tuple>

#include "ctrlroom/errors.hpp"

namespace ctrlroom::fusion {

using nlohmann::json;

void EventLog::append(json record) { records_.push_back(std::move(record)); }

std::string EventLog::to_jsonl() const {
    std::ostringstream out;
    write(out);
    return out.str();
}

void EventLog::write(std::ostream& out) const {
    for (const auto& r : records_) out << r.dump() << '\n';
}

std::vector<json> parse_jsonl(std::istream& in) {
    std::vector<json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw LoadError("line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

namespace {

json annotation_json(const std::optional<Annotation>& truth) {
    json t = json::object();
    if (truth && truth->intent) t["intent"] = *truth->intent;
    if (truth && truth->object) t["object"] = *truth->object;
    return t;
}

}  // namespace

bool FusionEngine::Order::operator()(const Pending& a, const Pending& b) const {
    return std::tie(a.t, a.kind, a.key) < std::tie(b.t, b.kind, b.key);
}

FusionEngine::FusionEngine(FusionConfig config) : config_(config) { config_.validate(); }

bool FusionEngine::submit(const GestureEvent& ev, std::optional<Annotation> truth) {
    GestureEvent clean = ev;
    clean.id = 0;
    json key = clean;
    return enqueue(Pending{clean.end, 0, key.dump(), clean, std::move(truth)});
}

bool FusionEngine::submit(const nlu::NluResult& result, std::optional<Annotation> truth) {
    json key = result;
    return enqueue(Pending{result.speech_end, 1, key.dump(), result, std::move(truth)});
}

bool FusionEngine::enqueue(Pending p) {
    if (p.t < watermark_) {
        json rec{{"seq", seq_++}, {"type", "dropped"}, {"t_ms", p.t.count()}, {"reason", "late"}};
        rec["input"] = p.kind == 0 ? json(std::get<GestureEvent>(p.input)) : json(std::get<nlu::NluResult>(p.input));
        log_.append(std::move(rec));
        return false;
    }
    newest_ = std::max(newest_, p.t);
    watermark_ = std::max(watermark_, newest_ - config_.reorder_bound);
    queue_.insert(std::move(p));
    return true;
}

std::vector<FusionOutput> FusionEngine::advance(Millis now) {
    watermark_ = std::max(watermark_, now - config_.reorder_bound);
    std::vector<FusionOutput> out;
    release(watermark_, false, out);
    return out;
}

std::vector<FusionOutput> FusionEngine::flush() {
    std::vector<FusionOutput> out;
    release(Millis::max(), true, out);
    return out;
}

std::optional<Millis> FusionEngine::grace_deadline() const {
    if (!state_.current_nlu) return std::nullopt;
    return state_.current_nlu->speech_end + config_.grace;
}

void FusionEngine::release(Millis upto, bool inclusive, std::vector<FusionOutput>& out) {
    auto due = [&](Millis t) { return inclusive ? t <= upto : t < upto; };
    for (;;) {
        const auto deadline = grace_deadline();
        const bool have_input = !queue_.empty() && due(queue_.begin()->t);
        // A deadline fires after inputs stamped at the same instant.
        if (deadline && due(*deadline) && (!have_input || queue_.begin()->t > *deadline)) {
            processed_ = std::max(processed_, *deadline);
            tick(*deadline, out);
            continue;
        }
        if (!have_input) break;
        auto node = queue_.extract(queue_.begin());
        processed_ = std::max(processed_, node.value().t);
        process(node.value(), out);
    }
    if (!inclusive) return;
    watermark_ = std::max(watermark_, processed_);
}

void FusionEngine::process(const Pending& p, std::vector<FusionOutput>& out) {
    const auto truth = annotation_json(p.truth);
    if (p.kind == 0) {
        const auto& ev = std::get<GestureEvent>(p.input);
        const auto id = state_.next_gesture_id;
        const auto status = ingest_gesture(state_, ev, config_);
        json rec{{"seq", seq_++}, {"t_ms", p.t.count()}};
        if (status == IngestStatus::dropped_late) {
            rec["type"] = "dropped";
            rec["reason"] = "behind newest gesture";
            rec["input"] = ev;
        } else {
            rec["type"] = "gesture";
            rec["id"] = id;
            rec["object"] = ev.object;
            rec["confidence"] = ev.confidence;
            rec["start"] = ev.start.count();
            rec["end"] = ev.end.count();
        }
        if (!truth.empty()) rec["truth"] = truth;
        log_.append(std::move(rec));
    } else {
        const auto& r = std::get<nlu::NluResult>(p.input);
        ingest_nlu(state_, r, config_);
        json rec{{"seq", seq_++},
                 {"t_ms", p.t.count()},
                 {"type", "nlu"},
                 {"text", r.utterance},
                 {"speech_start", r.speech_start.count()},
                 {"speech_end", r.speech_end.count()}};
        if (auto top = r.top_intent()) {
            rec["top_intent"] = *top;
            rec["confidence"] = r.intents.front().confidence;
        } else {
            rec["top_intent"] = nullptr;
        }
        if (!truth.empty()) rec["truth"] = truth;
        log_.append(std::move(rec));
    }
    notify();
    tick(p.t, out);
}

void FusionEngine::tick(Millis now, std::vector<FusionOutput>& out) {
    const auto utterance = state_.current_nlu ? state_.current_nlu->utterance : std::string{};
    const auto before = state_.revision;
    auto r = state_monitor_tick(state_, now, config_);
    if (r.command) {
        json rec{{"seq", seq_++},
                 {"t_ms", now.count()},
                 {"type", "command"},
                 {"action", r.command->action},
                 {"confidence", r.command->confidence},
                 {"gestures", r.consumed}};
        log_.append(std::move(rec));
        out.push_back(IssuedCommand{*r.command, r.consumed});
    } else if (r.clarification_needed) {
        log_.append(json{{"seq", seq_++},
                         {"t_ms", now.count()},
                         {"type", "clarification"},
                         {"text", utterance},
                         {"reason", r.reason}});
        out.push_back(Clarification{now, utterance, r.reason});
    }
    if (state_.revision != before) notify();
}

void FusionEngine::record(json rec) {
    rec["seq"] = seq_++;
    log_.append(std::move(rec));
}

void FusionEngine::notify() {
    if (on_revision) on_revision(state_);
}

}  // namespace ctrlroom::fusion
