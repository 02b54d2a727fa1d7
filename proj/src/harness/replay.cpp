#include <algorithm>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/harness/scenario.hpp"

namespace ctrlroom::harness {

using nlohmann::json;

namespace {

struct TimedInput {
    Millis t;
    std::size_t order;  // script position, then frame index
    std::variant<geometry::SkeletonFrame, geometry::GestureEvent, UtteranceInput> input;
    Millis speech_start;
};

// Generated traces know where the arm was aimed; a gesture emitted during (or
// just after) a dwell is scored against that dwell's target.
struct TruthTable {
    std::vector<DwellSegment> dwells;
    Millis slack;

    std::optional<MonitorId> at(Millis t) const {
        for (const auto& d : dwells) {
            if (t >= d.start && t <= d.end + slack) return d.target;
        }
        return std::nullopt;
    }
};

}  // namespace

OutcomeLabel label_outcome(std::span<const Action> expected, std::span<const Command> issued,
                           std::size_t clarifications, std::size_t* matched) {
    std::size_t k = 0;
    for (const auto& c : issued) {
        if (k < expected.size() && same_action(c.action, expected[k])) ++k;
    }
    if (matched) *matched = k;
    if (k == expected.size() && issued.size() == expected.size() && clarifications == 0) {
        return OutcomeLabel::S;
    }
    if (k == expected.size()) return OutcomeLabel::PS;
    return OutcomeLabel::F;
}

RunResult run_scenario(const Scenario& scenario, const PipelineConfig& config) {
    const auto model = config.model ? config.model : default_model();
    config.pointing.validate();

    std::vector<TimedInput> timeline;
    TruthTable truth{{}, config.pointing.detection.lookback};
    std::size_t order = 0;
    for (const auto& ev : scenario.events) {
        if (const auto* sk = std::get_if<SkeletonInput>(&ev.payload)) {
            std::vector<geometry::SkeletonFrame> frames = sk->frames;
            if (sk->targets) {
                auto trace = generate_skeleton_trace(*sk->targets, sk->profile, config.pointing.sensor,
                                                     config.pointing.layout, ev.t);
                frames = std::move(trace.frames);
                truth.dwells.insert(truth.dwells.end(), trace.dwells.begin(), trace.dwells.end());
            }
            for (auto& f : frames) timeline.push_back({f.timestamp, order++, std::move(f), Millis{0}});
        } else if (const auto* g = std::get_if<geometry::GestureEvent>(&ev.payload)) {
            timeline.push_back({g->end, order++, *g, Millis{0}});
        } else {
            const auto& u = std::get<UtteranceInput>(ev.payload);
            timeline.push_back({ev.t + u.duration, order++, u, ev.t});
        }
    }
    std::stable_sort(timeline.begin(), timeline.end(), [](const TimedInput& a, const TimedInput& b) {
        return std::tie(a.t, a.order) < std::tie(b.t, b.order);
    });

    geometry::PointingTracker tracker(config.pointing);
    fusion::FusionEngine engine(config.fusion);
    environment::RoomState room;
    RunResult result;
    result.outcome.scenario_id = scenario.id;

    auto handle = [&](const std::vector<fusion::FusionOutput>& outputs) {
        for (const auto& o : outputs) {
            if (const auto* ic = std::get_if<fusion::IssuedCommand>(&o)) {
                result.outcome.issued.push_back(ic->command);
                auto applied = environment::apply(room, ic->command);
                if (auto* next = std::get_if<environment::RoomState>(&applied)) {
                    room = std::move(*next);
                    engine.record(json{{"type", "room"}, {"t_ms", ic->command.issued_at.count()}, {"state", room}});
                } else {
                    const auto& rej = std::get<environment::Rejection>(applied);
                    ++result.outcome.rejections;
                    engine.record(json{{"type", "rejection"},
                                       {"t_ms", ic->command.issued_at.count()},
                                       {"reason", std::string(to_string(rej.reason))},
                                       {"detail", rej.detail}});
                }
            } else {
                ++result.outcome.clarifications;
            }
        }
    };

    for (const auto& item : timeline) {
        if (const auto* frame = std::get_if<geometry::SkeletonFrame>(&item.input)) {
            auto update = tracker.push_frame(*frame);
            if (update.gesture) {
                fusion::Annotation a;
                a.object = truth.at(update.gesture->end);
                engine.submit(*update.gesture, a.object ? std::optional(a) : std::nullopt);
            }
        } else if (const auto* g = std::get_if<geometry::GestureEvent>(&item.input)) {
            engine.submit(*g);
        } else {
            const auto& u = std::get<UtteranceInput>(item.input);
            auto nlu = nlu::understand(*model, u.text, item.speech_start, item.t);
            std::optional<fusion::Annotation> a;
            if (u.intent) a = fusion::Annotation{u.intent, std::nullopt};
            engine.submit(nlu, a);
        }
        handle(engine.advance(item.t));
    }
    handle(engine.flush());

    auto& out = result.outcome;
    std::vector<Action> expected = scenario.expected;
    out.label = label_outcome(expected, out.issued, out.clarifications, &out.matched);
    out.detail = std::to_string(out.matched) + "/" + std::to_string(expected.size()) + " expected, " +
                 std::to_string(out.issued.size()) + " issued, " + std::to_string(out.clarifications) +
                 " clarifications, " + std::to_string(out.rejections) + " rejected";
    engine.record(json{{"type", "outcome"},
                       {"scenario", scenario.id},
                       {"label", std::string(to_string(out.label))},
                       {"detail", out.detail}});
    result.log = engine.log();
    result.final_state = room;
    return result;
}

}  // namespace ctrlroom::harness
