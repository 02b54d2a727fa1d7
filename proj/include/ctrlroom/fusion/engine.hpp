#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ctrlroom/fusion/state.hpp"

namespace ctrlroom::fusion {

// Ground truth a scenario attaches to an input so the log can be scored later.
struct Annotation {
    std::optional<Intent> intent;
    std::optional<MonitorId> object;
};

struct Clarification {
    Millis t{0};
    std::string utterance;
    std::string reason;
};

struct IssuedCommand {
    Command command;
    std::vector<std::uint64_t> gestures;  // ids consumed by this command
};

using FusionOutput = std::variant<IssuedCommand, Clarification>;

/// Append-only JSON records, one per ingested input and per output.
class EventLog {
public:
    void append(nlohmann::json record);
    const std::vector<nlohmann::json>& records() const { return records_; }
    std::string to_jsonl() const;
    void write(std::ostream& out) const;

private:
    std::vector<nlohmann::json> records_;
};

std::vector<nlohmann::json> parse_jsonl(std::istream& in);

// Single owner of a DialogueState. Inputs may arrive out of order by up to
// reorder_bound; they are buffered and released in canonical (time, kind,
// content) order once the watermark passes them, so the outputs do not depend
// on arrival order within the bound. Gestures are stamped at their end time,
// utterances at speech end.
class FusionEngine {
public:
    explicit FusionEngine(FusionConfig config = {});

    /// False if the input is already behind the watermark (logged as dropped).
    bool submit(const GestureEvent& ev, std::optional<Annotation> truth = std::nullopt);
    bool submit(const nlu::NluResult& result, std::optional<Annotation> truth = std::nullopt);

    /// Moves the clock to now and processes everything the watermark releases.
    std::vector<FusionOutput> advance(Millis now);

    /// Processes every buffered input and any pending grace deadline.
    std::vector<FusionOutput> flush();

    /// Appends a caller record (e.g. what the room did with a command) to the log.
    void record(nlohmann::json rec);

    Millis watermark() const { return watermark_; }
    const DialogueState& state() const { return state_; }
    const EventLog& log() const { return log_; }
    const FusionConfig& config() const { return config_; }

    /// Fires for every processed input and output, after the state changed.
    std::function<void(const DialogueState&)> on_revision;

private:
    struct Pending {
        Millis t;
        int kind;  // 0 gesture, 1 utterance
        std::string key;
        std::variant<GestureEvent, nlu::NluResult> input;
        std::optional<Annotation> truth;
    };
    struct Order {
        bool operator()(const Pending& a, const Pending& b) const;
    };

    bool enqueue(Pending p);
    void release(Millis upto, bool inclusive, std::vector<FusionOutput>& out);
    void process(const Pending& p, std::vector<FusionOutput>& out);
    void tick(Millis now, std::vector<FusionOutput>& out);
    std::optional<Millis> grace_deadline() const;
    void notify();

    FusionConfig config_;
    DialogueState state_;
    EventLog log_;
    std::multiset<Pending, Order> queue_;
    static constexpr Millis kEpoch{std::numeric_limits<std::int64_t>::min() / 4};
    Millis newest_{kEpoch};
    Millis watermark_{kEpoch};
    Millis processed_{kEpoch};
    std::uint64_t seq_ = 0;
};

}  // namespace ctrlroom::fusion
