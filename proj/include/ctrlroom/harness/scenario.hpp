#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ctrlroom/environment/room.hpp"
#include "ctrlroom/fusion/engine.hpp"
#include "ctrlroom/geometry/tracker.hpp"
#include "ctrlroom/harness/generators.hpp"
#include "ctrlroom/nlu/nlu.hpp"

namespace ctrlroom::harness {

struct SkeletonInput {
    std::vector<geometry::SkeletonFrame> frames;  // literal recording, sensor coordinates
    std::optional<std::vector<MonitorId>> targets; // or a generated arm trace
    TraceProfile profile;
};

struct UtteranceInput {
    std::string text;
    Millis duration{1500};
    std::optional<Intent> intent;  // ground truth for scoring
};

struct ScenarioEvent {
    Millis t{0};  // frame/trace start, gesture end, or speech start
    std::variant<SkeletonInput, geometry::GestureEvent, UtteranceInput> payload;
};

struct Scenario {
    std::string id;
    std::string description;
    std::vector<ScenarioEvent> events;  // non-decreasing t
    std::vector<Action> expected;
};

/// Throws LoadError on malformed input.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

/// Scenario files (*.json) in a directory, sorted by file name.
std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir);

struct PipelineConfig {
    geometry::PointingConfig pointing;
    fusion::FusionConfig fusion;
    std::shared_ptr<const nlu::NluModel> model;
};

/// Pointing and fusion settings from a config file ({"pointing": ..., "fusion": ...});
/// the model is left empty.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json pipeline_config_to_json(const PipelineConfig& c);

/// The NLU model every tool falls back to: trained on a fixed generated corpus.
std::shared_ptr<const nlu::NluModel> default_model();

inline constexpr std::size_t kDefaultCorpusSize = 400;
inline constexpr std::uint64_t kDefaultCorpusSeed = 20;

enum class OutcomeLabel { S, PS, F };

std::string_view to_string(OutcomeLabel l);
OutcomeLabel parse_outcome_label(std::string_view s);

struct Outcome {
    std::string scenario_id;
    OutcomeLabel label = OutcomeLabel::F;
    std::vector<Command> issued;
    std::size_t matched = 0;         // expected commands found in order
    std::size_t clarifications = 0;
    std::size_t rejections = 0;      // commands the room refused
    std::string detail;
};

struct RunResult {
    Outcome outcome;
    fusion::EventLog log;
    environment::RoomState final_state;
};

/// Replays the script on a virtual clock. Deterministic: the same scenario
/// and config always give the same log.
RunResult run_scenario(const Scenario& scenario, const PipelineConfig& config);

/// S: exactly the expected commands, in order, with no clarification.
/// PS: the expected commands appear in order but clarifications or extra
///     commands were needed on the way.
/// F: otherwise.
OutcomeLabel label_outcome(std::span<const Action> expected, std::span<const Command> issued,
                           std::size_t clarifications, std::size_t* matched = nullptr);

/// (S + 0.5 PS) / total. Throws UndefinedMetricError on an empty list.
double task_completion_rate(std::span<const OutcomeLabel> outcomes);
double task_completion_rate(std::span<const Outcome> outcomes);

struct ModuleRates {
    std::optional<double> nlu_success_rate;
    std::optional<double> gesture_accuracy;
    std::size_t utterances = 0;
    std::size_t gestures = 0;
};

/// Scores annotated nlu/gesture records of an event log. Throws
/// UndefinedMetricError when no record carries ground truth.
ModuleRates module_success_rates(std::span<const nlohmann::json> records);

struct MetricsReport {
    std::optional<double> task_completion_rate;  // absent when nothing was labelled
    std::optional<double> nlu_success_rate;
    std::optional<double> gesture_accuracy;
    std::vector<Outcome> outcomes;
};

nlohmann::json report_to_json(const MetricsReport& r);

/// A grid of hand-labelled outcomes: {"users": [{"id": "U1", "outcomes": ["S", ...]}]}.
std::vector<OutcomeLabel> load_outcome_grid(const std::filesystem::path& path);
std::vector<OutcomeLabel> outcome_grid_from_json(const nlohmann::json& j);

}  // namespace ctrlroom::harness
