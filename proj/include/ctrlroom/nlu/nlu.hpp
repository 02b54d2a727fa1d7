#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ctrlroom/types.hpp"

namespace ctrlroom::nlu {

enum class EntityLabel {
    monitor,
    ref,
    ref_x,
    ref_y,
    device,
    deictic_singular,
    deictic_plural,
    time_offset,
};

std::string_view to_string(EntityLabel label);
std::optional<EntityLabel> parse_entity_label(std::string_view name);

enum class Deixis { singular, plural };

// monitor: MonitorId (monostate when unresolvable); ref/ref_x/ref_y: int;
// device: Device; time_offset: seconds; deictics: Deixis.
using EntityValue = std::variant<std::monostate, MonitorId, int, Device, double, Deixis>;

struct EntitySpan {
    EntityLabel label = EntityLabel::monitor;
    std::size_t start = 0;  // char offsets into the utterance, [start, end)
    std::size_t end = 0;
    EntityValue value;
    double confidence = 1.0;
    std::vector<EntitySpan> parts;  // ref / ref_x / ref_y for monitor entities

    std::optional<MonitorId> monitor() const;
    bool is_deictic() const {
        return label == EntityLabel::deictic_singular || label == EntityLabel::deictic_plural;
    }
};

struct IntentScore {
    Intent intent = Intent::zoom_in;
    double confidence = 0.0;
};

struct NluResult {
    std::string utterance;
    Millis speech_start{0};
    Millis speech_end{0};
    std::vector<IntentScore> intents;  // descending confidence
    std::vector<EntitySpan> entities;  // utterance order

    std::optional<Intent> top_intent() const;
};

struct LabeledUtterance {
    std::string text;
    Intent intent = Intent::zoom_in;
    std::vector<EntitySpan> entities;  // optional annotations
};

// Ways an utterance can pin down a single cell.
struct OrdinalRef {
    int n = 0;
};
struct GridRef {
    int row = 0;
    int col = 0;
};
enum class ExtremalRef { central, last };

using MonitorReference = std::variant<OrdinalRef, GridRef, ExtremalRef>;

/// Row-major, row 1 on top. Throws OutOfGridError outside the grid.
MonitorId resolve_monitor_reference(const MonitorReference& ref, int rows = kGridRows,
                                    int cols = kGridCols);

class NluModel {
public:
    static constexpr int kFormatVersion = 1;

    // Per feature: smoothed fraction of each intent's examples containing it
    // (kAllIntents order), and a salience in [0, 1] that is 0 for features
    // spread evenly across intents.
    struct FeatureStats {
        std::array<double, kAllIntents.size()> rate{};
        double weight = 0.0;
    };

    std::map<std::string, FeatureStats, std::less<>> features;
    std::map<std::string, Intent, std::less<>> memorized;
    std::map<std::string, Device, std::less<>> devices;
};

/// Throws IncompleteCorpusError if an intent has no example and TrainingError
/// if identical (normalized) texts carry different labels.
NluModel train(std::span<const LabeledUtterance> corpus);

/// All eight intents, confidence descending, ties broken by label name.
/// Throws InvalidInputError on blank input.
std::vector<IntentScore> classify(const NluModel& model, std::string_view utterance);

std::vector<EntitySpan> extract_entities(const NluModel& model, std::string_view utterance);

NluResult understand(const NluModel& model, std::string_view utterance, Millis speech_start,
                     Millis speech_end);

/// Lower-cased word tokens joined by single spaces.
std::string normalize_text(std::string_view text);

/// Classifier features (stems, entity placeholders, bigrams) for an utterance.
std::vector<std::string> features_of(const NluModel& model, std::string_view utterance);

std::map<std::string, Device, std::less<>> default_device_lexicon();

void save_model(const NluModel& model, const std::filesystem::path& path);
NluModel load_model(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const NluModel& m);
void from_json(const nlohmann::json& j, NluModel& m);
void to_json(nlohmann::json& j, const EntitySpan& e);
void from_json(const nlohmann::json& j, EntitySpan& e);
void to_json(nlohmann::json& j, const NluResult& r);
void from_json(const nlohmann::json& j, NluResult& r);
void to_json(nlohmann::json& j, const LabeledUtterance& u);
void from_json(const nlohmann::json& j, LabeledUtterance& u);

// Corpus files: a header line {"format": "ctrlroom-corpus", "version": 1}
// followed by one LabeledUtterance JSON object per line.
inline constexpr int kCorpusVersion = 1;
std::vector<LabeledUtterance> load_corpus(const std::filesystem::path& path);
void save_corpus(std::span<const LabeledUtterance> corpus, const std::filesystem::path& path);
std::string corpus_to_string(std::span<const LabeledUtterance> corpus);

}  // namespace ctrlroom::nlu
