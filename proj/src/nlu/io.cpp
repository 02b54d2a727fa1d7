#include <fstream>
#include <sstream>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/nlu/nlu.hpp"

namespace ctrlroom::nlu {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<EntityLabel, std::string_view>, 8> kLabelNames = {{
    {EntityLabel::monitor, "monitor"},
    {EntityLabel::ref, "ref"},
    {EntityLabel::ref_x, "ref_x"},
    {EntityLabel::ref_y, "ref_y"},
    {EntityLabel::device, "device"},
    {EntityLabel::deictic_singular, "deictic_singular"},
    {EntityLabel::deictic_plural, "deictic_plural"},
    {EntityLabel::time_offset, "time_offset"},
}};

constexpr std::string_view kCorpusFormat = "ctrlroom-corpus";
constexpr std::string_view kModelFormat = "ctrlroom-nlu-model";

json value_to_json(const EntitySpan& e) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, Deixis>) {
                return v == Deixis::singular ? "singular" : "plural";
            } else {
                return json(v);
            }
        },
        e.value);
}

EntityValue value_from_json(EntityLabel label, const json& j) {
    if (j.is_null()) return std::monostate{};
    switch (label) {
        case EntityLabel::monitor: return j.get<MonitorId>();
        case EntityLabel::ref:
        case EntityLabel::ref_x:
        case EntityLabel::ref_y: return j.get<int>();
        case EntityLabel::device: return j.get<Device>();
        case EntityLabel::time_offset: return j.get<double>();
        case EntityLabel::deictic_singular:
        case EntityLabel::deictic_plural: {
            const auto s = j.get<std::string>();
            if (s == "singular") return Deixis::singular;
            if (s == "plural") return Deixis::plural;
            throw InvalidInputError("unknown deixis '" + s + "'");
        }
    }
    return std::monostate{};
}

}  // namespace

std::string_view to_string(EntityLabel label) {
    for (const auto& [l, name] : kLabelNames) {
        if (l == label) return name;
    }
    return "unknown";
}

std::optional<EntityLabel> parse_entity_label(std::string_view name) {
    for (const auto& [l, n] : kLabelNames) {
        if (n == name) return l;
    }
    return std::nullopt;
}

void to_json(json& j, const EntitySpan& e) {
    j = json{{"label", std::string(to_string(e.label))},
             {"start", e.start},
             {"end", e.end},
             {"value", value_to_json(e)},
             {"confidence", e.confidence}};
    if (!e.parts.empty()) j["parts"] = e.parts;
}

void from_json(const json& j, EntitySpan& e) {
    const auto name = j.at("label").get<std::string>();
    auto label = parse_entity_label(name);
    if (!label) throw InvalidInputError("unknown entity label '" + name + "'");
    e.label = *label;
    e.start = j.at("start").get<std::size_t>();
    e.end = j.at("end").get<std::size_t>();
    e.value = value_from_json(e.label, j.value("value", json(nullptr)));
    e.confidence = j.value("confidence", 1.0);
    e.parts = j.value("parts", std::vector<EntitySpan>{});
}

void to_json(json& j, const NluResult& r) {
    json intents = json::array();
    for (const auto& s : r.intents) {
        intents.push_back({{"intent", s.intent}, {"confidence", s.confidence}});
    }
    j = json{{"text", r.utterance},
             {"speech_start", r.speech_start.count()},
             {"speech_end", r.speech_end.count()},
             {"intents", std::move(intents)},
             {"entities", r.entities}};
}

void from_json(const json& j, NluResult& r) {
    r.utterance = j.at("text").get<std::string>();
    r.speech_start = Millis{j.at("speech_start").get<std::int64_t>()};
    r.speech_end = Millis{j.at("speech_end").get<std::int64_t>()};
    if (r.speech_end < r.speech_start) throw InvalidInputError("speech ends before it starts");
    r.intents.clear();
    for (const auto& s : j.at("intents")) {
        IntentScore score{s.at("intent").get<Intent>(), s.at("confidence").get<double>()};
        if (!(score.confidence >= 0.0 && score.confidence <= 1.0)) {
            throw InvalidInputError("intent confidence must lie in [0, 1]");
        }
        r.intents.push_back(score);
    }
    r.entities = j.value("entities", std::vector<EntitySpan>{});
}

void to_json(json& j, const LabeledUtterance& u) {
    j = json{{"text", u.text}, {"intent", u.intent}, {"entities", u.entities}};
}

void from_json(const json& j, LabeledUtterance& u) {
    u.text = j.at("text").get<std::string>();
    u.intent = j.at("intent").get<Intent>();
    u.entities = j.value("entities", std::vector<EntitySpan>{});
}

void to_json(json& j, const NluModel& m) {
    json intents = json::array();
    for (auto i : kAllIntents) intents.push_back(i);
    json features = json::object();
    for (const auto& [f, stats] : m.features) {
        features[f] = {{"rate", stats.rate}, {"weight", stats.weight}};
    }
    json memorized = json::object();
    for (const auto& [text, intent] : m.memorized) memorized[text] = intent;
    json devices = json::object();
    for (const auto& [surface, device] : m.devices) devices[surface] = device;
    j = json{{"format", kModelFormat},  {"version", NluModel::kFormatVersion},
             {"intents", intents},      {"features", features},
             {"memorized", memorized},  {"devices", devices}};
}

void from_json(const json& j, NluModel& m) {
    if (j.value("format", "") != kModelFormat) throw LoadError("not an NLU model file");
    if (j.value("version", 0) != NluModel::kFormatVersion) {
        throw LoadError("unsupported NLU model version");
    }
    const auto& intents = j.at("intents");
    if (intents.size() != kAllIntents.size()) throw LoadError("model intent table mismatch");
    for (std::size_t i = 0; i < kAllIntents.size(); ++i) {
        if (intents[i].get<Intent>() != kAllIntents[i]) throw LoadError("model intent order mismatch");
    }
    m = NluModel{};
    for (const auto& [f, stats] : j.at("features").items()) {
        NluModel::FeatureStats s;
        s.rate = stats.at("rate").get<std::array<double, kAllIntents.size()>>();
        s.weight = stats.at("weight").get<double>();
        m.features.emplace(f, s);
    }
    for (const auto& [text, intent] : j.at("memorized").items()) {
        m.memorized.emplace(text, intent.get<Intent>());
    }
    for (const auto& [surface, device] : j.at("devices").items()) {
        m.devices.emplace(surface, device.get<Device>());
    }
}

void save_model(const NluModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write model file " + path.string());
    out << json(model).dump(1) << '\n';
}

NluModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open model file " + path.string());
    try {
        return json::parse(in).get<NluModel>();
    } catch (const json::exception& e) {
        throw LoadError("malformed model file " + path.string() + ": " + e.what());
    }
}

std::string corpus_to_string(std::span<const LabeledUtterance> corpus) {
    std::ostringstream out;
    out << json{{"format", kCorpusFormat}, {"version", kCorpusVersion}}.dump() << '\n';
    for (const auto& u : corpus) out << json(u).dump() << '\n';
    return out.str();
}

void save_corpus(std::span<const LabeledUtterance> corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write corpus file " + path.string());
    out << corpus_to_string(corpus);
}

std::vector<LabeledUtterance> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open corpus file " + path.string());
    std::vector<LabeledUtterance> corpus;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = json::parse(line);
            if (!header_seen) {
                header_seen = true;
                if (j.contains("format")) {
                    if (j.at("format") != kCorpusFormat || j.value("version", 0) != kCorpusVersion) {
                        throw LoadError("unsupported corpus header");
                    }
                    continue;
                }
            }
            corpus.push_back(j.get<LabeledUtterance>());
        } catch (const json::exception& e) {
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const InvalidInputError& e) {
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return corpus;
}

}  // namespace ctrlroom::nlu
