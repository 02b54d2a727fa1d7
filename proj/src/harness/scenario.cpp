#include <algorithm>
#include <fstream>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/harness/scenario.hpp"

namespace ctrlroom::harness {

using nlohmann::json;

namespace {

ScenarioEvent event_from_json(const json& e) {
    ScenarioEvent ev;
    ev.t = Millis{e.at("t_ms").get<std::int64_t>()};
    const auto kind = e.at("kind").get<std::string>();
    const auto& p = e.at("payload");
    if (kind == "skeleton") {
        SkeletonInput in;
        if (p.contains("generate")) {
            const auto& g = p.at("generate");
            in.targets = g.at("targets").get<std::vector<MonitorId>>();
            in.profile = g.get<TraceProfile>();
        } else {
            in.frames = p.at("frames").get<std::vector<geometry::SkeletonFrame>>();
        }
        ev.payload = std::move(in);
    } else if (kind == "gesture") {
        auto g = p.get<geometry::GestureEvent>();
        if (g.end != ev.t) throw LoadError("gesture event must be stamped at its end time");
        ev.payload = g;
    } else if (kind == "utterance") {
        UtteranceInput u;
        u.text = p.at("text").get<std::string>();
        u.duration = Millis{p.value("duration_ms", u.duration.count())};
        if (u.duration.count() < 0) throw LoadError("utterance duration must be non-negative");
        if (p.contains("intent")) u.intent = p.at("intent").get<Intent>();
        ev.payload = std::move(u);
    } else {
        throw LoadError("unknown event kind '" + kind + "'");
    }
    return ev;
}

json event_to_json(const ScenarioEvent& ev) {
    json e{{"t_ms", ev.t.count()}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SkeletonInput>) {
                e["kind"] = "skeleton";
                if (p.targets) {
                    json g = p.profile;
                    g["targets"] = *p.targets;
                    e["payload"] = json{{"generate", g}};
                } else {
                    e["payload"] = json{{"frames", p.frames}};
                }
            } else if constexpr (std::is_same_v<T, geometry::GestureEvent>) {
                e["kind"] = "gesture";
                e["payload"] = p;
            } else {
                e["kind"] = "utterance";
                json u{{"text", p.text}, {"duration_ms", p.duration.count()}};
                if (p.intent) u["intent"] = *p.intent;
                e["payload"] = u;
            }
        },
        ev.payload);
    return e;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
    try {
        Scenario s;
        s.id = j.at("id").get<std::string>();
        s.description = j.value("description", "");
        for (const auto& e : j.at("events")) s.events.push_back(event_from_json(e));
        for (std::size_t i = 1; i < s.events.size(); ++i) {
            if (s.events[i].t < s.events[i - 1].t) {
                throw LoadError("scenario " + s.id + ": events are not in time order");
            }
        }
        s.expected = j.at("expected").get<std::vector<Action>>();
        return s;
    } catch (const json::exception& e) {
        throw LoadError(std::string("malformed scenario: ") + e.what());
    } catch (const LoadError&) {
        throw;
    } catch (const Error& e) {
        throw LoadError(std::string("malformed scenario: ") + e.what());
    }
}

json scenario_to_json(const Scenario& s) {
    json events = json::array();
    for (const auto& ev : s.events) events.push_back(event_to_json(ev));
    return json{{"id", s.id}, {"description", s.description}, {"events", events}, {"expected", s.expected}};
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open scenario " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    try {
        return scenario_from_json(j);
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw LoadError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig c;
    try {
        if (j.contains("pointing")) c.pointing = j.at("pointing").get<geometry::PointingConfig>();
        if (j.contains("fusion")) c.fusion = j.at("fusion").get<fusion::FusionConfig>();
    } catch (const json::exception& e) {
        throw LoadError(std::string("malformed config: ") + e.what());
    } catch (const InvalidInputError& e) {
        throw LoadError(std::string("invalid config: ") + e.what());
    }
    return c;
}

json pipeline_config_to_json(const PipelineConfig& c) {
    return json{{"pointing", c.pointing}, {"fusion", c.fusion}};
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    auto c = pipeline_config_from_json(j);
    if (auto it = j.find("nlu_model"); it != j.end() && it->is_string()) {
        std::filesystem::path model = it->get<std::string>();
        if (model.is_relative()) model = path.parent_path() / model;
        c.model = std::make_shared<const nlu::NluModel>(nlu::load_model(model));
    }
    return c;
}

std::shared_ptr<const nlu::NluModel> default_model() {
    static const std::shared_ptr<const nlu::NluModel> model = [] {
        const auto corpus = generate_corpus(kDefaultCorpusSize, kDefaultCorpusSeed);
        return std::make_shared<const nlu::NluModel>(nlu::train(corpus));
    }();
    return model;
}

}  // namespace ctrlroom::harness
