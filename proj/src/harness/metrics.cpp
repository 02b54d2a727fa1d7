#include <fstream>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/harness/scenario.hpp"

namespace ctrlroom::harness {

using nlohmann::json;

std::string_view to_string(OutcomeLabel l) {
    switch (l) {
        case OutcomeLabel::S: return "S";
        case OutcomeLabel::PS: return "PS";
        case OutcomeLabel::F: return "F";
    }
    return "F";
}

OutcomeLabel parse_outcome_label(std::string_view s) {
    if (s == "S") return OutcomeLabel::S;
    if (s == "PS") return OutcomeLabel::PS;
    if (s == "F") return OutcomeLabel::F;
    throw InvalidInputError("unknown outcome label '" + std::string(s) + "'");
}

double task_completion_rate(std::span<const OutcomeLabel> outcomes) {
    if (outcomes.empty()) throw UndefinedMetricError("task completion rate of no tasks");
    double score = 0.0;
    for (auto l : outcomes) {
        if (l == OutcomeLabel::S) score += 1.0;
        if (l == OutcomeLabel::PS) score += 0.5;
    }
    return score / static_cast<double>(outcomes.size());
}

double task_completion_rate(std::span<const Outcome> outcomes) {
    std::vector<OutcomeLabel> labels;
    for (const auto& o : outcomes) labels.push_back(o.label);
    return task_completion_rate(labels);
}

ModuleRates module_success_rates(std::span<const json> records) {
    ModuleRates r;
    std::size_t nlu_ok = 0, gesture_ok = 0;
    for (const auto& rec : records) {
        const auto truth = rec.find("truth");
        if (truth == rec.end() || !truth->is_object()) continue;
        const auto type = rec.value("type", "");
        if (type == "nlu" && truth->contains("intent")) {
            ++r.utterances;
            const auto& top = rec.value("top_intent", json(nullptr));
            if (!top.is_null() && top == truth->at("intent")) ++nlu_ok;
        } else if (type == "gesture" && truth->contains("object")) {
            ++r.gestures;
            if (rec.value("object", json(nullptr)) == truth->at("object")) ++gesture_ok;
        }
    }
    if (r.utterances == 0 && r.gestures == 0) {
        throw UndefinedMetricError("the log has no annotated interactions");
    }
    if (r.utterances) r.nlu_success_rate = static_cast<double>(nlu_ok) / r.utterances;
    if (r.gestures) r.gesture_accuracy = static_cast<double>(gesture_ok) / r.gestures;
    return r;
}

json report_to_json(const MetricsReport& r) {
    json outcomes = json::array();
    for (const auto& o : r.outcomes) {
        outcomes.push_back({{"scenario", o.scenario_id},
                            {"label", std::string(to_string(o.label))},
                            {"detail", o.detail}});
    }
    json j{{"outcomes", outcomes}};
    j["task_completion_rate"] = r.task_completion_rate ? json(*r.task_completion_rate) : json(nullptr);
    j["nlu_success_rate"] = r.nlu_success_rate ? json(*r.nlu_success_rate) : json(nullptr);
    j["gesture_accuracy"] = r.gesture_accuracy ? json(*r.gesture_accuracy) : json(nullptr);
    return j;
}

std::vector<OutcomeLabel> outcome_grid_from_json(const json& j) {
    std::vector<OutcomeLabel> out;
    try {
        for (const auto& user : j.at("users")) {
            for (const auto& l : user.at("outcomes")) out.push_back(parse_outcome_label(l.get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("malformed outcome grid: ") + e.what());
    } catch (const InvalidInputError& e) {
        throw LoadError(std::string("malformed outcome grid: ") + e.what());
    }
    return out;
}

std::vector<OutcomeLabel> load_outcome_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    try {
        return outcome_grid_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

}  // namespace ctrlroom::harness
