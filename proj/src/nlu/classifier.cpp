#include <algorithm>
#include <cmath>
#include <set>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/nlu/nlu.hpp"
#include "text.hpp"

namespace ctrlroom::nlu {

namespace {

constexpr std::size_t kIntentCount = kAllIntents.size();
constexpr double kBigramWeight = 1.5;
constexpr double kSmoothing = 0.5;

std::size_t intent_index(Intent i) {
    return static_cast<std::size_t>(std::find(kAllIntents.begin(), kAllIntents.end(), i) -
                                    kAllIntents.begin());
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

// Entity mentions collapse to their label so "monitor 3" and "the fifth
// screen" share features.
std::vector<std::string> masked_words(const NluModel& model, std::string_view utterance) {
    const auto entities = extract_entities(model, utterance);
    std::vector<std::string> out;
    std::size_t e = 0;
    std::size_t emitted = entities.size();
    for (const auto& tok : detail::tokenize(utterance)) {
        while (e < entities.size() && entities[e].end <= tok.start) ++e;
        if (e < entities.size() && entities[e].start <= tok.start && tok.end <= entities[e].end) {
            if (emitted != e) {
                out.push_back("<" + std::string(to_string(entities[e].label)) + ">");
                emitted = e;
            }
            continue;
        }
        out.push_back(detail::stem(tok.text));
    }
    return out;
}

double feature_weight(std::string_view f) {
    return f.find('|') == std::string_view::npos ? 1.0 : kBigramWeight;
}

}  // namespace

std::optional<Intent> NluResult::top_intent() const {
    if (intents.empty()) return std::nullopt;
    return intents.front().intent;
}

std::string normalize_text(std::string_view text) {
    std::string out;
    for (const auto& tok : detail::tokenize(text)) {
        if (!out.empty()) out.push_back(' ');
        out += tok.text;
    }
    return out;
}

std::vector<std::string> features_of(const NluModel& model, std::string_view utterance) {
    const auto words = masked_words(model, utterance);
    std::set<std::string> unique(words.begin(), words.end());
    for (std::size_t i = 0; i + 1 < words.size(); ++i) unique.insert(words[i] + "|" + words[i + 1]);
    return {unique.begin(), unique.end()};
}

NluModel train(std::span<const LabeledUtterance> corpus) {
    NluModel model;
    model.devices = default_device_lexicon();

    // Annotated device spans extend the lexicon before features are computed,
    // so new synonyms are masked consistently.
    for (const auto& u : corpus) {
        for (const auto& e : u.entities) {
            if (e.end > u.text.size() || e.start > e.end) {
                throw TrainingError("entity span outside utterance: \"" + u.text + "\"");
            }
            if (e.label != EntityLabel::device) continue;
            if (const auto* d = std::get_if<Device>(&e.value)) {
                const auto surface = normalize_text(u.text.substr(e.start, e.end - e.start));
                if (!surface.empty()) model.devices.emplace(surface, *d);
            }
        }
    }

    std::array<double, kIntentCount> examples{};
    std::map<std::string, std::array<double, kIntentCount>, std::less<>> doc_freq;
    for (const auto& u : corpus) {
        const auto key = normalize_text(u.text);
        if (key.empty()) throw TrainingError("corpus contains an empty utterance");
        auto [it, inserted] = model.memorized.emplace(key, u.intent);
        if (!inserted && it->second != u.intent) {
            throw TrainingError("utterance \"" + u.text + "\" is labeled both " +
                                std::string(to_string(it->second)) + " and " +
                                std::string(to_string(u.intent)));
        }
        const auto idx = intent_index(u.intent);
        examples[idx] += 1.0;
        for (const auto& f : features_of(model, u.text)) doc_freq[f][idx] += 1.0;
    }
    for (std::size_t i = 0; i < kIntentCount; ++i) {
        if (examples[i] == 0.0) {
            throw IncompleteCorpusError("no training example for intent " +
                                        std::string(to_string(kAllIntents[i])));
        }
    }

    // Laplace-smoothed presence rate per intent; salience is kept for inspection.
    const double max_entropy = std::log(static_cast<double>(kIntentCount));
    for (const auto& [f, df] : doc_freq) {
        NluModel::FeatureStats stats;
        std::array<double, kIntentCount> share{};
        double total = 0.0;
        for (std::size_t i = 0; i < kIntentCount; ++i) {
            stats.rate[i] = (df[i] + kSmoothing) / (examples[i] + 2.0 * kSmoothing);
            share[i] = df[i] / examples[i];
            total += share[i];
        }
        double entropy = 0.0;
        for (double x : share) {
            if (x > 0.0) entropy -= (x / total) * std::log(x / total);
        }
        stats.weight = std::max(0.0, 1.0 - entropy / max_entropy);
        model.features.emplace(f, stats);
    }
    return model;
}

std::vector<IntentScore> classify(const NluModel& model, std::string_view utterance) {
    if (is_blank(utterance)) throw InvalidInputError("cannot classify an empty utterance");

    std::array<double, kIntentCount> score{};
    if (auto it = model.memorized.find(normalize_text(utterance)); it != model.memorized.end()) {
        score[intent_index(it->second)] = 1.0;
    } else {
        std::array<double, kIntentCount> log_score{};
        bool known = false;
        for (const auto& f : features_of(model, utterance)) {
            auto it2 = model.features.find(f);
            if (it2 == model.features.end()) continue;
            known = true;
            for (std::size_t i = 0; i < kIntentCount; ++i) {
                log_score[i] += it2->second.weight * feature_weight(f) * std::log(it2->second.rate[i]);
            }
        }
        // Nothing recognisable leaves every intent at zero confidence.
        if (known) {
            const double top = *std::max_element(log_score.begin(), log_score.end());
            double z = 0.0;
            for (std::size_t i = 0; i < kIntentCount; ++i) z += std::exp(log_score[i] - top);
            for (std::size_t i = 0; i < kIntentCount; ++i) score[i] = std::exp(log_score[i] - top) / z;
        }
    }

    std::vector<IntentScore> ranked;
    ranked.reserve(kIntentCount);
    for (std::size_t i = 0; i < kIntentCount; ++i) {
        ranked.push_back({kAllIntents[i], std::clamp(score[i], 0.0, 1.0)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const IntentScore& a, const IntentScore& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return to_string(a.intent) < to_string(b.intent);
    });
    return ranked;
}

NluResult understand(const NluModel& model, std::string_view utterance, Millis speech_start,
                     Millis speech_end) {
    NluResult r;
    r.utterance = std::string(utterance);
    r.speech_start = speech_start;
    r.speech_end = speech_end;
    r.intents = classify(model, utterance);
    r.entities = extract_entities(model, utterance);
    return r;
}

}  // namespace ctrlroom::nlu
