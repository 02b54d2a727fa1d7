#include <doctest.h>

#include <filesystem>
#include <set>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/nlu/nlu.hpp"
#include "support/oracles.hpp"
#include "support/rng.hpp"

using namespace ctrlroom;
using namespace ctrlroom::nlu;

namespace {

std::vector<LabeledUtterance> small_corpus() {
    return {
        {"zoom in on this monitor", Intent::zoom_in, {}},
        {"enlarge the fifth monitor", Intent::zoom_in, {}},
        {"make monitor 3 full screen", Intent::zoom_in, {}},
        {"zoom out", Intent::zoom_out, {}},
        {"go back to the matrix view", Intent::zoom_out, {}},
        {"show all the monitors", Intent::zoom_out, {}},
        {"put these two side by side", Intent::split_screen, {}},
        {"compare monitor 1 with monitor 2", Intent::split_screen, {}},
        {"split the screen between this one and that one", Intent::split_screen, {}},
        {"swap this monitor with this one", Intent::swap, {}},
        {"exchange monitor 4 and monitor 6", Intent::swap, {}},
        {"switch these two monitors", Intent::swap, {}},
        {"play the audio on the speakers", Intent::audio_to_device, {}},
        {"send the sound to my headset", Intent::audio_to_device, {}},
        {"turn the audio off", Intent::audio_off, {}},
        {"mute the sound", Intent::audio_off, {}},
        {"go back ten seconds", Intent::rewind, {}},
        {"rewind thirty seconds", Intent::rewind, {}},
        {"skip ahead twenty seconds", Intent::forward, {}},
        {"fast forward one minute", Intent::forward, {}},
    };
}

const NluModel& model() {
    static const NluModel m = train(small_corpus());
    return m;
}

std::vector<EntitySpan> monitors(const std::vector<EntitySpan>& spans) {
    std::vector<EntitySpan> out;
    for (const auto& s : spans) {
        if (s.label == EntityLabel::monitor) out.push_back(s);
    }
    return out;
}

}  // namespace

TEST_CASE("one utterance per intent is memorized") {
    std::vector<LabeledUtterance> corpus;
    const char* texts[] = {"zoom in", "zoom out", "side by side", "swap them",
                           "audio on speakers", "audio off", "go back", "go forward"};
    for (std::size_t i = 0; i < kAllIntents.size(); ++i) corpus.push_back({texts[i], kAllIntents[i], {}});
    const auto m = train(corpus);
    for (const auto& u : corpus) {
        const auto scores = classify(m, u.text);
        CHECK(scores.front().intent == u.intent);
        CHECK(scores.front().confidence == 1.0);
    }
}

TEST_CASE("conflicting labels for the same text do not train") {
    auto corpus = small_corpus();
    corpus.push_back({"Zoom  OUT", Intent::zoom_in, {}});
    CHECK_THROWS_AS(train(corpus), TrainingError);
}

TEST_CASE("a corpus missing an intent does not train") {
    auto corpus = small_corpus();
    std::erase_if(corpus, [](const auto& u) { return u.intent == Intent::forward; });
    CHECK_THROWS_AS(train(corpus), IncompleteCorpusError);
}

TEST_CASE("paraphrases classify to their intent") {
    CHECK(classify(model(), "swap this monitor with this one").front().intent == Intent::swap);
    CHECK(classify(model(), "zoom out").front().intent == Intent::zoom_out);
    CHECK(classify(model(), "please turn the audio off").front().intent == Intent::audio_off);
}

TEST_CASE("blank input is rejected") {
    CHECK_THROWS_AS(classify(model(), "   "), InvalidInputError);
}

TEST_CASE("classification is total and deterministic") {
    gen::Rng r(21);
    const char* words[] = {"monitor", "the", "zoom", "this", "audio", "back", "swap", "two", "xyzzy", "5", "please"};
    for (int i = 0; i < 300; ++i) {
        std::string text;
        const int n = r.integer(1, 7);
        for (int k = 0; k < n; ++k) text += std::string(k ? " " : "") + words[r.integer(0, 10)];
        const auto a = classify(model(), text);
        const auto b = classify(model(), text);
        REQUIRE(a.size() == kAllIntents.size());
        std::set<Intent> seen;
        double sum = 0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            seen.insert(a[k].intent);
            CHECK(a[k].intent == b[k].intent);
            CHECK(a[k].confidence == b[k].confidence);
            CHECK(a[k].confidence >= 0.0);
            CHECK(a[k].confidence <= 1.0);
            if (k) CHECK(a[k - 1].confidence >= a[k].confidence);
            sum += a[k].confidence;
        }
        CHECK(seen.size() == kAllIntents.size());
        CHECK((sum == doctest::Approx(1.0) || sum == 0.0));
    }
}

TEST_CASE("training texts classify as their own label") {
    gen::Rng r(22);
    const char* words[] = {"alpha", "bravo", "monitor", "zoom", "audio", "two", "left", "back", "screen"};
    for (int round = 0; round < 20; ++round) {
        std::vector<LabeledUtterance> corpus;
        std::set<std::string> used;
        for (auto intent : kAllIntents) {
            for (int k = 0; k < r.integer(1, 6); ++k) {
                std::string text;
                for (int w = 0; w < r.integer(1, 5); ++w) text += std::string(w ? " " : "") + words[r.integer(0, 8)];
                if (!used.insert(normalize_text(text)).second) continue;
                corpus.push_back({text, intent, {}});
            }
            // guarantee coverage with a label-unique text
            corpus.push_back({"only " + std::string(to_string(intent)), intent, {}});
        }
        const auto m = train(corpus);
        for (const auto& u : corpus) CHECK(classify(m, u.text).front().intent == u.intent);
    }
}

TEST_CASE("grid coordinates resolve row-major") {
    const auto spans = monitors(extract_entities(model(), "monitor in (2,2)"));
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].monitor() == MonitorId{5});
    REQUIRE(spans[0].parts.size() == 2);
    CHECK(spans[0].parts[0].label == EntityLabel::ref_x);
    CHECK(std::get<int>(spans[0].parts[0].value) == 2);
    CHECK(spans[0].parts[1].label == EntityLabel::ref_y);
    CHECK(std::get<int>(spans[0].parts[1].value) == 2);
}

TEST_CASE("two singular deictics") {
    const auto spans = extract_entities(model(), "this one and that one");
    REQUIRE(spans.size() == 2);
    for (const auto& s : spans) CHECK(s.label == EntityLabel::deictic_singular);
    CHECK(spans[0].end <= spans[1].start);
}

TEST_CASE("plural deictic") {
    const auto spans = extract_entities(model(), "put these two side by side");
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].label == EntityLabel::deictic_plural);
}

TEST_CASE("numbered, ordinal and compass references") {
    CHECK(monitors(extract_entities(model(), "monitor number 9")).at(0).monitor() == MonitorId{9});
    CHECK(monitors(extract_entities(model(), "the fifth monitor")).at(0).monitor() == MonitorId{5});
    CHECK(monitors(extract_entities(model(), "the north/west monitor")).at(0).monitor() == MonitorId{1});
    CHECK(monitors(extract_entities(model(), "the last monitor")).at(0).monitor() == MonitorId{9});
    CHECK(monitors(extract_entities(model(), "the monitor at the center")).at(0).monitor() == MonitorId{5});
    CHECK(monitors(extract_entities(model(), "the upper right monitor")).at(0).monitor() == MonitorId{3});
    CHECK(monitors(extract_entities(model(), "the lower left monitor")).at(0).monitor() == MonitorId{7});
}

TEST_CASE("reference resolution") {
    CHECK(resolve_monitor_reference(OrdinalRef{5}) == MonitorId{5});
    CHECK(resolve_monitor_reference(GridRef{1, 1}) == MonitorId{1});
    CHECK(resolve_monitor_reference(ExtremalRef::central) == MonitorId{5});
    CHECK(resolve_monitor_reference(ExtremalRef::last) == MonitorId{9});
    CHECK_THROWS_AS(resolve_monitor_reference(OrdinalRef{10}), OutOfGridError);
    CHECK_THROWS_AS(resolve_monitor_reference(GridRef{4, 1}), OutOfGridError);
}

TEST_CASE("ordinals and grid cells are in bijection") {
    std::set<int> seen;
    for (int n = 1; n <= 9; ++n) {
        const auto [row, col] = oracle::ordinal_to_row_col(n);
        CHECK(resolve_monitor_reference(OrdinalRef{n}) == resolve_monitor_reference(GridRef{row, col}));
        seen.insert(resolve_monitor_reference(GridRef{row, col}).value);
    }
    CHECK(seen.size() == 9);
}

TEST_CASE("spans of distinct monitor mentions never overlap") {
    // phrase and the monitor it names, by row-major reading
    const std::vector<std::pair<std::string, int>> forms = {
        {"the fifth monitor", 5}, {"monitor 3", 3},           {"monitor number 8", 8},
        {"the monitor in (3,1)", 7}, {"the upper left monitor", 1}, {"the last monitor", 9},
        {"the second monitor", 2}, {"monitor four", 4},        {"the south/east monitor", 9},
        {"the middle right monitor", 6},
    };
    const char* glue[] = {" and ", " with ", " next to ", ", then "};
    gen::Rng r(23);
    for (int i = 0; i < 300; ++i) {
        std::string text = "compare ";
        std::vector<int> expect;
        const int n = r.integer(1, 3);
        for (int k = 0; k < n; ++k) {
            const auto& [phrase, id] = forms[r.integer(0, static_cast<int>(forms.size()) - 1)];
            if (k) text += glue[r.integer(0, 3)];
            text += phrase;
            expect.push_back(id);
        }
        const auto spans = monitors(extract_entities(model(), text));
        REQUIRE(spans.size() == expect.size());
        for (std::size_t k = 0; k < spans.size(); ++k) {
            CHECK(spans[k].monitor() == MonitorId{expect[k]});
            CHECK(spans[k].start < spans[k].end);
            CHECK(spans[k].end <= text.size());
            if (k) CHECK(spans[k - 1].end <= spans[k].start);
        }
    }
}

TEST_CASE("devices and time offsets") {
    const auto dev = extract_entities(model(), "play the audio on the speakers");
    REQUIRE(dev.size() == 1);
    CHECK(dev[0].label == EntityLabel::device);
    CHECK(std::get<Device>(dev[0].value) == Device::speakers);

    const auto time = extract_entities(model(), "go back ten seconds");
    REQUIRE(time.size() == 1);
    CHECK(time[0].label == EntityLabel::time_offset);
    CHECK(std::get<double>(time[0].value) == 10.0);

    const auto minutes = extract_entities(model(), "skip ahead 2 minutes");
    REQUIRE(minutes.size() == 1);
    CHECK(std::get<double>(minutes[0].value) == 120.0);
}

TEST_CASE("understand packages intents and entities with the speech interval") {
    const auto r = understand(model(), "swap this monitor with this one", Millis{100}, Millis{1900});
    CHECK(r.top_intent() == Intent::swap);
    CHECK(r.speech_start == Millis{100});
    CHECK(r.speech_end == Millis{1900});
    CHECK(r.entities.size() == 2);
    CHECK(nlohmann::json(r).get<NluResult>().utterance == r.utterance);
}

TEST_CASE("models survive save and load") {
    const auto path = std::filesystem::temp_directory_path() / "ctrlroom_test_model.json";
    save_model(model(), path);
    const auto loaded = load_model(path);
    std::filesystem::remove(path);
    for (const char* text : {"zoom out", "compare the left monitor with this one", "mute", "rewind a bit"}) {
        const auto a = classify(model(), text), b = classify(loaded, text);
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a[k].intent == b[k].intent);
            CHECK(a[k].confidence == doctest::Approx(b[k].confidence).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), LoadError);
}
