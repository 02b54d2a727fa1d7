#include <random>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/harness/generators.hpp"

namespace ctrlroom::harness {

namespace {

constexpr std::array<std::string_view, 9> kOrdinals = {
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth"};
constexpr std::array<std::string_view, 9> kNumberWords = {
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"};
constexpr std::array<std::string_view, 4> kNouns = {"monitor", "screen", "camera", "video"};
constexpr std::array<std::string_view, 3> kRowWords = {"upper", "middle", "lower"};
constexpr std::array<std::string_view, 3> kColWords = {"left", "center", "right"};
constexpr std::array<std::string_view, 3> kNorthSouth = {"north", "", "south"};
constexpr std::array<std::string_view, 3> kWestEast = {"west", "", "east"};

struct MonitorForm {
    std::string text;
    std::optional<MonitorId> monitor;  // empty for deictics
};

// The elicited answer list, in the order operators gave it. Values follow the
// row-major resolution, so "upper-right" is 3 even though it was listed with 1.
const std::vector<MonitorForm>& answer_list() {
    static const std::vector<MonitorForm> forms = {
        {"the upper-right monitor", MonitorId{3}}, {"the monitor in (1,1)", MonitorId{1}},
        {"the first monitor", MonitorId{1}},       {"the north/west monitor", MonitorId{1}},
        {"the central monitor", MonitorId{5}},     {"the monitor in (2,2)", MonitorId{5}},
        {"the monitor at the center", MonitorId{5}}, {"the fifth monitor", MonitorId{5}},
        {"the lower-left monitor", MonitorId{7}},  {"the monitor in (3,3)", MonitorId{9}},
        {"the last monitor", MonitorId{9}},        {"monitor number 9", MonitorId{9}},
    };
    return forms;
}

const std::vector<std::string>& deictic_forms() {
    static const std::vector<std::string> forms = {"this monitor", "that one",   "this screen",
                                                   "this one",     "that camera", "that monitor"};
    return forms;
}

const std::vector<std::string>& plural_deictic_forms() {
    static const std::vector<std::string> forms = {"these two monitors", "those two", "these screens",
                                                   "these two", "those monitors"};
    return forms;
}

std::string positional(int row, int col, bool hyphen, std::string_view noun) {
    const std::string sep = hyphen ? "-" : " ";
    if (row == 2 && col == 2) return "the central " + std::string(noun);
    return "the " + std::string(kRowWords[row - 1]) + sep + std::string(kColWords[col - 1]) + " " +
           std::string(noun);
}

std::string compass(int row, int col, std::string_view noun) {
    std::string w;
    if (row != 2) w += kNorthSouth[row - 1];
    if (col != 2) w += (w.empty() ? "" : "/") + std::string(kWestEast[col - 1]);
    if (w.empty()) return "the central " + std::string(noun);
    return "the " + w + " " + std::string(noun);
}

class Builder {
public:
    void text(std::string_view s) { out_.text += s; }

    void entity(nlu::EntityLabel label, std::string_view surface, nlu::EntityValue value) {
        nlu::EntitySpan e;
        e.label = label;
        // Leading articles are not part of the reference.
        std::size_t skip = surface.rfind("the ", 0) == 0 ? 4 : 0;
        out_.text += surface.substr(0, skip);
        e.start = out_.text.size();
        out_.text += surface.substr(skip);
        e.end = out_.text.size();
        e.value = value;
        out_.entities.push_back(std::move(e));
    }

    nlu::LabeledUtterance finish(Intent intent) {
        out_.intent = intent;
        return std::move(out_);
    }

private:
    nlu::LabeledUtterance out_;
};

class Sampler {
public:
    Sampler(const CorpusGrammar& g, std::uint64_t seed) : g_(g), rng_(seed) {}

    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

    MonitorForm monitor_form() {
        if (canonical_ < answer_list().size()) return answer_list()[canonical_++];
        if (pick(4) == 0) return {deictic_forms()[pick(deictic_forms().size())], std::nullopt};
        const MonitorId m{static_cast<int>(pick(kMonitorCount)) + 1};
        const auto forms = monitor_reference_forms(m);
        return {forms[kind_++ % forms.size()], m};
    }

    void monitor(Builder& b) {
        auto f = monitor_form();
        if (f.monitor) {
            b.entity(nlu::EntityLabel::monitor, f.text, *f.monitor);
        } else {
            b.entity(nlu::EntityLabel::deictic_singular, f.text, nlu::Deixis::singular);
        }
    }

    void pair(Builder& b) {
        if (pick(2) == 0) {
            const auto& s = plural_deictic_forms()[pick(plural_deictic_forms().size())];
            b.entity(nlu::EntityLabel::deictic_plural, s, nlu::Deixis::plural);
            return;
        }
        monitor(b);
        b.text(" and ");
        monitor(b);
    }

    void device(Builder& b) {
        const auto& d = g_.devices[pick(g_.devices.size())];
        auto lex = nlu::default_device_lexicon();
        auto it = lex.find(d);
        if (it == lex.end()) throw InvalidInputError("device '" + d + "' is not in the lexicon");
        b.entity(nlu::EntityLabel::device, d, it->second);
    }

    void time(Builder& b) {
        const auto& [surface, seconds] = g_.times[pick(g_.times.size())];
        b.entity(nlu::EntityLabel::time_offset, surface, seconds);
    }

private:
    const CorpusGrammar& g_;
    std::mt19937_64 rng_;
    std::size_t canonical_ = 0;
    std::size_t kind_ = 0;
};

nlu::LabeledUtterance expand(Sampler& s, Intent intent, const std::string& tmpl) {
    Builder b;
    static constexpr std::array<std::string_view, 4> kPlaceholders = {"{mon}", "{pair}", "{dev}",
                                                                      "{time}"};
    std::size_t i = 0;
    while (i < tmpl.size()) {
        std::size_t next = std::string::npos;
        std::string_view which;
        for (auto p : kPlaceholders) {
            auto at = tmpl.find(p, i);
            if (at < next) {
                next = at;
                which = p;
            }
        }
        if (next == std::string::npos) {
            b.text(std::string_view(tmpl).substr(i));
            break;
        }
        b.text(std::string_view(tmpl).substr(i, next - i));
        if (which == "{mon}") s.monitor(b);
        if (which == "{pair}") s.pair(b);
        if (which == "{dev}") s.device(b);
        if (which == "{time}") s.time(b);
        i = next + which.size();
    }
    return b.finish(intent);
}

}  // namespace

std::vector<std::string> monitor_reference_forms(MonitorId m) {
    if (!is_valid_monitor(m)) throw InvalidInputError("monitor " + std::to_string(m.value) + " is not on the grid");
    const int row = (m.value - 1) / kGridCols + 1;
    const int col = (m.value - 1) % kGridCols + 1;
    const std::string n = std::to_string(m.value);
    const std::string coords = "(" + std::to_string(row) + "," + std::to_string(col) + ")";
    std::vector<std::string> forms = {
        "monitor " + n,
        "monitor number " + n,
        "screen " + std::string(kNumberWords[m.value - 1]),
        "the " + std::string(kOrdinals[m.value - 1]) + " monitor",
        "the " + std::string(kOrdinals[m.value - 1]) + " screen",
        "the monitor in " + coords,
        "the camera at " + coords,
        "row " + std::to_string(row) + " column " + std::to_string(col),
        positional(row, col, false, kNouns[0]),
        positional(row, col, true, kNouns[1]),
        compass(row, col, kNouns[0]),
    };
    if (m.value == kMonitorCount) forms.push_back("the last monitor");
    if (row == 2 && col == 2) forms.push_back("the monitor at the center");
    return forms;
}

const CorpusGrammar& default_grammar() {
    static const CorpusGrammar g = [] {
        CorpusGrammar g;
        g.templates = {
            {Intent::zoom_in,
             {"zoom in on {mon}", "zoom {mon}", "enlarge {mon}", "make {mon} bigger",
              "show {mon} in full screen", "maximize {mon}", "focus on {mon}",
              "can you zoom into {mon}", "i want to see {mon} bigger", "blow up {mon}",
              "expand {mon}", "bring {mon} to full screen", "give me a closer look at {mon}",
              "open {mon} full screen"}},
            {Intent::zoom_out,
             {"zoom out", "go back to the matrix view", "back to the grid", "show all the monitors",
              "return to the overview", "reset the view", "show me all nine cameras",
              "exit full screen", "restore the matrix", "zoom out please", "get back to the grid view",
              "show every camera again", "leave the full screen view", "make it small again"}},
            {Intent::split_screen,
             {"split {mon} and {mon}", "put {mon} and {mon} side by side", "compare {mon} with {mon}",
              "split the screen between {pair}", "show {pair} side by side",
              "i want to compare {mon} and {mon}", "split screen {mon} and {mon}",
              "place {mon} next to {mon}", "side by side view of {pair}", "compare {pair}"}},
            {Intent::swap,
             {"swap {mon} with {mon}", "swap {pair}", "exchange {mon} and {mon}",
              "switch {mon} with {mon}", "exchange the positions of {pair}",
              "put {mon} in place of {mon}", "move {mon} where {mon} is", "swap the videos of {pair}",
              "trade places between {mon} and {mon}", "switch {pair} around",
              "interchange {mon} and {mon}"}},
            {Intent::audio_to_device,
             {"play the audio of {mon} on the {dev}", "send the sound to the {dev}",
              "put the audio in my {dev}", "i want to hear {mon} in the {dev}",
              "route the audio to the {dev}", "listen to {mon} with the {dev}",
              "audio of {mon} to the {dev}", "let me hear it on the {dev}",
              "move the sound to the {dev}", "play it through the {dev}"}},
            {Intent::audio_off,
             {"mute the audio", "turn off the sound", "silence", "stop the audio", "mute everything",
              "no more sound please", "switch the audio off", "cut the sound", "mute",
              "turn the volume off", "kill the audio", "i do not want to hear anything"}},
            {Intent::rewind,
             {"go back {time}", "rewind {time}", "rewind {mon} by {time}", "go back {time} on {mon}",
              "jump back {time}", "move the video back {time}", "show me what happened {time} ago",
              "rewind the video {time}", "back up {time}", "replay the last {time}",
              "go back in time {time}"}},
            {Intent::forward,
             {"go forward {time}", "fast forward {time}", "skip ahead {time}",
              "move {mon} forward {time}", "jump ahead {time}", "advance the video by {time}",
              "forward {mon} by {time}", "skip {time} ahead", "move the video forward {time}",
              "go ahead {time}", "fast forward {mon} {time}"}},
        };
        g.devices = {"headset", "headphones", "speakers", "room speakers", "loudspeakers", "earphones"};
        g.times = {{"30 seconds", 30.0},   {"a minute", 60.0},          {"two minutes", 120.0},
                   {"ten seconds", 10.0},  {"half a minute", 30.0},     {"45 secs", 45.0},
                   {"5 minutes", 300.0},   {"one minute and thirty seconds", 90.0},
                   {"twenty seconds", 20.0}, {"an hour", 3600.0},      {"15 seconds", 15.0}};
        return g;
    }();
    return g;
}

std::vector<nlu::LabeledUtterance> generate_corpus(const CorpusGrammar& grammar, std::size_t n,
                                                   std::uint64_t seed) {
    if (n < kAllIntents.size()) throw InvalidInputError("a corpus needs at least one utterance per intent");
    for (auto i : kAllIntents) {
        auto it = std::find_if(grammar.templates.begin(), grammar.templates.end(),
                               [&](const auto& t) { return t.first == i && !t.second.empty(); });
        if (it == grammar.templates.end()) {
            throw InvalidInputError("grammar has no template for " + std::string(to_string(i)));
        }
    }

    Sampler s(grammar, seed);
    auto templates_of = [&](Intent i) -> const std::vector<std::string>& {
        for (const auto& [intent, ts] : grammar.templates) {
            if (intent == i) return ts;
        }
        throw InvalidInputError("no templates");
    };

    std::vector<nlu::LabeledUtterance> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Intent intent = k < kAllIntents.size() ? kAllIntents[k] : kAllIntents[s.pick(kAllIntents.size())];
        const auto& ts = templates_of(intent);
        out.push_back(expand(s, intent, ts[s.pick(ts.size())]));
    }
    return out;
}

}  // namespace ctrlroom::harness
