#include <algorithm>
#include <array>
#include <regex>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/nlu/nlu.hpp"
#include "text.hpp"

namespace ctrlroom::nlu {

using detail::Token;

namespace {

constexpr std::array<std::string_view, 20> kMonitorNouns = {
    "monitor", "monitors", "screen", "screens", "display", "displays", "video",
    "videos",  "camera",   "cameras", "feed",   "feeds",   "tile",     "tiles",
    "window",  "windows",  "cell",    "cells",  "stream",  "streams",
};

constexpr std::array<std::string_view, 9> kCardinals = {"one", "two",   "three", "four", "five",
                                                        "six", "seven", "eight", "nine"};

constexpr std::array<std::string_view, 9> kOrdinals = {
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth"};

constexpr std::array<std::string_view, 9> kOrdinalDigits = {"1st", "2nd", "3rd", "4th", "5th",
                                                            "6th", "7th", "8th", "9th"};

constexpr std::array<std::string_view, 10> kTeens = {
    "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
    "eighteen", "nineteen"};

constexpr std::array<std::string_view, 8> kTens = {"twenty", "thirty",  "forty",  "fifty",
                                                   "sixty",  "seventy", "eighty", "ninety"};

template <std::size_t N>
std::optional<int> index_in(const std::array<std::string_view, N>& words, std::string_view w) {
    auto it = std::find(words.begin(), words.end(), w);
    if (it == words.end()) return std::nullopt;
    return static_cast<int>(it - words.begin());
}

bool is_monitor_noun(std::string_view w) { return index_in(kMonitorNouns, w).has_value(); }

std::optional<int> cardinal(std::string_view w) {
    if (auto i = index_in(kCardinals, w)) return *i + 1;
    return std::nullopt;
}

std::optional<int> ordinal(std::string_view w) {
    if (auto i = index_in(kOrdinals, w)) return *i + 1;
    if (auto i = index_in(kOrdinalDigits, w)) return *i + 1;
    return std::nullopt;
}

std::optional<double> time_unit(std::string_view w) {
    if (w == "second" || w == "seconds" || w == "sec" || w == "secs") return 1.0;
    if (w == "minute" || w == "minutes" || w == "min" || w == "mins") return 60.0;
    if (w == "hour" || w == "hours") return 3600.0;
    return std::nullopt;
}

// Grid axis words. A row or a column, or the wildcard middle.
struct Axis {
    std::optional<int> row;
    std::optional<int> col;
    bool middle = false;
};

std::optional<Axis> axis_word(std::string_view w) {
    if (w == "north" || w == "upper" || w == "top") return Axis{1, std::nullopt};
    if (w == "south" || w == "lower" || w == "bottom") return Axis{3, std::nullopt};
    if (w == "west" || w == "left") return Axis{std::nullopt, 1};
    if (w == "east" || w == "right") return Axis{std::nullopt, 3};
    if (w == "middle" || w == "center" || w == "centre" || w == "central") {
        return Axis{std::nullopt, std::nullopt, true};
    }
    if (w == "northwest") return Axis{1, 1};
    if (w == "northeast") return Axis{1, 3};
    if (w == "southwest") return Axis{3, 1};
    if (w == "southeast") return Axis{3, 3};
    return std::nullopt;
}

struct Quantity {
    double value = 0.0;
    std::size_t next = 0;  // first token after the quantity
};

// Digits, number words up to ninety-nine, "a"/"an" and "half a".
std::optional<Quantity> parse_quantity(const std::vector<Token>& toks, std::size_t i) {
    if (i >= toks.size()) return std::nullopt;
    const std::string& w = toks[i].text;
    if (!w.empty() && std::isdigit(static_cast<unsigned char>(w[0]))) {
        try {
            std::size_t used = 0;
            double v = std::stod(w, &used);
            if (used == w.size()) return Quantity{v, i + 1};
        } catch (const std::exception&) {
        }
        return std::nullopt;
    }
    if (w == "half" && i + 1 < toks.size() && (toks[i + 1].text == "a" || toks[i + 1].text == "an")) {
        return Quantity{0.5, i + 2};
    }
    if (w == "a" || w == "an") return Quantity{1.0, i + 1};
    if (auto u = cardinal(w)) return Quantity{static_cast<double>(*u), i + 1};
    if (auto t = index_in(kTeens, w)) return Quantity{10.0 + *t, i + 1};
    if (auto t = index_in(kTens, w)) {
        double v = 20.0 + 10.0 * *t;
        if (i + 1 < toks.size()) {
            if (auto u = cardinal(toks[i + 1].text)) return Quantity{v + *u, i + 2};
        }
        return Quantity{v, i + 1};
    }
    return std::nullopt;
}

EntitySpan make_part(EntityLabel label, const Token& tok, int value) {
    EntitySpan p;
    p.label = label;
    p.start = tok.start;
    p.end = tok.end;
    p.value = value;
    return p;
}

struct Candidate {
    EntitySpan span;
    std::size_t tok_begin = 0;
    std::size_t tok_end = 0;  // exclusive
};

class Recognizer {
public:
    Recognizer(const NluModel& model, std::string_view text)
        : model_(model), text_(text), toks_(detail::tokenize(text)) {}

    std::vector<EntitySpan> run() {
        coordinates();
        row_column();
        numbered();
        ordinals();
        positional();
        central();
        deictics();
        devices();
        times();
        bare_digits();
        return select();
    }

private:
    const Token& tok(std::size_t i) const { return toks_[i]; }
    bool word_at(std::size_t i, std::string_view w) const {
        return i < toks_.size() && toks_[i].text == w;
    }
    bool noun_at(std::size_t i) const { return i < toks_.size() && is_monitor_noun(toks_[i].text); }
    bool noun_or_one_at(std::size_t i) const {
        return noun_at(i) || word_at(i, "one") || word_at(i, "ones");
    }

    void add(EntitySpan span, std::size_t b, std::size_t e) {
        candidates_.push_back({std::move(span), b, e});
    }

    // `fraction` is the matched share of the full pattern (core + optional cue words).
    void add_monitor(std::size_t b, std::size_t e, const MonitorReference& ref,
                     std::vector<EntitySpan> parts, double fraction) {
        EntitySpan span;
        span.label = EntityLabel::monitor;
        span.start = tok(b).start;
        span.end = tok(e - 1).end;
        span.parts = std::move(parts);
        try {
            span.value = resolve_monitor_reference(ref);
            span.confidence = fraction;
        } catch (const OutOfGridError&) {
            span.value = std::monostate{};
            span.confidence = fraction * 0.5;
        }
        add(std::move(span), b, e);
    }

    void add_ordinal_monitor(std::size_t b, std::size_t e, std::size_t number_tok, int n,
                             double fraction) {
        add_monitor(b, e, OrdinalRef{n}, {make_part(EntityLabel::ref, tok(number_tok), n)},
                    fraction);
    }

    std::optional<std::size_t> token_at_char(std::size_t c) const {
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            if (toks_[i].start <= c && c < toks_[i].end) return i;
        }
        return std::nullopt;
    }

    // "(2,2)", "monitor in (1, 3)".
    void coordinates() {
        static const std::regex pattern(R"(\(\s*(\d+)\s*[,;]\s*(\d+)\s*\))");
        const std::string text(text_);
        for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern);
             it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            auto row_tok = token_at_char(static_cast<std::size_t>(m.position(1)));
            auto col_tok = token_at_char(static_cast<std::size_t>(m.position(2)));
            if (!row_tok || !col_tok) continue;
            const int row = std::stoi(m.str(1));
            const int col = std::stoi(m.str(2));
            std::size_t b = *row_tok;
            double fraction = 2.0 / 3.0;
            if (b >= 2 && (word_at(b - 1, "in") || word_at(b - 1, "at")) && noun_at(b - 2)) {
                b -= 2;
                fraction = 1.0;
            } else if (b >= 1 && noun_at(b - 1)) {
                b -= 1;
                fraction = 1.0;
            }
            EntitySpan span;
            span.label = EntityLabel::monitor;
            span.start = b == *row_tok ? static_cast<std::size_t>(m.position(0)) : tok(b).start;
            span.end = static_cast<std::size_t>(m.position(0) + m.length(0));
            span.parts = {make_part(EntityLabel::ref_x, tok(*row_tok), row),
                          make_part(EntityLabel::ref_y, tok(*col_tok), col)};
            try {
                span.value = resolve_monitor_reference(GridRef{row, col});
                span.confidence = fraction;
            } catch (const OutOfGridError&) {
                span.confidence = fraction * 0.5;
            }
            add(std::move(span), b, *col_tok + 1);
        }
    }

    std::optional<int> number_at(std::size_t i) const {
        if (i >= toks_.size()) return std::nullopt;
        if (auto v = detail::parse_small_int(tok(i).text)) return v;
        return cardinal(tok(i).text);
    }

    // "row 2 column 3".
    void row_column() {
        for (std::size_t i = 0; i + 3 < toks_.size(); ++i) {
            if (!word_at(i, "row")) continue;
            auto row = number_at(i + 1);
            if (!row || !(word_at(i + 2, "column") || word_at(i + 2, "col"))) continue;
            auto col = number_at(i + 3);
            if (!col) continue;
            add_monitor(i, i + 4, GridRef{*row, *col},
                        {make_part(EntityLabel::ref_x, tok(i + 1), *row),
                         make_part(EntityLabel::ref_y, tok(i + 3), *col)},
                        1.0);
        }
    }

    bool time_follows(std::size_t i) const {
        return i < toks_.size() && time_unit(tok(i).text).has_value();
    }

    // "monitor number 9", "screen three", "monitors 3 and 7", "number 4".
    void numbered() {
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            const bool noun = noun_at(i);
            if (!noun && !word_at(i, "number")) continue;
            std::size_t j = i + 1;
            if (noun && (word_at(j, "number") || word_at(j, "no"))) ++j;
            auto n = number_at(j);
            if (!n || time_follows(j + 1)) continue;
            add_ordinal_monitor(i, j + 1, j, *n, noun ? 1.0 : 2.0 / 3.0);
            if (!noun) continue;
            // A list governed by the same noun: "monitors 3 and 7".
            std::size_t k = j + 1;
            while (k < toks_.size()) {
                std::size_t next = k;
                if (word_at(next, "and") || word_at(next, "with") || word_at(next, "to")) ++next;
                auto m = number_at(next);
                if (!m || next == k || time_follows(next + 1)) break;
                add_ordinal_monitor(next, next + 1, next, *m, 1.0);
                k = next + 1;
            }
        }
    }

    // "fifth monitor", "the first one", "last monitor".
    void ordinals() {
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            const bool with_noun = noun_or_one_at(i + 1);
            const std::size_t e = with_noun ? i + 2 : i + 1;
            const double fraction = with_noun ? 1.0 : 2.0 / 3.0;
            if (auto n = ordinal(tok(i).text)) {
                add_ordinal_monitor(i, e, i, *n, fraction);
            } else if (word_at(i, "last")) {
                // "the last 30 seconds" is a time expression, not a monitor.
                if (!with_noun && (number_at(i + 1) || time_follows(i + 1))) continue;
                add_monitor(i, e, ExtremalRef::last,
                            {make_part(EntityLabel::ref, tok(i), kMonitorCount)}, fraction);
            }
        }
    }

    // Compass and positional words: "north/west", "upper-left", "top center".
    void positional() {
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            auto a = axis_word(tok(i).text);
            if (!a) continue;
            std::size_t e = i + 1;
            int row = a->row.value_or(0);
            int col = a->col.value_or(0);
            int axes = (a->row ? 1 : 0) + (a->col ? 1 : 0) + (a->middle ? 1 : 0);
            if (axes < 2 && e < toks_.size()) {
                if (auto b = axis_word(tok(e).text)) {
                    const bool clash = (a->row && b->row) || (a->col && b->col) ||
                                       (a->middle && b->middle) || (b->row && b->col);
                    if (!clash) {
                        if (b->row) row = *b->row;
                        if (b->col) col = *b->col;
                        ++axes;
                        ++e;
                    }
                }
            }
            const bool both_fixed = row != 0 && col != 0;
            const bool two_words = e - i == 2 || (a->row && a->col);
            const bool noun = noun_or_one_at(e);
            if (!two_words && !noun) continue;   // lone "left", "top": too ambiguous
            if (!both_fixed && row == 0 && col == 0) continue;  // lone "center" is central()
            if (row == 0) row = 2;
            if (col == 0) col = 2;
            double fraction = two_words ? (noun ? 1.0 : 2.0 / 3.0) : 2.0 / 3.0;
            std::vector<EntitySpan> parts = {make_part(EntityLabel::ref_x, tok(i), row),
                                             make_part(EntityLabel::ref_y, tok(e - 1), col)};
            add_monitor(i, noun ? e + 1 : e, GridRef{row, col}, std::move(parts), fraction);
        }
    }

    // "central monitor", "monitor at the center", "the middle one".
    void central() {
        auto is_center = [](std::string_view w) {
            return w == "central" || w == "center" || w == "centre" || w == "middle";
        };
        const int center = resolve_monitor_reference(ExtremalRef::central).value;
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            if (!is_center(tok(i).text)) continue;
            std::size_t b = i;
            std::size_t e = i + 1;
            double fraction = 2.0 / 3.0;
            if (noun_or_one_at(i + 1)) {
                e = i + 2;
                fraction = 1.0;
            } else if (i >= 3 && word_at(i - 1, "the") &&
                       (word_at(i - 2, "at") || word_at(i - 2, "in")) && noun_or_one_at(i - 3)) {
                b = i - 3;
                fraction = 1.0;
            }
            add_monitor(b, e, ExtremalRef::central, {make_part(EntityLabel::ref, tok(i), center)},
                        fraction);
        }
    }

    void deictics() {
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            const std::string& w = tok(i).text;
            std::optional<Deixis> kind;
            if (w == "this" || w == "that" || w == "here" || w == "there") kind = Deixis::singular;
            if (w == "these" || w == "those") kind = Deixis::plural;
            if (!kind) continue;
            std::size_t e = i + 1;
            if ((w == "this" || w == "that") && noun_or_one_at(e)) {
                ++e;
            } else if (*kind == Deixis::plural) {
                if (word_at(e, "two")) ++e;
                if (noun_or_one_at(e)) ++e;
            }
            EntitySpan span;
            span.label = *kind == Deixis::singular ? EntityLabel::deictic_singular
                                                   : EntityLabel::deictic_plural;
            span.start = tok(i).start;
            span.end = tok(e - 1).end;
            span.value = *kind;
            add(std::move(span), i, e);
        }
    }

    void devices() {
        // Multi-word lexicon entries ("room speakers") are matched token by token.
        for (const auto& [surface, device] : model_.devices) {
            const auto words = detail::tokenize(surface);
            if (words.empty()) continue;
            for (std::size_t i = 0; i + words.size() <= toks_.size(); ++i) {
                bool match = true;
                for (std::size_t k = 0; k < words.size() && match; ++k) {
                    match = toks_[i + k].text == words[k].text;
                }
                if (!match) continue;
                EntitySpan span;
                span.label = EntityLabel::device;
                span.start = tok(i).start;
                span.end = tok(i + words.size() - 1).end;
                span.value = device;
                add(std::move(span), i, i + words.size());
            }
        }
    }

    // "30 seconds", "a minute", "one minute and thirty seconds", "half a minute".
    void times() {
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            auto q = parse_quantity(toks_, i);
            if (!q || q->next >= toks_.size()) continue;
            auto unit = time_unit(tok(q->next).text);
            if (!unit) continue;
            double seconds = q->value * *unit;
            std::size_t e = q->next + 1;
            std::size_t k = word_at(e, "and") ? e + 1 : e;
            if (auto q2 = parse_quantity(toks_, k); q2 && q2->next < toks_.size()) {
                if (auto u2 = time_unit(tok(q2->next).text); u2 && *u2 < *unit) {
                    seconds += q2->value * *u2;
                    e = q2->next + 1;
                }
            }
            EntitySpan span;
            span.label = EntityLabel::time_offset;
            span.start = tok(i).start;
            span.end = tok(e - 1).end;
            span.value = seconds;
            add(std::move(span), i, e);
        }
    }

    // "swap 1 and 9": a bare digit is a weaker monitor reference.
    void bare_digits() {
        for (std::size_t i = 0; i < toks_.size(); ++i) {
            auto n = detail::parse_small_int(tok(i).text);
            if (!n || time_follows(i + 1)) continue;
            add_ordinal_monitor(i, i + 1, i, *n, 2.0 / 3.0);
        }
    }

    std::vector<EntitySpan> select() {
        std::stable_sort(candidates_.begin(), candidates_.end(),
                         [](const Candidate& a, const Candidate& b) {
                             const auto la = a.tok_end - a.tok_begin;
                             const auto lb = b.tok_end - b.tok_begin;
                             if (la != lb) return la > lb;
                             if (a.span.start != b.span.start) return a.span.start < b.span.start;
                             return a.span.confidence > b.span.confidence;
                         });
        std::vector<EntitySpan> chosen;
        for (auto& c : candidates_) {
            const bool overlaps = std::any_of(chosen.begin(), chosen.end(), [&](const auto& s) {
                return c.span.start < s.end && s.start < c.span.end;
            });
            if (!overlaps) chosen.push_back(std::move(c.span));
        }
        std::sort(chosen.begin(), chosen.end(),
                  [](const auto& a, const auto& b) { return a.start < b.start; });
        return chosen;
    }

    const NluModel& model_;
    std::string_view text_;
    std::vector<Token> toks_;
    std::vector<Candidate> candidates_;
};

}  // namespace

std::optional<MonitorId> EntitySpan::monitor() const {
    if (const auto* m = std::get_if<MonitorId>(&value)) return *m;
    return std::nullopt;
}

MonitorId resolve_monitor_reference(const MonitorReference& ref, int rows, int cols) {
    if (const auto* o = std::get_if<OrdinalRef>(&ref)) {
        if (o->n < 1 || o->n > rows * cols) {
            throw OutOfGridError("monitor number " + std::to_string(o->n) + " is off the grid");
        }
        return MonitorId{o->n};
    }
    if (const auto* g = std::get_if<GridRef>(&ref)) {
        if (g->row < 1 || g->row > rows || g->col < 1 || g->col > cols) {
            throw OutOfGridError("cell (" + std::to_string(g->row) + "," + std::to_string(g->col) +
                                 ") is off the grid");
        }
        return MonitorId{(g->row - 1) * cols + g->col};
    }
    switch (std::get<ExtremalRef>(ref)) {
        case ExtremalRef::central:
            return resolve_monitor_reference(GridRef{(rows + 1) / 2, (cols + 1) / 2}, rows, cols);
        case ExtremalRef::last:
            return MonitorId{rows * cols};
    }
    throw OutOfGridError("unknown monitor reference");
}

std::vector<EntitySpan> extract_entities(const NluModel& model, std::string_view utterance) {
    return Recognizer(model, utterance).run();
}

std::map<std::string, Device, std::less<>> default_device_lexicon() {
    return {
        {"headset", Device::headset},      {"headsets", Device::headset},
        {"headphones", Device::headset},   {"headphone", Device::headset},
        {"earphones", Device::headset},    {"earphone", Device::headset},
        {"earbuds", Device::headset},      {"speakers", Device::speakers},
        {"speaker", Device::speakers},     {"loudspeakers", Device::speakers},
        {"loudspeaker", Device::speakers}, {"room speakers", Device::speakers},
    };
}

}  // namespace ctrlroom::nlu
