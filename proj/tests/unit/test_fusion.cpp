#include <doctest.h>

#include <set>
#include <sstream>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/fusion/engine.hpp"
#include "support/fusion_gen.hpp"

using namespace ctrlroom;
using namespace ctrlroom::fusion;
using gen::deictic;
using gen::gesture;
using gen::utterance;

namespace {

MonitorId m(int v) { return MonitorId{v}; }

std::vector<int> objects(const PointedObjectHistory& h) {
    std::vector<int> out;
    for (const auto& g : h) out.push_back(g.object.value);
    return out;
}

}  // namespace

TEST_CASE("gestures are kept newest first") {
    DialogueState s;
    const FusionConfig cfg;
    CHECK(ingest_gesture(s, gesture(3, 2000), cfg) == IngestStatus::accepted);
    CHECK(objects(s.pointed_history) == std::vector<int>{3});

    DialogueState t;
    ingest_gesture(t, gesture(9, 5000), cfg);
    ingest_gesture(t, gesture(1, 6000), cfg);
    CHECK(objects(t.pointed_history) == std::vector<int>{1, 9});
    // slightly late events are slotted in by time
    ingest_gesture(t, gesture(4, 5700), cfg);
    CHECK(objects(t.pointed_history) == std::vector<int>{1, 4, 9});
    CHECK(t.pointed_history.front().id == 2);
}

TEST_CASE("a gesture far behind the newest is dropped") {
    DialogueState s;
    const FusionConfig cfg;
    ingest_gesture(s, gesture(2, 10000), cfg);
    CHECK(ingest_gesture(s, gesture(7, 8000), cfg) == IngestStatus::dropped_late);
    CHECK(ingest_gesture(s, gesture(7, 9500), cfg) == IngestStatus::accepted);
    CHECK(objects(s.pointed_history) == std::vector<int>{2, 7});
}

TEST_CASE("stale pointing is pruned at exactly four seconds") {
    PointedObjectHistory h{gesture(1, 6000 - 3999), gesture(2, 6000 - 4000), gesture(3, 6000 - 4001)};
    const auto kept = prune_stale(h, Millis{6000});
    CHECK(objects(kept) == std::vector<int>{1, 2});
    CHECK(prune_stale({}, Millis{6000}).empty());
}

TEST_CASE("pruning is idempotent and monotone in the gap") {
    gen::Rng r(41);
    for (int i = 0; i < 500; ++i) {
        PointedObjectHistory h;
        for (int k = r.integer(0, 8); k > 0; --k) h.push_back(gesture(r.integer(1, 9), r.integer(0, 20000)));
        h.sort([](const auto& a, const auto& b) { return a.end > b.end; });
        const Millis s{r.integer(0, 20000)};
        const Millis g1{r.integer(0, 8000)}, g2{g1.count() + r.integer(0, 8000)};
        const auto once = prune_stale(h, s, g1);
        CHECK(objects(prune_stale(once, s, g1)) == objects(once));
        const auto wider = prune_stale(h, s, g2);
        CHECK(once.size() <= wider.size());
        for (const auto& g : once) {
            CHECK(g.end >= s - g1);
            CHECK(std::count_if(wider.begin(), wider.end(), [&](const auto& w) { return w.end == g.end; }) >= 1);
        }
        for (const auto& g : h) {
            if (g.end >= s - g1) CHECK(std::count_if(once.begin(), once.end(), [&](const auto& w) { return w.end == g.end; }) >= 1);
        }
    }
}

TEST_CASE("utterance ingestion normalizes belief and replaces the previous one") {
    DialogueState s;
    const FusionConfig cfg;
    auto zero = utterance("hmm", Intent::swap, 0, 500);
    for (auto& x : zero.intents) x.confidence = 0.0;
    ingest_nlu(s, zero, cfg);
    for (auto i : kAllIntents) CHECK(s.intent_belief.at(i) == doctest::Approx(1.0 / 8.0));

    ingest_gesture(s, gesture(4, 400), cfg);
    s.slot_bindings.push_back({0, m(4), 1.0, 1});
    ingest_nlu(s, utterance("zoom out", Intent::zoom_out, 1000, 1500, {}, 0.6), cfg);
    CHECK(s.current_nlu->utterance == "zoom out");
    CHECK(s.slot_bindings.empty());
    CHECK(s.intent_belief.at(Intent::zoom_out) == doctest::Approx(0.6));
    double sum = 0;
    for (const auto& [_, p] : s.intent_belief) sum += p;
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("deictics bind pointed monitors in chronological order") {
    DialogueState s;
    const FusionConfig cfg;
    ingest_gesture(s, gesture(1, 2000), cfg);
    ingest_gesture(s, gesture(9, 3000), cfg);
    ingest_nlu(s, utterance("swap this monitor with this one", Intent::swap, 3200, 4500, {deictic(5), deictic(25)}), cfg);
    const auto cmd = integrate(s, cfg);
    REQUIRE(cmd);
    CHECK(cmd->action == Action{action::Swap{m(1), m(9)}});
    CHECK(cmd->confidence == 1.0);
}

TEST_CASE("commands without arguments go out at once") {
    DialogueState s;
    const FusionConfig cfg;
    ingest_nlu(s, utterance("zoom out", Intent::zoom_out, 0, 600), cfg);
    const auto r = state_monitor_tick(s, Millis{600}, cfg);
    REQUIRE(r.command);
    CHECK(r.command->action == Action{action::ZoomOut{}});
    CHECK(r.command->issued_at == Millis{600});
}

TEST_CASE("a named monitor needs no gesture") {
    DialogueState s;
    const FusionConfig cfg;
    ingest_nlu(s, utterance("zoom in on the fifth monitor", Intent::zoom_in, 0, 1500, {gen::monitor(11, 5)}), cfg);
    const auto r = state_monitor_tick(s, Millis{1500}, cfg);
    REQUIRE(r.command);
    CHECK(r.command->action == Action{action::ZoomIn{m(5)}});
    CHECK(r.consumed.empty());
}

TEST_CASE("a pointing gesture finishing after the words still binds") {
    DialogueState s;
    const FusionConfig cfg;
    ingest_gesture(s, gesture(2, 900), cfg);
    ingest_nlu(s, utterance("swap this with that", Intent::swap, 1000, 2000, {deictic(5), deictic(15)}), cfg);
    const auto first = state_monitor_tick(s, Millis{2000}, cfg);
    CHECK_FALSE(first.command);
    CHECK_FALSE(first.clarification_needed);
    CHECK(s.slot_bindings.size() == 1);

    ingest_gesture(s, gesture(6, 2800), cfg);
    const auto second = state_monitor_tick(s, Millis{2800}, cfg);
    REQUIRE(second.command);
    CHECK(second.command->action == Action{action::Swap{m(2), m(6)}});
    CHECK(second.consumed == std::vector<std::uint64_t>{1, 2});
    CHECK(s.pointed_history.empty());
}

TEST_CASE("grace expiry asks for clarification") {
    DialogueState s;
    const FusionConfig cfg;
    ingest_gesture(s, gesture(2, 900), cfg);
    ingest_nlu(s, utterance("split these two", Intent::split_screen, 1000, 2000, {deictic(6, true)}), cfg);
    CHECK_FALSE(state_monitor_tick(s, Millis{3499}, cfg).clarification_needed);
    const auto r = state_monitor_tick(s, Millis{3500}, cfg);
    CHECK_FALSE(r.command);
    CHECK(r.clarification_needed);
    CHECK_FALSE(s.current_nlu);
}

TEST_CASE("one command per utterance") {
    DialogueState s;
    const FusionConfig cfg;
    ingest_gesture(s, gesture(3, 500), cfg);
    ingest_nlu(s, utterance("zoom in here", Intent::zoom_in, 600, 1200, {deictic(8)}), cfg);
    CHECK(state_monitor_tick(s, Millis{1200}, cfg).command);
    for (int t = 1200; t < 6000; t += 100) {
        ingest_gesture(s, gesture(4, t), cfg);
        const auto again = state_monitor_tick(s, Millis{t}, cfg);
        CHECK_FALSE(again.command);
        CHECK_FALSE(again.clarification_needed);
    }
}

TEST_CASE("low confidence or an invalid filling yields clarification, not a command") {
    const FusionConfig cfg;
    DialogueState s;
    ingest_nlu(s, utterance("zoom out maybe", Intent::zoom_out, 0, 500, {}, 0.4), cfg);
    auto r = state_monitor_tick(s, Millis{500}, cfg);
    CHECK_FALSE(r.command);
    CHECK(r.clarification_needed);

    DialogueState t;
    ingest_nlu(t, utterance("swap 4 with 4", Intent::swap, 0, 500, {gen::monitor(5, 4), gen::monitor(12, 4)}), cfg);
    r = state_monitor_tick(t, Millis{500}, cfg);
    CHECK_FALSE(r.command);
    CHECK(r.clarification_needed);
}

TEST_CASE("combined confidence") {
    CHECK(combined_confidence(0.8, {}) == 0.8);
    CHECK(combined_confidence(0.9, {0.25, 1.0}) == doctest::Approx(0.45));
    CHECK(combined_confidence(1.0, {0.0, 1.0}) == 0.0);
    gen::Rng r(42);
    for (int i = 0; i < 2000; ++i) {
        const double p = r.uniform(0, 1);
        std::vector<double> c;
        for (int k = r.integer(0, 4); k > 0; --k) c.push_back(r.uniform(0, 1));
        const double v = combined_confidence(p, c);
        CHECK(v >= 0.0);
        CHECK(v <= p + 1e-15);
        for (double x : c) CHECK(v <= std::max(x, p) + 1e-15);
        const double bump = r.uniform(0, 1 - p);
        CHECK(combined_confidence(p + bump, c) >= v);
        if (!c.empty()) {
            auto d = c;
            d[0] = std::min(1.0, d[0] + r.uniform(0, 0.5));
            CHECK(combined_confidence(p, d) >= v - 1e-15);
        }
    }
}

TEST_CASE("every state change bumps the revision") {
    DialogueState s;
    const FusionConfig cfg;
    auto last = s.revision;
    auto bumped = [&] {
        const bool up = s.revision > last;
        last = s.revision;
        return up;
    };
    ingest_gesture(s, gesture(1, 1000), cfg);
    CHECK(bumped());
    ingest_nlu(s, utterance("swap this and that", Intent::swap, 1100, 1800, {deictic(5), deictic(14)}), cfg);
    CHECK(bumped());
    state_monitor_tick(s, Millis{1800}, cfg);
    CHECK(bumped());  // one binding appeared
    state_monitor_tick(s, Millis{1900}, cfg);
    CHECK_FALSE(bumped());
    ingest_gesture(s, gesture(2, 2000), cfg);
    CHECK(bumped());
    state_monitor_tick(s, Millis{2000}, cfg);
    CHECK(bumped());
}

TEST_CASE("configuration validation and JSON") {
    FusionConfig c;
    c.tau = 1.5;
    CHECK_THROWS_AS(c.validate(), InvalidInputError);
    c = FusionConfig{};
    c.max_gap = Millis{-1};
    CHECK_THROWS_AS(FusionEngine{c}, InvalidInputError);
    const auto j = nlohmann::json(FusionConfig{});
    CHECK(j.at("max_gap_ms") == 4000);
    CHECK(j.at("grace_ms") == 1500);
    CHECK(j.at("tau") == 0.5);
    CHECK(j.get<FusionConfig>().reorder_bound == Millis{500});
}

TEST_CASE("engine: inputs behind the watermark are dropped and logged") {
    FusionEngine e;
    CHECK(e.submit(gesture(1, 5000)));
    e.advance(Millis{5000});
    CHECK_FALSE(e.submit(gesture(2, 4000)));
    CHECK(e.log().records().back().at("type") == "dropped");
    CHECK(e.submit(gesture(3, 4600)));
}

TEST_CASE("engine: arrival order inside the bound does not change the outcome") {
    const FusionConfig cfg;
    gen::Rng r(43);
    for (int i = 0; i < 600; ++i) {
        const auto inputs = gen::session(r);
        const auto base = gen::replay(gen::deliver(inputs, Millis{0}, r), cfg);
        const auto shuffled = gen::replay(gen::deliver(inputs, cfg.reorder_bound, r), cfg);
        CHECK(base.dropped == 0);
        CHECK(shuffled.dropped == 0);
        REQUIRE(base.commands.size() == shuffled.commands.size());
        for (std::size_t k = 0; k < base.commands.size(); ++k) CHECK(base.commands[k] == shuffled.commands[k]);
    }
}

TEST_CASE("engine: no gesture feeds two commands") {
    gen::Rng r(44);
    for (int i = 0; i < 600; ++i) {
        const auto run = gen::replay(gen::deliver(gen::session(r), Millis{500}, r), FusionConfig{});
        std::set<std::uint64_t> used;
        for (const auto& o : run.outputs) {
            if (const auto* c = std::get_if<IssuedCommand>(&o)) {
                for (auto id : c->gestures) CHECK(used.insert(id).second);
            }
        }
    }
}

TEST_CASE("engine: the log reads back as JSON lines") {
    FusionEngine e;
    e.submit(gesture(5, 1000), Annotation{std::nullopt, m(5)});
    e.submit(utterance("zoom in here", Intent::zoom_in, 900, 1400, {deictic(8)}), Annotation{Intent::zoom_in, {}});
    e.flush();
    std::istringstream in(e.log().to_jsonl());
    const auto recs = parse_jsonl(in);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].at("type") == "gesture");
    CHECK(recs[0].at("truth").at("object") == 5);
    CHECK(recs[1].at("type") == "nlu");
    CHECK(recs[2].at("type") == "command");
    CHECK(recs[2].at("gestures") == nlohmann::json::array({1}));
    for (std::size_t k = 0; k < recs.size(); ++k) CHECK(recs[k].at("seq") == k);

    std::istringstream bad("{\"a\":1}\nnot json\n");
    CHECK_THROWS_AS(parse_jsonl(bad), LoadError);
}
