// Acceptance gate: one line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "ctrlroom/environment/room.hpp"
#include "ctrlroom/errors.hpp"
#include "ctrlroom/harness/scenario.hpp"
#include "support/actions.hpp"
#include "support/fusion_gen.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "support/room_oracle.hpp"

using namespace ctrlroom;
using Clock = std::chrono::steady_clock;

namespace {

const std::filesystem::path kFixtures = CTRLROOM_FIXTURES_DIR;

// Declared up front; the held-out split is the last 40 of this corpus.
constexpr std::uint64_t kNluCorpusSeed = 20;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

int failures = 0;

void report(const char* name, const Check& c, const std::string& summary) {
    std::printf("[%s] %s: %s%s%s\n", c.ok ? "PASS" : "FAIL", name, summary.c_str(), c.ok ? "" : "; ",
                c.ok ? "" : c.detail.c_str());
    std::fflush(stdout);
    if (!c.ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

oracle::P3 p3(const geometry::Vec3& v) { return {v.x(), v.y(), v.z()}; }

harness::PipelineConfig pipeline() {
    auto c = harness::load_pipeline_config(kFixtures / ".." / "config" / "default.json");
    c.model = harness::default_model();
    return c;
}

void metric_reproduction() {
    Check c;
    const auto t0 = Clock::now();
    const auto grid = harness::load_outcome_grid(kFixtures / "table2_outcomes.json");
    const double rate = harness::task_completion_rate(grid);
    const double elapsed = seconds_since(t0);
    c.require(grid.size() == 72, "grid has " + std::to_string(grid.size()) + " outcomes");
    c.require(std::abs(rate - 0.8333) <= 0.0005, "rate " + fmt("%.6f", rate));
    c.require(elapsed < 1.0, "took " + fmt("%.3f s", elapsed));
    report("metric reproduction", c, "rate " + fmt("%.4f", rate) + " in " + fmt("%.3f s", elapsed));
}

void four_second_rule() {
    using fusion::prune_stale;
    Check c;
    const auto at = [](std::int64_t end) { return gen::gesture(1, end); };
    c.require(prune_stale({at(6000 - 3999)}, Millis{6000}).size() == 1, "3999 ms before start was pruned");
    c.require(prune_stale({at(6000 - 4001)}, Millis{6000}).empty(), "4001 ms before start was kept");

    gen::Rng r(1001);
    int cases = 0;
    const fusion::FusionConfig cfg;
    for (int i = 0; i < 5000; ++i) {
        const std::int64_t start = r.integer(4000, 30000);
        fusion::PointedObjectHistory h;
        for (int k = r.integer(0, 10); k > 0; --k) {
            // half of the ends within 5 ms of the cut
            const std::int64_t end = r.coin() ? start - 4000 + r.integer(-5, 5) : r.integer(0, start + 2000);
            h.push_back(at(end));
        }
        h.sort([](const auto& a, const auto& b) { return a.end > b.end; });
        const auto kept = prune_stale(h, Millis{start});
        std::size_t expect = 0;
        for (const auto& g : h) expect += g.end.count() >= start - 4000;
        c.require(kept.size() == expect, "kept count differs");
        for (const auto& g : kept) c.require(g.end.count() >= start - 4000, "kept a stale gesture");

        // the same cut applied when the utterance arrives
        fusion::DialogueState s;
        for (const auto& g : h) fusion::ingest_gesture(s, g, fusion::FusionConfig{Millis{4000}, Millis{1500}, 0.5, Millis{1000000}});
        fusion::ingest_nlu(s, gen::utterance("zoom in here", Intent::zoom_in, start, start + 800, {gen::deictic(8)}), cfg);
        c.require(s.pointed_history.size() == expect, "utterance ingestion kept " +
                                                          std::to_string(s.pointed_history.size()) + " not " +
                                                          std::to_string(expect));
        ++cases;
    }
    report("four-second rule", c, std::to_string(cases) + " random timings plus both boundaries");
}

void windowed_distribution() {
    Check c;
    gen::Rng r(1002);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<geometry::PointingSample> samples;
        std::vector<oracle::TimedHit> hits;
        std::int64_t t = r.integer(0, 5000);
        for (int k = r.integer(1, 120); k > 0; --k) {
            t += r.integer(1, 60);
            std::optional<int> cell;
            if (!r.coin(0.15)) cell = r.integer(1, 9);
            geometry::PointingSample s;
            s.timestamp = Millis{t};
            if (cell) s.hit = MonitorId{*cell};
            samples.push_back(s);
            hits.push_back({t, cell});
        }
        const auto d = geometry::window_distribution(samples, Millis{1000});
        std::map<int, double> got;
        for (const auto& [m, p] : d.probs) got[m.value] = p;
        c.require(got == oracle::frequency_count(hits, 1000), "sample set " + std::to_string(i) + " differs");
        if (!got.empty()) {
            double sum = 0;
            for (const auto& [_, p] : got) sum += p;
            worst = std::max(worst, std::abs(sum - 1.0));
        }
    }
    c.require(worst <= 1e-9, "sum off by " + fmt("%.3g", worst));
    report("windowed distribution", c, "1000 sample sets exact, worst sum error " + fmt("%.2g", worst));
}

void ray_cast_oracle() {
    Check c;
    gen::Rng r(1003);
    const geometry::ScreenLayout layout;
    const oracle::Grid grid;
    int mismatches = 0, margin = 0;
    for (int i = 0; i < 1000; ++i) {
        const geometry::Vec3 shoulder(r.uniform(-1.5, 1.5), r.uniform(1.2, 1.8), r.uniform(1.5, 4.0));
        const geometry::Vec3 target(r.uniform(-2.8, 2.8), r.uniform(-0.4, 2.9), r.coin(0.9) ? 0.0 : 6.0);
        const geometry::Vec3 hand = shoulder + r.uniform(0.3, 0.8) * (target - shoulder).normalized();
        const auto s = geometry::cast_ray(Millis{0}, shoulder, hand, layout);
        const auto o = oracle::dense_ray_hit(p3(shoulder), p3(hand));
        const std::optional<int> got = s.hit ? std::optional(s.hit->value) : std::nullopt;
        if (!o) {
            if (got) ++mismatches;
            continue;
        }
        if (oracle::boundary_distance(o->first, o->second, grid) < 1e-3) {
            ++margin;
            continue;
        }
        if (got != oracle::cell_by_scan(o->first, o->second, grid)) ++mismatches;
    }
    c.require(mismatches == 0, std::to_string(mismatches) + " mismatches");

    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        geometry::SensorConfig cfg{r.uniform(-0.6, 0.6), r.uniform(-1, 2), r.uniform(-1, 4), r.uniform(-1, 1)};
        const auto f = gen::skeleton(r, Millis{i});
        const auto out = geometry::transform_skeleton(f, cfg);
        for (const auto& [a, ja] : f.joints) {
            for (const auto& [b, jb] : f.joints) {
                const double before = (ja.position - jb.position).norm();
                const double after = (out.at(a).position - out.at(b).position).norm();
                worst = std::max(worst, std::abs(before - after));
            }
            const auto expect = oracle::sensor_to_env(p3(ja.position), cfg.tilt, cfg.sensor_height,
                                                      cfg.user_distance, cfg.lateral_offset);
            c.require(oracle::dist(expect, p3(out.at(a).position)) < 1e-9, "transform differs from the matrix oracle");
        }
    }
    c.require(worst <= 1e-9, "distance changed by " + fmt("%.3g", worst));
    report("ray-cast oracle", c,
           "1000 rays, " + std::to_string(mismatches) + " mismatches, " + std::to_string(margin) +
               " within 1 mm of a boundary; worst distance change " + fmt("%.2g m", worst));
}

void noise_free_suite() {
    Check c;
    const auto cfg = pipeline();
    const auto t0 = Clock::now();
    const auto paths = harness::list_scenarios(kFixtures / "scenarios");
    std::vector<harness::Outcome> outcomes;
    std::vector<std::string> logs;
    for (const auto& p : paths) {
        const auto s = harness::load_scenario(p);
        for (const auto& ev : s.events) {
            if (const auto* sk = std::get_if<harness::SkeletonInput>(&ev.payload)) {
                c.require(sk->targets && sk->profile.jitter == 0.0, s.id + " is not a zero-jitter generated trace");
            }
        }
        const auto run = harness::run_scenario(s, cfg);
        c.require(run.outcome.label == harness::OutcomeLabel::S,
                  s.id + " labelled " + std::string(harness::to_string(run.outcome.label)) + " (" + run.outcome.detail + ")");
        outcomes.push_back(run.outcome);
        logs.push_back(run.log.to_jsonl());
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto again = harness::run_scenario(harness::load_scenario(paths[i]), cfg);
        c.require(again.log.to_jsonl() == logs[i], paths[i].stem().string() + " log differs between runs");
    }
    const double elapsed = seconds_since(t0);
    std::set<std::string> ids;
    for (const auto& o : outcomes) ids.insert(o.scenario_id);
    c.require(ids == std::set<std::string>{"T1", "T2", "T3", "T4", "T5", "T6"}, "scenario set is not T1 to T6");
    const double rate = outcomes.empty() ? 0.0 : harness::task_completion_rate(outcomes);
    c.require(rate == 1.0, "completion rate " + fmt("%.4f", rate));
    c.require(elapsed < 30.0, "took " + fmt("%.2f s", elapsed));
    report("noise-free suite", c,
           std::to_string(outcomes.size()) + " scenarios, rate " + fmt("%.4f", rate) + ", two identical runs in " +
               fmt("%.2f s", elapsed));
}

void nlu_accuracy() {
    Check c;
    const auto corpus = harness::generate_corpus(200, kNluCorpusSeed);
    const std::vector<nlu::LabeledUtterance> train(corpus.begin(), corpus.begin() + 160);
    const auto model = nlu::train(train);
    int correct = 0;
    for (std::size_t i = 160; i < corpus.size(); ++i) {
        correct += nlu::classify(model, corpus[i].text).front().intent == corpus[i].intent;
    }
    const double acc = correct / 40.0;
    c.require(acc >= 0.89, "held-out accuracy " + fmt("%.3f", acc));

    std::ifstream in(kFixtures / "study_log.jsonl");
    const auto recs = fusion::parse_jsonl(in);
    const auto rates = harness::module_success_rates(recs);
    c.require(rates.nlu_success_rate && *rates.nlu_success_rate == 0.76, "study log NLU rate is not 0.76");
    c.require(rates.gesture_accuracy && *rates.gesture_accuracy == 0.79, "study log gesture rate is not 0.79");
    report("NLU accuracy", c,
           "held-out " + std::to_string(correct) + "/40 = " + fmt("%.3f", acc) + " (corpus seed " +
               std::to_string(kNluCorpusSeed) + "); study log " + fmt("%.2f", rates.nlu_success_rate.value_or(-1)) +
               " / " + fmt("%.2f", rates.gesture_accuracy.value_or(-1)));
}

void fusion_determinism() {
    Check c;
    const fusion::FusionConfig cfg;
    gen::Rng r(1007);
    int cases = 0, commands = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto inputs = gen::session(r);
        const auto base = gen::replay(gen::deliver(inputs, Millis{0}, r), cfg);
        const auto other = gen::replay(gen::deliver(inputs, cfg.reorder_bound, r), cfg);
        c.require(other.dropped == 0 && base.dropped == 0, "an input inside the bound was dropped");
        c.require(base.commands == other.commands, "command logs differ for session " + std::to_string(i));
        for (const auto* run : {&base, &other}) {
            std::set<std::uint64_t> used;
            for (const auto& o : run->outputs) {
                if (const auto* ic = std::get_if<fusion::IssuedCommand>(&o)) {
                    for (auto id : ic->gestures) c.require(used.insert(id).second, "gesture bound twice");
                }
            }
        }
        for (const auto& rec : base.commands) commands += rec.at("type") == "command";
        ++cases;
    }
    report("fusion determinism and single binding", c,
           std::to_string(cases) + " sessions reordered within 500 ms, " + std::to_string(commands) + " commands");
}

void environment_invariants() {
    using namespace environment;
    Check c;
    auto ok = [](const ApplyResult& r) -> std::optional<RoomState> {
        if (const auto* s = std::get_if<RoomState>(&r)) return *s;
        return std::nullopt;
    };
    int pairs = 0;
    for (int a = 1; a <= 9; ++a) {
        for (int b = 1; b <= 9; ++b) {
            if (a == b) continue;
            RoomState s;
            s.playhead[static_cast<std::size_t>(a - 1)] = 7.0;
            const auto ab = ok(environment::apply(s, action::Swap{MonitorId{a}, MonitorId{b}}));
            c.require(ab && is_permutation(*ab), "swap broke the permutation");
            if (!ab) continue;
            const auto back = ok(environment::apply(*ab, action::Swap{MonitorId{a}, MonitorId{b}}));
            c.require(back && *back == s, "swap is not an involution");
            const auto ba = ok(environment::apply(s, action::Swap{MonitorId{b}, MonitorId{a}}));
            c.require(ba && *ba == *ab, "swap is not symmetric");
            ++pairs;
        }
    }
    for (int k = 1; k <= 9; ++k) {
        const auto z = ok(environment::apply(RoomState{}, action::ZoomIn{MonitorId{k}}));
        c.require(z.has_value(), "zoom in refused");
        if (!z) continue;
        const auto out = ok(environment::apply(*z, action::ZoomOut{}));
        c.require(out && *out == RoomState{}, "zoom round trip changed the room");
        const auto fwd = ok(environment::apply(*z, action::Forward{20.0, std::nullopt}));
        const auto rew = fwd ? ok(environment::apply(*fwd, action::Rewind{50.0, std::nullopt})) : std::nullopt;
        c.require(rew && rew->playhead_of(MonitorId{k}) == 0.0, "rewind did not clamp at zero");
    }
    gen::Rng r(1008);
    int steps = 0;
    for (int run = 0; run < 1000; ++run) {
        RoomState s;
        oracle::CameraRoom o;
        for (int i = 0; i < 50; ++i) {
            const auto act = gen::action(r, true);
            const auto res = environment::apply(s, act);
            const bool accepted = o.step(act);
            c.require(accepted == ok(res).has_value(), "acceptance differs from the per-camera model");
            if (const auto next = ok(res)) s = *next;
            c.require(o.matches(s), "state differs from the per-camera model");
            c.require(is_permutation(s), "assignment is not a permutation");
            for (double p : s.playhead) c.require(p >= 0.0, "negative playhead");
            ++steps;
        }
    }
    report("environment invariants", c,
           std::to_string(pairs) + " ordered pairs, 9 zoom round trips, " + std::to_string(steps) +
               " random steps against a per-camera model");
}

}  // namespace

int main() {
    const std::pair<const char*, void (*)()> criteria[] = {
        {"metric reproduction", metric_reproduction},
        {"four-second rule", four_second_rule},
        {"windowed distribution", windowed_distribution},
        {"ray-cast oracle", ray_cast_oracle},
        {"noise-free suite", noise_free_suite},
        {"NLU accuracy", nlu_accuracy},
        {"fusion determinism and single binding", fusion_determinism},
        {"environment invariants", environment_invariants},
    };
    for (const auto& [name, fn] : criteria) {
        try {
            fn();
        } catch (const std::exception& e) {
            Check c;
            c.require(false, std::string("threw: ") + e.what());
            report(name, c, "aborted");
        }
    }
    std::printf("%d of %zu criteria failed\n", failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
