// Command-line front end: training, replay, metrics, generators and the gateway.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ctrlroom/errors.hpp"
#include "ctrlroom/harness/scenario.hpp"
#ifdef CTRLROOM_HAVE_GATEWAY
#include "ctrlroom/gateway/server.hpp"
#endif

using namespace ctrlroom;
using nlohmann::json;

namespace {

harness::PipelineConfig load_config(const std::string& config_path, const std::string& model_path) {
    harness::PipelineConfig c;
    if (!config_path.empty()) c = harness::load_pipeline_config(config_path);
    if (!model_path.empty()) c.model = std::make_shared<const nlu::NluModel>(nlu::load_model(model_path));
    if (!c.model) c.model = harness::default_model();
    return c;
}

void print_outcome(const harness::Outcome& o) {
    std::cout << o.scenario_id << '\t' << harness::to_string(o.label) << '\t' << o.detail << '\n';
    for (const auto& c : o.issued) {
        std::cout << "  " << c.issued_at.count() << " ms  " << describe(c.action) << "  (" << c.confidence << ")\n";
    }
}

void write_log(const fusion::EventLog& log, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path);
    log.write(out);
}

int metrics_command(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path);
    // An outcome grid is a single JSON object; anything else is an event log.
    json first;
    bool grid = false;
    try {
        first = json::parse(in);
        grid = first.is_object() && first.contains("users");
    } catch (const json::exception&) {
    }
    harness::MetricsReport report;
    if (grid) {
        const auto labels = harness::outcome_grid_from_json(first);
        report.task_completion_rate = harness::task_completion_rate(labels);
        std::size_t s = 0, ps = 0, f = 0;
        for (auto l : labels) {
            s += l == harness::OutcomeLabel::S;
            ps += l == harness::OutcomeLabel::PS;
            f += l == harness::OutcomeLabel::F;
        }
        std::cout << "tasks: " << labels.size() << " (S " << s << ", PS " << ps << ", F " << f << ")\n";
    } else {
        in.clear();
        in.seekg(0);
        const auto records = fusion::parse_jsonl(in);
        std::vector<harness::OutcomeLabel> labels;
        for (const auto& r : records) {
            if (r.value("type", "") == "outcome") {
                labels.push_back(harness::parse_outcome_label(r.at("label").get<std::string>()));
            }
        }
        if (!labels.empty()) report.task_completion_rate = harness::task_completion_rate(labels);
        const auto rates = harness::module_success_rates(records);
        report.nlu_success_rate = rates.nlu_success_rate;
        report.gesture_accuracy = rates.gesture_accuracy;
        std::cout << "annotated utterances: " << rates.utterances << ", gestures: " << rates.gestures << '\n';
    }
    std::cout << harness::report_to_json(report).dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multimodal control-room command pipeline"};
    app.require_subcommand(1);

    std::string config_path, model_path, log_path, output;

    auto* train = app.add_subcommand("train-nlu", "Train the intent classifier from a corpus file");
    std::string corpus_path;
    train->add_option("corpus", corpus_path, "Corpus (JSONL)")->required()->check(CLI::ExistingFile);
    train->add_option("-o,--output", output, "Model file")->required();

    auto* classify = app.add_subcommand("parse", "Run the NLU on one utterance and print the result");
    std::string utterance;
    classify->add_option("text", utterance)->required();
    classify->add_option("--model", model_path)->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run-scenario", "Replay one scenario file");
    std::string scenario_path;
    run->add_option("scenario", scenario_path)->required()->check(CLI::ExistingFile);
    run->add_option("--config", config_path)->check(CLI::ExistingFile);
    run->add_option("--model", model_path)->check(CLI::ExistingFile);
    run->add_option("--log", log_path, "Write the event log (JSONL)");

    auto* suite = app.add_subcommand("run-suite", "Replay every scenario in a directory");
    std::string suite_dir;
    suite->add_option("dir", suite_dir)->required()->check(CLI::ExistingDirectory);
    suite->add_option("--config", config_path)->check(CLI::ExistingFile);
    suite->add_option("--model", model_path)->check(CLI::ExistingFile);
    suite->add_option("--log", log_path, "Write the combined event log (JSONL)");

    auto* metrics = app.add_subcommand("metrics", "Compute rates from an event log or an outcome grid");
    std::string metrics_path;
    metrics->add_option("file", metrics_path)->required()->check(CLI::ExistingFile);

    auto* gen_corpus = app.add_subcommand("gen-corpus", "Write a generated labelled corpus");
    std::size_t corpus_n = harness::kDefaultCorpusSize;
    std::uint64_t seed = harness::kDefaultCorpusSeed;
    gen_corpus->add_option("-n,--count", corpus_n)->check(CLI::Range(8, 1000000));
    gen_corpus->add_option("--seed", seed);
    gen_corpus->add_option("-o,--output", output, "Output file (default stdout)");

    auto* gen_trace = app.add_subcommand("gen-trace", "Write a synthetic skeleton trace as JSONL frames");
    std::vector<int> targets;
    harness::TraceProfile profile;
    std::int64_t dwell_ms = profile.dwell.count();
    gen_trace->add_option("targets", targets, "Monitors to point at, in order")->required();
    gen_trace->add_option("--dwell-ms", dwell_ms);
    gen_trace->add_option("--jitter", profile.jitter, "Aim jitter (m)");
    gen_trace->add_option("--speed", profile.transition_speed, "Hand transition speed (m/s)");
    gen_trace->add_option("--seed", profile.seed);
    gen_trace->add_option("--config", config_path)->check(CLI::ExistingFile);
    gen_trace->add_option("-o,--output", output, "Output file (default stdout)");

#ifdef CTRLROOM_HAVE_GATEWAY
    auto* serve = app.add_subcommand("serve", "Run the WebSocket gateway");
    gateway::ServerOptions sopts;
    std::string room_mode = "isolated";
    serve->add_option("--port", sopts.port);
    serve->add_option("--address", sopts.address);
    serve->add_option("--room-mode", room_mode)->check(CLI::IsMember({"isolated", "shared"}));
    serve->add_option("--config", config_path)->check(CLI::ExistingFile);
    serve->add_option("--model", model_path)->check(CLI::ExistingFile);
    serve->add_option("--static-dir", sopts.static_dir, "UI assets to serve over HTTP");
#endif

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            const auto corpus = nlu::load_corpus(corpus_path);
            nlu::save_model(nlu::train(corpus), output);
            std::cout << "trained on " << corpus.size() << " utterances -> " << output << '\n';
        } else if (*classify) {
            const auto model = load_config("", model_path).model;
            std::cout << json(nlu::understand(*model, utterance, Millis{0}, Millis{0})).dump(2) << '\n';
        } else if (*run) {
            const auto cfg = load_config(config_path, model_path);
            const auto result = harness::run_scenario(harness::load_scenario(scenario_path), cfg);
            print_outcome(result.outcome);
            write_log(result.log, log_path);
            return result.outcome.label == harness::OutcomeLabel::F ? 1 : 0;
        } else if (*suite) {
            const auto cfg = load_config(config_path, model_path);
            harness::MetricsReport report;
            fusion::EventLog combined;
            for (const auto& path : harness::list_scenarios(suite_dir)) {
                auto result = harness::run_scenario(harness::load_scenario(path), cfg);
                print_outcome(result.outcome);
                for (const auto& r : result.log.records()) combined.append(r);
                report.outcomes.push_back(std::move(result.outcome));
            }
            if (report.outcomes.empty()) throw LoadError("no scenarios in " + suite_dir);
            report.task_completion_rate = harness::task_completion_rate(report.outcomes);
            try {
                const auto rates = harness::module_success_rates(combined.records());
                report.nlu_success_rate = rates.nlu_success_rate;
                report.gesture_accuracy = rates.gesture_accuracy;
            } catch (const UndefinedMetricError&) {
            }
            write_log(combined, log_path);
            std::cout << harness::report_to_json(report).dump(2) << '\n';
            const bool failed = std::any_of(report.outcomes.begin(), report.outcomes.end(), [](const auto& o) {
                return o.label == harness::OutcomeLabel::F;
            });
            return failed ? 1 : 0;
        } else if (*metrics) {
            return metrics_command(metrics_path);
        } else if (*gen_corpus) {
            const auto text = nlu::corpus_to_string(harness::generate_corpus(corpus_n, seed));
            if (output.empty()) {
                std::cout << text;
            } else {
                std::ofstream(output, std::ios::binary) << text;
            }
        } else if (*gen_trace) {
            const auto cfg = load_config(config_path, "");
            profile.dwell = Millis{dwell_ms};
            std::vector<MonitorId> ids;
            for (int t : targets) ids.push_back(MonitorId{t});
            const auto trace = harness::generate_skeleton_trace(ids, profile, cfg.pointing.sensor, cfg.pointing.layout);
            std::ofstream file;
            if (!output.empty()) file.open(output, std::ios::binary);
            std::ostream& out = output.empty() ? std::cout : file;
            for (const auto& f : trace.frames) out << json(f).dump() << '\n';
        }
#ifdef CTRLROOM_HAVE_GATEWAY
        else if (*serve) {
            auto cfg = load_config(config_path, model_path);
            sopts.room_mode = room_mode == "shared" ? gateway::RoomMode::shared : gateway::RoomMode::isolated;
            gateway::Server server(std::move(cfg), sopts);
            std::cout << "listening on " << sopts.address << ':' << server.port() << '\n' << std::flush;
            server.run();
        }
#endif
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
