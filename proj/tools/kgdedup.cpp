// Batch front-end: ingest, index, run, eval, strategy, synth.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgdedup/learn.hpp"
#include "kgdedup/service.hpp"
#include "kgdedup/synth.hpp"

namespace fs = std::filesystem;
using namespace kgdedup;

namespace {

// Input problem attributable to a file; exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot read file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << data;
    if (!out) throw DataError(path + ": cannot write file");
}

Graph load_graph(const std::string& path) {
    try {
        return parse_ntriples(slurp(path));
    } catch (const ParseError& e) {
        throw DataError(path + ":" + std::to_string(e.line()) + ": " + e.reason());
    }
}

GroundTruth load_truth(const std::string& path) {
    try {
        return parse_ground_truth(slurp(path));
    } catch (const ParseError& e) {
        throw DataError(path + ":" + std::to_string(e.line()) + ": " + e.reason());
    }
}

nlohmann::json load_json(const std::string& path) {
    try {
        return nlohmann::json::parse(slurp(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
}

// Service call that must succeed; API errors become data errors.
nlohmann::json call(Service& svc, const std::string& method, const std::string& path, const nlohmann::json& body = {},
                    std::map<std::string, std::string> query = {}) {
    auto res = svc.handle({method, path, std::move(query), body.is_null() ? "" : body.dump()});
    if (res.status >= 300) {
        std::string msg = res.body.value("error", "request failed");
        if (res.body.contains("line")) msg = "line " + std::to_string(res.body["line"].get<std::size_t>()) + ": " + msg;
        if (res.status >= 500) throw std::runtime_error(msg);
        throw DataError(msg);
    }
    return res.body;
}

nlohmann::json wait_job(Service& svc, const std::string& job_id) {
    svc.wait_idle();
    auto job = call(svc, "GET", "/jobs/" + job_id);
    if (job["status"] != "succeeded") throw DataError("job " + job_id + " failed: " + job.value("error", ""));
    return job;
}

void print_report(const MetricsReport& r, bool json) {
    if (json) {
        std::cout << to_json(r).dump(2) << '\n';
        return;
    }
    std::printf("labelled    %zu\n", r.labelled_total);
    std::printf("tp %zu  fp %zu  fn %zu  tn %zu\n", r.true_pos, r.false_pos, r.false_neg, r.true_neg);
    std::printf("precision   %.4f\nrecall      %.4f\nf1          %.4f\n", r.precision, r.recall, r.f1);
    if (r.degenerate) std::printf("degenerate  yes (no labelled positives or no accepted labelled pairs)\n");
    std::cout << to_json(r).dump() << '\n';
}

struct DataOptions {
    std::string data;
    std::string type;
    std::string shapes;
    std::string shape;
    int depth = 1;
    std::string config;

    void add(CLI::App* app) {
        app->add_option("--data", data, "N-Triples knowledge graph");
        app->add_option("--type", type, "instance type IRI");
        app->add_option("--shapes", shapes, "N-Triples file holding the shape (default: --data)");
        app->add_option("--shape", shape, "shape IRI; emergent schema when omitted");
        app->add_option("--depth", depth, "index depth")->check(CLI::PositiveNumber);
        app->add_option("--config", config, "DDConfig JSON file");
    }

    TypeIndex index(const Graph& g) const {
        if (type.empty() && shape.empty()) throw CLI::ValidationError("--type or --shape is required with --data");
        MinimalDomainSpec spec;
        if (shape.empty()) {
            spec = infer_emergent_schema(g, type, depth);
        } else {
            Graph shape_graph = shapes.empty() ? g : load_graph(shapes);
            spec = extract_domain_spec(shape_graph, shape, depth);
        }
        return build_index(g, spec);
    }

    DDConfig dd_config(const TypeIndex& idx, bool bootstrap) const {
        if (!config.empty()) return dd_config_from_json(load_json(config));
        DefaultConfigOptions o;
        o.bootstrap = bootstrap;
        return default_config(idx.spec(), idx.spec(), o);
    }
};

ServiceOptions state_options(const std::string& dir) {
    ServiceOptions o;
    o.state_dir = fs::path(dir);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Duplicate detection for knowledge graphs"};
    app.require_subcommand(1);
    bool json_out = false;
    app.add_flag("--json", json_out, "print reports as JSON");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "add an N-Triples file to a state directory");
    std::string state_dir, file, name;
    ingest->add_option("--state", state_dir, "state directory")->required();
    ingest->add_option("--name", name, "graph name");
    ingest->add_option("file", file, "N-Triples file")->required();

    // index
    auto* index = app.add_subcommand("index", "index one type of an ingested graph");
    std::string graph_id, type_iri, spec_source = "emergent", shapes_graph;
    int depth = 1;
    index->add_option("--state", state_dir, "state directory")->required();
    index->add_option("--graph", graph_id, "graph id")->required();
    index->add_option("--type", type_iri, "instance type IRI")->required();
    index->add_option("--spec", spec_source, "\"emergent\" or a shape IRI");
    index->add_option("--shapes-graph", shapes_graph, "graph id holding the shape");
    index->add_option("--depth", depth, "index depth")->check(CLI::PositiveNumber);

    // run
    auto* run = app.add_subcommand("run", "run duplicate detection");
    std::string source_index, target_index, out_file;
    DataOptions run_data;
    run->add_option("--state", state_dir, "state directory");
    run->add_option("--source", source_index, "source index id (with --state)");
    run->add_option("--target", target_index, "target index id (default: source)");
    run_data.add(run);
    run->add_option("--out", out_file, "write results as JSON lines");
    bool only_accepted = false;
    run->add_flag("--accepted", only_accepted, "print accepted pairs only");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate results against a ground-truth file");
    std::string truth_file, results_file;
    bool closed_world = false;
    DataOptions eval_data;
    eval->add_option("--truth", truth_file, "ground truth CSV")->required();
    eval->add_option("--results", results_file, "results as JSON lines");
    eval_data.add(eval);
    eval->add_flag("--closed-world", closed_world, "count accepted pairs missing from the truth file as false positives");

    // strategy
    auto* strat = app.add_subcommand("strategy", "run a search strategy with oracle labels");
    std::string steps_file, audit_file, prefs_file;
    std::size_t rounds = 0, per_round = 20;
    DataOptions strat_data;
    strat->add_option("--steps", steps_file, "strategy JSON (array of steps)")->required();
    strat->add_option("--truth", truth_file, "ground truth CSV")->required();
    strat_data.add(strat);
    strat->add_option("--prefs", prefs_file, "metric preferences JSON");
    strat->add_option("--audit", audit_file, "write the audit log as JSON lines");
    strat->add_option("--rounds", rounds, "simulate this many labelling rounds instead of labelling every truth row");
    strat->add_option("--per-round", per_round, "pairs labelled per simulated round")->check(CLI::PositiveNumber);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic knowledge graph with known duplicates");
    SynthOptions so;
    std::string prefix = "synth";
    synth->add_option("--instances", so.instances, "number of instances")->check(CLI::PositiveNumber);
    synth->add_option("--dup-rate", so.dup_rate, "fraction of instances that duplicate another")->check(CLI::Range(0.0, 1.0));
    synth->add_option("--seed", so.seed, "random seed");
    synth->add_option("--typo-prob", so.typo_prob, "chance of each successive character edit per string value");
    synth->add_option("--case-flip", so.case_flip, "chance of a case flip per string value");
    synth->add_option("--field-drop", so.field_drop, "chance of dropping each address sub-field");
    synth->add_option("--sibling-rate", so.sibling_rate, "fraction of originals that reuse another's name and venue");
    synth->add_option("--out", prefix, "output prefix: <prefix>.nt and <prefix>.truth.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*ingest) {
            Service svc(state_options(state_dir));
            auto g = call(svc, "POST", "/graphs", {{"name", name.empty() ? fs::path(file).filename().string() : name},
                                                   {"ntriples", slurp(file)}});
            std::cout << g.dump(json_out ? 2 : -1) << '\n';
        } else if (*index) {
            Service svc(state_options(state_dir));
            nlohmann::json body = {{"graph", graph_id}, {"type_iri", type_iri}, {"spec_source", spec_source},
                                   {"depth", depth}};
            if (!shapes_graph.empty()) body["shapes_graph"] = shapes_graph;
            auto res = call(svc, "POST", "/indices", body);
            if (!json_out) res.erase("spec");
            std::cout << res.dump(json_out ? 2 : -1) << '\n';
        } else if (*run) {
            std::vector<ScoredPair> results;
            if (!state_dir.empty()) {
                if (source_index.empty()) throw CLI::ValidationError("--source is required with --state");
                if (target_index.empty()) target_index = source_index;
                Service svc(state_options(state_dir));
                std::string pair_id;
                for (const auto& p : call(svc, "GET", "/pairs")) {
                    if (p["source_index"] == source_index && p["target_index"] == target_index) {
                        pair_id = p["id"].get<std::string>();
                    }
                }
                if (pair_id.empty()) {
                    pair_id = call(svc, "POST", "/pairs", {{"source_index", source_index}, {"target_index", target_index}})["id"];
                }
                if (!run_data.config.empty()) call(svc, "PUT", "/pairs/" + pair_id + "/config", load_json(run_data.config));
                auto job = wait_job(svc, call(svc, "POST", "/pairs/" + pair_id + "/runs")["job_id"]);
                auto page = call(svc, "GET", "/pairs/" + pair_id + "/results", {}, {{"limit", "1000000000"}});
                for (const auto& item : page["items"]) results.push_back(scored_pair_from_json(item));
                std::cerr << "pair " << pair_id << ", job " << job["id"].get<std::string>() << '\n';
            } else {
                if (run_data.data.empty()) throw CLI::ValidationError("run needs --state or --data");
                Graph g = load_graph(run_data.data);
                TypeIndex idx = run_data.index(g);
                results = run_duplicate_detection(idx, idx, run_data.dd_config(idx, false));
            }
            if (!out_file.empty()) spit(out_file, results_to_jsonl(results));
            for (const auto& r : results) {
                if (only_accepted && !r.accepted) continue;
                if (json_out) {
                    std::cout << to_json(r).dump() << '\n';
                } else {
                    std::printf("%.4f %s %s %s\n", r.similarity, r.accepted ? "accept" : "reject", r.source_id.c_str(),
                                r.target_id.c_str());
                }
            }
        } else if (*eval) {
            if (results_file.empty() && eval_data.data.empty())
                throw CLI::ValidationError("eval needs --results or --data");
            GroundTruth truth = load_truth(truth_file);
            std::vector<ScoredPair> results;
            if (!results_file.empty()) {
                std::istringstream in(slurp(results_file));
                std::string line;
                std::size_t line_no = 0;
                while (std::getline(in, line)) {
                    ++line_no;
                    if (line.empty()) continue;
                    try {
                        results.push_back(scored_pair_from_json(nlohmann::json::parse(line)));
                    } catch (const std::exception& e) {
                        throw DataError(results_file + ":" + std::to_string(line_no) + ": " + e.what());
                    }
                }
            } else if (!eval_data.data.empty()) {
                Graph g = load_graph(eval_data.data);
                TypeIndex idx = eval_data.index(g);
                results = run_duplicate_detection(idx, idx, eval_data.dd_config(idx, false));
            }
            auto report = closed_world ? analyze_against_truth(results, truth.positives()) : analyze(results, truth.rows);
            print_report(report, json_out);
        } else if (*strat) {
            if (strat_data.data.empty()) throw CLI::ValidationError("strategy needs --data");
            Strategy strategy = strategy_from_json(load_json(steps_file));
            MetricPrefs prefs = prefs_file.empty() ? MetricPrefs{} : prefs_from_json(load_json(prefs_file));
            GroundTruth truth = load_truth(truth_file);
            auto positives = truth.positives();
            Graph g = load_graph(strat_data.data);
            TypeIndex idx = strat_data.index(g);
            if (!audit_file.empty()) spit(audit_file, "");
            AuditLog audit = audit_file.empty() ? AuditLog() : AuditLog(audit_file);
            auto t0 = std::chrono::steady_clock::now();
            nlohmann::json summary;
            if (rounds > 0) {
                SimulationOptions so2;
                so2.rounds = rounds;
                so2.per_round = per_round;
                so2.strategy = strategy;
                so2.prefs = prefs;
                auto oracle = [&](const PairKey& k) { return positives.count(k) > 0; };
                auto log = simulate_active_learning(idx, idx, oracle, so2, &positives, nullptr, &audit);
                summary["rounds"] = nlohmann::json::array();
                for (const auto& r : log) {
                    nlohmann::json jr = {{"round", r.round}, {"labelled", r.labelled},
                                         {"training", to_json(r.training)}, {"truth", to_json(*r.truth)},
                                         {"config_hash", config_hash(r.config)}};
                    if (r.error) jr["error"] = *r.error;
                    summary["rounds"].push_back(jr);
                    if (!json_out) {
                        std::printf("round %zu  labelled %zu  train f1 %.4f  truth p %.4f r %.4f f1 %.4f%s\n", r.round,
                                    r.labelled, r.training.f1, r.truth->precision, r.truth->recall, r.truth->f1,
                                    r.error ? ("  error: " + *r.error).c_str() : "");
                    }
                }
                if (!log.empty()) summary["config"] = to_json(log.back().config);
            } else {
                Evaluator evaluator(idx, idx);
                SearchContext ctx(evaluator, truth.rows, prefs, &audit);
                DDConfig start = strat_data.dd_config(idx, false);
                auto initial = ctx.evaluate(start);
                auto result = execute_strategy(ctx, start, strategy);
                summary = {{"initial", to_json(initial)}, {"final", to_json(result.report)},
                           {"steps_completed", result.steps_completed}, {"config", to_json(result.config)}};
                if (result.error) summary["error"] = *result.error;
                if (!json_out) {
                    std::printf("steps       %zu/%zu\n", result.steps_completed, strategy.size());
                    std::printf("initial f1  %.4f\nfinal f1    %.4f\n", initial.f1, result.report.f1);
                    if (result.error) std::printf("error       %s\n", result.error->c_str());
                }
            }
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            summary["evaluations"] = audit.entries().size();
            summary["seconds"] = secs;
            if (json_out) {
                std::cout << summary.dump(2) << '\n';
            } else {
                std::printf("evaluations %zu\nseconds     %.2f\n", audit.entries().size(), secs);
            }
        } else if (*synth) {
            auto result = generate_synthetic(so);
            spit(prefix + ".nt", to_ntriples(result.graph));
            spit(prefix + ".truth.csv", ground_truth_csv(result.duplicates));
            std::cerr << "wrote " << prefix << ".nt (" << result.graph.size() << " triples) and " << prefix
                      << ".truth.csv (" << result.duplicates.size() << " duplicate pairs)\n";
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const StoreError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
