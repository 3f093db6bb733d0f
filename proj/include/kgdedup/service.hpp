#pragma once
// Service state behind the HTTP API: graphs, indices, index pairs with their
// configuration, labels and results, and asynchronous jobs. Everything is
// mirrored to a state directory and restored from it on construction.
//
//   state.json             registry (sorted keys)
//   graphs/<id>.nt         ingested graphs, canonical N-Triples
//   labels/<pair>.jsonl    label records
//   results/<pair>.jsonl   latest scored pairs
//   audit/<job>.jsonl      configurations evaluated by a strategy job

#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgdedup/compare.hpp"
#include "kgdedup/error.hpp"
#include "kgdedup/index.hpp"
#include "kgdedup/kg.hpp"
#include "kgdedup/labels.hpp"
#include "kgdedup/learn.hpp"
#include "kgdedup/schema.hpp"

namespace kgdedup {

struct ServiceOptions {
    std::optional<std::filesystem::path> state_dir;  // none = in-memory only
    std::size_t candidate_limit = 50;
    std::vector<std::string> ignore = default_ignore_list();
};

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

// Errors that map onto a specific status code.
class ApiError : public Error {
public:
    ApiError(int status, const std::string& msg, nlohmann::json extra = nlohmann::json::object())
        : Error(msg), status_(status), extra_(std::move(extra)) {}

    int status() const noexcept { return status_; }
    const nlohmann::json& extra() const noexcept { return extra_; }

private:
    int status_;
    nlohmann::json extra_;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw StoreError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file_atomic(const std::filesystem::path& p, const std::string& data) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << data;
        out.flush();
        if (!out) throw StoreError("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) throw StoreError("cannot replace " + p.string() + ": " + ec.message());
}

inline std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : path) {
        if (c == '/') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::size_t query_size(const std::map<std::string, std::string>& q, const std::string& key,
                              std::size_t fallback) {
    auto it = q.find(key);
    if (it == q.end()) return fallback;
    const std::string& s = it->second;
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ApiError(422, key + " must be a non-negative integer");
    }
    return v;
}

}  // namespace detail

class Service {
public:
    explicit Service(ServiceOptions opts = {}) : opts_(std::move(opts)) {
        if (opts_.state_dir) restore();
    }

    ~Service() { wait_idle(); }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    ApiResponse handle(const ApiRequest& req) {
        try {
            return route(req);
        } catch (const ApiError& e) {
            nlohmann::json body = e.extra();
            body["error"] = e.what();
            return {e.status(), body};
        } catch (const ParseError& e) {
            return {400, {{"error", e.reason()}, {"line", e.line()}}};
        } catch (const nlohmann::json::exception& e) {
            return {400, {{"error", std::string("malformed JSON: ") + e.what()}}};
        } catch (const SpecError& e) {
            return {422, {{"error", e.what()}}};
        } catch (const ConfigError& e) {
            return {422, {{"error", e.what()}}};
        } catch (const StrategyError& e) {
            return {422, {{"error", e.what()}}};
        } catch (const std::exception& e) {
            std::string id = "e" + std::to_string(++error_counter_);
            std::cerr << "internal error " << id << ": " << e.what() << '\n';
            return {500, {{"error", "internal error"}, {"id", id}}};
        }
    }

    // Blocks until no job is running.
    void wait_idle() {
        for (;;) {
            std::vector<std::thread> workers;
            {
                std::lock_guard lock(mutex_);
                workers.swap(workers_);
            }
            if (workers.empty()) return;
            for (auto& w : workers) w.join();
        }
    }

    // Full snapshot, including compacted label files.
    void persist() {
        std::lock_guard lock(mutex_);
        persist_locked(true);
    }

    std::size_t label_count(const std::string& pair_id) {
        std::lock_guard lock(mutex_);
        return pair(pair_id).labels->size();
    }

    std::uint64_t config_version(const std::string& pair_id) {
        std::lock_guard lock(mutex_);
        return pair(pair_id).config_version;
    }

private:
    struct GraphEntry {
        std::string name;
        std::shared_ptr<const Graph> graph;
    };

    struct IndexEntry {
        std::string graph;
        std::string type_iri;
        std::string spec_source;  // "emergent" or a shape IRI
        std::string shapes_graph;
        int depth = 1;
        nlohmann::json datatypes = nlohmann::json::object();
        std::shared_ptr<const TypeIndex> index;
    };

    struct PairEntry {
        std::string source_index;
        std::string target_index;
        DDConfig config;
        std::uint64_t config_version = 1;
        std::shared_ptr<LabelStore> labels;
        std::vector<ScoredPair> results;
        bool has_results = false;
        std::string status = "idle";  // idle | running | failed
        std::size_t step = 0;
        std::size_t steps = 0;
        std::string failure;
    };

    struct JobEntry {
        std::string kind;  // dd_run | strategy
        std::string pair;
        std::string status = "queued";  // queued | running | succeeded | failed
        std::string created_at;
        std::string finished_at;
        std::string error;
        nlohmann::json result = nlohmann::json::object();
        std::vector<AuditEntry> audit;
    };

    // -- routing ------------------------------------------------------------

    ApiResponse route(const ApiRequest& req) {
        auto seg = detail::split_path(req.path);
        const auto& m = req.method;
        auto body = [&] {
            if (req.body.empty()) return nlohmann::json::object();
            auto j = nlohmann::json::parse(req.body);
            if (!j.is_object() && !j.is_array()) throw ApiError(400, "request body must be a JSON object");
            return j;
        };
        std::size_t n = seg.size();
        if (n >= 1 && seg[0] == "graphs") {
            if (n == 1 && m == "POST") return post_graph(body());
            if (n == 1 && m == "GET") return list_graphs();
            if (n == 2 && m == "GET") return get_graph(seg[1]);
        } else if (n >= 1 && seg[0] == "indices") {
            if (n == 1 && m == "POST") return post_index(body());
            if (n == 1 && m == "GET") return list_indices();
            if (n == 2 && m == "GET") return get_index(seg[1]);
        } else if (n >= 1 && seg[0] == "pairs") {
            if (n == 1 && m == "POST") return post_pair(body());
            if (n == 1 && m == "GET") return list_pairs();
            if (n == 2 && m == "GET") return get_pair(seg[1]);
            if (n == 3 && seg[2] == "config" && m == "GET") return get_config(seg[1]);
            if (n == 3 && seg[2] == "config" && m == "PUT") return put_config(seg[1], body());
            if (n == 3 && seg[2] == "runs" && m == "POST") return post_run(seg[1]);
            if (n == 3 && seg[2] == "results" && m == "GET") return get_results(seg[1], req.query);
            if (n == 3 && seg[2] == "labels" && m == "GET") return get_labels(seg[1]);
            if (n == 3 && seg[2] == "labels" && m == "POST") return post_label(seg[1], body());
            if (n == 4 && seg[2] == "labels" && seg[3] == "next" && m == "GET") return next_labels(seg[1], req.query);
            if (n == 3 && seg[2] == "metrics" && m == "GET") return get_metrics(seg[1]);
            if (n == 3 && seg[2] == "strategies" && m == "POST") return post_strategy(seg[1], body());
        } else if (n >= 1 && seg[0] == "jobs") {
            if (n == 2 && m == "GET") return get_job(seg[1]);
            if (n == 3 && seg[2] == "log" && m == "GET") return get_job_log(seg[1]);
        }
        throw ApiError(404, "no route for " + m + " " + req.path);
    }

    // -- lookups (mutex_ held) ----------------------------------------------

    GraphEntry& graph(const std::string& id) {
        auto it = graphs_.find(id);
        if (it == graphs_.end()) throw ApiError(404, "unknown graph " + id);
        return it->second;
    }

    IndexEntry& index(const std::string& id) {
        auto it = indices_.find(id);
        if (it == indices_.end()) throw ApiError(404, "unknown index " + id);
        return it->second;
    }

    PairEntry& pair(const std::string& id) {
        auto it = pairs_.find(id);
        if (it == pairs_.end()) throw ApiError(404, "unknown pair " + id);
        return it->second;
    }

    JobEntry& job(const std::string& id) {
        auto it = jobs_.find(id);
        if (it == jobs_.end()) throw ApiError(404, "unknown job " + id);
        return it->second;
    }

    static void require_idle(const PairEntry& p) {
        if (p.status == "running") {
            throw ApiError(409, "a strategy is running on this pair",
                           {{"status", status_json(p)}});
        }
    }

    static nlohmann::json status_json(const PairEntry& p) {
        nlohmann::json s = {{"state", p.status}};
        if (p.status == "running") {
            s["step"] = p.step;
            s["of"] = p.steps;
        }
        if (p.status == "failed") s["reason"] = p.failure;
        return s;
    }

    static std::string string_field(const nlohmann::json& j, const char* key) {
        if (!j.is_object() || !j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
            throw ApiError(422, std::string("field ") + key + " must be a non-empty string");
        }
        return j[key].get<std::string>();
    }

    // -- graphs ---------------------------------------------------------------

    nlohmann::json graph_json(const std::string& id, const GraphEntry& g) const {
        std::map<std::string, std::size_t> types;
        std::set<std::string> typed;
        for (const auto& t : g.graph->triples()) {
            if (t.predicate == vocab::kRdfType && t.object.is_iri() && t.subject.is_iri() &&
                typed.insert(t.subject.value + " " + t.object.value).second) {
                ++types[t.object.value];
            }
        }
        return {{"id", id}, {"name", g.name}, {"triples", g.graph->size()}, {"types", types}};
    }

    ApiResponse post_graph(const nlohmann::json& j) {
        std::string name = string_field(j, "name");
        std::string text;
        if (j.contains("ntriples") && j["ntriples"].is_string()) {
            text = j["ntriples"].get<std::string>();
        } else if (j.contains("path") && j["path"].is_string()) {
            try {
                text = detail::read_file(j["path"].get<std::string>());
            } catch (const StoreError& e) {
                throw ApiError(422, e.what());
            }
        } else {
            throw ApiError(422, "either ntriples or path is required");
        }
        auto g = std::make_shared<const Graph>(parse_ntriples(text));
        std::lock_guard lock(mutex_);
        std::string id = "g" + std::to_string(++next_graph_);
        graphs_[id] = {name, g};
        if (opts_.state_dir) {
            detail::write_file_atomic(*opts_.state_dir / "graphs" / (id + ".nt"), to_ntriples(*g));
        }
        persist_locked(false);
        return {201, graph_json(id, graphs_[id])};
    }

    ApiResponse list_graphs() {
        std::lock_guard lock(mutex_);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [id, g] : graphs_) out.push_back(graph_json(id, g));
        return {200, out};
    }

    ApiResponse get_graph(const std::string& id) {
        std::lock_guard lock(mutex_);
        return {200, graph_json(id, graph(id))};
    }

    // -- indices ------------------------------------------------------------

    static std::shared_ptr<const TypeIndex> build(const Graph& data, const Graph& shapes, const IndexEntry& e) {
        DatatypeTable table;
        table.extend_from_json(e.datatypes);
        MinimalDomainSpec spec;
        if (e.spec_source == "emergent") {
            spec = infer_emergent_schema(data, e.type_iri, e.depth, table);
        } else {
            spec = extract_domain_spec(shapes, e.spec_source, e.depth, table);
            if (spec.type_iri != e.type_iri) {
                throw SpecError("shape <" + e.spec_source + "> targets <" + spec.type_iri + ">, not <" + e.type_iri +
                                ">");
            }
        }
        return std::make_shared<const TypeIndex>(build_index(data, spec));
    }

    nlohmann::json index_json(const std::string& id, const IndexEntry& e) const {
        return {{"id", id},
                {"graph", e.graph},
                {"type_iri", e.type_iri},
                {"spec_source", e.spec_source},
                {"documents", e.index->size()},
                {"spec", to_json(e.index->spec())}};
    }

    ApiResponse post_index(const nlohmann::json& j) {
        IndexEntry e;
        e.graph = string_field(j, "graph");
        e.type_iri = string_field(j, "type_iri");
        e.spec_source = j.contains("spec_source") ? string_field(j, "spec_source") : "emergent";
        e.shapes_graph = j.contains("shapes_graph") ? string_field(j, "shapes_graph") : e.graph;
        if (j.contains("depth")) {
            if (!j["depth"].is_number_integer()) throw ApiError(422, "depth must be an integer");
            e.depth = j["depth"].get<int>();
        }
        if (j.contains("datatypes")) e.datatypes = j["datatypes"];
        std::shared_ptr<const Graph> data, shapes;
        {
            std::lock_guard lock(mutex_);
            data = graph(e.graph).graph;
            shapes = graph(e.shapes_graph).graph;
        }
        e.index = build(*data, *shapes, e);
        std::lock_guard lock(mutex_);
        std::string id = "i" + std::to_string(++next_index_);
        indices_[id] = e;
        persist_locked(false);
        return {201, index_json(id, e)};
    }

    ApiResponse list_indices() {
        std::lock_guard lock(mutex_);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [id, e] : indices_) out.push_back(index_json(id, e));
        return {200, out};
    }

    ApiResponse get_index(const std::string& id) {
        std::lock_guard lock(mutex_);
        return {200, index_json(id, index(id))};
    }

    // -- pairs ----------------------------------------------------------------

    nlohmann::json pair_json(const std::string& id, const PairEntry& p) const {
        return {{"id", id},
                {"source_index", p.source_index},
                {"target_index", p.target_index},
                {"config_version", p.config_version},
                {"labels", p.labels->size()},
                {"results", p.results.size()},
                {"status", status_json(p)}};
    }

    std::shared_ptr<LabelStore> open_labels(const std::string& pair_id) {
        if (!opts_.state_dir) return std::make_shared<LabelStore>();
        return std::make_shared<LabelStore>(*opts_.state_dir / "labels" / (pair_id + ".jsonl"));
    }

    ApiResponse post_pair(const nlohmann::json& j) {
        std::string src = string_field(j, "source_index");
        std::string tgt = string_field(j, "target_index");
        std::lock_guard lock(mutex_);
        const auto& s = index(src);
        const auto& t = index(tgt);
        DefaultConfigOptions dopts;
        dopts.ignore = opts_.ignore;
        dopts.bootstrap = true;  // a new pair has no labels yet
        dopts.candidate_limit = opts_.candidate_limit;
        PairEntry p;
        p.source_index = src;
        p.target_index = tgt;
        p.config = default_config(s.index->spec(), t.index->spec(), dopts);
        std::string id = "p" + std::to_string(++next_pair_);
        p.labels = open_labels(id);
        pairs_[id] = std::move(p);
        persist_locked(false);
        auto out = pair_json(id, pairs_[id]);
        out["config"] = to_json(pairs_[id].config);
        return {201, out};
    }

    ApiResponse list_pairs() {
        std::lock_guard lock(mutex_);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [id, p] : pairs_) out.push_back(pair_json(id, p));
        return {200, out};
    }

    ApiResponse get_pair(const std::string& id) {
        std::lock_guard lock(mutex_);
        return {200, pair_json(id, pair(id))};
    }

    ApiResponse get_config(const std::string& id) {
        std::lock_guard lock(mutex_);
        const auto& p = pair(id);
        return {200, {{"config", to_json(p.config)}, {"config_version", p.config_version}}};
    }

    ApiResponse put_config(const std::string& id, const nlohmann::json& j) {
        const nlohmann::json& cfg_json = j.contains("config") ? j["config"] : j;
        DDConfig cfg = dd_config_from_json(cfg_json);
        std::lock_guard lock(mutex_);
        auto& p = pair(id);
        require_idle(p);
        validate(cfg, index(p.source_index).index->spec(), index(p.target_index).index->spec());
        if (!(cfg == p.config)) {
            p.config = cfg;
            ++p.config_version;
            persist_locked(false);
        }
        return {200, {{"config", to_json(p.config)}, {"config_version", p.config_version}}};
    }

    // -- jobs ---------------------------------------------------------------

    nlohmann::json job_json(const std::string& id, const JobEntry& jb) const {
        nlohmann::json out = {{"id", id},         {"kind", jb.kind},   {"pair", jb.pair},
                              {"status", jb.status}, {"created_at", jb.created_at}, {"result", jb.result}};
        if (!jb.finished_at.empty()) out["finished_at"] = jb.finished_at;
        if (!jb.error.empty()) out["error"] = jb.error;
        if (jb.kind == "strategy") {
            auto it = pairs_.find(jb.pair);
            if (jb.status == "running" && it != pairs_.end()) out["progress"] = status_json(it->second);
            out["evaluations"] = jb.audit.size();
        }
        return out;
    }

    std::string new_job(const std::string& kind, const std::string& pair_id) {
        std::string id = "j" + std::to_string(++next_job_);
        JobEntry jb;
        jb.kind = kind;
        jb.pair = pair_id;
        jb.created_at = utc_timestamp();
        jobs_[id] = std::move(jb);
        return id;
    }

    void finish_job(const std::string& id, bool ok, std::string error = {}) {
        auto& jb = jobs_[id];
        jb.status = ok ? "succeeded" : "failed";
        jb.error = std::move(error);
        jb.finished_at = utc_timestamp();
    }

    void launch(std::function<void()> work) { workers_.emplace_back(std::move(work)); }

    ApiResponse get_job(const std::string& id) {
        std::lock_guard lock(mutex_);
        return {200, job_json(id, job(id))};
    }

    ApiResponse get_job_log(const std::string& id) {
        std::lock_guard lock(mutex_);
        const auto& jb = job(id);
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : jb.audit) entries.push_back(to_json(e));
        return {200, {{"id", id}, {"entries", entries}}};
    }

    // -- runs -----------------------------------------------------------------

    void write_results_locked(const std::string& pair_id, const PairEntry& p) {
        if (!opts_.state_dir || !p.has_results) return;
        detail::write_file_atomic(*opts_.state_dir / "results" / (pair_id + ".jsonl"), results_to_jsonl(p.results));
    }

    ApiResponse post_run(const std::string& pair_id) {
        std::lock_guard lock(mutex_);
        auto& p = pair(pair_id);
        require_idle(p);
        auto src = index(p.source_index).index;
        auto tgt = p.source_index == p.target_index ? src : index(p.target_index).index;
        DDConfig cfg = p.config;
        std::uint64_t version = p.config_version;
        std::string job_id = new_job("dd_run", pair_id);
        jobs_[job_id].status = "running";
        persist_locked(false);
        launch([this, job_id, pair_id, src, tgt, cfg, version] {
            std::vector<ScoredPair> results;
            std::string error;
            try {
                results = run_duplicate_detection(*src, *tgt, cfg);
            } catch (const std::exception& e) {
                error = e.what();
            }
            std::lock_guard lock(mutex_);
            auto& p = pairs_[pair_id];
            if (error.empty()) {
                std::size_t accepted = 0;
                for (const auto& r : results) accepted += r.accepted ? 1 : 0;
                p.results = std::move(results);
                p.has_results = true;
                jobs_[job_id].result = {{"pairs", p.results.size()}, {"accepted", accepted},
                                        {"config_version", version}};
                write_results_locked(pair_id, p);
            }
            finish_job(job_id, error.empty(), error);
            persist_locked(false);
        });
        return {202, {{"job_id", job_id}}};
    }

    ApiResponse get_results(const std::string& pair_id, const std::map<std::string, std::string>& q) {
        std::optional<bool> accepted;
        if (auto it = q.find("accepted"); it != q.end()) {
            if (it->second == "true") {
                accepted = true;
            } else if (it->second == "false") {
                accepted = false;
            } else {
                throw ApiError(422, "accepted must be true or false");
            }
        }
        std::size_t offset = detail::query_size(q, "offset", 0);
        std::size_t limit = detail::query_size(q, "limit", 100);
        std::lock_guard lock(mutex_);
        const auto& p = pair(pair_id);
        nlohmann::json items = nlohmann::json::array();
        std::size_t total = 0;
        for (const auto& r : p.results) {
            if (accepted && r.accepted != *accepted) continue;
            if (total >= offset && items.size() < limit) items.push_back(to_json(r));
            ++total;
        }
        return {200, {{"total", total}, {"offset", offset}, {"items", items}}};
    }

    // -- labels ---------------------------------------------------------------

    ApiResponse get_labels(const std::string& pair_id) {
        std::shared_ptr<LabelStore> store;
        {
            std::lock_guard lock(mutex_);
            store = pair(pair_id).labels;
        }
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [key, r] : store->snapshot()) out.push_back(to_json(r));
        return {200, out};
    }

    ApiResponse post_label(const std::string& pair_id, const nlohmann::json& j) {
        std::string src = string_field(j, "source_id");
        std::string tgt = string_field(j, "target_id");
        if (!j.contains("is_duplicate") || !j["is_duplicate"].is_boolean()) {
            throw ApiError(422, "is_duplicate must be a boolean");
        }
        bool dup = j["is_duplicate"].get<bool>();
        std::lock_guard lock(mutex_);
        auto& p = pair(pair_id);
        require_idle(p);
        const auto& s = *index(p.source_index).index;
        const auto& t = *index(p.target_index).index;
        auto known = [&](const std::string& id) { return s.find(id) || t.find(id); };
        if (!known(src) || !known(tgt)) throw ApiError(422, "label refers to an instance outside this pair");
        auto rec = p.labels->record(src, tgt, dup);
        return {201, to_json(rec)};
    }

    ApiResponse next_labels(const std::string& pair_id, const std::map<std::string, std::string>& q) {
        std::size_t n = detail::query_size(q, "n", 10);
        if (n == 0) throw ApiError(422, "n must be >= 1");
        std::lock_guard lock(mutex_);
        auto& p = pair(pair_id);
        require_idle(p);
        nlohmann::json items = nlohmann::json::array();
        for (const auto& r : next_to_label(p.results, p.labels->snapshot(), n, p.config.decision.threshold)) {
            items.push_back(to_json(r));
        }
        return {200, {{"items", items}, {"threshold", p.config.decision.threshold.as_double()}}};
    }

    ApiResponse get_metrics(const std::string& pair_id) {
        std::lock_guard lock(mutex_);
        const auto& p = pair(pair_id);
        auto report = to_json(analyze(p.results, p.labels->snapshot()));
        report["has_results"] = p.has_results;
        report["config_version"] = p.config_version;
        return {200, report};
    }

    // -- strategies -----------------------------------------------------------

    ApiResponse post_strategy(const std::string& pair_id, const nlohmann::json& j) {
        const nlohmann::json& steps_json = j.is_array() ? j : (j.contains("steps") ? j["steps"] : nlohmann::json());
        Strategy strategy = strategy_from_json(steps_json);
        MetricPrefs prefs = j.is_object() && j.contains("prefs") ? prefs_from_json(j["prefs"]) : MetricPrefs{};
        std::lock_guard lock(mutex_);
        auto& p = pair(pair_id);
        require_idle(p);
        LabelSet labels = p.labels->snapshot();
        if (labels.empty()) throw StrategyError("no training labels to optimize against");
        auto src = index(p.source_index).index;
        auto tgt = p.source_index == p.target_index ? src : index(p.target_index).index;
        DDConfig start = p.config;
        std::string job_id = new_job("strategy", pair_id);
        jobs_[job_id].status = "running";
        p.status = "running";
        p.step = 0;
        p.steps = strategy.size();
        p.failure.clear();
        persist_locked(false);

        launch([this, job_id, pair_id, src, tgt, start, strategy, prefs, labels] {
            std::optional<std::filesystem::path> audit_file;
            if (opts_.state_dir) audit_file = *opts_.state_dir / "audit" / (job_id + ".jsonl");
            AuditLog audit = audit_file ? AuditLog(*audit_file) : AuditLog();
            std::optional<StrategyResult> result;
            std::vector<ScoredPair> results;
            std::string error;
            try {
                Evaluator evaluator(*src, *tgt);
                SearchContext ctx(evaluator, labels, prefs, &audit);
                result = execute_strategy(ctx, start, strategy, [&](std::size_t k, std::size_t n) {
                    std::lock_guard lock(mutex_);
                    pairs_[pair_id].step = k;
                    pairs_[pair_id].steps = n;
                });
                results = evaluator.run(result->config);
            } catch (const std::exception& e) {
                error = e.what();
            }
            std::lock_guard lock(mutex_);
            auto& p = pairs_[pair_id];
            auto& jb = jobs_[job_id];
            jb.audit = audit.entries();
            if (result) {
                if (!(result->config == p.config)) {
                    p.config = result->config;
                    ++p.config_version;
                }
                p.results = std::move(results);
                p.has_results = true;
                write_results_locked(pair_id, p);
                jb.result = {{"report", to_json(result->report)},
                             {"steps_completed", result->steps_completed},
                             {"config_version", p.config_version}};
                if (result->error) error = *result->error;
            }
            p.status = error.empty() ? "idle" : "failed";
            p.failure = error;
            finish_job(job_id, error.empty(), error);
            persist_locked(false);
        });
        return {202, {{"job_id", job_id}}};
    }

    // -- persistence ----------------------------------------------------------

    nlohmann::json state_json_locked() const {
        nlohmann::json graphs = nlohmann::json::object();
        for (const auto& [id, g] : graphs_) graphs[id] = {{"name", g.name}};
        nlohmann::json indices = nlohmann::json::object();
        for (const auto& [id, e] : indices_) {
            indices[id] = {{"graph", e.graph},       {"type_iri", e.type_iri}, {"spec_source", e.spec_source},
                           {"shapes_graph", e.shapes_graph}, {"depth", e.depth},  {"datatypes", e.datatypes}};
        }
        nlohmann::json pairs = nlohmann::json::object();
        for (const auto& [id, p] : pairs_) {
            pairs[id] = {{"source_index", p.source_index}, {"target_index", p.target_index},
                         {"config", to_json(p.config)},    {"config_version", p.config_version},
                         {"has_results", p.has_results},   {"status", p.status},
                         {"failure", p.failure}};
        }
        nlohmann::json jobs = nlohmann::json::object();
        for (const auto& [id, jb] : jobs_) {
            jobs[id] = {{"kind", jb.kind},     {"pair", jb.pair},     {"status", jb.status},
                        {"created_at", jb.created_at}, {"finished_at", jb.finished_at},
                        {"error", jb.error},   {"result", jb.result}};
        }
        return {{"version", 1},
                {"counters", {{"graph", next_graph_}, {"index", next_index_}, {"pair", next_pair_}, {"job", next_job_}}},
                {"graphs", graphs},
                {"indices", indices},
                {"pairs", pairs},
                {"jobs", jobs}};
    }

    void persist_locked(bool full) {
        if (!opts_.state_dir) return;
        const auto& dir = *opts_.state_dir;
        if (full) {
            for (const auto& [id, g] : graphs_) {
                detail::write_file_atomic(dir / "graphs" / (id + ".nt"), to_ntriples(*g.graph));
            }
            for (const auto& [id, p] : pairs_) {
                p.labels->compact();
                write_results_locked(id, p);
            }
        }
        detail::write_file_atomic(dir / "state.json", state_json_locked().dump(2) + "\n");
    }

    void restore() {
        namespace fs = std::filesystem;
        const auto& dir = *opts_.state_dir;
        std::error_code ec;
        for (auto sub : {"graphs", "labels", "results", "audit"}) {
            fs::create_directories(dir / sub, ec);
            if (ec) throw StoreError("cannot create " + (dir / sub).string() + ": " + ec.message());
        }
        auto state_path = dir / "state.json";
        if (!fs::exists(state_path)) return;
        nlohmann::json st;
        try {
            st = nlohmann::json::parse(detail::read_file(state_path));
            const auto& c = st.at("counters");
            next_graph_ = c.at("graph").get<std::uint64_t>();
            next_index_ = c.at("index").get<std::uint64_t>();
            next_pair_ = c.at("pair").get<std::uint64_t>();
            next_job_ = c.at("job").get<std::uint64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw StoreError(state_path.string() + ": " + e.what());
        }

        for (const auto& [id, g] : st.at("graphs").items()) {
            auto path = dir / "graphs" / (id + ".nt");
            try {
                graphs_[id] = {g.at("name").get<std::string>(),
                               std::make_shared<const Graph>(parse_ntriples(detail::read_file(path)))};
            } catch (const ParseError& e) {
                throw StoreError(path.string() + ":" + std::to_string(e.line()) + ": " + e.reason());
            }
        }
        for (const auto& [id, j] : st.at("indices").items()) {
            IndexEntry e;
            try {
                e.graph = j.at("graph").get<std::string>();
                e.type_iri = j.at("type_iri").get<std::string>();
                e.spec_source = j.at("spec_source").get<std::string>();
                e.shapes_graph = j.at("shapes_graph").get<std::string>();
                e.depth = j.at("depth").get<int>();
                e.datatypes = j.at("datatypes");
                if (!graphs_.count(e.graph) || !graphs_.count(e.shapes_graph)) {
                    throw StoreError("index " + id + " refers to a missing graph");
                }
                e.index = build(*graphs_[e.graph].graph, *graphs_[e.shapes_graph].graph, e);
            } catch (const StoreError&) {
                throw;
            } catch (const std::exception& ex) {
                throw StoreError(state_path.string() + ": index " + id + ": " + ex.what());
            }
            indices_[id] = std::move(e);
        }
        for (const auto& [id, j] : st.at("pairs").items()) {
            PairEntry p;
            try {
                p.source_index = j.at("source_index").get<std::string>();
                p.target_index = j.at("target_index").get<std::string>();
                if (!indices_.count(p.source_index) || !indices_.count(p.target_index)) {
                    throw StoreError("pair " + id + " refers to a missing index");
                }
                p.config = dd_config_from_json(j.at("config"));
                p.config_version = j.at("config_version").get<std::uint64_t>();
                p.has_results = j.at("has_results").get<bool>();
                p.status = j.at("status").get<std::string>();
                p.failure = j.at("failure").get<std::string>();
            } catch (const StoreError&) {
                throw;
            } catch (const std::exception& ex) {
                throw StoreError(state_path.string() + ": pair " + id + ": " + ex.what());
            }
            if (p.status == "running") {
                p.status = "failed";
                p.failure = "interrupted by restart";
            }
            p.labels = open_labels(id);
            if (p.has_results) {
                auto path = dir / "results" / (id + ".jsonl");
                std::istringstream in(detail::read_file(path));
                std::string line;
                std::size_t line_no = 0;
                while (std::getline(in, line)) {
                    ++line_no;
                    if (line.empty()) continue;
                    try {
                        p.results.push_back(scored_pair_from_json(nlohmann::json::parse(line)));
                    } catch (const std::exception& ex) {
                        throw StoreError(path.string() + ":" + std::to_string(line_no) + ": corrupt result record (" +
                                         ex.what() + ")");
                    }
                }
            }
            pairs_[id] = std::move(p);
        }
        for (const auto& [id, j] : st.at("jobs").items()) {
            JobEntry jb;
            try {
                jb.kind = j.at("kind").get<std::string>();
                jb.pair = j.at("pair").get<std::string>();
                jb.status = j.at("status").get<std::string>();
                jb.created_at = j.at("created_at").get<std::string>();
                jb.finished_at = j.at("finished_at").get<std::string>();
                jb.error = j.at("error").get<std::string>();
                jb.result = j.at("result");
            } catch (const std::exception& ex) {
                throw StoreError(state_path.string() + ": job " + id + ": " + ex.what());
            }
            if (jb.status == "running" || jb.status == "queued") {
                jb.status = "failed";
                jb.error = "interrupted by restart";
            }
            auto audit_path = dir / "audit" / (id + ".jsonl");
            if (fs::exists(audit_path)) {
                std::istringstream in(detail::read_file(audit_path));
                std::string line;
                std::size_t line_no = 0;
                while (std::getline(in, line)) {
                    ++line_no;
                    if (line.empty()) continue;
                    try {
                        jb.audit.push_back(audit_entry_from_json(nlohmann::json::parse(line)));
                    } catch (const std::exception& ex) {
                        throw StoreError(audit_path.string() + ":" + std::to_string(line_no) +
                                         ": corrupt audit record (" + ex.what() + ")");
                    }
                }
            }
            jobs_[id] = std::move(jb);
        }
    }

    ServiceOptions opts_;
    std::mutex mutex_;
    std::map<std::string, GraphEntry> graphs_;
    std::map<std::string, IndexEntry> indices_;
    std::map<std::string, PairEntry> pairs_;
    std::map<std::string, JobEntry> jobs_;
    std::uint64_t next_graph_ = 0;
    std::uint64_t next_index_ = 0;
    std::uint64_t next_pair_ = 0;
    std::uint64_t next_job_ = 0;
    std::vector<std::thread> workers_;
    std::atomic<std::uint64_t> error_counter_{0};
};

}  // namespace kgdedup
