#pragma once
// Training labels for one index pair, persisted as append-only JSON lines.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgdedup/compare.hpp"
#include "kgdedup/error.hpp"

namespace kgdedup {

inline std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline PairKey normalized(std::string a, std::string b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
}

struct LabelRecord {
    std::string source_id;
    std::string target_id;
    bool is_duplicate = false;
    std::string labelled_at;

    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

// Unordered pair -> label.
using LabelSet = std::map<PairKey, LabelRecord>;

inline nlohmann::json to_json(const LabelRecord& r) {
    return {{"source_id", r.source_id},
            {"target_id", r.target_id},
            {"is_duplicate", r.is_duplicate},
            {"labelled_at", r.labelled_at}};
}

inline LabelRecord label_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error("label must be an object");
    LabelRecord r;
    const auto& s = j.at("source_id");
    const auto& t = j.at("target_id");
    const auto& d = j.at("is_duplicate");
    if (!s.is_string() || !t.is_string() || !d.is_boolean()) throw Error("label has wrong field types");
    r.source_id = s.get<std::string>();
    r.target_id = t.get<std::string>();
    r.is_duplicate = d.get<bool>();
    if (j.contains("labelled_at") && j["labelled_at"].is_string()) r.labelled_at = j["labelled_at"].get<std::string>();
    if (r.source_id.empty() || r.target_id.empty()) throw Error("label ids must be non-empty");
    return r;
}

// Many readers, serialized writers. With a backing file, every record is
// flushed before record() returns; replay keeps the last write per pair.
class LabelStore {
public:
    LabelStore() = default;

    explicit LabelStore(std::filesystem::path file) : file_(std::move(file)) {
        std::ifstream in(*file_);
        if (!in) return;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                auto r = label_from_json(nlohmann::json::parse(line));
                labels_[normalized(r.source_id, r.target_id)] = r;
            } catch (const std::exception& e) {
                throw StoreError(file_->string() + ":" + std::to_string(line_no) + ": corrupt label record (" +
                                 e.what() + ")");
            }
        }
    }

    LabelRecord record(const std::string& source_id, const std::string& target_id, bool is_duplicate,
                       std::string labelled_at = utc_timestamp()) {
        if (source_id.empty() || target_id.empty()) throw StoreError("label ids must be non-empty");
        LabelRecord r{source_id, target_id, is_duplicate, std::move(labelled_at)};
        std::unique_lock lock(mutex_);
        if (file_) {
            std::ofstream out(*file_, std::ios::app);
            out << to_json(r).dump() << '\n';
            out.flush();
            if (!out) throw StoreError("cannot append to " + file_->string());
        }
        labels_[normalized(source_id, target_id)] = r;
        return r;
    }

    std::optional<LabelRecord> lookup(const std::string& a, const std::string& b) const {
        std::shared_lock lock(mutex_);
        auto it = labels_.find(normalized(a, b));
        if (it == labels_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return labels_.size();
    }

    LabelSet snapshot() const {
        std::shared_lock lock(mutex_);
        return labels_;
    }

    // One line per pair in key order.
    std::string compacted_jsonl() const {
        std::shared_lock lock(mutex_);
        std::string out;
        for (const auto& [key, r] : labels_) {
            out += to_json(r).dump();
            out += '\n';
        }
        return out;
    }

    // Rewrites the backing file without superseded records.
    void compact() {
        if (!file_) return;
        std::string data = compacted_jsonl();
        std::unique_lock lock(mutex_);
        auto tmp = *file_;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            out << data;
            if (!out) throw StoreError("cannot write " + tmp.string());
        }
        std::filesystem::rename(tmp, *file_);
    }

private:
    std::optional<std::filesystem::path> file_;
    mutable std::shared_mutex mutex_;
    LabelSet labels_;
};

}  // namespace kgdedup
