#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sscope/core/types.hpp"

namespace sscope {

// One stream produced by a filter run, before persistence.
struct FilterOutput {
    std::string name;
    StreamVariant variant = StreamVariant::continuous;
    std::optional<std::string> unit;
    std::vector<Record> records;
    json info = json::object();
};

struct CachedStream {
    std::string name;
    StreamVariant variant = StreamVariant::continuous;
    std::optional<std::string> unit;
    std::string file;  // relative to the data directory
    std::size_t record_count = 0;
    json info = json::object();
};

struct CacheEntry {
    std::string key_hex;
    CacheKey key;
    std::vector<CachedStream> streams;

    const CachedStream& stream(std::string_view name) const;
};

// Content-addressed store of filter results under <data>/cache/<key>/.
// A runner writes any side files (thumbnails) into the staging directory it
// is handed and returns its streams; the entry becomes visible atomically
// (directory rename) only after the runner succeeds. Concurrent calls for
// one key share a single execution.
class ResultCache {
public:
    using Runner = std::function<std::vector<FilterOutput>(const std::filesystem::path& staging_dir)>;

    explicit ResultCache(std::filesystem::path data_dir);

    std::optional<CacheEntry> lookup(const std::string& key_hex) const;
    bool contains(const std::string& key_hex) const { return lookup(key_hex).has_value(); }

    // Runner exceptions propagate to every waiter and leave nothing cached.
    CacheEntry get_or_run(const CacheKey& key, const Runner& runner);

    // Runner invocations for `key_hex` in this process.
    std::size_t executions(const std::string& key_hex) const;
    std::size_t total_executions() const;

    std::vector<Record> load(const CachedStream& stream) const;
    std::filesystem::path entry_dir(const std::string& key_hex) const;

private:
    std::optional<CacheEntry> read_entry(const std::string& key_hex) const;
    CacheEntry persist(const CacheKey& key, const std::string& key_hex,
                       const std::filesystem::path& staging, std::vector<FilterOutput> outputs) const;

    std::filesystem::path data_dir_;
    std::filesystem::path root_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_future<CacheEntry>> inflight_;
    std::map<std::string, std::size_t> executions_;
};

}  // namespace sscope
