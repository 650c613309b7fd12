#include "sscope/engine/result_cache.hpp"

#include <random>

#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"

namespace fs = std::filesystem;

namespace sscope {
namespace {

std::string file_name_for(std::string_view stream) {
    std::string out;
    for (char c : stream)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
    return out + ".jsonl";
}

json to_json(const CachedStream& s) {
    return json{{"name", s.name},
                {"variant", to_string(s.variant)},
                {"unit", s.unit ? json(*s.unit) : json(nullptr)},
                {"file", fs::path(s.file).filename().string()},
                {"record_count", s.record_count},
                {"info", s.info}};
}

}  // namespace

const CachedStream& CacheEntry::stream(std::string_view name) const {
    for (const auto& s : streams)
        if (s.name == name) return s;
    throw Error(Errc::not_found, "cache entry has no stream named " + std::string(name));
}

ResultCache::ResultCache(fs::path data_dir) : data_dir_(std::move(data_dir)), root_(data_dir_ / "cache") {
    fs::create_directories(root_);
    // Leftovers of runs interrupted before commit.
    std::error_code ec;
    fs::remove_all(root_ / ".staging", ec);
    fs::create_directories(root_ / ".staging");
}

fs::path ResultCache::entry_dir(const std::string& key_hex) const { return root_ / key_hex; }

std::optional<CacheEntry> ResultCache::read_entry(const std::string& key_hex) const {
    const auto meta_path = entry_dir(key_hex) / "meta.json";
    if (!fs::is_regular_file(meta_path)) return std::nullopt;
    const json meta = json::parse(read_file(meta_path));
    CacheEntry entry;
    entry.key_hex = key_hex;
    const json& k = meta.at("key");
    entry.key = CacheKey{k.at("recording_digest").get<std::string>(), k.at("model_id").get<std::string>(),
                         k.at("model_version").get<std::string>(), k.at("params_digest").get<std::string>()};
    for (const auto& s : meta.at("streams")) {
        CachedStream cs;
        cs.name = s.at("name").get<std::string>();
        cs.variant = stream_variant_from_string(s.at("variant").get<std::string>());
        if (s.at("unit").is_string()) cs.unit = s.at("unit").get<std::string>();
        cs.file = (fs::path("cache") / key_hex / s.at("file").get<std::string>()).string();
        cs.record_count = s.at("record_count").get<std::size_t>();
        cs.info = s.value("info", json::object());
        entry.streams.push_back(std::move(cs));
    }
    return entry;
}

std::optional<CacheEntry> ResultCache::lookup(const std::string& key_hex) const { return read_entry(key_hex); }

CacheEntry ResultCache::persist(const CacheKey& key, const std::string& key_hex, const fs::path& staging,
                                std::vector<FilterOutput> outputs) const {
    json streams = json::array();
    for (auto& out : outputs) {
        const std::string file = file_name_for(out.name);
        write_stream_file(staging / file, out.records);
        CachedStream cs{out.name, out.variant, out.unit, file, out.records.size(), out.info};
        streams.push_back(to_json(cs));
    }
    const json meta{{"key", key.to_json()}, {"key_hex", key_hex}, {"streams", streams}};
    write_file_atomic(staging / "meta.json", meta.dump(2));

    const fs::path final_dir = entry_dir(key_hex);
    std::error_code ec;
    fs::rename(staging, final_dir, ec);
    if (ec) {
        // Another process committed the same key first; identical by the determinism contract.
        fs::remove_all(staging, ec);
        if (!fs::exists(final_dir / "meta.json")) throw Error(Errc::io, "cannot commit cache entry " + key_hex);
    }
    return *read_entry(key_hex);
}

CacheEntry ResultCache::get_or_run(const CacheKey& key, const Runner& runner) {
    const std::string key_hex = key.hex();
    std::promise<CacheEntry> promise;
    {
        std::unique_lock lock(mu_);
        if (auto it = inflight_.find(key_hex); it != inflight_.end()) {
            auto shared = it->second;
            lock.unlock();
            return shared.get();
        }
        if (auto entry = read_entry(key_hex)) return *entry;
        inflight_.emplace(key_hex, promise.get_future().share());
        ++executions_[key_hex];
    }

    thread_local std::mt19937_64 rng{std::random_device{}()};
    const fs::path staging = root_ / ".staging" / (key_hex + "-" + std::to_string(rng() & 0xffffffff));
    try {
        fs::create_directories(staging);
        CacheEntry entry = persist(key, key_hex, staging, runner(staging));
        promise.set_value(entry);
        std::lock_guard lock(mu_);
        inflight_.erase(key_hex);
        return entry;
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mu_);
        inflight_.erase(key_hex);
        throw;
    }
}

std::size_t ResultCache::executions(const std::string& key_hex) const {
    std::lock_guard lock(mu_);
    auto it = executions_.find(key_hex);
    return it == executions_.end() ? 0 : it->second;
}

std::size_t ResultCache::total_executions() const {
    std::lock_guard lock(mu_);
    std::size_t total = 0;
    for (const auto& [_, n] : executions_) total += n;
    return total;
}

std::vector<Record> ResultCache::load(const CachedStream& stream) const {
    return read_stream_file(data_dir_ / stream.file);
}

}  // namespace sscope
