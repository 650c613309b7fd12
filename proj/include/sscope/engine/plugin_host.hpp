#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sscope/engine/result_cache.hpp"

namespace sscope {

// External filters talk line-delimited JSON over stdin/stdout:
//   host -> plugin  {"type":"config","recording_paths":{...},"params":{...},"t0_ms":..,"t1_ms":..}
//   plugin -> host  {"type":"descriptor","name":..,"model_id":..,"model_version":..,
//                    "outputs":[{"stream":..,"variant":..,"unit":..}]}
//                   then any of
//                   {"type":"sample","stream":..,"t_ms":..,"value":..[,"voiced":..]}
//                   {"type":"event","stream":..,"t0_ms":..,"t1_ms":..,"label":..,"p":..}
//                   {"type":"progress","fraction":..}
//                   and finally {"type":"done"} or {"type":"error","message":..}
// "stream" defaults to the first declared output. The plugin must exit 0
// after "done".

struct PluginSpec {
    std::vector<std::string> argv;
    std::chrono::milliseconds handshake_timeout{10000};
    std::size_t checkpoint_every = 500;
};

struct PluginCallbacks {
    std::function<void(double)> progress;
    // Called after each checkpoint with the stream name and records persisted so far.
    std::function<void(const std::string&, std::size_t)> checkpoint;
};

struct PluginRun {
    json descriptor;
    std::vector<FilterOutput> outputs;
    std::string stderr_tail;
};

// Resolves argv[0] against PATH (or checks it directly when it contains a
// slash). Throws Error(not_found, "plugin not found: ...").
std::string resolve_executable(const std::string& program);

// Spawns the plugin, sends `config`, and validates every message against
// the stream invariants for a recording of `duration_ms`. Validated records
// are checkpointed to <staging>/<stream>.partial.jsonl every
// checkpoint_every records. Any violation, a missing handshake within the
// timeout, an "error" message, or a nonzero exit kills the child and throws
// Error(plugin, ...) with the captured stderr tail in the detail.
PluginRun host_plugin(const PluginSpec& spec,
                      const json& config,
                      Millis duration_ms,
                      const std::filesystem::path& staging_dir,
                      const PluginCallbacks& callbacks = {});

}  // namespace sscope
