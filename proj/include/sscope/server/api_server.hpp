#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sscope/engine/engine.hpp"
#include "sscope/store/project_store.hpp"

namespace sscope {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path data_dir;
    std::size_t workers = 2;
    std::size_t checkpoint_every = 500;
    std::chrono::milliseconds handshake_timeout{10000};
    std::vector<std::filesystem::path> plugin_dirs;
    std::optional<std::filesystem::path> static_dir;  // served at "/" when set
};

// HTTP front end over the project store, engine and report generators.
// Errors are returned as {"code","message","detail"}. Mutating requests
// carrying an Idempotency-Key header are answered once and replayed on
// retry. Job and project feeds are served as text/event-stream.
class ApiServer {
public:
    // Opens the data directory (throws Error(io, "unwritable data dir")) and
    // starts the engine, which re-queues unfinished jobs.
    explicit ApiServer(ServerConfig config);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Binds the listening socket and returns the port.
    // Throws Error(io, "port in use") when the address is taken.
    int bind();
    // Serves until stop(); bind() must have succeeded.
    void serve();
    // Stops accepting requests, closes feeds and waits for running jobs.
    void stop();

    Engine& engine();
    ProjectStore& store();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sscope
