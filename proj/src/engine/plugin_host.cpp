#include "sscope/engine/plugin_host.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "sscope/core/canonical.hpp"
#include "sscope/core/error.hpp"
#include "sscope/core/stream_io.hpp"

extern char** environ;

namespace fs = std::filesystem;

namespace sscope {
namespace {

constexpr std::size_t kStderrTail = 4096;
constexpr double kProbabilitySlack = 1e-9;

class Pipe {
public:
    Pipe() {
        if (::pipe2(fds_, O_CLOEXEC) != 0) throw Error(Errc::io, "pipe failed", std::strerror(errno));
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;

    int read_end() const { return fds_[0]; }
    int write_end() const { return fds_[1]; }
    void close_read() { close_fd(fds_[0]); }
    void close_write() { close_fd(fds_[1]); }

private:
    static void close_fd(int& fd) {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
    int fds_[2]{-1, -1};
};

// Owns the child; kills and reaps it unless it was reaped normally.
class Child {
public:
    explicit Child(pid_t pid) : pid_(pid) {}
    ~Child() {
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }
    Child(const Child&) = delete;
    Child& operator=(const Child&) = delete;

    int wait() {
        int status = 0;
        while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {}
        pid_ = -1;
        if (WIFEXITED(status)) return WEXITSTATUS(status);
        if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
        return -1;
    }

private:
    pid_t pid_;
};

struct OutputState {
    FilterOutput output;
    Millis last_start = 0;
    std::size_t checkpointed = 0;
    std::map<std::pair<Millis, Millis>, double> window_mass;
};

class Session {
public:
    Session(const PluginSpec& spec, Millis duration, fs::path staging, const PluginCallbacks& callbacks)
        : spec_(spec), duration_(duration), staging_(std::move(staging)), callbacks_(callbacks) {}

    // Returns true once "done" was received.
    bool handle_line(std::string_view line) {
        ++line_no_;
        json msg;
        try {
            msg = json::parse(line);
        } catch (const json::exception& e) {
            fail("malformed message at line " + std::to_string(line_no_), e.what());
        }
        if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
            fail("malformed message at line " + std::to_string(line_no_), "missing type");
        const std::string type = msg["type"].get<std::string>();
        if (!have_descriptor_) {
            if (type == "error") fail_plugin_error(msg);
            if (type != "descriptor")
                fail("protocol violation at line " + std::to_string(line_no_), "expected descriptor, got " + type);
            accept_descriptor(msg);
            return false;
        }
        try {
            if (type == "sample") {
                accept_sample(msg);
            } else if (type == "event") {
                accept_event(msg);
            } else if (type == "progress") {
                const double f = msg.at("fraction").get<double>();
                if (!(f >= 0.0 && f <= 1.0))
                    fail("malformed message at line " + std::to_string(line_no_), "progress outside [0, 1]");
                if (callbacks_.progress) callbacks_.progress(f);
            } else if (type == "done") {
                flush_checkpoints(true);
                return true;
            } else if (type == "error") {
                fail_plugin_error(msg);
            } else {
                fail("protocol violation at line " + std::to_string(line_no_), "unknown message type " + type);
            }
        } catch (const json::exception& e) {
            fail("malformed message at line " + std::to_string(line_no_), e.what());
        }
        return false;
    }

    bool have_descriptor() const { return have_descriptor_; }

    PluginRun finish(std::string stderr_tail) {
        PluginRun run;
        run.descriptor = descriptor_;
        for (auto& name : order_) run.outputs.push_back(std::move(outputs_.at(name).output));
        run.stderr_tail = std::move(stderr_tail);
        for (const auto& name : order_) {
            std::error_code ec;
            fs::remove(partial_path(name), ec);
        }
        return run;
    }

    std::function<std::string()> stderr_tail;

private:
    [[noreturn]] void fail(const std::string& message, const std::string& detail = {}) {
        std::string full_detail = detail;
        if (stderr_tail) {
            const std::string tail = stderr_tail();
            if (!tail.empty()) full_detail += (full_detail.empty() ? "" : "\n") + std::string("stderr: ") + tail;
        }
        throw Error(Errc::plugin, message, full_detail);
    }

    [[noreturn]] void fail_plugin_error(const json& msg) {
        fail("plugin reported error: " + msg.value("message", std::string{"(no message)"}));
    }

    [[noreturn]] void invalid(const std::string& why) {
        fail("plugin emitted invalid sample at line " + std::to_string(line_no_), why);
    }

    void accept_descriptor(const json& msg) {
        try {
            for (const auto& o : msg.at("outputs")) {
                FilterOutput out;
                out.name = o.at("stream").get<std::string>();
                out.variant = stream_variant_from_string(o.value("variant", std::string{"event"}));
                if (o.contains("unit") && o["unit"].is_string()) out.unit = o["unit"].get<std::string>();
                if (out.variant != StreamVariant::continuous && out.variant != StreamVariant::event)
                    fail("protocol violation at line " + std::to_string(line_no_),
                         "plugins may only emit continuous or event streams");
                if (outputs_.contains(out.name))
                    fail("protocol violation at line " + std::to_string(line_no_), "duplicate output " + out.name);
                order_.push_back(out.name);
                const std::string key = out.name;
                outputs_.emplace(key, OutputState{std::move(out), 0, 0, {}});
            }
        } catch (const json::exception& e) {
            fail("malformed message at line " + std::to_string(line_no_), e.what());
        } catch (const Error& e) {
            if (e.code() == Errc::plugin) throw;
            fail("malformed message at line " + std::to_string(line_no_), e.what());
        }
        if (order_.empty()) fail("protocol violation at line " + std::to_string(line_no_), "descriptor declares no outputs");
        descriptor_ = msg;
        have_descriptor_ = true;
    }

    OutputState& target(const json& msg, StreamVariant variant) {
        const std::string name = msg.contains("stream") ? msg["stream"].get<std::string>() : order_.front();
        auto it = outputs_.find(name);
        if (it == outputs_.end())
            fail("protocol violation at line " + std::to_string(line_no_), "undeclared stream " + name);
        if (it->second.output.variant != variant)
            fail("protocol violation at line " + std::to_string(line_no_), "wrong record type for stream " + name);
        return it->second;
    }

    void check_time(OutputState& out, Millis t0, Millis t1) {
        if (t0 > t1) invalid("t0_ms > t1_ms");
        if (t0 < 0 || t1 > duration_) invalid("timestamp outside [0, " + std::to_string(duration_) + "]");
        if (!out.output.records.empty() && t0 < out.last_start) invalid("records out of time order");
        out.last_start = t0;
    }

    static Millis integer_ms(const json& v) {
        if (!v.is_number_integer()) throw json::type_error::create(302, "timestamp must be an integer", &v);
        return v.get<Millis>();
    }

    void accept_sample(const json& msg) {
        OutputState& out = target(msg, StreamVariant::continuous);
        const Millis t = integer_ms(msg.at("t_ms"));
        const json& value = msg.at("value");
        if (!value.is_number()) invalid("value must be a number");
        Sample s{t, value.get<double>(), std::nullopt};
        if (!std::isfinite(s.value)) invalid("non-finite value");
        if (msg.contains("voiced")) s.voiced = msg["voiced"].get<bool>();
        check_time(out, t, t);
        push(out, s);
    }

    void accept_event(const json& msg) {
        OutputState& out = target(msg, StreamVariant::event);
        EventSpan e;
        e.t0_ms = integer_ms(msg.at("t0_ms"));
        e.t1_ms = integer_ms(msg.at("t1_ms"));
        e.label = msg.at("label").get<std::string>();
        e.probability = msg.at("p").get<double>();
        if (e.label.empty()) invalid("empty label");
        check_time(out, e.t0_ms, e.t1_ms);
        if (!(e.probability >= 0.0 && e.probability <= 1.0))
            fail("invalid probability at line " + std::to_string(line_no_),
                 "p = " + std::to_string(e.probability) + " outside [0, 1]");
        double& mass = out.window_mass[{e.t0_ms, e.t1_ms}];
        mass += e.probability;
        if (mass > 1.0 + kProbabilitySlack)
            fail("invalid probability at line " + std::to_string(line_no_),
                 "probabilities for one window sum to " + std::to_string(mass));
        push(out, std::move(e));
    }

    void push(OutputState& out, Record record) {
        out.output.records.push_back(std::move(record));
        if (spec_.checkpoint_every > 0 &&
            out.output.records.size() - out.checkpointed >= spec_.checkpoint_every)
            checkpoint(out);
    }

    fs::path partial_path(const std::string& name) const {
        std::string file;
        for (char c : name) file += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
        return staging_ / (file + ".partial.jsonl");
    }

    void checkpoint(OutputState& out) {
        const auto mode = out.checkpointed == 0 ? std::ios::trunc : std::ios::app;
        std::ofstream file(partial_path(out.output.name), mode | std::ios::binary);
        for (std::size_t i = out.checkpointed; i < out.output.records.size(); ++i)
            file << canonical_encode(record_to_json(out.output.records[i])) << '\n';
        out.checkpointed = out.output.records.size();
        if (callbacks_.checkpoint) callbacks_.checkpoint(out.output.name, out.checkpointed);
    }

    void flush_checkpoints(bool) {
        for (auto& [_, out] : outputs_)
            if (out.checkpointed < out.output.records.size()) checkpoint(out);
    }

    const PluginSpec& spec_;
    Millis duration_;
    fs::path staging_;
    const PluginCallbacks& callbacks_;
    std::size_t line_no_ = 0;
    bool have_descriptor_ = false;
    json descriptor_;
    std::vector<std::string> order_;
    std::map<std::string, OutputState> outputs_;
};

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

std::string resolve_executable(const std::string& program) {
    if (program.empty()) throw Error(Errc::not_found, "plugin not found: empty command");
    if (program.find('/') != std::string::npos) {
        if (::access(program.c_str(), X_OK) == 0 && fs::is_regular_file(program)) return program;
        throw Error(Errc::not_found, "plugin not found: " + program);
    }
    const char* path = std::getenv("PATH");
    std::string_view dirs = path ? path : "/usr/local/bin:/usr/bin:/bin";
    while (!dirs.empty()) {
        const auto colon = dirs.find(':');
        const std::string dir(dirs.substr(0, colon));
        dirs = colon == std::string_view::npos ? std::string_view{} : dirs.substr(colon + 1);
        const fs::path candidate = fs::path(dir.empty() ? "." : dir) / program;
        if (::access(candidate.c_str(), X_OK) == 0 && fs::is_regular_file(candidate)) return candidate.string();
    }
    throw Error(Errc::not_found, "plugin not found: " + program);
}

PluginRun host_plugin(const PluginSpec& spec, const json& config, Millis duration_ms, const fs::path& staging_dir,
                      const PluginCallbacks& callbacks) {
    if (spec.argv.empty()) throw Error(Errc::invalid_argument, "empty plugin command");
    ignore_sigpipe();
    const std::string program = resolve_executable(spec.argv.front());

    Pipe in, out, err;
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in.read_end(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out.write_end(), STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err.write_end(), STDERR_FILENO);
    std::vector<char*> argv;
    for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
    argv[0] = const_cast<char*>(program.c_str());
    argv.push_back(nullptr);
    pid_t pid = 0;
    const int rc = ::posix_spawn(&pid, program.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) throw Error(Errc::plugin, "cannot start plugin " + program, std::strerror(rc));
    Child child(pid);
    in.close_read();
    out.close_write();
    err.close_write();

    {
        const std::string line = config.dump() + "\n";
        std::size_t written = 0;
        while (written < line.size()) {
            const ssize_t n = ::write(in.write_end(), line.data() + written, line.size() - written);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;  // child gone; its exit status tells the story
            written += static_cast<std::size_t>(n);
        }
        in.close_write();
    }

    std::string stderr_buf;
    Session session(spec, duration_ms, staging_dir, callbacks);
    session.stderr_tail = [&stderr_buf] { return stderr_buf; };

    const auto started = std::chrono::steady_clock::now();
    std::string pending;
    bool stdout_open = true;
    bool stderr_open = true;
    bool done = false;
    char buf[65536];
    while (stdout_open || stderr_open) {
        int timeout_ms = -1;
        if (!session.have_descriptor()) {
            const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started);
            const auto left = spec.handshake_timeout - elapsed;
            if (left.count() <= 0)
                throw Error(Errc::plugin, "handshake timeout",
                            "no descriptor within " + std::to_string(spec.handshake_timeout.count()) + " ms");
            timeout_ms = static_cast<int>(left.count());
        }
        pollfd fds[2] = {{stdout_open ? out.read_end() : -1, POLLIN, 0}, {stderr_open ? err.read_end() : -1, POLLIN, 0}};
        const int ready = ::poll(fds, 2, timeout_ms);
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw Error(Errc::io, "poll failed", std::strerror(errno));
        }
        if (ready == 0) continue;  // handshake deadline re-checked above
        if (stderr_open && (fds[1].revents & (POLLIN | POLLHUP | POLLERR))) {
            const ssize_t n = ::read(err.read_end(), buf, sizeof buf);
            if (n <= 0) {
                stderr_open = false;
            } else {
                stderr_buf.append(buf, static_cast<std::size_t>(n));
                if (stderr_buf.size() > kStderrTail) stderr_buf.erase(0, stderr_buf.size() - kStderrTail);
            }
        }
        if (stdout_open && (fds[0].revents & (POLLIN | POLLHUP | POLLERR))) {
            const ssize_t n = ::read(out.read_end(), buf, sizeof buf);
            if (n <= 0) {
                stdout_open = false;
                if (!pending.empty() && !done) done = session.handle_line(pending);
                pending.clear();
            } else {
                pending.append(buf, static_cast<std::size_t>(n));
                std::size_t start = 0;
                for (std::size_t nl; (nl = pending.find('\n', start)) != std::string::npos; start = nl + 1) {
                    std::string_view line(pending.data() + start, nl - start);
                    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                    if (line.empty()) continue;
                    if (done)
                        throw Error(Errc::plugin, "protocol violation: output after done");
                    done = session.handle_line(line);
                }
                pending.erase(0, start);
            }
        }
    }

    const int code = child.wait();
    if (code != 0)
        throw Error(Errc::plugin,
                    "plugin exited with code " + std::to_string(code) +
                        (stderr_buf.empty() ? std::string{} : "; stderr: " + stderr_buf),
                    stderr_buf);
    if (!session.have_descriptor()) throw Error(Errc::plugin, "plugin exited before its descriptor", stderr_buf);
    if (!done) throw Error(Errc::plugin, "plugin exited without done", stderr_buf);
    return session.finish(stderr_buf);
}

}  // namespace sscope
