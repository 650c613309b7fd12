// Line-protocol test plugin. Emits one window classification per
// [k*hop, k*hop + window) over the configured range.
//   --mode neutral | cycle | top3 | bad-timestamp | bad-probability |
//          exit1 | error | hang | slow
#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

using json = nlohmann::json;

namespace {

void send(const json& j) { std::cout << j.dump() << '\n' << std::flush; }

json event(std::int64_t t0, std::int64_t t1, const std::string& label, double p) {
    return json{{"type", "event"}, {"stream", "emotion"}, {"t0_ms", t0}, {"t1_ms", t1}, {"label", label}, {"p", p}};
}

double hashed_probability(std::uint64_t k, std::uint64_t seed) {
    std::uint64_t z = k * 0x9E3779B97F4A7C15ull + seed + 0x632BE59BD9B4E019ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return 0.5 + 0.5 * static_cast<double>(z >> 11) / 9007199254740992.0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mock window classifier"};
    std::string mode = "neutral";
    int delay_ms = 100;
    app.add_option("--mode", mode);
    app.add_option("--delay-ms", delay_ms, "per-window delay in slow mode");
    CLI11_PARSE(app, argc, argv);

    std::string line;
    if (!std::getline(std::cin, line)) {
        std::cerr << "mock: no config\n";
        return 2;
    }
    const json config = json::parse(line, nullptr, false);
    if (config.is_discarded() || config.value("type", "") != "config") {
        send({{"type", "error"}, {"message", "bad config"}});
        return 1;
    }
    if (mode == "hang") {
        std::this_thread::sleep_for(std::chrono::hours(1));
        return 0;
    }
    const auto paths = config.value("recording_paths", json::object());
    if (!paths.contains("frame-sequence")) {
        send({{"type", "error"}, {"message", "missing frame-sequence recording path"}});
        return 1;
    }

    const json params = config.value("params", json::object());
    const std::int64_t window = params.value("window_ms", std::int64_t{1000});
    const std::int64_t hop = params.value("hop_ms", std::int64_t{500});
    const std::uint64_t seed = params.value("seed", std::uint64_t{0});
    const std::int64_t t_begin = config.value("t0_ms", std::int64_t{0});
    const std::int64_t t_end = config.value("t1_ms", std::int64_t{0});

    send({{"type", "descriptor"},
          {"name", "mock-emotion"},
          {"model_id", "mock-emotion"},
          {"model_version", "1"},
          {"outputs", json::array({{{"stream", "emotion"}, {"variant", "event"}, {"unit", nullptr}}})}});

    const char* cycle[] = {"neutral", "happy", "neutral", "surprised"};
    std::int64_t windows = 0;
    for (std::int64_t s = t_begin; s < t_end; s += hop) ++windows;
    double reported = 0.0;

    for (std::int64_t k = 0; k < windows; ++k) {
        const std::int64_t t0 = t_begin + k * hop;
        const std::int64_t t1 = std::min(t0 + window, t_end);
        if (mode == "neutral" || mode == "slow") {
            send(event(t0, t1, "neutral", 1.0));
            if (mode == "slow") std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        } else if (mode == "cycle") {
            send(event(t0, t1, cycle[k % 4], hashed_probability(static_cast<std::uint64_t>(k), seed)));
        } else if (mode == "top3") {
            send(event(t0, t1, "happy", 0.5));
            send(event(t0, t1, "neutral", 0.3));
            send(event(t0, t1, "sad", 0.1));
        } else if (mode == "bad-probability") {
            send(event(t0, t1, "neutral", k == 3 ? 1.2 : 1.0));
        } else if (mode == "bad-timestamp") {
            send(event(t0, t1, "neutral", 1.0));
            if (k == 3) send(event(t_end - 100, t_end + 500, "neutral", 1.0));
        } else if (mode == "exit1") {
            send(event(t0, t1, "neutral", 1.0));
            if (k == 3) {
                std::cerr << "mock: simulated crash in window " << k << '\n';
                return 1;
            }
        } else if (mode == "error") {
            send({{"type", "error"}, {"message", "mock failure"}});
            return 1;
        } else {
            std::cerr << "mock: unknown mode " << mode << '\n';
            return 2;
        }
        const double fraction = static_cast<double>(k + 1) / static_cast<double>(windows);
        for (double q : {0.25, 0.5, 0.75, 1.0})
            if (fraction >= q && reported < q) {
                send({{"type", "progress"}, {"fraction", q}});
                reported = q;
            }
    }
    send({{"type", "done"}});
    return 0;
}
