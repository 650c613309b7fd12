#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace sscope {

// Append-only broadcast log. Subscribers start at the current end of the
// log and see every later event in publication order; once a terminal
// event is published, new subscribers receive exactly that event.
template <typename Event>
class Feed : public std::enable_shared_from_this<Feed<Event>> {
public:
    using TerminalFn = std::function<bool(const Event&)>;

    explicit Feed(TerminalFn is_terminal = {}) : is_terminal_(std::move(is_terminal)) {}

    class Subscription {
    public:
        Subscription() = default;
        Subscription(std::shared_ptr<Feed> feed, std::size_t cursor) : feed_(std::move(feed)), cursor_(cursor) {}

        // Next event, or nullopt on timeout / after the terminal event was read.
        std::optional<Event> next(std::chrono::milliseconds timeout) {
            if (!feed_) return std::nullopt;
            std::unique_lock lock(feed_->mu_);
            if (!feed_->cv_.wait_for(lock, timeout, [&] { return cursor_ < feed_->events_.size() || feed_->closed_; }))
                return std::nullopt;
            if (cursor_ >= feed_->events_.size()) return std::nullopt;
            Event e = feed_->events_[cursor_++];
            if (feed_->is_terminal_ && feed_->is_terminal_(e)) finished_ = true;
            return e;
        }

        bool finished() const noexcept { return finished_; }

    private:
        std::shared_ptr<Feed> feed_;
        std::size_t cursor_ = 0;
        bool finished_ = false;
    };

    void publish(Event event) {
        {
            std::lock_guard lock(mu_);
            if (terminal_index_) return;
            if (is_terminal_ && is_terminal_(event)) terminal_index_ = events_.size();
            events_.push_back(std::move(event));
        }
        cv_.notify_all();
    }

    Subscription subscribe() {
        std::lock_guard lock(mu_);
        return Subscription(this->shared_from_this(), terminal_index_ ? *terminal_index_ : events_.size());
    }

    // Wakes blocked subscribers; they drain what is left and then see nullopt.
    void close() {
        {
            std::lock_guard lock(mu_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    std::vector<Event> snapshot() const {
        std::lock_guard lock(mu_);
        return events_;
    }

private:
    TerminalFn is_terminal_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::vector<Event> events_;
    std::optional<std::size_t> terminal_index_;
    bool closed_ = false;
};

}  // namespace sscope
