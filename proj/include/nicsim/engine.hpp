#ifndef NICSIM_ENGINE_HPP
#define NICSIM_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "nicsim/sim_time.hpp"

namespace nicsim {

struct LivelockError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using EventHandle = std::uint64_t;
inline constexpr EventHandle kInvalidHandle = 0;

// Single-threaded discrete-event engine. Events fire in nondecreasing time,
// FIFO among equal timestamps. One instance is confined to one thread of
// control; independent instances may run in parallel.
class Engine {
public:
    struct LogEntry {
        SimTime at;
        std::uint64_t seq;
        std::string label;
    };

    explicit Engine(std::uint64_t event_budget = 100'000'000ULL)
        : budget_(event_budget) {}

    SimTime now() const { return now_; }

    EventHandle schedule(SimTime at, std::function<void()> fn,
                         std::string label = {}) {
        if (at < now_)
            throw std::logic_error("Engine: scheduling in the past");
        std::uint64_t seq = ++next_seq_;
        queue_.push(Ev{at, seq, std::move(fn), std::move(label)});
        live_.insert(seq);
        return seq;
    }

    // True iff the event had not yet fired. Idempotent.
    bool cancel(EventHandle h) {
        if (live_.erase(h) == 0) return false;
        cancelled_.insert(h);
        return true;
    }

    // Dispatches until the queue drains; returns the fire time of the last
    // dispatched event (zero if nothing fired).
    SimTime run_until_idle() {
        SimTime last{};
        while (!queue_.empty()) {
            Ev ev = queue_.top();
            queue_.pop();
            if (cancelled_.erase(ev.seq)) continue;
            live_.erase(ev.seq);
            if (++dispatched_ > budget_)
                throw LivelockError(
                    "Engine: event budget exceeded (likely livelock)");
            now_ = ev.at;
            last = ev.at;
            if (logging_) log_.push_back({ev.at, ev.seq, ev.label});
            ev.fn();
        }
        return last;
    }

    void enable_logging(bool on) { logging_ = on; }
    const std::vector<LogEntry>& dispatch_log() const { return log_; }
    std::uint64_t dispatched() const { return dispatched_; }

private:
    struct Ev {
        SimTime at;
        std::uint64_t seq;
        std::function<void()> fn;
        std::string label;
    };
    struct Later {
        bool operator()(const Ev& a, const Ev& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Ev, std::vector<Ev>, Later> queue_;
    std::unordered_set<std::uint64_t> cancelled_; // cancelled but still queued
    std::unordered_set<std::uint64_t> live_;      // queued, not cancelled
    SimTime now_{};
    std::uint64_t next_seq_ = 0;
    std::uint64_t dispatched_ = 0;
    std::uint64_t budget_;
    bool logging_ = false;
    std::vector<LogEntry> log_;
};

// A serialized processing resource (a NIC processor or a host CPU). Work
// items occupy the resource FIFO; a request made at time t starts at
// max(t, busy_until).
class Processor {
public:
    explicit Processor(Engine& eng) : eng_(eng) {}

    // Occupies the processor for `dur` and runs `fn` at completion.
    // Returns the completion time.
    SimTime exec(SimTime dur, std::function<void()> fn) {
        SimTime start = std::max(eng_.now(), busy_until_);
        SimTime done = start + dur;
        busy_until_ = done;
        eng_.schedule(done, std::move(fn));
        return done;
    }

    SimTime busy_until() const { return busy_until_; }

private:
    Engine& eng_;
    SimTime busy_until_{};
};

} // namespace nicsim

#endif
