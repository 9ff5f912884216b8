#ifndef NICSIM_BARRIER_ENDPOINT_HPP
#define NICSIM_BARRIER_ENDPOINT_HPP

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "nicsim/network.hpp"
#include "nicsim/schedule.hpp"

namespace nicsim {

// Sequencing and progress logic shared by every barrier backend: tracks the
// expected-arrival bits for the in-progress barrier, buffers one-ahead
// arrivals, and drives round dispatch. A message with seq = current + 2 is
// impossible (a rank can emit k+2 only after all ranks exited k), so a single
// one-ahead slot suffices; anything further off is protocol corruption.
class BarrierEndpoint {
public:
    using SendRoundFn = std::function<void(int round, std::uint64_t seq)>;
    using CompleteFn = std::function<void(std::uint64_t seq)>;

    BarrierEndpoint(const Schedule& sched, SendRoundFn send_round,
                    CompleteFn on_complete)
        : sched_(sched),
          send_round_(std::move(send_round)),
          on_complete_(std::move(on_complete)) {}

    std::uint64_t current_seq() const { return current_; }
    bool in_progress() const { return in_progress_; }

    // Begins the next barrier. Dispatches every round whose prerequisites are
    // already met (round 0 always; later rounds may be unblocked by buffered
    // one-ahead arrivals).
    std::uint64_t initiate() {
        if (in_progress_)
            throw std::logic_error("barrier re-initiated while in progress");
        ++current_;
        in_progress_ = true;
        rounds_dispatched_ = 0;
        got_.assign(sched_.rounds.size(), {});
        for (size_t r = 0; r < sched_.rounds.size(); ++r)
            got_[r].assign(sched_.rounds[r].await_from.size(), 0);
        awaits_left_ = sched_.total_awaits();
        auto buffered = std::move(one_ahead_);
        one_ahead_.clear();
        for (auto [round, src] : buffered) apply(round, src);
        advance();
        return current_;
    }

    enum class Classify { Applied, Duplicate, OneAhead, Stale, Corrupt };

    Classify on_message(int round, Rank src, std::uint64_t seq) {
        if (seq == current_ + 1) {
            one_ahead_.emplace_back(round, src);
            return Classify::OneAhead;
        }
        if (seq == current_) {
            if (!in_progress_) return Classify::Stale; // spurious retransmit
            if (!apply(round, src)) return Classify::Duplicate;
            advance();
            return Classify::Applied;
        }
        // A retransmit can sit on a busy NIC processor for several barriers;
        // any old sequence is stale. Only the future is impossible.
        if (seq < current_) return Classify::Stale;
        return Classify::Corrupt;
    }

    bool round_dispatched(std::uint64_t seq, int round) const {
        if (seq < current_) return true; // completed barriers sent everything
        return round < rounds_dispatched_;
    }

    // Unsatisfied (round, peer) awaits of the in-progress barrier.
    std::vector<std::pair<int, Rank>> missing() const {
        std::vector<std::pair<int, Rank>> out;
        if (!in_progress_) return out;
        for (size_t r = 0; r < got_.size(); ++r)
            for (size_t i = 0; i < got_[r].size(); ++i)
                if (!got_[r][i])
                    out.emplace_back(static_cast<int>(r),
                                     sched_.rounds[r].await_from[i]);
        return out;
    }

    const Schedule& schedule() const { return sched_; }

private:
    // Returns false on a duplicate bit, throws on an unknown (round, src).
    bool apply(int round, Rank src) {
        if (round < 0 || round >= static_cast<int>(sched_.rounds.size()))
            throw ProtocolError("barrier message for nonexistent round");
        const auto& awaits = sched_.rounds[static_cast<size_t>(round)].await_from;
        for (size_t i = 0; i < awaits.size(); ++i) {
            if (awaits[i] == src) {
                auto& bit = got_[static_cast<size_t>(round)][i];
                if (bit) return false;
                bit = 1;
                --awaits_left_;
                return true;
            }
        }
        throw ProtocolError("barrier message from unexpected sender");
    }

    void advance() {
        while (rounds_dispatched_ < static_cast<int>(sched_.rounds.size()) &&
               prefix_ready(rounds_dispatched_)) {
            int r = rounds_dispatched_++;
            send_round_(r, current_);
        }
        if (in_progress_ && awaits_left_ == 0 &&
            rounds_dispatched_ == static_cast<int>(sched_.rounds.size())) {
            in_progress_ = false;
            on_complete_(current_);
        }
    }

    bool prefix_ready(int r) const {
        for (int q = 0; q < r; ++q)
            for (char bit : got_[static_cast<size_t>(q)])
                if (!bit) return false;
        return true;
    }

    Schedule sched_;
    SendRoundFn send_round_;
    CompleteFn on_complete_;
    std::uint64_t current_ = 0;
    bool in_progress_ = false;
    int rounds_dispatched_ = 0;
    int awaits_left_ = 0;
    std::vector<std::vector<char>> got_;
    std::vector<std::pair<int, Rank>> one_ahead_;
};

} // namespace nicsim

#endif
