#include "nicsim/schedule.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace nicsim {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int ceil_log(int base, int n) {
    if (base < 2 || n < 1) throw std::invalid_argument("ceil_log: bad input");
    int steps = 0;
    long long reach = 1;
    while (reach < n) {
        reach *= base;
        ++steps;
    }
    return steps;
}

std::string algorithm_name(AlgorithmKind kind) {
    switch (kind.alg) {
        case Algorithm::GatherBroadcast: return "gb";
        case Algorithm::PairwiseExchange: return "pe";
        case Algorithm::Dissemination: return "ds";
    }
    return "?";
}

std::optional<AlgorithmKind> parse_algorithm(const std::string& name, int degree) {
    if (name == "ds" || name == "dissemination")
        return AlgorithmKind{Algorithm::Dissemination, degree};
    if (name == "pe" || name == "pairwise-exchange")
        return AlgorithmKind{Algorithm::PairwiseExchange, degree};
    if (name == "gb" || name == "gather-broadcast")
        return AlgorithmKind{Algorithm::GatherBroadcast, degree};
    return std::nullopt;
}

int Schedule::total_sends() const {
    int c = 0;
    for (const auto& r : rounds) c += static_cast<int>(r.send_to.size());
    return c;
}

int Schedule::total_awaits() const {
    int c = 0;
    for (const auto& r : rounds) c += static_cast<int>(r.await_from.size());
    return c;
}

namespace {

Schedule build_dissemination(int n, Rank me) {
    Schedule s{n, me, {}};
    int steps = ceil_log(2, n);
    for (int m = 0; m < steps; ++m) {
        long long stride = 1LL << m;
        Round r;
        r.send_to.push_back(static_cast<Rank>((me + stride) % n));
        r.await_from.push_back(static_cast<Rank>(((me - stride) % n + n) % n));
        s.rounds.push_back(std::move(r));
    }
    return s;
}

Schedule build_pairwise(int n, Rank me) {
    Schedule s{n, me, {}};
    if (is_power_of_two(n)) {
        int steps = ceil_log(2, n);
        for (int m = 0; m < steps; ++m) {
            Rank partner = me ^ (1 << m);
            Round r;
            r.send_to.push_back(partner);
            r.await_from.push_back(partner);
            s.rounds.push_back(std::move(r));
        }
        return s;
    }
    // Non-power-of-two: ranks >= M notify their low partner up front, the low
    // M ranks run the exchange, then the low partners release the high ranks.
    int big = 1;
    while (big * 2 < n) big *= 2; // largest power of two below n
    Round pre;
    if (me >= big) pre.send_to.push_back(me - big);
    if (me < n - big) pre.await_from.push_back(me + big);
    s.rounds.push_back(std::move(pre));
    int steps = ceil_log(2, big);
    for (int m = 0; m < steps; ++m) {
        Round r;
        if (me < big) {
            Rank partner = me ^ (1 << m);
            r.send_to.push_back(partner);
            r.await_from.push_back(partner);
        }
        s.rounds.push_back(std::move(r));
    }
    Round post;
    if (me < n - big) post.send_to.push_back(me + big);
    if (me >= big) post.await_from.push_back(me - big);
    s.rounds.push_back(std::move(post));
    return s;
}

// k-nomial combining tree rooted at rank 0: gather clears one base-d digit
// per step, broadcast replays the gather in reverse. This keeps the gather
// depth at ceil(log_d n) for every n.
Schedule build_gather_broadcast(int n, Rank me, int d) {
    Schedule s{n, me, {}};
    int steps = ceil_log(d, n);
    std::vector<Round> gather(static_cast<size_t>(steps));
    for (int st = 0; st < steps; ++st) {
        long long unit = 1;
        for (int i = 0; i < st; ++i) unit *= d;
        long long span = unit * d;
        Round& r = gather[static_cast<size_t>(st)];
        if (me % span != 0 && me % unit == 0) {
            r.send_to.push_back(static_cast<Rank>(me - me % span));
        } else if (me % span == 0) {
            for (int c = 1; c < d; ++c) {
                long long child = me + c * unit;
                if (child < n) r.await_from.push_back(static_cast<Rank>(child));
            }
        }
    }
    for (auto& r : gather) s.rounds.push_back(r);
    for (int st = steps - 1; st >= 0; --st) {
        const Round& g = gather[static_cast<size_t>(st)];
        Round r;
        r.send_to = g.await_from;   // parent releases its children
        r.await_from = g.send_to;   // child awaits its parent
        s.rounds.push_back(std::move(r));
    }
    return s;
}

} // namespace

Schedule build_schedule(AlgorithmKind kind, int n, Rank me) {
    if (n < 1) throw std::invalid_argument("build_schedule: n must be >= 1");
    if (me < 0 || me >= n) throw std::invalid_argument("build_schedule: rank out of range");
    if (n == 1) return Schedule{1, me, {}};
    switch (kind.alg) {
        case Algorithm::Dissemination: return build_dissemination(n, me);
        case Algorithm::PairwiseExchange: return build_pairwise(n, me);
        case Algorithm::GatherBroadcast:
            if (kind.degree < 2)
                throw std::invalid_argument("gather-broadcast: degree must be >= 2");
            return build_gather_broadcast(n, me, kind.degree);
    }
    throw std::logic_error("build_schedule: unknown algorithm");
}

int num_steps(AlgorithmKind kind, int n) {
    if (n < 1) throw std::invalid_argument("num_steps: n must be >= 1");
    if (n == 1) return 0;
    switch (kind.alg) {
        case Algorithm::Dissemination: return ceil_log(2, n);
        case Algorithm::PairwiseExchange:
            if (is_power_of_two(n)) return ceil_log(2, n);
            return ceil_log(2, n) - 1 + 2; // floor(log2 n) + 2
        case Algorithm::GatherBroadcast:
            if (kind.degree < 2)
                throw std::invalid_argument("gather-broadcast: degree must be >= 2");
            return 2 * ceil_log(kind.degree, n);
    }
    throw std::logic_error("num_steps: unknown algorithm");
}

std::vector<Schedule> build_all_schedules(AlgorithmKind kind, int n) {
    std::vector<Schedule> all;
    all.reserve(static_cast<size_t>(n));
    for (Rank r = 0; r < n; ++r) all.push_back(build_schedule(kind, n, r));
    return all;
}

std::optional<ScheduleViolation>
validate_schedules(const std::vector<Schedule>& all) {
    if (all.empty()) return ScheduleViolation{0, 0, 0, "no schedules"};
    int n = all[0].n;
    if (static_cast<int>(all.size()) != n)
        return ScheduleViolation{0, 0, 0, "schedule count does not match n"};
    size_t rounds = all[0].rounds.size();
    for (const auto& s : all) {
        if (s.n != n) return ScheduleViolation{0, s.me, 0, "inconsistent n"};
        if (s.rounds.size() != rounds)
            return ScheduleViolation{0, s.me, 0, "inconsistent round count"};
    }
    // Exact send/await matching per round.
    for (size_t r = 0; r < rounds; ++r) {
        std::map<std::pair<Rank, Rank>, int> balance; // (sender, receiver)
        for (const auto& s : all) {
            for (Rank dst : s.rounds[r].send_to) {
                if (dst == s.me)
                    return ScheduleViolation{static_cast<int>(r), s.me, dst,
                                             "rank sends to itself"};
                if (dst < 0 || dst >= n)
                    return ScheduleViolation{static_cast<int>(r), s.me, dst,
                                             "destination out of range"};
                ++balance[{s.me, dst}];
            }
            for (Rank src : s.rounds[r].await_from) --balance[{src, s.me}];
        }
        for (const auto& [pair, count] : balance) {
            if (count > 0)
                return ScheduleViolation{static_cast<int>(r), pair.first,
                                         pair.second, "send without matching await"};
            if (count < 0)
                return ScheduleViolation{static_cast<int>(r), pair.first,
                                         pair.second, "await without matching send"};
        }
    }
    // Deadlock-freedom: drive the rounds to completion on message
    // availability alone.
    std::vector<size_t> next_round(static_cast<size_t>(n), 0);
    std::set<std::tuple<Rank, Rank, size_t>> delivered; // (src, dst, round)
    bool progress = true;
    while (progress) {
        progress = false;
        for (const auto& s : all) {
            size_t& r = next_round[static_cast<size_t>(s.me)];
            while (r < rounds) {
                bool ready = true;
                for (size_t q = 0; q < r && ready; ++q)
                    for (Rank src : s.rounds[q].await_from)
                        if (!delivered.count({src, s.me, q})) { ready = false; break; }
                if (!ready) break;
                for (Rank dst : s.rounds[r].send_to)
                    delivered.insert({s.me, dst, r});
                ++r;
                progress = true;
            }
        }
    }
    for (const auto& s : all) {
        if (next_round[static_cast<size_t>(s.me)] < rounds)
            return ScheduleViolation{
                static_cast<int>(next_round[static_cast<size_t>(s.me)]), s.me, s.me,
                "deadlock: rank cannot progress"};
        for (size_t q = 0; q < rounds; ++q)
            for (Rank src : s.rounds[q].await_from)
                if (!delivered.count({src, s.me, q}))
                    return ScheduleViolation{static_cast<int>(q), src, s.me,
                                             "await never satisfied"};
    }
    return std::nullopt;
}

} // namespace nicsim
