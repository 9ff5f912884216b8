#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "nicsim/schedule.hpp"

using namespace nicsim;

namespace {

const AlgorithmKind kDs{Algorithm::Dissemination, 2};
const AlgorithmKind kPe{Algorithm::PairwiseExchange, 2};

AlgorithmKind gb(int d) { return AlgorithmKind{Algorithm::GatherBroadcast, d}; }

// Independent round counter: every schedule must agree on the round count,
// and every round must carry at least one message somewhere in the group.
int count_rounds(const std::vector<Schedule>& all) {
    REQUIRE(!all.empty());
    size_t rounds = all[0].rounds.size();
    for (const auto& s : all) REQUIRE(s.rounds.size() == rounds);
    for (size_t r = 0; r < rounds; ++r) {
        bool any_send = false;
        for (const auto& s : all) any_send |= !s.rounds[r].send_to.empty();
        REQUIRE(any_send);
    }
    return static_cast<int>(rounds);
}

} // namespace

TEST_CASE("dissemination sends to (i + 2^m) mod n and awaits the mirror") {
    Schedule s = build_schedule(kDs, 8, 3);
    REQUIRE(s.rounds.size() == 3);
    CHECK(s.rounds[0].send_to == std::vector<Rank>{4});
    CHECK(s.rounds[1].send_to == std::vector<Rank>{5});
    CHECK(s.rounds[2].send_to == std::vector<Rank>{7});
    CHECK(s.rounds[0].await_from == std::vector<Rank>{2});
    CHECK(s.rounds[1].await_from == std::vector<Rank>{1});
    CHECK(s.rounds[2].await_from == std::vector<Rank>{7});
    for (const auto& r : s.rounds) {
        CHECK(r.send_to.size() == 1);
        CHECK(r.await_from.size() == 1);
    }
}

TEST_CASE("pairwise exchange pairs ranks by xor") {
    Schedule s = build_schedule(kPe, 8, 3);
    REQUIRE(s.rounds.size() == 3);
    CHECK(s.rounds[1].send_to == std::vector<Rank>{1});
    CHECK(s.rounds[1].await_from == std::vector<Rank>{1});
    CHECK(s.rounds[0].send_to == std::vector<Rank>{2});
    CHECK(s.rounds[2].send_to == std::vector<Rank>{7});
}

TEST_CASE("pairwise exchange pre/post notification for non-power-of-two") {
    // n=5: M=4, so rank 4 notifies rank 0 up front and is released at the end
    Schedule high = build_schedule(kPe, 5, 4);
    REQUIRE(high.rounds.size() == 4);
    CHECK(high.rounds[0].send_to == std::vector<Rank>{0});
    CHECK(high.rounds[0].await_from.empty());
    CHECK(high.rounds.back().await_from == std::vector<Rank>{0});
    CHECK(high.rounds.back().send_to.empty());
    // rank 4 sits out the exchange phase entirely
    for (size_t r = 1; r + 1 < high.rounds.size(); ++r) {
        CHECK(high.rounds[r].send_to.empty());
        CHECK(high.rounds[r].await_from.empty());
    }

    Schedule low = build_schedule(kPe, 5, 0);
    CHECK(low.rounds[0].await_from == std::vector<Rank>{4});
    CHECK(low.rounds.back().send_to == std::vector<Rank>{4});
}

TEST_CASE("singleton barrier has no rounds") {
    for (auto kind : {kDs, kPe, gb(2), gb(3)})
        CHECK(build_schedule(kind, 1, 0).rounds.empty());
}

TEST_CASE("step-count formulas match the published examples") {
    CHECK(num_steps(kDs, 16) == 4);
    CHECK(num_steps(kPe, 5) == 4);
    CHECK(num_steps(gb(2), 8) == 6);
}

TEST_CASE("step counts agree with a brute-force round counter") {
    for (int n = 1; n <= 64; ++n) {
        if (n == 1) {
            CHECK(num_steps(kDs, 1) == 0);
            continue;
        }
        CHECK(count_rounds(build_all_schedules(kDs, n)) == num_steps(kDs, n));
        CHECK(count_rounds(build_all_schedules(kPe, n)) == num_steps(kPe, n));
        for (int d : {2, 3, 4})
            CHECK(count_rounds(build_all_schedules(gb(d), n)) ==
                  num_steps(gb(d), n));
    }
}

TEST_CASE("dissemination never needs more steps than pairwise exchange") {
    for (int n = 2; n <= 64; ++n) {
        int ds = num_steps(kDs, n);
        int pe = num_steps(kPe, n);
        CHECK(ds <= pe);
        bool equal_expected = is_power_of_two(n) || n <= 2;
        CHECK((ds == pe) == equal_expected);
    }
}

TEST_CASE("all schedules validate for n in 2..33") {
    for (int n = 2; n <= 33; ++n) {
        for (auto kind : {kDs, kPe, gb(2), gb(3), gb(4)}) {
            auto v = validate_schedules(build_all_schedules(kind, n));
            if (v) {
                CAPTURE(algorithm_name(kind));
                CAPTURE(n);
                CAPTURE(v->what);
                FAIL_CHECK("unexpected violation");
            }
        }
    }
}

TEST_CASE("a removed await is reported as a dangling send") {
    auto all = build_all_schedules(kDs, 8);
    // rank 5 awaits rank 3 in round 1; drop that await
    REQUIRE(all[5].rounds[1].await_from == std::vector<Rank>{3});
    all[5].rounds[1].await_from.clear();
    auto v = validate_schedules(all);
    REQUIRE(v.has_value());
    CHECK(v->round == 1);
    CHECK(v->sender == 3);
    CHECK(v->receiver == 5);
    CHECK(v->what.find("send without matching await") != std::string::npos);
}

TEST_CASE("a self-send is rejected") {
    auto all = build_all_schedules(kDs, 4);
    all[2].rounds[0].send_to = {2};
    auto v = validate_schedules(all);
    REQUIRE(v.has_value());
    CHECK(v->what.find("itself") != std::string::npos);
}

TEST_CASE("a circular await dependency across rounds is rejected") {
    // two ranks each waiting for the other's round-1 message before sending
    // it; the round-0 await has no same-round send, so this fails validation
    Schedule a{2, 0, {Round{{}, {1}}, Round{{1}, {}}}};
    Schedule b{2, 1, {Round{{}, {0}}, Round{{0}, {}}}};
    auto v = validate_schedules({a, b});
    REQUIRE(v.has_value());
    CHECK(v->what.find("await without matching send") != std::string::npos);
}

TEST_CASE("dissemination information closure doubles each round") {
    // After round m, rank i has (transitively) collected barrier state from
    // exactly its left min(2^(m+1), n) - 1 neighbours.
    for (int n = 2; n <= 17; ++n) {
        auto all = build_all_schedules(kDs, n);
        int rounds = static_cast<int>(all[0].rounds.size());
        // known[i] = set of ranks whose arrival i can infer, including itself
        std::vector<std::set<Rank>> known(static_cast<size_t>(n));
        for (Rank i = 0; i < n; ++i) known[static_cast<size_t>(i)] = {i};
        for (int m = 0; m < rounds; ++m) {
            auto snapshot = known; // round-m messages carry pre-round state
            for (Rank i = 0; i < n; ++i)
                for (Rank dst : all[static_cast<size_t>(i)].rounds[static_cast<size_t>(m)].send_to)
                    known[static_cast<size_t>(dst)].insert(
                        snapshot[static_cast<size_t>(i)].begin(),
                        snapshot[static_cast<size_t>(i)].end());
            long long width = std::min(2LL << m, static_cast<long long>(n));
            for (Rank i = 0; i < n; ++i) {
                std::set<Rank> expect;
                for (long long k = 0; k < width; ++k)
                    expect.insert(static_cast<Rank>(((i - k) % n + n) % n));
                REQUIRE(known[static_cast<size_t>(i)] == expect);
            }
        }
        // after the final round everyone has heard from everyone
        for (Rank i = 0; i < n; ++i)
            CHECK(known[static_cast<size_t>(i)].size() == static_cast<size_t>(n));
    }
}

TEST_CASE("schedule construction is a pure function") {
    for (int trial = 0; trial < 3; ++trial) {
        Schedule a = build_schedule(gb(3), 20, 7);
        Schedule b = build_schedule(gb(3), 20, 7);
        REQUIRE(a.rounds.size() == b.rounds.size());
        for (size_t r = 0; r < a.rounds.size(); ++r) {
            CHECK(a.rounds[r].send_to == b.rounds[r].send_to);
            CHECK(a.rounds[r].await_from == b.rounds[r].await_from);
        }
    }
}

TEST_CASE("bad inputs are rejected") {
    CHECK_THROWS(build_schedule(kDs, 0, 0));
    CHECK_THROWS(build_schedule(kDs, 4, 4));
    CHECK_THROWS(build_schedule(kDs, 4, -1));
    CHECK_THROWS(build_schedule(gb(1), 4, 0));
    CHECK_THROWS(num_steps(gb(1), 4));
}

TEST_CASE("algorithm names parse and print consistently") {
    CHECK(parse_algorithm("ds")->alg == Algorithm::Dissemination);
    CHECK(parse_algorithm("dissemination")->alg == Algorithm::Dissemination);
    CHECK(parse_algorithm("pe")->alg == Algorithm::PairwiseExchange);
    CHECK(parse_algorithm("gb", 3)->degree == 3);
    CHECK_FALSE(parse_algorithm("tree").has_value());
    CHECK(algorithm_name(kDs) == "ds");
}
