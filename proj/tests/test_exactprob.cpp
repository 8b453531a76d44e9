#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include "fsi/exactprob.hpp"

using namespace fsi;

namespace {

Shuffler random_shuffler(std::mt19937& rng, int k, uint32_t max_states) {
    Shuffler s;
    s.k = k;
    s.num_states = 1 + rng() % max_states;
    s.start = rng() % s.num_states;
    s.tau.resize(s.num_states);
    for (auto& t : s.tau) t = static_cast<uint8_t>(1 + rng() % 2);
    s.delta.resize(static_cast<size_t>(s.num_states) * static_cast<size_t>(k));
    for (auto& d : s.delta) d = rng() % s.num_states;
    return s;
}

Word random_word(std::mt19937& rng, size_t len, int k) {
    std::vector<uint8_t> s(len);
    for (auto& c : s) c = static_cast<uint8_t>(rng() % static_cast<uint32_t>(k));
    return Word(std::move(s));
}

}  // namespace

TEST_CASE("unconditioned single-symbol counts are binomial") {
    CountDistribution d = dp_count_distribution(Shuffler::trivial(2, 2), 2, 1,
                                                Word::parse("0", 2), Word(), Word());
    REQUIRE(d.block_count() == 2);
    CHECK(d.prob(0) == make_rational(1, 4));
    CHECK(d.prob(1) == make_rational(1, 2));
    CHECK(d.prob(2) == make_rational(1, 4));
    CHECK(d.total() == pow_int(2, 2));
}

TEST_CASE("fully fixed prefixes give a point mass") {
    CountDistribution d = dp_count_distribution(Shuffler::trivial(2, 1), 2, 1,
                                                Word::parse("0", 2), Word::parse("00", 2),
                                                Word::parse("11", 2));
    CHECK(d.prob(2) == Rational(1));
    CHECK(d.prob(0) == Rational(0));
    CHECK(d.prob(1) == Rational(0));
}

TEST_CASE("prefixes longer than the run are rejected") {
    CHECK_THROWS_AS(dp_count_distribution(Shuffler::trivial(2, 1), 2, 1, Word::parse("0", 2),
                                          Word::parse("000", 2), Word()),
                    domain_error);
}

TEST_CASE("block length beyond the run leaves zero complete blocks") {
    CountDistribution d = dp_count_distribution(Shuffler::trivial(2, 1), 2, 3,
                                                Word::parse("000", 2), Word(), Word());
    REQUIRE(d.block_count() == 0);
    CHECK(d.prob(0) == Rational(1));
}

TEST_CASE("dynamic program equals exhaustive enumeration") {
    std::mt19937 rng(31);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Shuffler s = random_shuffler(rng, 2, 4);
        const long n = 1 + static_cast<long>(rng() % 6);
        const long lu = static_cast<long>(rng() % (n + 1));
        const long lv = static_cast<long>(rng() % (n + 1));
        Word up = random_word(rng, static_cast<size_t>(lu), 2);
        Word vp = random_word(rng, static_cast<size_t>(lv), 2);
        for (long r = 1; r <= 2; ++r) {
            for (uint64_t wi = 0; wi < (uint64_t{1} << r); ++wi) {
                Word w = word_from_index(wi, static_cast<size_t>(r), 2);
                CHECK(dp_count_distribution(s, n, r, w, up, vp) ==
                      brute_force_distribution(s, n, r, w, up, vp));
                ++compared;
            }
        }
    }
    CHECK(compared == 60 * 6);
}

TEST_CASE("dynamic program equals exhaustive enumeration over three symbols") {
    std::mt19937 rng(35);
    for (int trial = 0; trial < 25; ++trial) {
        Shuffler s = random_shuffler(rng, 3, 3);
        const long n = 1 + static_cast<long>(rng() % 5);
        const long lu = static_cast<long>(rng() % (n + 1));
        const long lv = static_cast<long>(rng() % (n + 1));
        Word up = random_word(rng, static_cast<size_t>(lu), 3);
        Word vp = random_word(rng, static_cast<size_t>(lv), 3);
        for (long r = 1; r <= 2; ++r) {
            const uint64_t words = r == 1 ? 3 : 9;
            for (uint64_t wi = 0; wi < words; ++wi) {
                Word w = word_from_index(wi, static_cast<size_t>(r), 3);
                CountDistribution dp = dp_count_distribution(s, n, r, w, up, vp);
                CHECK(dp == brute_force_distribution(s, n, r, w, up, vp));
                CHECK(dp.total() == pow_int(3, n));
            }
        }
    }
}

TEST_CASE("oracle with fully fixed tapes is a deterministic recount") {
    std::mt19937 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        Shuffler s = random_shuffler(rng, 2, 4);
        const long n = 1 + static_cast<long>(rng() % 6);
        Word up = random_word(rng, static_cast<size_t>(n), 2);
        Word vp = random_word(rng, static_cast<size_t>(n), 2);
        Word w = word_from_index(rng() % 2, 1, 2);
        CountDistribution d = brute_force_distribution(s, n, 1, w, up, vp);
        const uint64_t count = occ_aligned(run_n(s, up, vp, static_cast<size_t>(n)).out, w, 1);
        CHECK(d.prob(static_cast<long>(count)) == Rational(1));
    }
}

TEST_CASE("oracle budget is enforced") {
    CHECK_THROWS_AS(brute_force_distribution(Shuffler::trivial(2, 1), 12, 1, Word::parse("0", 2),
                                             Word(), Word(), 1000),
                    budget_error);
}

TEST_CASE("conditioning refines by one symbol on each tape") {
    // law of total probability: the distribution over [u]x[v] is the average
    // of the distributions over the k^2 one-symbol refinements
    std::mt19937 rng(33);
    for (int trial = 0; trial < 25; ++trial) {
        const int k = 2;
        Shuffler s = random_shuffler(rng, k, 3);
        const long n = 2 + static_cast<long>(rng() % 5);
        const long lp = static_cast<long>(rng() % static_cast<uint64_t>(n - 1));
        Word up = random_word(rng, static_cast<size_t>(lp), k);
        Word vp = random_word(rng, static_cast<size_t>(lp), k);
        const long r = 1 + static_cast<long>(rng() % 2);
        Word w = word_from_index(rng() % (uint64_t{1} << r), static_cast<size_t>(r), k);
        CountDistribution parent = dp_count_distribution(s, n, r, w, up, vp);
        for (long c = 0; c <= parent.block_count(); ++c) {
            Rational avg(0);
            for (uint8_t a = 0; a < k; ++a)
                for (uint8_t b = 0; b < k; ++b)
                    avg += dp_count_distribution(s, n, r, w, up.appended(a), vp.appended(b))
                               .prob(c);
            avg /= k * k;
            CHECK(parent.prob(c) == avg);
        }
    }
}

TEST_CASE("failure probability thresholds") {
    CountDistribution bin2 = dp_count_distribution(Shuffler::trivial(2, 2), 2, 1,
                                                   Word::parse("0", 2), Word(), Word());
    CHECK(failure_probability(bin2, Rational(0)) == Rational(1));
    CHECK(failure_probability(bin2, make_rational(1, 4)) == make_rational(1, 2));
    CHECK(failure_probability(bin2, Rational(1)) == Rational(0));
    CHECK_THROWS_AS(failure_probability(bin2, Rational(-1)), domain_error);
}

TEST_CASE("failure probability is monotone nonincreasing in the tolerance") {
    std::mt19937 rng(34);
    for (int trial = 0; trial < 30; ++trial) {
        Shuffler s = random_shuffler(rng, 2, 3);
        const long n = 2 + static_cast<long>(rng() % 5);
        CountDistribution d =
            dp_count_distribution(s, n, 1, word_from_index(rng() % 2, 1, 2), Word(), Word());
        Rational prev(2);
        for (int e = 0; e <= 8; ++e) {
            Rational p = failure_probability(d, make_rational(e, 8));
            CHECK(p <= prev);
            prev = p;
        }
    }
}

TEST_CASE("distribution text round-trip") {
    CountDistribution d = dp_count_distribution(Shuffler::trivial(2, 2), 3, 1,
                                                Word::parse("1", 2), Word::parse("0", 2),
                                                Word::parse("1", 2));
    CountDistribution back = CountDistribution::parse(d.serialize());
    CHECK(back == d);
}

TEST_CASE("binomial tail bound evaluates upward") {
    CHECK(chernoff_bound(0, make_rational(1, 2), Rational(1)) == 2.0);
    const double b = chernoff_bound(12, make_rational(1, 2), Rational(1));
    CHECK(b >= 2.0 * std::exp(-2.0));          // a valid bound never rounds below
    CHECK(b <= 2.0 * std::exp(-2.0) * 1.0001);
    CHECK_THROWS_AS(chernoff_bound(10, make_rational(1, 2), Rational(2)), domain_error);
    CHECK_THROWS_AS(chernoff_bound(10, make_rational(1, 2), Rational(0)), domain_error);
    CHECK_THROWS_AS(chernoff_bound(10, Rational(0), Rational(1)), domain_error);
}

TEST_CASE("base-k masses add only at matching steps") {
    BaseKProb a{BigInt(3), 4};
    BaseKProb b{BigInt(5), 4};
    a.add(b);
    CHECK(a.num == 8);
    CHECK(a.to_rational(2) == make_rational(8, 16));
    BaseKProb c{BigInt(1), 5};
    CHECK_THROWS_AS(a.add(c), domain_error);

    CountDistribution d = dp_count_distribution(Shuffler::trivial(2, 2), 2, 1,
                                                Word::parse("0", 2), Word(), Word());
    CHECK(d.mass_of(1).num == 2);
    CHECK(d.mass_of(1).steps == 2);
    CHECK(d.mass_of(5).num == 0);  // out of support
}

TEST_CASE("probability cache computes each key once") {
    ProbCache cache;
    int evals = 0;
    auto fn = [&] {
        ++evals;
        return make_rational(1, 3);
    };
    CHECK(cache.get_or_compute("a", fn) == make_rational(1, 3));
    CHECK(cache.get_or_compute("a", fn) == make_rational(1, 3));
    CHECK(cache.get_or_compute("b", fn) == make_rational(1, 3));
    CHECK(evals == 2);
    CHECK(cache.misses() == 2);
    CHECK(cache.hits() == 1);
}

TEST_CASE("probability cache stays consistent under contention") {
    ProbCache cache;
    std::atomic<int> evals{0};
    std::vector<std::thread> pool;
    std::atomic<bool> mismatch{false};
    for (int t = 0; t < 8; ++t) {
        pool.emplace_back([&] {
            for (int i = 0; i < 200; ++i) {
                const std::string key = "key" + std::to_string(i % 10);
                Rational r = cache.get_or_compute(key, [&] {
                    ++evals;
                    return make_rational(i % 10, 7);
                });
                if (r != make_rational(i % 10, 7)) mismatch = true;
            }
        });
    }
    for (auto& th : pool) th.join();
    CHECK_FALSE(mismatch.load());
    CHECK(evals.load() == 10);  // one computation per distinct key
    CHECK(cache.misses() == 10);
    CHECK(cache.hits() == 8 * 200 - 10);
}
