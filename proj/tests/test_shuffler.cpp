#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fsi/shuffler.hpp"

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

TEST_CASE("single-state machines encode to the shortest strings") {
    CHECK(encode(Shuffler::trivial(2, 1)) == "100");
    CHECK(encode(Shuffler::trivial(2, 2)) == "101");
    CHECK(encode(Shuffler::trivial(5, 1)) == "100");  // k is configuration, not encoded
}

TEST_CASE("decode rejects malformed strings") {
    CHECK_FALSE(decode("", 2).has_value());      // no unary state count
    CHECK_FALSE(decode("11", 2).has_value());    // unary count unterminated
    CHECK_FALSE(decode("10", 2).has_value());    // missing tape bit
    CHECK_FALSE(decode("1000", 2).has_value());  // one bit too long
    CHECK_FALSE(decode("01", 2).has_value());    // zero states
    CHECK_FALSE(decode("102", 2).has_value());   // not binary
    // Q = 3: the two q0 bits may encode 3 only if it names a real state
    const std::string tau3 = "000";
    const std::string delta3(12, '0');
    CHECK(decode("1110" + tau3 + "00" + delta3, 2).has_value());
    CHECK_FALSE(decode("1110" + tau3 + "11" + delta3, 2).has_value());  // q0 = 3 >= Q
}

TEST_CASE("decode reproduces encoded machines field for field") {
    auto d = decode("100", 2);
    REQUIRE(d.has_value());
    CHECK(d->num_states == 1);
    CHECK(d->start == 0);
    CHECK(d->tau[0] == 1);
    CHECK(d->next(0, 0) == 0);
    CHECK(d->next(0, 1) == 0);
}

TEST_CASE("length-lexicographic index strings") {
    CHECK(index_bits(1) == "");
    CHECK(index_bits(2) == "0");
    CHECK(index_bits(3) == "1");
    CHECK(index_bits(4) == "00");
    CHECK(index_bits(7) == "11");
    CHECK(index_bits(8) == "000");
    CHECK(index_bits(12) == "100");
    CHECK(index_bits(13) == "101");
}

TEST_CASE("enumeration falls back to the tape-1 reader") {
    CHECK(encode(enumerate_shuffler(1, 2)) == "100");   // empty string is invalid
    CHECK(encode(enumerate_shuffler(12, 2)) == "100");  // decodes the tape-1 reader
    CHECK(enumerate_shuffler(13, 2).tau[0] == 2);       // the tape-2 reader
}

TEST_CASE("valid encodings bound the state count") {
    for (uint64_t i = 1; i <= 5000; ++i) {
        const std::string bits = index_bits(i);
        auto s = decode(bits, 2);
        if (!s) continue;
        CHECK(s->num_states <= bits.size());
        CHECK(bits.size() <= static_cast<size_t>(64 - __builtin_clzll(i + 1)) + 1);
    }
}

TEST_CASE("encode/decode round-trips") {
    std::mt19937 rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 2);
        Shuffler s = random_shuffler(rng, k, 8);
        auto back = decode(encode(s), k);
        REQUIRE(back.has_value());
        CHECK(back->num_states == s.num_states);
        CHECK(back->start == s.start);
        CHECK(back->tau == s.tau);
        CHECK(back->delta == s.delta);
        CHECK(encode(*back) == encode(s));
    }
}

TEST_CASE("random bitstrings that decode re-encode to themselves") {
    std::mt19937 rng(22);
    int valid = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        std::string bits;
        const size_t len = rng() % 24;
        for (size_t i = 0; i < len; ++i) bits.push_back(rng() % 2 ? '1' : '0');
        auto s = decode(bits, 2);
        if (!s) continue;
        ++valid;
        CHECK(encode(*s) == bits);
    }
    CHECK(valid > 0);
}

TEST_CASE("runs read the designated tapes") {
    Word xs = Word::parse("000000", 2);
    Word ys = Word::parse("111111", 2);
    CHECK(run_n(Shuffler::trivial(2, 1), xs, ys, 6).out == xs);
    CHECK(run_n(Shuffler::trivial(2, 2), xs, ys, 6).out == ys);

    Shuffler alt;  // two states, alternating tapes regardless of symbol
    alt.k = 2;
    alt.num_states = 2;
    alt.start = 0;
    alt.tau = {1, 2};
    alt.delta = {1, 1, 0, 0};
    CHECK(run_n(alt, xs, ys, 6).out.str() == "010101");

    auto r = run_n(alt, xs, ys, 5);
    CHECK(r.final.a + r.final.b == 5);
    CHECK(r.final.a == 3);
}

TEST_CASE("exhausted tapes are reported") {
    Word xs = Word::parse("00", 2);
    Word ys = Word::parse("11", 2);
    CHECK_THROWS_WITH_AS(run_n(Shuffler::trivial(2, 1), xs, ys, 3).out.size(),
                         "run_n: tape 1 exhausted at position 3", domain_error);
}

TEST_CASE("outputs depend only on the first n symbols of each tape") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 2);
        Shuffler s = random_shuffler(rng, k, 6);
        const size_t n = 1 + rng() % 12;
        Word x1 = random_word(rng, n + 8, k);
        Word y1 = random_word(rng, n + 8, k);
        // different extensions of the same length-n prefixes
        std::vector<uint8_t> x2 = x1.symbols(), y2 = y1.symbols();
        for (size_t i = n; i < x2.size(); ++i) x2[i] = static_cast<uint8_t>(rng() % k);
        for (size_t i = n; i < y2.size(); ++i) y2[i] = static_cast<uint8_t>(rng() % k);
        CHECK(run_n(s, x1, y1, n).out == run_n(s, Word(x2), Word(y2), n).out);
        // restriction of a longer run equals the shorter run
        const size_t shorter = rng() % (n + 1);
        CHECK(run_n(s, x1, y1, n).out.prefix(shorter) == run_n(s, x1, y1, shorter).out);
    }
}

TEST_CASE("shuffler text form round-trips") {
    std::mt19937 rng(24);
    for (int trial = 0; trial < 50; ++trial) {
        Shuffler s = random_shuffler(rng, 2 + static_cast<int>(rng() % 3), 5);
        Shuffler back = Shuffler::parse_text(s.text());
        CHECK(encode(back) == encode(s));
        CHECK(back.k == s.k);
    }
    CHECK_THROWS_AS(Shuffler::parse_text("2 1"), domain_error);
}
