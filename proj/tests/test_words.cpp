#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "fsi/words.hpp"

using namespace fsi;

namespace {

Word W(std::initializer_list<uint8_t> syms) { return Word(std::vector<uint8_t>(syms)); }

Word random_word(std::mt19937& rng, size_t len, int k) {
    std::vector<uint8_t> s(len);
    for (auto& c : s) c = static_cast<uint8_t>(rng() % static_cast<uint32_t>(k));
    return Word(std::move(s));
}

}  // namespace

TEST_CASE("overlapping occurrence counts") {
    CHECK(occ_overlapping(W({0, 0, 0}), W({0, 0})) == 2);
    CHECK(occ_overlapping(Word::parse("0101", 2), Word::parse("01", 2)) == 2);
    CHECK(occ_overlapping(W({0, 1}), W({0, 1, 0})) == 0);  // block longer than word
    CHECK_THROWS_AS(occ_overlapping(W({0, 1}), Word()), domain_error);
}

TEST_CASE("aligned occurrence counts") {
    CHECK(occ_aligned(W({0, 0, 0, 0}), W({0, 0}), 2) == 2);
    CHECK(occ_aligned(W({0, 0, 1}), W({0, 0}), 2) == 1);
    CHECK(occ_aligned(Word::parse("abab", 12), Word::parse("ba", 12), 2) == 0);
    CHECK_THROWS_AS(occ_aligned(W({0, 1}), W({0}), 2), domain_error);
}

TEST_CASE("aligned counts partition the blocks") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 3);
        const size_t len = 1 + rng() % 40;
        const size_t r = 1 + rng() % 4;
        Word u = random_word(rng, len, k);
        uint64_t total = 0;
        const uint64_t words = [&] {
            uint64_t p = 1;
            for (size_t i = 0; i < r; ++i) p *= static_cast<uint64_t>(k);
            return p;
        }();
        for (uint64_t wi = 0; wi < words; ++wi) {
            uint64_t c = occ_aligned(u, word_from_index(wi, r, k), r);
            CHECK(c <= len / r);
            total += c;
        }
        CHECK(total == len / r);
    }
}

TEST_CASE("overlapping counts partition the windows") {
    std::mt19937 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 2);
        const size_t m = 1 + rng() % 3;
        const size_t len = m + rng() % 30;
        Word u = random_word(rng, len, k);
        uint64_t words = 1, total = 0;
        for (size_t i = 0; i < m; ++i) words *= static_cast<uint64_t>(k);
        for (uint64_t wi = 0; wi < words; ++wi)
            total += occ_overlapping(u, word_from_index(wi, m, k));
        CHECK(total == len - m + 1);
    }
}

TEST_CASE("one changed symbol moves each aligned count by at most one") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2;
        const size_t len = 4 + rng() % 30;
        const size_t r = 1 + rng() % 3;
        Word u = random_word(rng, len, k);
        std::vector<uint8_t> changed = u.symbols();
        const size_t pos = rng() % len;
        changed[pos] = static_cast<uint8_t>((changed[pos] + 1) % k);
        Word u2(std::move(changed));
        uint64_t words = 1;
        for (size_t i = 0; i < r; ++i) words *= static_cast<uint64_t>(k);
        for (uint64_t wi = 0; wi < words; ++wi) {
            Word w = word_from_index(wi, r, k);
            const int64_t before = static_cast<int64_t>(occ_aligned(u, w, r));
            const int64_t after = static_cast<int64_t>(occ_aligned(u2, w, r));
            CHECK(std::abs(before - after) <= 1);
        }
    }
}

TEST_CASE("max deviation") {
    CHECK(max_deviation(Word::parse("01", 2), 1, 2) == Rational(0));
    CHECK(max_deviation(Word::parse("00", 2), 1, 2) == make_rational(1, 2));
    CHECK(max_deviation(Word::parse("0101", 2), 2, 2) == make_rational(1, 4));
    CHECK_THROWS_AS(max_deviation(Word::parse("01", 2), 3, 2), domain_error);
}

TEST_CASE("frequency test") {
    CHECK(run_test(Word::parse("01", 2), 1, Rational(0), 2));
    CHECK_FALSE(run_test(Word::parse("00", 2), 1, make_rational(1, 4), 2));
    std::mt19937 rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        Word u = random_word(rng, 1 + rng() % 20, 2);
        CHECK(run_test(u, 1, Rational(1), 2));  // deviation never exceeds 1
    }
    CHECK_THROWS_AS(run_test(Word::parse("01", 2), 3, Rational(1), 2), domain_error);
}

TEST_CASE("frequency test is monotone in the tolerance") {
    std::mt19937 rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        Word u = random_word(rng, 2 + rng() % 20, 2);
        const size_t m = 1 + rng() % 2;
        Rational lo = make_rational(static_cast<long>(rng() % 8), 16);
        Rational hi = lo + make_rational(static_cast<long>(rng() % 8), 16);
        if (run_test(u, m, lo, 2)) CHECK(run_test(u, m, hi, 2));
    }
}

TEST_CASE("champernowne digits") {
    CHECK(champernowne_prefix(10, 10).str() == "1234567891");
    CHECK(champernowne_prefix(2, 6).str() == "110111");
    CHECK(champernowne_prefix(2, 0).empty());
}

TEST_CASE("deviation regression at one million digits") {
    // frozen from the first computation; the leading-digit bias makes these
    // decay only like 1/log n
    Word p = champernowne_prefix(2, 1000000);
    CHECK(max_deviation(p, 1, 2) == parse_rational("30199/1000000"));
    CHECK(max_deviation(p, 2, 2) == parse_rational("31177/1000000"));
}

TEST_CASE("word sources give consistent prefixes") {
    auto check_consistency = [](WordSource& src, size_t max_len) {
        std::mt19937 rng(16);
        Word longest = src.prefix(max_len);
        for (int trial = 0; trial < 20; ++trial) {
            const size_t n = rng() % (max_len + 1);
            Word p = src.prefix(n);
            REQUIRE(p.size() == n);
            for (size_t i = 0; i < n; ++i) CHECK(p[i] == longest[i]);
        }
    };
    auto champ = WordSource::champernowne(2);
    check_consistency(*champ, 300);
    auto lit = WordSource::literal(Word::parse("0110100110", 2), 2);
    check_consistency(*lit, 10);
    CHECK_THROWS_AS(lit->prefix(11), domain_error);
}

TEST_CASE("word source spec strings") {
    auto champ = WordSource::from_spec("champernowne", 10);
    CHECK(champ->prefix(4).str() == "1234");
    auto lit = WordSource::from_spec("literal:0101", 2);
    CHECK(lit->prefix(3).str() == "010");
    CHECK_THROWS_AS(WordSource::from_spec("bogus", 2), domain_error);
}

TEST_CASE("file-backed word source") {
    const std::string path = "test_words_source.tmp";
    {
        std::ofstream out(path);
        out << "01 10\n11";
    }
    auto src = WordSource::from_spec("file:" + path, 2);
    CHECK(src->prefix(6).str() == "011011");
    CHECK_THROWS_AS(src->prefix(7), domain_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(WordSource::from_file("does_not_exist.tmp", 2), domain_error);
}

TEST_CASE("word text round-trip ignores whitespace") {
    Word w = Word::parse(" 01 0\n1\t1", 2);
    CHECK(w.str() == "01011");
    std::mt19937 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 35);
        Word u = random_word(rng, rng() % 40, k);
        CHECK(Word::parse(u.str(), k) == u);
    }
    CHECK_THROWS_AS(Word::parse("012", 2), domain_error);
    CHECK_THROWS_AS(Word::parse("z", 35), domain_error);
    CHECK_THROWS_AS(Word::parse("!", 36), domain_error);
}
