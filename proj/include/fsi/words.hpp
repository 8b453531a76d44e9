#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fsi/rational.hpp"

namespace fsi {

// Symbols are the integers 0..k-1. The text form uses one character per
// symbol: '0'-'9' then 'a'-'z', so k <= 36; whitespace is ignored on read.
struct Alphabet {
    int k;
    explicit Alphabet(int k_) : k(k_) {
        if (k < 2) throw domain_error("alphabet size must be >= 2");
    }
};

class Word {
  public:
    Word() = default;
    explicit Word(std::vector<uint8_t> symbols) : s_(std::move(symbols)) {}

    static Word parse(std::string_view text, int k);
    std::string str() const;

    size_t size() const { return s_.size(); }
    bool empty() const { return s_.empty(); }
    uint8_t operator[](size_t i) const { return s_[i]; }
    const std::vector<uint8_t>& symbols() const { return s_; }

    void push_back(uint8_t sym) { s_.push_back(sym); }
    Word prefix(size_t n) const;
    Word appended(uint8_t sym) const;

    bool operator==(const Word& o) const = default;

  private:
    std::vector<uint8_t> s_;
};

// Number of positions t with u[t..t+|w|-1] = w (overlapping).
uint64_t occ_overlapping(const Word& u, const Word& w);

// Number of aligned length-r blocks of u equal to w, r = |w|.
uint64_t occ_aligned(const Word& u, const Word& w, size_t r);

// max over w in Sigma^m of |occ(u,w)/|u| - k^-m|, divisor |u|.
Rational max_deviation(const Word& u, size_t m, int k);

// True iff every m-block frequency of u is within eps of k^-m (non-strict).
bool run_test(const Word& u, size_t m, const Rational& eps, int k);

// Same predicate without the m <= |u| precondition: for m > |u| every
// occurrence count is 0 and the test reads |0 - k^-m| <= eps.
bool block_test(const Word& u, size_t m, const Rational& eps, int k);

// First n digits of the base-k word 1 2 3 4 ... written in base k.
Word champernowne_prefix(int k, size_t n);

// idx-th word of the given length in lexicographic order (base-k digits).
Word word_from_index(uint64_t idx, size_t len, int k);

// A computable infinite word presented as a prefix oracle.
class WordSource {
  public:
    virtual ~WordSource() = default;
    virtual Word prefix(size_t n) = 0;
    virtual int alphabet() const = 0;

    static std::unique_ptr<WordSource> champernowne(int k);
    static std::unique_ptr<WordSource> from_file(const std::string& path, int k);
    static std::unique_ptr<WordSource> literal(Word w, int k);
    // "champernowne" | "file:<path>" | "literal:<symbols>"
    static std::unique_ptr<WordSource> from_spec(const std::string& spec, int k);
};

}  // namespace fsi
