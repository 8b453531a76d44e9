#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsi/words.hpp"

namespace fsi {

// Two-tape deterministic shuffler: in each state it reads the next unused
// symbol from the tape named by tau, outputs it, and transitions on it.
struct Shuffler {
    int k = 2;
    uint32_t num_states = 1;
    uint32_t start = 0;
    std::vector<uint32_t> delta;  // num_states * k, row-major (state-major)
    std::vector<uint8_t> tau;     // per state, 1 or 2

    uint32_t next(uint32_t q, uint8_t sym) const { return delta[q * static_cast<uint32_t>(k) + sym]; }

    void validate() const;

    // Single-state machine that always reads the given tape.
    static Shuffler trivial(int k, int tape = 1);

    // Text form: "k Q q0" / Q tau characters / Q rows of k target states.
    static Shuffler parse_text(const std::string& text);
    std::string text() const;
};

struct RunState {
    uint32_t q = 0;
    size_t a = 0;  // symbols consumed from tape 1
    size_t b = 0;  // symbols consumed from tape 2
};

struct RunResult {
    Word out;
    RunState final;
};

// Produce the first n output symbols on input prefixes (xp, yp). Reads at
// most n symbols from each tape; rejects if a tape runs out mid-run.
RunResult run_n(const Shuffler& s, const Word& xp, const Word& yp, size_t n);

// Canonical bit encoding: 1^Q 0, Q tau bits (0 = tape 1), q0 in ceil(log2 Q)
// bits, then delta row-major with the same field width. A string is valid
// iff its length is exactly Q+1+Q+s+Q*k*s and every field is < Q.
std::string encode(const Shuffler& s);
std::optional<Shuffler> decode(const std::string& bits, int k);

// i-th binary string in length-lexicographic order, i >= 1 (b_1 = empty).
std::string index_bits(uint64_t i);

// S_i: decode(b_i) when valid, otherwise the trivial tape-1 machine.
Shuffler enumerate_shuffler(uint64_t i, int k);

}  // namespace fsi
