#include "fsi/shuffler.hpp"

#include <bit>
#include <sstream>

namespace fsi {

void Shuffler::validate() const {
    if (k < 2) throw domain_error("shuffler: alphabet size must be >= 2");
    if (num_states < 1) throw domain_error("shuffler: need at least one state");
    if (start >= num_states) throw domain_error("shuffler: start state out of range");
    if (tau.size() != num_states) throw domain_error("shuffler: tau size mismatch");
    if (delta.size() != static_cast<size_t>(num_states) * static_cast<size_t>(k))
        throw domain_error("shuffler: delta size mismatch");
    for (uint8_t t : tau)
        if (t != 1 && t != 2) throw domain_error("shuffler: tape choice must be 1 or 2");
    for (uint32_t d : delta)
        if (d >= num_states) throw domain_error("shuffler: transition target out of range");
}

Shuffler Shuffler::trivial(int k, int tape) {
    Shuffler s;
    s.k = k;
    s.num_states = 1;
    s.start = 0;
    s.delta.assign(static_cast<size_t>(k), 0);
    s.tau.assign(1, static_cast<uint8_t>(tape));
    s.validate();
    return s;
}

Shuffler Shuffler::parse_text(const std::string& text) {
    std::istringstream in(text);
    Shuffler s;
    uint32_t q0 = 0;
    if (!(in >> s.k >> s.num_states >> q0))
        throw domain_error("shuffler text: expected header 'k Q q0'");
    s.start = q0;
    std::string taus;
    if (!(in >> taus) || taus.size() != s.num_states)
        throw domain_error("shuffler text: expected one tape-choice character per state");
    s.tau.clear();
    for (char c : taus) {
        if (c != '1' && c != '2') throw domain_error("shuffler text: tape choice must be 1 or 2");
        s.tau.push_back(static_cast<uint8_t>(c - '0'));
    }
    s.delta.clear();
    for (uint32_t q = 0; q < s.num_states; ++q) {
        for (int c = 0; c < s.k; ++c) {
            uint32_t target;
            if (!(in >> target)) throw domain_error("shuffler text: missing transition entry");
            s.delta.push_back(target);
        }
    }
    s.validate();
    return s;
}

std::string Shuffler::text() const {
    std::ostringstream out;
    out << k << ' ' << num_states << ' ' << start << '\n';
    for (uint8_t t : tau) out << static_cast<char>('0' + t);
    out << '\n';
    for (uint32_t q = 0; q < num_states; ++q) {
        for (int c = 0; c < k; ++c) {
            if (c) out << ' ';
            out << next(q, static_cast<uint8_t>(c));
        }
        out << '\n';
    }
    return out.str();
}

RunResult run_n(const Shuffler& s, const Word& xp, const Word& yp, size_t n) {
    RunResult r;
    r.final.q = s.start;
    std::vector<uint8_t> out;
    out.reserve(n);
    for (size_t t = 0; t < n; ++t) {
        uint8_t sym;
        if (s.tau[r.final.q] == 1) {
            if (r.final.a >= xp.size())
                throw domain_error("run_n: tape 1 exhausted at position " +
                                   std::to_string(r.final.a + 1));
            sym = xp[r.final.a++];
        } else {
            if (r.final.b >= yp.size())
                throw domain_error("run_n: tape 2 exhausted at position " +
                                   std::to_string(r.final.b + 1));
            sym = yp[r.final.b++];
        }
        out.push_back(sym);
        r.final.q = s.next(r.final.q, sym);
    }
    r.out = Word(std::move(out));
    return r;
}

namespace {

// field width for state indices: ceil(log2 Q), 0 when Q == 1
uint32_t state_bits(uint32_t q_count) {
    return q_count <= 1 ? 0 : static_cast<uint32_t>(std::bit_width(q_count - 1));
}

void append_field(std::string& bits, uint32_t value, uint32_t width) {
    for (uint32_t i = width; i-- > 0;) bits.push_back((value >> i) & 1 ? '1' : '0');
}

}  // namespace

std::string encode(const Shuffler& s) {
    s.validate();
    const uint32_t q_count = s.num_states;
    const uint32_t w = state_bits(q_count);
    std::string bits;
    bits.reserve(q_count + 1 + q_count + w + static_cast<size_t>(q_count) * s.k * w);
    bits.append(q_count, '1');
    bits.push_back('0');
    for (uint8_t t : s.tau) bits.push_back(t == 1 ? '0' : '1');
    append_field(bits, s.start, w);
    for (uint32_t q = 0; q < q_count; ++q)
        for (int c = 0; c < s.k; ++c) append_field(bits, s.next(q, static_cast<uint8_t>(c)), w);
    return bits;
}

std::optional<Shuffler> decode(const std::string& bits, int k) {
    if (k < 2) throw domain_error("decode: alphabet size must be >= 2");
    for (char c : bits)
        if (c != '0' && c != '1') return std::nullopt;

    size_t pos = 0;
    while (pos < bits.size() && bits[pos] == '1') ++pos;
    if (pos == bits.size() || pos == 0) return std::nullopt;  // no terminator or Q = 0
    const uint32_t q_count = static_cast<uint32_t>(pos);
    ++pos;  // the unary terminator

    const uint32_t w = state_bits(q_count);
    const size_t expect = static_cast<size_t>(q_count) + 1 + q_count + w +
                          static_cast<size_t>(q_count) * static_cast<size_t>(k) * w;
    if (bits.size() != expect) return std::nullopt;

    Shuffler s;
    s.k = k;
    s.num_states = q_count;
    s.tau.reserve(q_count);
    for (uint32_t i = 0; i < q_count; ++i) s.tau.push_back(bits[pos++] == '0' ? 1 : 2);

    auto read_field = [&]() -> std::optional<uint32_t> {
        uint32_t v = 0;
        for (uint32_t i = 0; i < w; ++i) v = (v << 1) | (bits[pos++] == '1' ? 1u : 0u);
        if (v >= q_count) return std::nullopt;
        return v;
    };

    auto q0 = read_field();
    if (!q0) return std::nullopt;
    s.start = *q0;
    s.delta.reserve(static_cast<size_t>(q_count) * k);
    for (uint32_t q = 0; q < q_count; ++q) {
        for (int c = 0; c < k; ++c) {
            auto target = read_field();
            if (!target) return std::nullopt;
            s.delta.push_back(*target);
        }
    }
    s.validate();
    return s;
}

std::string index_bits(uint64_t i) {
    if (i < 1) throw domain_error("index_bits: indices start at 1");
    if (i == 1) return "";
    const uint32_t len = static_cast<uint32_t>(std::bit_width(i)) - 1;
    const uint64_t j = i - (uint64_t{1} << len);
    std::string bits;
    bits.reserve(len);
    for (uint32_t p = len; p-- > 0;) bits.push_back((j >> p) & 1 ? '1' : '0');
    return bits;
}

Shuffler enumerate_shuffler(uint64_t i, int k) {
    auto s = decode(index_bits(i), k);
    return s ? *s : Shuffler::trivial(k, 1);
}

}  // namespace fsi
