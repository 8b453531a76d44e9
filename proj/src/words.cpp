#include "fsi/words.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace fsi {

namespace {

int char_to_symbol(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'z') return c - 'a' + 10;
    return -1;
}

char symbol_to_char(uint8_t s) {
    if (s < 10) return static_cast<char>('0' + s);
    if (s < 36) return static_cast<char>('a' + (s - 10));
    throw domain_error("symbol " + std::to_string(s) + " has no text form (k <= 36)");
}

}  // namespace

Word Word::parse(std::string_view text, int k) {
    if (k < 2) throw domain_error("alphabet size must be >= 2");
    std::vector<uint8_t> syms;
    syms.reserve(text.size());
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        int v = char_to_symbol(c);
        if (v < 0 || v >= k)
            throw domain_error(std::string("symbol '") + c + "' outside alphabet of size " +
                               std::to_string(k));
        syms.push_back(static_cast<uint8_t>(v));
    }
    return Word(std::move(syms));
}

std::string Word::str() const {
    std::string out;
    out.reserve(s_.size());
    for (uint8_t s : s_) out.push_back(symbol_to_char(s));
    return out;
}

Word Word::prefix(size_t n) const {
    if (n > s_.size()) throw domain_error("prefix longer than word");
    return Word(std::vector<uint8_t>(s_.begin(), s_.begin() + static_cast<long>(n)));
}

Word Word::appended(uint8_t sym) const {
    Word w = *this;
    w.push_back(sym);
    return w;
}

uint64_t occ_overlapping(const Word& u, const Word& w) {
    const size_t m = w.size();
    if (m == 0) throw domain_error("occ_overlapping: empty block");
    if (m > u.size()) return 0;
    uint64_t count = 0;
    for (size_t t = 0; t + m <= u.size(); ++t) {
        bool match = true;
        for (size_t i = 0; i < m; ++i) {
            if (u[t + i] != w[i]) {
                match = false;
                break;
            }
        }
        if (match) ++count;
    }
    return count;
}

uint64_t occ_aligned(const Word& u, const Word& w, size_t r) {
    if (r == 0 || w.size() != r) throw domain_error("occ_aligned: |w| must equal r >= 1");
    const size_t blocks = u.size() / r;
    uint64_t count = 0;
    for (size_t j = 0; j < blocks; ++j) {
        bool match = true;
        for (size_t i = 0; i < r; ++i) {
            if (u[j * r + i] != w[i]) {
                match = false;
                break;
            }
        }
        if (match) ++count;
    }
    return count;
}

namespace {

// Occurrence counts of all m-blocks of u, indexed by the base-k encoding of
// the block. Only feasible for k^m that fits in memory; callers keep m small.
std::vector<uint64_t> block_counts(const Word& u, size_t m, int k) {
    BigInt span = pow_int(k, static_cast<long>(m));
    if (span > 100'000'000) throw domain_error("block statistics: k^m too large");
    std::vector<uint64_t> counts(span.get_ui(), 0);
    if (u.size() < m) return counts;
    // rolling base-k window code
    uint64_t code = 0;
    uint64_t mod = 1;
    for (size_t i = 0; i + 1 < m; ++i) mod *= static_cast<uint64_t>(k);
    for (size_t i = 0; i < u.size(); ++i) {
        if (i >= m) code -= mod * u[i - m];
        code = code * static_cast<uint64_t>(k) + u[i];
        if (i + 1 >= m) ++counts[code];
    }
    return counts;
}

}  // namespace

Rational max_deviation(const Word& u, size_t m, int k) {
    if (m < 1 || m > u.size()) throw domain_error("max_deviation: need 1 <= m <= |u|");
    std::vector<uint64_t> counts = block_counts(u, m, k);
    // |c/n - 1/k^m| = |c*k^m - n| / (n*k^m); maximize the numerator.
    const BigInt km = pow_int(k, static_cast<long>(m));
    const BigInt n(static_cast<unsigned long>(u.size()));
    BigInt best = 0;
    for (uint64_t c : counts) {
        BigInt num = abs(BigInt(c) * km - n);
        if (num > best) best = num;
    }
    return make_rational(best, n * km);
}

bool block_test(const Word& u, size_t m, const Rational& eps, int k) {
    if (m < 1) throw domain_error("block_test: need m >= 1");
    if (u.empty()) throw domain_error("block_test: empty word");
    if (eps < 0) throw domain_error("block_test: eps must be >= 0");
    if (m > u.size()) {
        // every count is 0: the test holds iff k^-m <= eps
        Rational km_inv = make_rational(1, pow_int(k, static_cast<long>(m)));
        return km_inv <= eps;
    }
    std::vector<uint64_t> counts = block_counts(u, m, k);
    const BigInt km = pow_int(k, static_cast<long>(m));
    const BigInt n(static_cast<unsigned long>(u.size()));
    // |c*k^m - n| / (n*k^m) <= eps  <=>  |c*k^m - n| * eps.den <= eps.num * n * k^m
    const BigInt rhs = eps.get_num() * n * km;
    for (uint64_t c : counts) {
        BigInt lhs = abs(BigInt(c) * km - n) * eps.get_den();
        if (lhs > rhs) return false;
    }
    return true;
}

bool run_test(const Word& u, size_t m, const Rational& eps, int k) {
    if (m > u.size()) throw domain_error("run_test: need m <= |u|");
    return block_test(u, m, eps, k);
}

Word champernowne_prefix(int k, size_t n) {
    if (k < 2) throw domain_error("alphabet size must be >= 2");
    std::vector<uint8_t> out;
    out.reserve(n);
    std::vector<uint8_t> digits;
    for (uint64_t v = 1; out.size() < n; ++v) {
        digits.clear();
        for (uint64_t x = v; x > 0; x /= static_cast<uint64_t>(k))
            digits.push_back(static_cast<uint8_t>(x % static_cast<uint64_t>(k)));
        for (auto it = digits.rbegin(); it != digits.rend() && out.size() < n; ++it)
            out.push_back(*it);
    }
    return Word(std::move(out));
}

Word word_from_index(uint64_t idx, size_t len, int k) {
    std::vector<uint8_t> syms(len, 0);
    for (size_t i = len; i-- > 0;) {
        syms[i] = static_cast<uint8_t>(idx % static_cast<uint64_t>(k));
        idx /= static_cast<uint64_t>(k);
    }
    if (idx != 0) throw domain_error("word_from_index: index out of range");
    return Word(std::move(syms));
}

namespace {

class ChampernowneSource final : public WordSource {
  public:
    explicit ChampernowneSource(int k) : k_(k) {
        if (k < 2) throw domain_error("alphabet size must be >= 2");
    }
    Word prefix(size_t n) override {
        while (cache_.size() < n) {
            ++next_;
            std::vector<uint8_t> digits;
            for (uint64_t x = next_; x > 0; x /= static_cast<uint64_t>(k_))
                digits.push_back(static_cast<uint8_t>(x % static_cast<uint64_t>(k_)));
            cache_.insert(cache_.end(), digits.rbegin(), digits.rend());
        }
        return Word(std::vector<uint8_t>(cache_.begin(), cache_.begin() + static_cast<long>(n)));
    }
    int alphabet() const override { return k_; }

  private:
    int k_;
    uint64_t next_ = 0;
    std::vector<uint8_t> cache_;
};

class FixedSource final : public WordSource {
  public:
    FixedSource(Word w, int k, std::string origin)
        : w_(std::move(w)), k_(k), origin_(std::move(origin)) {}
    Word prefix(size_t n) override {
        if (n > w_.size())
            throw domain_error("word source '" + origin_ + "' exhausted: have " +
                               std::to_string(w_.size()) + " symbols, need " + std::to_string(n));
        return w_.prefix(n);
    }
    int alphabet() const override { return k_; }

  private:
    Word w_;
    int k_;
    std::string origin_;
};

}  // namespace

std::unique_ptr<WordSource> WordSource::champernowne(int k) {
    return std::make_unique<ChampernowneSource>(k);
}

std::unique_ptr<WordSource> WordSource::from_file(const std::string& path, int k) {
    std::ifstream in(path);
    if (!in) throw domain_error("cannot open word file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_unique<FixedSource>(Word::parse(ss.str(), k), k, path);
}

std::unique_ptr<WordSource> WordSource::literal(Word w, int k) {
    return std::make_unique<FixedSource>(std::move(w), k, "literal");
}

std::unique_ptr<WordSource> WordSource::from_spec(const std::string& spec, int k) {
    if (spec == "champernowne") return champernowne(k);
    if (spec.rfind("file:", 0) == 0) return from_file(spec.substr(5), k);
    if (spec.rfind("literal:", 0) == 0) return literal(Word::parse(spec.substr(8), k), k);
    throw domain_error("unknown word source '" + spec +
                       "' (expected champernowne, file:<path>, or literal:<symbols>)");
}

}  // namespace fsi
