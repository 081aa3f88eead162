#include "varent/word.hpp"

#include <algorithm>
#include <cmath>

#include "varent/error.hpp"

namespace varent {

Alphabet::Alphabet(int size) : size_(size) {
    if (size < 2 || size > kMaxAlphabet)
        throw DomainError("alphabet size must lie in [2, " + std::to_string(kMaxAlphabet) + "], got " +
                          std::to_string(size));
}

char symbol_char(Symbol s) {
    if (s >= 1 && s <= 9) return static_cast<char>('0' + s);
    if (s >= 10 && s <= kMaxAlphabet) return static_cast<char>('a' + (s - 10));
    throw DomainError("symbol out of range: " + std::to_string(s));
}

std::optional<Symbol> parse_symbol(char c) {
    if (c >= '1' && c <= '9') return static_cast<Symbol>(c - '0');
    if (c >= 'a' && c <= 'z') return static_cast<Symbol>(10 + (c - 'a'));
    return std::nullopt;
}

std::string format_word(const Word& w) {
    std::string out;
    out.reserve(w.size());
    for (Symbol s : w) out.push_back(symbol_char(s));
    return out;
}

Word parse_word(std::string_view text, const Alphabet& alphabet) {
    Word w;
    w.reserve(text.size());
    for (char c : text) {
        auto s = parse_symbol(c);
        if (!s || !alphabet.contains(*s))
            throw DomainError("symbol '" + std::string(1, c) + "' not in alphabet of size " +
                              std::to_string(alphabet.size()));
        w.push_back(*s);
    }
    return w;
}

ScaleIndex::ScaleIndex(int m) : m_(m) {
    if (m < 1) throw DomainError("scale index m must be >= 1");
}

double ScaleIndex::radius() const { return std::exp(-static_cast<double>(m_)); }

int ball_cylinder_length(int n, ScaleIndex m, BallKind kind) {
    if (n < 1) throw DomainError("time length n must be >= 1");
    return kind == BallKind::open ? n + m.value() : n + m.value() - 1;
}

std::size_t common_prefix_length(const Word& x, const Word& y) {
    auto lim = std::min(x.size(), y.size());
    std::size_t c = 0;
    while (c < lim && x[c] == y[c]) ++c;
    return c;
}

bool is_prefix(const Word& prefix, const Word& w) {
    return prefix.size() <= w.size() && std::equal(prefix.begin(), prefix.end(), w.begin());
}

double dn_distance(const Word& x, const Word& y, int n) {
    if (n < 1) throw DomainError("dn_distance: n must be >= 1");
    const std::size_t len = std::min(x.size(), y.size());
    if (len < static_cast<std::size_t>(n))
        throw InsufficientPrefix("dn_distance needs words of length >= n = " + std::to_string(n));
    // The words agree on everything we can see: only equal-length words give a
    // definite answer (0 on the window); otherwise the tail is unknown.
    if (common_prefix_length(x, y) == len) {
        if (x.size() == y.size()) return 0.0;
        throw InsufficientPrefix("one word is a prefix of the other; d_n undetermined");
    }
    // Some a_k may run off the end, but they are dominated by the term at the
    // first disagreement (or all k < n are determined), so skipping them is exact.
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        std::size_t a = 0;
        while (k + a < len && x[k + a] == y[k + a]) ++a;
        if (k + a == len) continue;
        worst = std::max(worst, std::exp(-static_cast<double>(a)));
    }
    return worst;
}

Word BowenBallSpec::cylinder() const {
    const auto len = static_cast<std::size_t>(cylinder_length());
    if (center.size() < len)
        throw InsufficientPrefix("ball center has length " + std::to_string(center.size()) +
                                 " but the cylinder needs " + std::to_string(len));
    return Word(center.begin(), center.begin() + static_cast<std::ptrdiff_t>(len));
}

bool BowenBallSpec::contains(const Word& y) const { return is_prefix(cylinder(), y); }

}  // namespace varent
