#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace varent {

// Symbols are 1-based: the alphabet {1, ..., l}.
using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

// Text encoding uses 1-9 then a-z, so at most 35 symbols.
inline constexpr int kMaxAlphabet = 35;

class Alphabet {
public:
    explicit Alphabet(int size);
    int size() const noexcept { return size_; }
    bool contains(Symbol s) const noexcept { return s >= 1 && s <= size_; }
    bool operator==(const Alphabet&) const = default;

private:
    int size_;
};

char symbol_char(Symbol s);
std::optional<Symbol> parse_symbol(char c);
std::string format_word(const Word& w);
Word parse_word(std::string_view text, const Alphabet& alphabet);

// Radius e^{-m}; only this grid of scales is exposed.
class ScaleIndex {
public:
    explicit ScaleIndex(int m = 1);
    int value() const noexcept { return m_; }
    double radius() const;
    bool operator==(const ScaleIndex&) const = default;

private:
    int m_;
};

enum class BallKind { open, closed };

int ball_cylinder_length(int n, ScaleIndex m, BallKind kind);

// d_n(x, y) = max_{0<=k<n} e^{-a_k}, a_k the common-prefix length of the k-shifted words.
double dn_distance(const Word& x, const Word& y, int n);

std::size_t common_prefix_length(const Word& x, const Word& y);
bool is_prefix(const Word& prefix, const Word& w);

struct BowenBallSpec {
    Word center;
    int n = 1;
    ScaleIndex m{1};
    BallKind kind = BallKind::open;

    int cylinder_length() const { return ball_cylinder_length(n, m, kind); }
    Word cylinder() const;
    bool contains(const Word& y) const;
};

}  // namespace varent
