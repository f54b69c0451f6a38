#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace simjoin {

enum class Relation : std::uint8_t { R = 0, S = 1 };

/// Fixed-width bit vector over Hamming space.
class BitVec {
public:
    BitVec() = default;

    explicit BitVec(int dim) : dim_(dim), words_((dim + 63) / 64, 0) {
        if (dim < 1) throw std::invalid_argument("BitVec: dim must be >= 1");
    }

    int dim() const { return dim_; }

    bool get(int i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

    void set(int i, bool v) {
        std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    void flip(int i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

    static int hamming(const BitVec& a, const BitVec& b) {
        if (a.dim_ != b.dim_)
            throw std::invalid_argument("BitVec::hamming: dimension mismatch");
        int d = 0;
        for (std::size_t w = 0; w < a.words_.size(); ++w)
            d += std::popcount(a.words_[w] ^ b.words_[w]);
        return d;
    }

    std::string to_string() const {
        std::string s(dim_, '0');
        for (int i = 0; i < dim_; ++i)
            if (get(i)) s[i] = '1';
        return s;
    }

    static BitVec from_string(const std::string& s) {
        BitVec v(static_cast<int>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1')
                v.set(static_cast<int>(i), true);
            else if (s[i] != '0')
                throw std::invalid_argument("BitVec: bitstring must be 0/1");
        }
        return v;
    }

    bool operator==(const BitVec&) const = default;

private:
    int dim_ = 0;
    std::vector<std::uint64_t> words_;
};

struct Point {
    std::int64_t id = 0;
    Relation rel = Relation::R;
    BitVec bits;
};

/// One self-join input: two relations sharing a dimension. Ids are unique
/// within each relation.
struct Dataset {
    int dim = 0;
    std::vector<Point> r;
    std::vector<Point> s;

    std::size_t total_points() const { return r.size() + s.size(); }
};

}  // namespace simjoin
