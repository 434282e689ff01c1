#pragma once

#include <array>
#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rorscan {

/// 256-bit unsigned word with wrapping arithmetic, matching chain semantics:
/// add/sub/mul wrap mod 2^256, division and modulo by zero yield zero.
/// Limbs are little-endian (limb[0] holds the least significant 64 bits).
struct U256 {
    std::array<std::uint64_t, 4> limb{0, 0, 0, 0};

    constexpr U256() = default;
    constexpr U256(std::uint64_t v) : limb{v, 0, 0, 0} {}

    static constexpr U256 zero() { return U256{}; }
    static constexpr U256 one() { return U256{1}; }

    static constexpr U256 max() {
        U256 r;
        r.limb = {~0ull, ~0ull, ~0ull, ~0ull};
        return r;
    }

    constexpr bool is_zero() const {
        return limb[0] == 0 && limb[1] == 0 && limb[2] == 0 && limb[3] == 0;
    }

    constexpr bool bit(unsigned i) const {
        return (limb[i / 64] >> (i % 64)) & 1u;
    }

    constexpr void set_bit(unsigned i) { limb[i / 64] |= (1ull << (i % 64)); }

    /// Index of the highest set bit, or -1 for zero.
    constexpr int highest_bit() const {
        for (int w = 3; w >= 0; --w) {
            if (limb[w] == 0) continue;
            std::uint64_t v = limb[w];
            int b = 0;
            while (v >>= 1) ++b;
            return w * 64 + b;
        }
        return -1;
    }

    friend constexpr bool operator==(const U256&, const U256&) = default;

    friend constexpr std::strong_ordering operator<=>(const U256& a, const U256& b) {
        for (int i = 3; i >= 0; --i) {
            if (a.limb[i] != b.limb[i])
                return a.limb[i] < b.limb[i] ? std::strong_ordering::less
                                             : std::strong_ordering::greater;
        }
        return std::strong_ordering::equal;
    }

    friend constexpr U256 operator+(const U256& a, const U256& b) {
        U256 r;
        unsigned __int128 carry = 0;
        for (int i = 0; i < 4; ++i) {
            unsigned __int128 s = (unsigned __int128)a.limb[i] + b.limb[i] + carry;
            r.limb[i] = (std::uint64_t)s;
            carry = s >> 64;
        }
        return r;
    }

    friend constexpr U256 operator-(const U256& a, const U256& b) {
        U256 r;
        unsigned __int128 borrow = 0;
        for (int i = 0; i < 4; ++i) {
            unsigned __int128 d =
                (unsigned __int128)a.limb[i] - b.limb[i] - borrow;
            r.limb[i] = (std::uint64_t)d;
            borrow = (d >> 64) & 1;
        }
        return r;
    }

    friend constexpr U256 operator*(const U256& a, const U256& b) {
        // Schoolbook product truncated to 256 bits.
        U256 r;
        for (int i = 0; i < 4; ++i) {
            unsigned __int128 carry = 0;
            for (int j = 0; i + j < 4; ++j) {
                unsigned __int128 cur = (unsigned __int128)a.limb[i] * b.limb[j] +
                                        r.limb[i + j] + carry;
                r.limb[i + j] = (std::uint64_t)cur;
                carry = cur >> 64;
            }
        }
        return r;
    }

    friend constexpr U256 operator&(const U256& a, const U256& b) {
        U256 r;
        for (int i = 0; i < 4; ++i) r.limb[i] = a.limb[i] & b.limb[i];
        return r;
    }

    friend constexpr U256 operator|(const U256& a, const U256& b) {
        U256 r;
        for (int i = 0; i < 4; ++i) r.limb[i] = a.limb[i] | b.limb[i];
        return r;
    }

    friend constexpr U256 operator^(const U256& a, const U256& b) {
        U256 r;
        for (int i = 0; i < 4; ++i) r.limb[i] = a.limb[i] ^ b.limb[i];
        return r;
    }

    friend constexpr U256 operator<<(const U256& a, unsigned n) {
        if (n >= 256) return U256{};
        U256 r;
        unsigned ws = n / 64, bs = n % 64;
        for (int i = 3; i >= 0; --i) {
            std::uint64_t v = 0;
            if (i >= (int)ws) {
                v = a.limb[i - ws] << bs;
                if (bs && i - (int)ws - 1 >= 0)
                    v |= a.limb[i - ws - 1] >> (64 - bs);
            }
            r.limb[i] = v;
        }
        return r;
    }

    friend constexpr U256 operator>>(const U256& a, unsigned n) {
        if (n >= 256) return U256{};
        U256 r;
        unsigned ws = n / 64, bs = n % 64;
        for (int i = 0; i < 4; ++i) {
            std::uint64_t v = 0;
            if (i + ws < 4) {
                v = a.limb[i + ws] >> bs;
                if (bs && i + ws + 1 < 4) v |= a.limb[i + ws + 1] << (64 - bs);
            }
            r.limb[i] = v;
        }
        return r;
    }

    /// Quotient and remainder by binary long division; x/0 == x%0 == 0.
    static constexpr std::pair<U256, U256> divmod(const U256& a, const U256& b) {
        if (b.is_zero()) return {U256{}, U256{}};
        if (a < b) return {U256{}, a};
        U256 q, rem;
        for (int i = a.highest_bit(); i >= 0; --i) {
            rem = rem << 1;
            if (a.bit((unsigned)i)) rem.limb[0] |= 1;
            if (rem >= b) {
                rem = rem - b;
                q.set_bit((unsigned)i);
            }
        }
        return {q, rem};
    }

    friend constexpr U256 operator/(const U256& a, const U256& b) {
        return divmod(a, b).first;
    }

    friend constexpr U256 operator%(const U256& a, const U256& b) {
        return divmod(a, b).second;
    }

    /// Truncates to the low 64 bits.
    constexpr std::uint64_t low64() const { return limb[0]; }

    constexpr bool fits_u64() const {
        return limb[1] == 0 && limb[2] == 0 && limb[3] == 0;
    }
};

/// Parses "0x"-prefixed or bare hex, and bare decimal, into a word.
/// Throws std::invalid_argument on malformed or overlong input.
inline U256 u256_from_string(std::string_view s) {
    auto hex_digit = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (s.empty()) throw std::invalid_argument("empty numeric literal");
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        std::string_view h = s.substr(2);
        if (h.empty() || h.size() > 64)
            throw std::invalid_argument("bad hex word: " + std::string(s));
        U256 r;
        for (char c : h) {
            int d = hex_digit(c);
            if (d < 0) throw std::invalid_argument("bad hex word: " + std::string(s));
            r = (r << 4) | U256{(std::uint64_t)d};
        }
        return r;
    }
    U256 r;
    for (char c : s) {
        if (c < '0' || c > '9')
            throw std::invalid_argument("bad decimal literal: " + std::string(s));
        r = r * U256{10} + U256{(std::uint64_t)(c - '0')};
    }
    return r;
}

/// Minimal lowercase hex rendering, e.g. 0x0, 0x1f.
inline std::string u256_to_hex(const U256& v) {
    static const char* digits = "0123456789abcdef";
    std::string out = "0x";
    bool started = false;
    for (int i = 255; i >= 0; i -= 4) {
        unsigned nib = 0;
        for (int b = 3; b >= 0; --b)
            nib = (nib << 1) | (v.bit((unsigned)(i - 3 + b)) ? 1u : 0u);
        if (!started && nib == 0 && i != 3) continue;
        started = true;
        out.push_back(digits[nib]);
    }
    return out;
}

/// SplitMix64 finalizer; used to derive storage slots for map elements.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Storage slot of a map element: the base slot of the variable mixed with
/// the key, one SplitMix64 pass per limb. Deterministic and documented so
/// snapshot files can pre-seed map entries by (variable, key).
inline U256 map_element_slot(const U256& base, const U256& key) {
    U256 r;
    for (int i = 0; i < 4; ++i)
        r.limb[i] = splitmix64(base.limb[i] ^ splitmix64(key.limb[i] + (std::uint64_t)(i + 1)));
    return r;
}

}  // namespace rorscan
