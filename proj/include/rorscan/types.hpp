#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rorscan/u256.hpp"

namespace rorscan {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input document (snapshot, IR, builders file, calldata).
struct ParseError : Error {
    using Error::Error;
};

/// A referenced entity (address, hash, function, slot name) does not exist.
struct LookupError : Error {
    using Error::Error;
};

/// Transaction replay could not start (unknown selector, bad calldata).
struct ReplayError : Error {
    using Error::Error;
};

namespace detail {
inline int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

template <std::size_t N>
std::array<std::uint8_t, N> bytes_from_hex(std::string_view s, const char* what) {
    if (s.size() != 2 + 2 * N || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
        throw ParseError(std::string(what) + " must be 0x-prefixed " +
                         std::to_string(2 * N) + "-digit hex: " + std::string(s));
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        int hi = hex_digit(s[2 + 2 * i]);
        int lo = hex_digit(s[3 + 2 * i]);
        if (hi < 0 || lo < 0)
            throw ParseError(std::string(what) + " has non-hex digit: " + std::string(s));
        out[i] = (std::uint8_t)((hi << 4) | lo);
    }
    return out;
}

template <std::size_t N>
std::string bytes_to_hex(const std::array<std::uint8_t, N>& b) {
    static const char* digits = "0123456789abcdef";
    std::string out = "0x";
    out.reserve(2 + 2 * N);
    for (auto byte : b) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0xf]);
    }
    return out;
}
}  // namespace detail

/// 20-byte account identifier. The zero address is the creation sentinel.
struct Address {
    std::array<std::uint8_t, 20> bytes{};

    friend bool operator==(const Address&, const Address&) = default;
    friend auto operator<=>(const Address&, const Address&) = default;

    bool is_zero() const {
        for (auto b : bytes)
            if (b) return false;
        return true;
    }

    static Address from_hex(std::string_view s) {
        return Address{detail::bytes_from_hex<20>(s, "address")};
    }

    std::string to_hex() const { return detail::bytes_to_hex(bytes); }

    /// Word holding the address in the low 160 bits.
    U256 to_word() const {
        U256 w;
        for (int i = 0; i < 20; ++i)
            w = (w << 8) | U256{(std::uint64_t)bytes[(std::size_t)i]};
        return w;
    }

    /// Low 160 bits of a word, the chain's word-to-address truncation.
    static Address from_word(const U256& w) {
        Address a;
        for (int i = 19; i >= 0; --i)
            a.bytes[(std::size_t)i] = (std::uint8_t)((w >> (unsigned)(8 * (19 - i))).low64() & 0xff);
        return a;
    }
};

/// 32-byte transaction hash.
struct Hash32 {
    std::array<std::uint8_t, 32> bytes{};

    friend bool operator==(const Hash32&, const Hash32&) = default;
    friend auto operator<=>(const Hash32&, const Hash32&) = default;

    static Hash32 from_hex(std::string_view s) {
        return Hash32{detail::bytes_from_hex<32>(s, "transaction hash")};
    }

    std::string to_hex() const { return detail::bytes_to_hex(bytes); }
};

/// 4-byte function selector.
struct Selector {
    std::array<std::uint8_t, 4> bytes{};

    friend bool operator==(const Selector&, const Selector&) = default;
    friend auto operator<=>(const Selector&, const Selector&) = default;

    static Selector from_hex(std::string_view s) {
        return Selector{detail::bytes_from_hex<4>(s, "selector")};
    }

    std::string to_hex() const { return detail::bytes_to_hex(bytes); }

    /// Selectors are derived from the function name alone (FNV-1a 32-bit);
    /// names are unique per contract so signatures add nothing here.
    static Selector of_name(std::string_view name) {
        std::uint32_t h = 2166136261u;
        for (char c : name) {
            h ^= (std::uint8_t)c;
            h *= 16777619u;
        }
        Selector s;
        s.bytes = {(std::uint8_t)(h >> 24), (std::uint8_t)(h >> 16),
                   (std::uint8_t)(h >> 8), (std::uint8_t)h};
        return s;
    }
};

/// A function within a specific contract.
struct FnRef {
    Address contract;
    std::string name;

    friend bool operator==(const FnRef&, const FnRef&) = default;
    friend auto operator<=>(const FnRef&, const FnRef&) = default;

    std::string to_string() const { return contract.to_hex() + ":" + name; }
};

/// A storage cell of a specific contract.
struct SlotKey {
    Address contract;
    U256 slot;

    friend bool operator==(const SlotKey&, const SlotKey&) = default;
    friend auto operator<=>(const SlotKey&, const SlotKey&) = default;
};

}  // namespace rorscan
