#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <string_view>

#include "mee/rng.hpp"

namespace mee {

/// Word-at-a-time streaming hash. Stable across runs and platforms with the
/// same endianness; not cryptographic.
class StateHasher {
public:
    void add(std::uint64_t v) noexcept {
        m_h = mix64(m_h ^ (v * 0x9fb21c651e98df25ULL)) + 0x632be59bd9b4e019ULL;
        ++m_n;
    }
    void add(std::int64_t v) noexcept { add(static_cast<std::uint64_t>(v)); }
    void add(int v) noexcept { add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
    void add(bool v) noexcept { add(static_cast<std::uint64_t>(v)); }
    void add(double v) noexcept { add(std::bit_cast<std::uint64_t>(v)); }
    void add(std::span<const double> vs) noexcept {
        add(static_cast<std::uint64_t>(vs.size()));
        for (double v : vs) add(v);
    }
    void add(std::string_view s) noexcept {
        add(static_cast<std::uint64_t>(s.size()));
        for (unsigned char c : s) add(static_cast<std::uint64_t>(c));
    }

    std::uint64_t digest() const noexcept { return mix64(m_h ^ m_n); }

private:
    std::uint64_t m_h = 0xcbf29ce484222325ULL;
    std::uint64_t m_n = 0;
};

}  // namespace mee
