#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace mee {

/// How a sensory channel is scored: squared error for continuous values in
/// [0, 1], binary cross-entropy for bits.
enum class ChannelKind { Continuous, Discrete };

/// The four raw data streams.
enum class StreamKind { Numeric = 0, Text = 1, Noise = 2, Temporal = 3 };

inline constexpr std::array<StreamKind, 4> kAllStreamKinds{StreamKind::Numeric, StreamKind::Text, StreamKind::Noise,
                                                           StreamKind::Temporal};

constexpr std::string_view to_string(StreamKind k) {
    switch (k) {
        case StreamKind::Numeric: return "numeric";
        case StreamKind::Text: return "text";
        case StreamKind::Noise: return "noise";
        case StreamKind::Temporal: return "temporal";
    }
    return "?";
}

constexpr std::optional<StreamKind> stream_kind_from(std::string_view s) {
    for (auto k : kAllStreamKinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

constexpr ChannelKind channel_kind_of(StreamKind k) {
    return (k == StreamKind::Text || k == StreamKind::Noise) ? ChannelKind::Discrete : ChannelKind::Continuous;
}

/// Per-stream-kind value table.
using PerStream = std::array<double, 4>;

constexpr std::size_t index_of(StreamKind k) { return static_cast<std::size_t>(k); }

}  // namespace mee
