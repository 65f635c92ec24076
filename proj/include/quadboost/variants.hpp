#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace quadboost {

enum class Variant : std::uint8_t { qc, qb_s, qb_o, qb_d, qb_f };

inline constexpr std::array<Variant, 5> kAllVariants{Variant::qc, Variant::qb_s, Variant::qb_o,
                                                     Variant::qb_d, Variant::qb_f};

enum class Compression : std::uint8_t { none, grandparent_coupled, one_layer, recursive };

/// One row of the optimization matrix. The path and continuous-find columns
/// do not apply to qc, which has no descriptors.
struct VariantConfig {
  Variant id;
  std::optional<bool> record_full_path;
  std::optional<bool> continuous_find;
  Compression compression;
  bool supports_move;

  friend constexpr bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

constexpr VariantConfig config_of(Variant v) noexcept {
  switch (v) {
    case Variant::qc: return {v, std::nullopt, std::nullopt, Compression::none, false};
    case Variant::qb_f: return {v, false, false, Compression::grandparent_coupled, true};
    case Variant::qb_d: return {v, false, false, Compression::one_layer, true};
    case Variant::qb_o: return {v, false, true, Compression::one_layer, true};
    case Variant::qb_s: return {v, true, true, Compression::recursive, true};
  }
  return {v, std::nullopt, std::nullopt, Compression::none, false};
}

constexpr std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::qc: return "qc";
    case Variant::qb_s: return "qb-s";
    case Variant::qb_o: return "qb-o";
    case Variant::qb_d: return "qb-d";
    case Variant::qb_f: return "qb-f";
  }
  return "?";
}

constexpr std::string_view to_string(Compression c) noexcept {
  switch (c) {
    case Compression::none: return "none";
    case Compression::grandparent_coupled: return "grandparent-coupled";
    case Compression::one_layer: return "one-layer";
    case Compression::recursive: return "recursive";
  }
  return "?";
}

constexpr std::optional<Variant> parse_variant(std::string_view s) noexcept {
  for (Variant v : kAllVariants) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

}  // namespace quadboost
