#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nlllab/game_model.hpp"

namespace nlllab {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);

/// Canonical JSON form: d, sigma2, supports, cost.kind, cost.params, gamma,
/// lip_ell, lip_g, lip_dell.
nlohmann::json spec_to_json(const GameSpec& spec);

/// Inverse of spec_to_json. Missing supports default to the nearest-neighbor
/// cycle; missing gamma and Lipschitz constants default to the values of the
/// nearest-neighbor builder, which is only allowed when supports are defaulted.
GameSpec spec_from_json(const nlohmann::json& j);

GameSpec load_spec(const std::filesystem::path& path);
void save_spec(const GameSpec& spec, const std::filesystem::path& path);

/// Hash of the canonical JSON dump.
std::uint64_t spec_fingerprint(const GameSpec& spec);

}  // namespace nlllab
