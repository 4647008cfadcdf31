#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "nlllab/game_model.hpp"
#include "nlllab/nll_finite.hpp"
#include "nlllab/nll_mean_field.hpp"

namespace nlllab {

enum class ArtifactKind : std::uint32_t { FinitePlayer = 1, MeanField = 2 };

inline constexpr std::uint32_t kArtifactVersion = 1;

struct ArtifactHeader {
  ArtifactKind kind = ArtifactKind::FinitePlayer;
  std::uint64_t spec_fingerprint = 0;
  std::int32_t d = 0;
  std::int32_t resolution = 0;  // N for finite-player, R for mean-field
  double h = 0.0;
  std::int32_t K = 0;
  double eps_fp = 0.0;
  double eps_inner = 0.0;
};

/// Value layers k = 0..K and policy layers k = 0..K-1 on the lattice of the header.
struct Artifact {
  ArtifactHeader header;
  std::vector<NodeValues> value;
  std::vector<NodePolicy> policy;
};

Artifact make_artifact(const GameSpec& spec, const NllSolution& sol, const FixedPointOptions& opt);
Artifact make_artifact(const GameSpec& spec, const MFSolution& sol, const FixedPointOptions& opt);

/// Magic "NLLLABv1", fixed-width header, header checksum, payload length and
/// payload checksum (FNV-1a), then little-endian doubles.
void save_artifact(const Artifact& a, const std::filesystem::path& path);
/// IntegrityError on any mismatch.
Artifact load_artifact(const std::filesystem::path& path);

/// Hash of the file bytes.
std::uint64_t file_hash(const std::filesystem::path& path);

/// t, x, <coordinate columns>, v, a_0..a_{d-1}; coordinates are counts c_j for
/// finite-player artifacts and μ_j for mean-field ones. a_* are empty at t = T.
void write_artifact_csv(std::ostream& out, const Artifact& a);

}  // namespace nlllab
