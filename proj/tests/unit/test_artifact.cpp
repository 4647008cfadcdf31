#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "nlllab/artifact.hpp"
#include "nlllab/error.hpp"
#include "nlllab/game_io.hpp"

using namespace nlllab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

class ArtifactTest : public ::testing::Test {
 protected:
  void SetUp() override {
    spec = build_quadratic_nearest_neighbor(3, 0.1);
    sol = solve_nll(spec, TimeGrid(0.05, 3), 3);
    path = fs::temp_directory_path() / ("nlllab_artifact_" + std::to_string(::getpid()) + ".bin");
  }
  void TearDown() override { fs::remove(path); }

  GameSpec spec;
  NllSolution sol;
  fs::path path;
};

}  // namespace

TEST_F(ArtifactTest, RoundTripIsBitExact) {
  const Artifact a = make_artifact(spec, sol, {});
  save_artifact(a, path);
  const Artifact b = load_artifact(path);
  EXPECT_EQ(b.header.kind, ArtifactKind::FinitePlayer);
  EXPECT_EQ(b.header.spec_fingerprint, spec_fingerprint(spec));
  EXPECT_EQ(b.header.resolution, 3);
  EXPECT_EQ(b.header.K, 3);
  EXPECT_DOUBLE_EQ(b.header.h, 0.05);
  EXPECT_EQ(b.value, sol.value);
  EXPECT_EQ(b.policy, sol.policy);
  EXPECT_EQ(slurp(path).substr(0, 8), "NLLLABv1");
  const auto first = file_hash(path);
  save_artifact(b, path);
  EXPECT_EQ(file_hash(path), first);
}

TEST_F(ArtifactTest, CorruptionIsDetected) {
  save_artifact(make_artifact(spec, sol, {}), path);
  const std::string good = slurp(path);

  std::string flipped = good;
  flipped[flipped.size() - 3] ^= 0x10;
  spit(path, flipped);
  EXPECT_THROW(load_artifact(path), IntegrityError);

  std::string header = good;
  header[20] ^= 0x01;
  spit(path, header);
  EXPECT_THROW(load_artifact(path), IntegrityError);

  spit(path, good.substr(0, good.size() - 8));
  EXPECT_THROW(load_artifact(path), IntegrityError);

  spit(path, "NOTANARTIFACT");
  EXPECT_THROW(load_artifact(path), IntegrityError);

  fs::remove(path);
  EXPECT_THROW(load_artifact(path), IntegrityError);
}

TEST_F(ArtifactTest, MeanFieldArtifact) {
  const MFSolution mf = solve_mf_nll(spec, TimeGrid(0.05, 2), std::make_shared<const SimplexLattice>(6, 3));
  save_artifact(make_artifact(spec, mf, {}), path);
  const Artifact b = load_artifact(path);
  EXPECT_EQ(b.header.kind, ArtifactKind::MeanField);
  EXPECT_EQ(b.header.resolution, 6);
  EXPECT_EQ(b.value, mf.value);
}

TEST_F(ArtifactTest, CsvLayout) {
  std::ostringstream out;
  write_artifact_csv(out, make_artifact(spec, sol, {}));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x,c_0,c_1,c_2,v,a_0,a_1,a_2");
  int rows = 0, terminal = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.size() >= 3 && line.substr(line.size() - 3) == ",,,") ++terminal;
  }
  // 4 time layers x 3 states x 10 nodes; the last layer has no policy.
  EXPECT_EQ(rows, 4 * 3 * 10);
  EXPECT_EQ(terminal, 3 * 10);
}
