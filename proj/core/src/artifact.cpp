#include "nlllab/artifact.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>

#include "nlllab/error.hpp"
#include "nlllab/game_io.hpp"
#include "nlllab/simplex_lattice.hpp"

namespace nlllab {

static_assert(std::endian::native == std::endian::little, "artifact format assumes little-endian");

namespace {

constexpr char kMagic[8] = {'N', 'L', 'L', 'L', 'A', 'B', 'v', '1'};

template <class T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw IntegrityError("artifact truncated");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}

std::string encode_header(const ArtifactHeader& h) {
  std::string buf;
  put(buf, static_cast<std::uint32_t>(h.kind));
  put(buf, h.spec_fingerprint);
  put(buf, h.d);
  put(buf, h.resolution);
  put(buf, h.h);
  put(buf, h.K);
  put(buf, h.eps_fp);
  put(buf, h.eps_inner);
  return buf;
}

std::size_t lattice_nodes(const ArtifactHeader& h) {
  return static_cast<std::size_t>(lattice_size(h.resolution, h.d));
}

template <class Sol>
Artifact from_solution(const GameSpec& spec, const Sol& sol, ArtifactKind kind, int resolution,
                       const FixedPointOptions& opt) {
  Artifact a;
  a.header.kind = kind;
  a.header.spec_fingerprint = spec_fingerprint(spec);
  a.header.d = spec.d;
  a.header.resolution = resolution;
  a.header.h = sol.grid.h;
  a.header.K = sol.grid.K;
  a.header.eps_fp = opt.eps_fp;
  a.header.eps_inner = opt.inner.eps;
  a.value = sol.value;
  a.policy = sol.policy;
  return a;
}

}  // namespace

Artifact make_artifact(const GameSpec& spec, const NllSolution& sol, const FixedPointOptions& opt) {
  return from_solution(spec, sol, ArtifactKind::FinitePlayer, sol.N, opt);
}

Artifact make_artifact(const GameSpec& spec, const MFSolution& sol, const FixedPointOptions& opt) {
  return from_solution(spec, sol, ArtifactKind::MeanField, sol.lattice->resolution(), opt);
}

void save_artifact(const Artifact& a, const std::filesystem::path& path) {
  const std::string header = encode_header(a.header);
  std::string payload;
  for (const auto& v : a.value) {
    payload.append(reinterpret_cast<const char*>(v.raw().data()), v.raw().size() * sizeof(double));
  }
  for (const auto& p : a.policy) {
    payload.append(reinterpret_cast<const char*>(p.raw().data()), p.raw().size() * sizeof(double));
  }
  std::string buf(kMagic, sizeof kMagic);
  put(buf, kArtifactVersion);
  buf += header;
  put(buf, fnv1a64(header));
  put(buf, static_cast<std::uint64_t>(payload.size()));
  put(buf, fnv1a64(payload));
  buf += payload;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write artifact " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw ConfigError("failed writing artifact " + path.string());
}

Artifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open artifact " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof kMagic || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
    throw IntegrityError(path.string() + ": not an artifact (bad magic)");
  }
  std::size_t pos = sizeof kMagic;
  const auto version = take<std::uint32_t>(buf, pos);
  if (version != kArtifactVersion) {
    throw IntegrityError(path.string() + ": unsupported artifact version " + std::to_string(version));
  }
  const std::size_t header_begin = pos;
  Artifact a;
  const auto kind = take<std::uint32_t>(buf, pos);
  if (kind != 1 && kind != 2) throw IntegrityError(path.string() + ": unknown artifact kind");
  a.header.kind = static_cast<ArtifactKind>(kind);
  a.header.spec_fingerprint = take<std::uint64_t>(buf, pos);
  a.header.d = take<std::int32_t>(buf, pos);
  a.header.resolution = take<std::int32_t>(buf, pos);
  a.header.h = take<double>(buf, pos);
  a.header.K = take<std::int32_t>(buf, pos);
  a.header.eps_fp = take<double>(buf, pos);
  a.header.eps_inner = take<double>(buf, pos);
  const std::string header = buf.substr(header_begin, pos - header_begin);
  if (take<std::uint64_t>(buf, pos) != fnv1a64(header)) {
    throw IntegrityError(path.string() + ": header checksum mismatch");
  }
  const auto len = take<std::uint64_t>(buf, pos);
  const auto sum = take<std::uint64_t>(buf, pos);
  if (buf.size() - pos != len) throw IntegrityError(path.string() + ": payload length mismatch");
  const std::string payload = buf.substr(pos);
  if (fnv1a64(payload) != sum) throw IntegrityError(path.string() + ": payload checksum mismatch");

  const ArtifactHeader& h = a.header;
  if (h.d < 1 || h.resolution < 0 || h.K < 0) throw IntegrityError(path.string() + ": bad header");
  const std::size_t nodes = lattice_nodes(h);
  const auto d = static_cast<std::size_t>(h.d);
  const auto K = static_cast<std::size_t>(h.K);
  const std::size_t expect = ((K + 1) * d * nodes + K * d * d * nodes) * sizeof(double);
  if (len != expect) throw IntegrityError(path.string() + ": payload size does not match header");
  std::size_t off = 0;
  for (std::size_t k = 0; k <= K; ++k) {
    NodeValues v(h.d, nodes);
    std::memcpy(v.raw().data(), payload.data() + off, v.raw().size() * sizeof(double));
    off += v.raw().size() * sizeof(double);
    a.value.push_back(std::move(v));
  }
  for (std::size_t k = 0; k < K; ++k) {
    NodePolicy p(h.d, nodes);
    std::memcpy(p.raw().data(), payload.data() + off, p.raw().size() * sizeof(double));
    off += p.raw().size() * sizeof(double);
    a.policy.push_back(std::move(p));
  }
  return a;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a64(buf);
}

void write_artifact_csv(std::ostream& out, const Artifact& a) {
  const ArtifactHeader& h = a.header;
  const SimplexLattice lattice(h.resolution, h.d);
  const bool finite = h.kind == ArtifactKind::FinitePlayer;
  out << "t,x";
  for (int j = 0; j < h.d; ++j) out << (finite ? ",c_" : ",mu_") << j;
  out << ",v";
  for (int j = 0; j < h.d; ++j) out << ",a_" << j;
  out << "\n" << std::setprecision(17);
  for (int k = 0; k <= h.K; ++k) {
    const double t = static_cast<double>(k) * h.h;
    for (int x = 0; x < h.d; ++x) {
      for (std::size_t node = 0; node < lattice.size(); ++node) {
        out << t << "," << x;
        for (int j = 0; j < h.d; ++j) {
          if (finite) {
            out << "," << lattice.counts(node)[static_cast<std::size_t>(j)];
          } else {
            out << "," << lattice.point(node)[static_cast<std::size_t>(j)];
          }
        }
        out << "," << a.value[static_cast<std::size_t>(k)](x, node);
        for (int j = 0; j < h.d; ++j) {
          out << ",";
          if (k < h.K) out << a.policy[static_cast<std::size_t>(k)].row(x, node)[static_cast<std::size_t>(j)];
        }
        out << "\n";
      }
    }
  }
}

}  // namespace nlllab
