#include "mmf/snapshot.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace mmf {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'M', 'F', '1'};
constexpr std::size_t kHeaderSize = 4 + 4 * 4 + 6 * 8;

template <class T>
void put(std::vector<unsigned char>& buf, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

void put_array(std::vector<unsigned char>& buf, std::span<const double> v) {
  const auto* p = reinterpret_cast<const unsigned char*>(v.data());
  buf.insert(buf.end(), p, p + v.size_bytes());
}

class Reader {
 public:
  Reader(const std::vector<unsigned char>& buf, std::size_t end) : buf_(buf), end_(end) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void get_array(std::span<double> out) {
    need(out.size_bytes());
    std::memcpy(out.data(), buf_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
  }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw Error(ErrorKind::CorruptSnapshot, "snapshot is truncated");
  }
  const std::vector<unsigned char>& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const unsigned char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_snapshot(const SimulationState& s, const std::filesystem::path& path) {
  const Grid2D& g = s.grid();
  require_same_grid(g, s.f.grid(), "save_snapshot");
  require_same_grid(g, s.sigma.grid(), "save_snapshot");
  std::vector<unsigned char> buf;
  buf.reserve(kHeaderSize + 8 * (g.size() * (4 + s.f.n_m())) + 4);
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put<std::uint32_t>(buf, kSnapshotVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(g.nx));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(g.ny));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(s.f.n_m()));
  for (double v : {s.t, s.delta, s.b, s.tau, s.nu, s.manifold().s}) put<double>(buf, v);
  put_array(buf, s.omega.values());
  put_array(buf, s.f.values());
  put_array(buf, s.sigma.s11.values());
  put_array(buf, s.sigma.s12.values());
  put_array(buf, s.sigma.s22.values());
  put<std::uint32_t>(buf, crc_of(buf.data() + kHeaderSize, buf.size() - kHeaderSize));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

SimulationState load_snapshot(const std::filesystem::path& path, double length) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoError, "read failed for " + path.string());
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw Error(ErrorKind::CorruptSnapshot, path.string() + " is not a snapshot (bad magic)");

  Reader r(buf, buf.size());
  r.get<std::uint32_t>();  // magic
  const auto version = r.get<std::uint32_t>();
  if (version != kSnapshotVersion)
    throw Error(ErrorKind::VersionMismatch, "snapshot version " + std::to_string(version) + ", expected " +
                                                std::to_string(kSnapshotVersion));
  const auto nx = r.get<std::uint32_t>(), ny = r.get<std::uint32_t>(), nm = r.get<std::uint32_t>();
  SimulationState s;
  s.t = r.get<double>();
  s.delta = r.get<double>();
  s.b = r.get<double>();
  s.tau = r.get<double>();
  s.nu = r.get<double>();
  const double sm = r.get<double>();

  const std::uint64_t points = std::uint64_t{nx} * ny;
  const std::uint64_t payload = 8 * points * (std::uint64_t{nm} + 4);
  if (nx == 0 || ny == 0 || nm == 0 || buf.size() != kHeaderSize + payload + 4)
    throw Error(ErrorKind::CorruptSnapshot, "snapshot size does not match its header");

  Grid2D g{static_cast<int>(nx), static_cast<int>(ny), length};
  MicroManifold mm{static_cast<int>(nm), sm};
  try {
    g.validate();
    mm.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::CorruptSnapshot, std::string("snapshot header: ") + e.what());
  }

  Reader body(buf, buf.size() - 4);
  body.skip(kHeaderSize);
  s.omega = ScalarField2D(g);
  s.f = ParticleDensity(g, mm);
  s.sigma = StressField(g);
  body.get_array(s.omega.values());
  body.get_array(s.f.values());
  body.get_array(s.sigma.s11.values());
  body.get_array(s.sigma.s12.values());
  body.get_array(s.sigma.s22.values());

  std::uint32_t stored;
  std::memcpy(&stored, buf.data() + buf.size() - 4, 4);
  if (stored != crc_of(buf.data() + kHeaderSize, payload))
    throw Error(ErrorKind::CorruptSnapshot, "snapshot checksum mismatch");
  return s;
}

}  // namespace mmf
