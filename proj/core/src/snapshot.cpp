#include "sgf/snapshot.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace sgf {

namespace {

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<unsigned char>& buf, double d) {
  std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void write_snapshot(const SymmetricMatrixField& f, const std::string& path) {
  const LatticeDomain& dom = f.domain();
  std::vector<unsigned char> buf;
  buf.reserve(kSnapshotHeaderBytes + f.raw().size() * 8);
  buf.push_back('S');
  buf.push_back('G');
  buf.push_back('F');
  buf.push_back('1');
  put_u32(buf, kSnapshotVersion);
  put_u32(buf, static_cast<std::uint32_t>(dom.dim()));
  put_u32(buf, static_cast<std::uint32_t>(dom.sites_per_axis()));
  put_f64(buf, dom.period());
  put_u32(buf, static_cast<std::uint32_t>(f.matrix_size()));
  put_f64(buf, f.time());
  for (double v : f.raw()) put_f64(buf, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open snapshot for writing: " + path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw ConfigError("short write to snapshot: " + path);
}

SymmetricMatrixField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open snapshot for reading: " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());

  if (buf.size() < kSnapshotHeaderBytes)
    throw FormatError("snapshot truncated inside the header", buf.size());
  if (buf[0] != 'S' || buf[1] != 'G' || buf[2] != 'F' || buf[3] != '1')
    throw FormatError("bad magic bytes", 0);
  const std::uint32_t version = get_u32(&buf[4]);
  if (version != kSnapshotVersion) throw FormatError("unsupported format version", 4);
  const std::uint32_t m = get_u32(&buf[8]);
  const std::uint32_t n = get_u32(&buf[12]);
  const double period = get_f64(&buf[16]);
  const std::uint32_t l = get_u32(&buf[24]);
  const double t = get_f64(&buf[28]);

  if (m < 2 || m > static_cast<std::uint32_t>(kMaxDim)) throw FormatError("dimension out of range", 8);
  if (n < 4 || n > (1u << 20)) throw FormatError("sites per axis out of range", 12);
  if (!(period > 0.0) || !std::isfinite(period)) throw FormatError("invalid period", 16);
  if (l < 1 || l > 64) throw FormatError("matrix size out of range", 24);
  if (!std::isfinite(t)) throw FormatError("non-finite time stamp", 28);

  const LatticeDomain dom(static_cast<int>(m), static_cast<int>(n), period);
  SymmetricMatrixField f(dom, static_cast<int>(l), t);
  const std::size_t expect = kSnapshotHeaderBytes + f.raw().size() * 8;
  if (buf.size() != expect)
    throw FormatError("payload size mismatch: got " + std::to_string(buf.size()) +
                          " bytes, expected " + std::to_string(expect),
                      std::min(buf.size(), expect));
  for (std::size_t i = 0; i < f.raw().size(); ++i) {
    const std::size_t off = kSnapshotHeaderBytes + i * 8;
    const double v = get_f64(&buf[off]);
    if (!std::isfinite(v)) throw FormatError("non-finite payload value", off);
    f.raw()[i] = v;
  }
  return f;
}

}  // namespace sgf
