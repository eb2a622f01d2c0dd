#pragma once

#include <string>

#include "sgf/field.hpp"

namespace sgf {

// Binary snapshot format, fixed little-endian IEEE-754:
//   bytes 0..3   magic "SGF1"
//   bytes 4..7   format version (u32, currently 1)
//   bytes 8..11  m (u32)
//   bytes 12..15 n_per_axis (u32)
//   bytes 16..23 period (f64)
//   bytes 24..27 l (u32)
//   bytes 28..35 time stamp (f64)
//   payload: sites in row-major order, per site the lower triangle of the
//   matrix in row-major order, f64 each.
// Round trips are bit-identical.
inline constexpr std::size_t kSnapshotHeaderBytes = 36;
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const SymmetricMatrixField& f, const std::string& path);
SymmetricMatrixField read_snapshot(const std::string& path);

}  // namespace sgf
