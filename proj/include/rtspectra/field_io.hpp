/// @file field_io.hpp
/// @brief Binary snapshots and CSV dumps of grid fields.
///
/// Binary layout (little-endian, no padding); see docs/formats.md:
///
///     offset  size  content
///     0       8     magic "RTSFIELD"
///     8       4     u32 format version (1)
///     12      4     u32 kind: 0 scalar (cell centers), 1 vector (MAC faces)
///     16      4     u32 dim
///     20      12    u32 cells[3] (unused axes hold 1)
///     32      24    f64 h[3]    (unused axes hold 1.0)
///     56      4     u32 gravity axis
///     60      8     u64 value count
///     68      8*N   f64 payload
///
/// Vector payloads store component 0, then 1, then 2; within a block values
/// run axis-0 fastest, exactly as in memory.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "rtspectra/field.hpp"

namespace rtspectra {

enum class FieldKind : std::uint32_t { Scalar = 0, Vector = 1 };

inline constexpr std::uint32_t kFieldFormatVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 68;

void write_field(std::ostream& out, const ScalarField& f);
void write_field(std::ostream& out, const VectorField& f);
void write_field(const std::filesystem::path& path, const ScalarField& f);
void write_field(const std::filesystem::path& path, const VectorField& f);

/// Throw ParseError (with byte offset) on a bad magic, version, kind,
/// inconsistent header or truncated payload.
ScalarField read_scalar_field(std::istream& in);
VectorField read_vector_field(std::istream& in);
ScalarField read_scalar_field(const std::filesystem::path& path);
VectorField read_vector_field(const std::filesystem::path& path);

/// One row per cell: x0,x1[,x2],value. Refuses grids above max_cells.
void write_csv(const std::filesystem::path& path, const ScalarField& f, std::size_t max_cells = 1u << 16);
/// One row per cell with velocity averaged to the center: x0,x1[,x2],v0,v1[,v2].
void write_csv(const std::filesystem::path& path, const VectorField& f, std::size_t max_cells = 1u << 16);

}  // namespace rtspectra
