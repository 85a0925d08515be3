#pragma once

// Binary field files ("VPF1"). All integers and floats little-endian.
//
//   offset  size  content
//   0       4     magic "VPF1"
//   4       4     n, uint32
//   8       8     box_length, IEEE-754 binary64
//   16      4     kind, uint32: 0 omega, 1 profile, 2 mask
//   20      8 n^2 values, binary64, row-major (x2 row, x1 contiguous);
//                 masks store 0.0 / 1.0
//
// Writers go through a temporary file in the target directory followed by a
// rename, so a failed write never leaves a partial file behind.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vstretch/geometry.hpp"
#include "vstretch/grid.hpp"

namespace vstretch {

enum class FieldKind : std::uint32_t { Omega = 0, Profile = 1, Mask = 2 };

std::string to_string(FieldKind kind);

inline constexpr std::size_t kFieldHeaderBytes = 20;

std::string encode_field(const RealField& field, FieldKind kind);
std::string encode_mask(const Mask& mask);

struct DecodedField {
  FieldKind kind;
  RealField values;
};

/// Throws IoError: "bad magic", "n not a power of two", "header short",
/// "payload short", "payload length mismatch", "unknown field kind",
/// "mask payload not boolean".
DecodedField decode_field(std::string_view bytes);

void write_field(const std::filesystem::path& path, const RealField& field, FieldKind kind);
void write_mask(const std::filesystem::path& path, const Mask& mask);

/// Omega/profile files yield a RealField, mask files a Mask.
std::variant<RealField, Mask> read_field(const std::filesystem::path& path);
DecodedField read_field_file(const std::filesystem::path& path);

/// Temp-then-rename text/binary writer used for every artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace vstretch
