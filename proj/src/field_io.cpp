#include "vstretch/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "vstretch/error.hpp"

namespace vstretch {

namespace {

constexpr char kMagic[4] = {'V', 'P', 'F', '1'};

template <class U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <class U>
U get_le(std::string_view bytes, std::size_t offset) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    v |= static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

void put_double(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
double get_double(std::string_view bytes, std::size_t offset) {
  return std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
}

std::string encode_values(const Grid& g, std::span<const double> values, FieldKind kind) {
  std::string out;
  out.reserve(kFieldHeaderBytes + values.size() * 8);
  out.append(kMagic, 4);
  put_le(out, static_cast<std::uint32_t>(g.n()));
  put_double(out, g.box_length());
  put_le(out, static_cast<std::uint32_t>(kind));
  for (double v : values) put_double(out, v);
  return out;
}

}  // namespace

std::string to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::Omega:
      return "omega";
    case FieldKind::Profile:
      return "profile";
    case FieldKind::Mask:
      return "mask";
  }
  return "unknown";
}

std::string encode_field(const RealField& field, FieldKind kind) {
  if (kind == FieldKind::Mask) {
    for (double v : field.values())
      if (v != 0.0 && v != 1.0) throw IoError("mask payload not boolean");
  }
  return encode_values(field.grid(), field.values(), kind);
}

std::string encode_mask(const Mask& mask) {
  const RealField f = mask.as_field();
  return encode_values(f.grid(), f.values(), FieldKind::Mask);
}

DecodedField decode_field(std::string_view bytes) {
  if (bytes.size() < kFieldHeaderBytes) throw IoError("header short");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("bad magic");
  const std::uint32_t n = get_le<std::uint32_t>(bytes, 4);
  const double box_length = get_double(bytes, 8);
  const std::uint32_t kind_tag = get_le<std::uint32_t>(bytes, 16);
  if (n == 0 || (n & (n - 1)) != 0) throw IoError("n not a power of two");
  if (n < 16 || n > (1u << 15)) throw IoError("n out of range");
  if (kind_tag > 2) throw IoError("unknown field kind");
  const std::size_t payload = static_cast<std::size_t>(n) * n * 8;
  const std::size_t have = bytes.size() - kFieldHeaderBytes;
  if (have < payload) throw IoError("payload short");
  if (have > payload) throw IoError("payload length mismatch: n does not match payload length");

  Grid grid(static_cast<int>(n), box_length);
  RealField f(grid);
  auto values = f.values();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_double(bytes, kFieldHeaderBytes + 8 * i);
  const auto kind = static_cast<FieldKind>(kind_tag);
  if (kind == FieldKind::Mask) {
    for (double v : values)
      if (v != 0.0 && v != 1.0) throw IoError("mask payload not boolean");
  }
  return DecodedField{kind, std::move(f)};
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string());
  }
}

void write_field(const std::filesystem::path& path, const RealField& field, FieldKind kind) {
  write_file_atomic(path, encode_field(field, kind));
}

void write_mask(const std::filesystem::path& path, const Mask& mask) { write_file_atomic(path, encode_mask(mask)); }

DecodedField read_field_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_field(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::variant<RealField, Mask> read_field(const std::filesystem::path& path) {
  DecodedField d = read_field_file(path);
  if (d.kind != FieldKind::Mask) return std::move(d.values);
  std::vector<std::uint8_t> ind(d.values.size());
  for (std::size_t i = 0; i < ind.size(); ++i) ind[i] = d.values.values()[i] != 0.0 ? 1 : 0;
  return Mask::from_indicator(d.values.grid(), std::move(ind));
}

}  // namespace vstretch
