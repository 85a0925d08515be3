#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "vstretch/diagnostics.hpp"
#include "vstretch/error.hpp"
#include "vstretch/field_io.hpp"

using namespace vstretch;
namespace fs = std::filesystem;

namespace {

std::string message_of(std::string_view bytes) {
  try {
    decode_field(bytes);
  } catch (const IoError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir() {
  const fs::path d = fs::current_path() / "field_io_out";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("header layout is explicit little endian") {
  const Grid g(16, 2.5);
  RealField f(g);
  f(1, 0) = -1.0;
  const std::string bytes = encode_field(f, FieldKind::Profile);
  REQUIRE(bytes.size() == kFieldHeaderBytes + 8 * g.size());
  CHECK(bytes.substr(0, 4) == "VPF1");
  const auto u8 = [&](std::size_t i) { return static_cast<unsigned>(static_cast<unsigned char>(bytes[i])); };
  CHECK(u8(4) == 16);
  CHECK(u8(5) == 0);
  CHECK(u8(6) == 0);
  CHECK(u8(7) == 0);
  // 2.5 = 0x4004000000000000
  for (int i = 8; i < 14; ++i) CHECK(u8(i) == 0);
  CHECK(u8(15) == 0x40);
  CHECK(u8(14) == 0x04);
  CHECK(u8(16) == 1);
  // value(1, 0) = -1.0 = 0xBFF0000000000000 is the second payload double.
  CHECK(u8(20 + 8 + 7) == 0xBF);
  CHECK(u8(20 + 8 + 6) == 0xF0);
}

TEST_CASE("file round trip is bitwise exact") {
  const Grid g(32, 3.0);
  std::mt19937_64 rng(9);
  RealField f = random_field(g, rng);
  f(0, 0) = -0.0;
  f(1, 0) = 5e-324;
  const fs::path p = scratch_dir() / "random.vpf";
  write_field(p, f, FieldKind::Omega);
  const DecodedField d = read_field_file(p);
  CHECK(d.kind == FieldKind::Omega);
  CHECK(d.values.grid() == g);
  CHECK(std::memcmp(d.values.values().data(), f.values().data(), 8 * g.size()) == 0);
  CHECK(encode_field(d.values, d.kind) == slurp(p));
  CHECK_FALSE(fs::exists(p.string() + ".tmp"));

  const auto v = read_field(p);
  CHECK(std::holds_alternative<RealField>(v));
}

TEST_CASE("mask round trip") {
  const Grid g(16, 8.0);
  const Mask m = rasterize(parse_shape("disk(0, 0, 1)"), g);
  const fs::path p = scratch_dir() / "mask.vpf";
  write_mask(p, m);
  const auto v = read_field(p);
  REQUIRE(std::holds_alternative<Mask>(v));
  const Mask& back = std::get<Mask>(v);
  CHECK(back.cell_count() == m.cell_count());
  CHECK(std::equal(back.indicator().begin(), back.indicator().end(), m.indicator().begin()));
}

TEST_CASE("decode errors") {
  const Grid g(16, 1.0);
  const std::string good = encode_field(RealField(g), FieldKind::Omega);

  CHECK(message_of(good.substr(0, 10)).find("header short") != std::string::npos);
  CHECK(message_of(good.substr(0, good.size() - 1)).find("payload short") != std::string::npos);
  CHECK(message_of(good + std::string(8, '\0')).find("payload length mismatch") != std::string::npos);

  std::string magic = good;
  magic[3] = '2';
  CHECK(message_of(magic).find("bad magic") != std::string::npos);

  std::string odd_n = good;
  odd_n[4] = 15;
  CHECK(message_of(odd_n).find("n not a power of two") != std::string::npos);

  std::string kind = good;
  kind[16] = 7;
  CHECK(message_of(kind).find("unknown field kind") != std::string::npos);

  RealField half(g);
  half(2, 2) = 0.5;
  std::string mask = encode_field(half, FieldKind::Omega);
  mask[16] = 2;
  CHECK(message_of(mask).find("mask payload not boolean") != std::string::npos);
  CHECK_THROWS_AS(encode_field(half, FieldKind::Mask), IoError);
}

TEST_CASE("reading a missing file names the path") {
  CHECK_THROWS_WITH_AS(read_field_file(scratch_dir() / "absent.vpf"), doctest::Contains("absent.vpf"), IoError);
}
