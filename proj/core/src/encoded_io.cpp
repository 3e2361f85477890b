#include "botstack/encoded_io.hpp"

#include <fstream>
#include <iterator>

#include "botstack/binary_io.hpp"

namespace botstack {

namespace binio {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace binio

void write_encoded(const std::filesystem::path& path, const Tensor& matrix) {
  binio::Writer w;
  w.text("BSEM");
  w.u32(kEncodedVersion);
  w.u64(matrix.rows());
  w.u64(matrix.cols());
  for (double v : matrix.data()) w.f64(v);
  binio::write_file(path.string(), w.buffer());
}

Tensor read_encoded(const std::filesystem::path& path) {
  const std::string data = binio::read_file(path.string());
  binio::Reader r(data);
  if (r.text(4) != "BSEM") throw IntegrityError(path.string() + " is not an encoded matrix file");
  const std::uint32_t version = r.u32();
  if (version != kEncodedVersion) throw VersionError("unsupported encoded matrix version " + std::to_string(version));
  const std::uint64_t n = r.u64(), f = r.u64();
  if (f != 0 && n > r.remaining() / 8 / f) throw IntegrityError("file is truncated");
  if (r.remaining() != n * f * 8) throw IntegrityError("unexpected trailing bytes in " + path.string());
  std::vector<double> values(n * f);
  for (double& v : values) v = r.f64();
  return Tensor({n, f}, std::move(values));
}

}  // namespace botstack
