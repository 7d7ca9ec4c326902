#include "nsasym/nsaf.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "nsasym/errors.hpp"

namespace nsasym {

namespace {

static_assert(std::endian::native == std::endian::little, "NSAF I/O assumes a little-endian host");

template <class T> void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T> T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError(path + ": truncated NSAF header");
  return v;
}

} // namespace

void write_nsaf(const std::string& path, const std::vector<Field>& components) {
  if (components.empty()) throw InvalidArgument("NSAF file needs at least one component");
  const Grid& g = components.front().grid;
  for (const auto& c : components)
    if (!(c.grid == g)) throw InvalidArgument("NSAF components live on different grids");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write("NSAF", 4);
  put<std::uint32_t>(out, kNsafVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  put<double>(out, g.half_length());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(components.size()));
  for (const auto& c : components)
    out.write(reinterpret_cast<const char*>(c.values.data()),
              static_cast<std::streamsize>(c.values.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path);
}

NsafContents read_nsaf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "NSAF", 4) != 0) throw IoError(path + ": not an NSAF file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kNsafVersion) throw IoError(path + ": unsupported NSAF version " + std::to_string(version));
  const auto dim = get<std::uint32_t>(in, path);
  const auto n = get<std::uint32_t>(in, path);
  const auto half_length = get<double>(in, path);
  const auto count = get<std::uint32_t>(in, path);
  if (dim < 1 || dim > 3 || n < 8 || n > 65536 || count == 0 || count > 16)
    throw IoError(path + ": implausible NSAF header");
  Grid g(static_cast<int>(dim), static_cast<int>(n), half_length);
  NsafContents result{g, {}};
  for (std::uint32_t c = 0; c < count; ++c) {
    Field f(g);
    if (!in.read(reinterpret_cast<char*>(f.values.data()),
                 static_cast<std::streamsize>(f.values.size() * sizeof(double))))
      throw IoError(path + ": truncated NSAF data");
    result.components.push_back(std::move(f));
  }
  return result;
}

} // namespace nsasym
