#pragma once

#include <string>
#include <vector>

#include "nsasym/grid.hpp"

namespace nsasym {

/// Binary field container: "NSAF", u32 version, u32 dim, u32 N, f64 L,
/// u32 component count, then each component as N^dim f64 values in
/// row-major order. All numbers little-endian.
inline constexpr unsigned kNsafVersion = 1;

struct NsafContents {
  Grid grid;
  std::vector<Field> components;
};

void write_nsaf(const std::string& path, const std::vector<Field>& components);
NsafContents read_nsaf(const std::string& path);

} // namespace nsasym
