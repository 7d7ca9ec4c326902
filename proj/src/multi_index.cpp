#include "nsasym/multi_index.hpp"

#include "nsasym/errors.hpp"

namespace nsasym {

MultiIndex::MultiIndex(int dim) : dim_(dim) {
  if (dim < 1 || dim > 3) throw InvalidArgument("multi-index dimension must be 1, 2 or 3");
}

MultiIndex::MultiIndex(std::initializer_list<int> components) : dim_(static_cast<int>(components.size())) {
  if (dim_ < 1 || dim_ > 3) throw InvalidArgument("multi-index dimension must be 1, 2 or 3");
  int a = 0;
  for (int v : components) {
    if (v < 0) throw InvalidArgument("multi-index components must be non-negative");
    c_[a++] = v;
  }
}

MultiIndex MultiIndex::unit(int dim, int axis) {
  MultiIndex e(dim);
  if (axis < 0 || axis >= dim) throw InvalidArgument("unit multi-index axis out of range");
  e.c_[axis] = 1;
  return e;
}

double MultiIndex::factorial() const {
  return nsasym::factorial(c_[0]) * nsasym::factorial(c_[1]) * nsasym::factorial(c_[2]);
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (dim_ != other.dim_) throw InvalidArgument("adding multi-indices of different dimension");
  MultiIndex out(*this);
  for (int a = 0; a < 3; ++a) out.c_[a] += other.c_[a];
  return out;
}

std::vector<int> MultiIndex::to_vector() const { return std::vector<int>(c_.begin(), c_.begin() + dim_); }

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (int a = 0; a < dim_; ++a) {
    if (a) s += ",";
    s += std::to_string(c_[a]);
  }
  return s + ")";
}

std::vector<MultiIndex> multi_indices(int dim, int order) {
  std::vector<MultiIndex> out;
  if (order < 0) return out;
  if (dim == 1) {
    out.push_back(MultiIndex{order});
  } else if (dim == 2) {
    for (int a = order; a >= 0; --a) out.push_back(MultiIndex{a, order - a});
  } else if (dim == 3) {
    for (int a = order; a >= 0; --a)
      for (int b = order - a; b >= 0; --b) out.push_back(MultiIndex{a, b, order - a - b});
  } else {
    throw InvalidArgument("multi-index dimension must be 1, 2 or 3");
  }
  return out;
}

std::vector<MultiIndex> multi_indices_up_to(int dim, int max_order) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= max_order; ++k) {
    auto level = multi_indices(dim, k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

double factorial(int k) {
  if (k < 0) throw InvalidArgument("factorial of a negative integer");
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

} // namespace nsasym
