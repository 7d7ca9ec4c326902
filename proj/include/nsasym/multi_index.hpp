#pragma once

#include <array>
#include <compare>
#include <string>
#include <vector>

namespace nsasym {

/// Multi-index alpha = (alpha_1, ..., alpha_n) with n <= 3.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(int dim);
  MultiIndex(std::initializer_list<int> components);

  static MultiIndex unit(int dim, int axis);

  int dim() const { return dim_; }
  int operator[](int axis) const { return c_[axis]; }
  int& operator[](int axis) { return c_[axis]; }

  int order() const { return c_[0] + c_[1] + c_[2]; }
  double factorial() const;

  MultiIndex operator+(const MultiIndex& other) const;
  bool operator==(const MultiIndex&) const = default;
  auto operator<=>(const MultiIndex&) const = default;

  std::vector<int> to_vector() const;
  std::string to_string() const;

private:
  int dim_ = 0;
  std::array<int, 3> c_{0, 0, 0};
};

/// All multi-indices of the given dimension with |alpha| == order, in
/// lexicographically decreasing order of the leading component.
std::vector<MultiIndex> multi_indices(int dim, int order);

/// All multi-indices with |alpha| <= max_order, grouped by increasing order.
std::vector<MultiIndex> multi_indices_up_to(int dim, int max_order);

double factorial(int k);

} // namespace nsasym
