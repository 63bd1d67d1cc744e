// Dense complex tensors with labeled axes, pairwise contraction and SVD
// splitting. Data is stored row-major over the axis list.
#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gtqa {

using cdouble = std::complex<double>;

struct Axis {
  std::string label;
  int dim = 1;
  friend bool operator==(const Axis&, const Axis&) = default;
};

class DenseTensor {
 public:
  DenseTensor() = default;
  // Zero-initialized tensor with the given axes.
  explicit DenseTensor(std::vector<Axis> axes);
  DenseTensor(std::vector<Axis> axes, std::vector<cdouble> data);

  static DenseTensor scalar(cdouble value);

  int rank() const { return static_cast<int>(axes_.size()); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(int i) const { return axes_[i]; }
  // Position of a label; Label error if absent.
  int axis_index(const std::string& label) const;
  bool has_axis(const std::string& label) const;
  int dim(const std::string& label) const { return axes_[axis_index(label)].dim; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  const std::vector<cdouble>& data() const { return data_; }
  std::vector<cdouble>& data() { return data_; }

  cdouble at(const std::vector<int>& indices) const;
  void set(const std::vector<int>& indices, cdouble value);

  // Axis strides for row-major layout, innermost last.
  std::vector<std::int64_t> strides() const;

  void relabel(const std::string& from, const std::string& to);
  DenseTensor relabeled(const std::string& from, const std::string& to) const;

  DenseTensor conjugate() const;
  // Reorders the axes to the given label order (a permutation of all labels).
  DenseTensor permuted(const std::vector<std::string>& label_order) const;

  // Multiplies slices along `label` by weights[j]; weights.size() must match.
  void scale_axis(const std::string& label, const Eigen::VectorXd& weights);
  // Keeps the first `keep` indices along `label`.
  DenseTensor sliced_axis(const std::string& label, int keep) const;

  double norm() const;  // Frobenius

 private:
  std::vector<Axis> axes_;
  std::vector<cdouble> data_;
};

// Contracts the paired axes (t1 label, t2 label). Remaining axes keep their
// order, t1's first. Shape error on dimension mismatch, Label error on
// unknown labels or on label collisions among the surviving axes.
DenseTensor contract(const DenseTensor& t1, const DenseTensor& t2,
                     const std::vector<std::pair<std::string, std::string>>& pairs);

struct SvdSplit {
  DenseTensor u;        // left axes + bond axis
  Eigen::VectorXd s;    // descending, non-negative
  DenseTensor vh;       // bond axis + right axes
};

// SVD of the tensor flattened into (left labels) x (remaining labels).
// Singular vectors carry a deterministic phase: the largest-magnitude entry
// of each U column is real positive.
SvdSplit svd_split(const DenseTensor& t, const std::vector<std::string>& left_labels,
                   const std::string& bond_label);

}  // namespace gtqa
