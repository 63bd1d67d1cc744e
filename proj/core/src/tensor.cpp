#include "gtqa/tensor.hpp"

#include <algorithm>
#include <set>

#include "gtqa/errors.hpp"
#include "gtqa/linalg.hpp"

namespace gtqa {

namespace {

std::int64_t total_size(const std::vector<Axis>& axes) {
  std::int64_t n = 1;
  for (const Axis& ax : axes) {
    if (ax.dim <= 0) throw Error(ErrorKind::Shape, "axis dimension must be positive");
    n *= ax.dim;
  }
  return n;
}

void check_unique_labels(const std::vector<Axis>& axes) {
  std::set<std::string> seen;
  for (const Axis& ax : axes)
    if (!seen.insert(ax.label).second)
      throw Error(ErrorKind::Label, "duplicate axis label '" + ax.label + "'");
}

}  // namespace

DenseTensor::DenseTensor(std::vector<Axis> axes) : axes_(std::move(axes)) {
  check_unique_labels(axes_);
  data_.assign(total_size(axes_), cdouble(0.0, 0.0));
}

DenseTensor::DenseTensor(std::vector<Axis> axes, std::vector<cdouble> data)
    : axes_(std::move(axes)), data_(std::move(data)) {
  check_unique_labels(axes_);
  if (static_cast<std::int64_t>(data_.size()) != total_size(axes_))
    throw Error(ErrorKind::Shape, "data length does not match axis dimensions");
}

DenseTensor DenseTensor::scalar(cdouble value) {
  DenseTensor t;
  t.data_ = {value};
  return t;
}

int DenseTensor::axis_index(const std::string& label) const {
  for (int i = 0; i < rank(); ++i)
    if (axes_[i].label == label) return i;
  throw Error(ErrorKind::Label, "no axis labeled '" + label + "'");
}

bool DenseTensor::has_axis(const std::string& label) const {
  for (const Axis& ax : axes_)
    if (ax.label == label) return true;
  return false;
}

std::vector<std::int64_t> DenseTensor::strides() const {
  std::vector<std::int64_t> s(axes_.size());
  std::int64_t acc = 1;
  for (int i = rank() - 1; i >= 0; --i) {
    s[i] = acc;
    acc *= axes_[i].dim;
  }
  return s;
}

cdouble DenseTensor::at(const std::vector<int>& indices) const {
  auto s = strides();
  std::int64_t idx = 0;
  for (size_t i = 0; i < indices.size(); ++i) idx += indices[i] * s[i];
  return data_[idx];
}

void DenseTensor::set(const std::vector<int>& indices, cdouble value) {
  auto s = strides();
  std::int64_t idx = 0;
  for (size_t i = 0; i < indices.size(); ++i) idx += indices[i] * s[i];
  data_[idx] = value;
}

void DenseTensor::relabel(const std::string& from, const std::string& to) {
  int i = axis_index(from);
  if (from == to) return;
  if (has_axis(to)) throw Error(ErrorKind::Label, "label '" + to + "' already present");
  axes_[i].label = to;
}

DenseTensor DenseTensor::relabeled(const std::string& from, const std::string& to) const {
  DenseTensor t = *this;
  t.relabel(from, to);
  return t;
}

DenseTensor DenseTensor::conjugate() const {
  DenseTensor t = *this;
  for (cdouble& v : t.data_) v = std::conj(v);
  return t;
}

DenseTensor DenseTensor::permuted(const std::vector<std::string>& label_order) const {
  if (static_cast<int>(label_order.size()) != rank())
    throw Error(ErrorKind::Label, "permutation must mention every axis exactly once");
  std::vector<int> source(rank());
  for (int i = 0; i < rank(); ++i) source[i] = axis_index(label_order[i]);
  // Identity permutation: done.
  bool identity = true;
  for (int i = 0; i < rank(); ++i)
    if (source[i] != i) identity = false;
  if (identity) return *this;

  std::vector<Axis> new_axes(rank());
  for (int i = 0; i < rank(); ++i) new_axes[i] = axes_[source[i]];
  check_unique_labels(new_axes);

  DenseTensor out(new_axes);
  auto in_strides = strides();
  auto out_strides = out.strides();
  // out position contribution of each input axis
  std::vector<std::int64_t> out_stride_of_input(rank());
  for (int i = 0; i < rank(); ++i) out_stride_of_input[source[i]] = out_strides[i];

  const int r = rank();
  std::vector<int> coord(r, 0);
  std::int64_t out_idx = 0;
  const std::int64_t n = size();
  for (std::int64_t in_idx = 0; in_idx < n; ++in_idx) {
    out.data_[out_idx] = data_[in_idx];
    // increment row-major coordinate and maintain out_idx
    for (int ax = r - 1; ax >= 0; --ax) {
      coord[ax]++;
      out_idx += out_stride_of_input[ax];
      if (coord[ax] < axes_[ax].dim) break;
      out_idx -= static_cast<std::int64_t>(coord[ax]) * out_stride_of_input[ax];
      coord[ax] = 0;
    }
  }
  return out;
}

void DenseTensor::scale_axis(const std::string& label, const Eigen::VectorXd& weights) {
  int ax = axis_index(label);
  if (weights.size() != axes_[ax].dim)
    throw Error(ErrorKind::Shape, "weight vector length does not match axis dimension");
  auto s = strides();
  const std::int64_t stride = s[ax];
  const int dim = axes_[ax].dim;
  const std::int64_t n = size();
  const std::int64_t block = stride * dim;
  for (std::int64_t base = 0; base < n; base += block)
    for (int j = 0; j < dim; ++j) {
      const double w = weights(j);
      cdouble* p = data_.data() + base + j * stride;
      for (std::int64_t k = 0; k < stride; ++k) p[k] *= w;
    }
}

DenseTensor DenseTensor::sliced_axis(const std::string& label, int keep) const {
  int ax = axis_index(label);
  const int dim = axes_[ax].dim;
  if (keep <= 0) throw Error(ErrorKind::Shape, "slice size must be positive");
  if (keep >= dim) return *this;
  std::vector<Axis> new_axes = axes_;
  new_axes[ax].dim = keep;
  DenseTensor out(new_axes);
  auto s = strides();
  const std::int64_t stride = s[ax];
  const std::int64_t in_block = stride * dim;
  const std::int64_t out_block = stride * keep;
  const std::int64_t n = size();
  std::int64_t out_base = 0;
  for (std::int64_t base = 0; base < n; base += in_block, out_base += out_block)
    std::copy(data_.begin() + base, data_.begin() + base + out_block,
              out.data_.begin() + out_base);
  return out;
}

double DenseTensor::norm() const {
  double acc = 0;
  for (const cdouble& v : data_) acc += std::norm(v);
  return std::sqrt(acc);
}

DenseTensor contract(const DenseTensor& t1, const DenseTensor& t2,
                     const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<int> c1, c2;
  c1.reserve(pairs.size());
  c2.reserve(pairs.size());
  for (const auto& [l1, l2] : pairs) {
    int i1 = t1.axis_index(l1);
    int i2 = t2.axis_index(l2);
    if (t1.axis(i1).dim != t2.axis(i2).dim)
      throw Error(ErrorKind::Shape, "contracted axes '" + l1 + "'/'" + l2 + "' differ in dimension");
    c1.push_back(i1);
    c2.push_back(i2);
  }
  {
    std::set<int> u1(c1.begin(), c1.end()), u2(c2.begin(), c2.end());
    if (u1.size() != pairs.size() || u2.size() != pairs.size())
      throw Error(ErrorKind::Label, "an axis may be contracted at most once");
  }

  std::vector<std::string> order1, order2;
  std::vector<Axis> out_axes;
  std::int64_t free1 = 1, free2 = 1, contracted = 1;
  for (int i = 0; i < t1.rank(); ++i)
    if (std::find(c1.begin(), c1.end(), i) == c1.end()) {
      order1.push_back(t1.axis(i).label);
      out_axes.push_back(t1.axis(i));
      free1 *= t1.axis(i).dim;
    }
  for (int i : c1) {
    order1.push_back(t1.axis(i).label);
    contracted *= t1.axis(i).dim;
  }
  for (int i : c2) order2.push_back(t2.axis(i).label);
  for (int i = 0; i < t2.rank(); ++i)
    if (std::find(c2.begin(), c2.end(), i) == c2.end()) {
      order2.push_back(t2.axis(i).label);
      out_axes.push_back(t2.axis(i));
      free2 *= t2.axis(i).dim;
    }
  check_unique_labels(out_axes);

  DenseTensor a = t1.permuted(order1);
  DenseTensor b = t2.permuted(order2);

  using RowMatrix = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMatrix> ma(a.data().data(), free1, contracted);
  Eigen::Map<const RowMatrix> mb(b.data().data(), contracted, free2);

  DenseTensor out(out_axes);
  Eigen::Map<RowMatrix> mo(out.data().data(), free1, free2);
  mo.noalias() = ma * mb;
  return out;
}

SvdSplit svd_split(const DenseTensor& t, const std::vector<std::string>& left_labels,
                   const std::string& bond_label) {
  if (left_labels.empty() || static_cast<int>(left_labels.size()) >= t.rank())
    throw Error(ErrorKind::Label, "left label set must be a non-empty proper subset");
  std::set<std::string> left_set(left_labels.begin(), left_labels.end());
  if (left_set.size() != left_labels.size())
    throw Error(ErrorKind::Label, "duplicate label in left set");

  std::vector<std::string> order(left_labels.begin(), left_labels.end());
  std::vector<Axis> left_axes, right_axes;
  std::int64_t rows = 1, cols = 1;
  for (const std::string& l : left_labels) {
    const Axis& ax = t.axis(t.axis_index(l));
    left_axes.push_back(ax);
    rows *= ax.dim;
  }
  for (int i = 0; i < t.rank(); ++i)
    if (!left_set.count(t.axis(i).label)) {
      order.push_back(t.axis(i).label);
      right_axes.push_back(t.axis(i));
      cols *= t.axis(i).dim;
    }

  DenseTensor flat = t.permuted(order);
  using RowMatrix = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMatrix> m(flat.data().data(), rows, cols);

  MatrixSvd svd_result = svd(m);
  const int r = static_cast<int>(svd_result.s.size());

  std::vector<Axis> u_axes = left_axes;
  u_axes.push_back({bond_label, r});
  DenseTensor u(u_axes);
  Eigen::Map<RowMatrix>(u.data().data(), rows, r) = svd_result.u;

  std::vector<Axis> vh_axes{{bond_label, r}};
  for (const Axis& ax : right_axes) vh_axes.push_back(ax);
  DenseTensor vh(vh_axes);
  Eigen::Map<RowMatrix>(vh.data().data(), r, cols) = svd_result.vh;

  return {std::move(u), std::move(svd_result.s), std::move(vh)};
}

}  // namespace gtqa
