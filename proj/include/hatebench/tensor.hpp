#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hatebench::numerics {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::RowVectorXd;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;
using VecMap = Eigen::Map<Vec>;
using ConstVecMap = Eigen::Map<const Vec>;

/// Dense row-major array of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(count(shape_), fill) {}

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Views the tensor as rows x (product of trailing dims).
  MatMap mat() { return {data_.data(), rows(), cols()}; }
  ConstMatMap mat() const { return {data_.data(), rows(), cols()}; }
  MatMap mat(std::size_t r, std::size_t c) { return {data_.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)}; }
  ConstMatMap mat(std::size_t r, std::size_t c) const { return {data_.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)}; }
  VecMap vec() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
  ConstVecMap vec() const { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_string() const;

  bool operator==(const Tensor&) const = default;

  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

 private:
  Eigen::Index rows() const { return shape_.empty() ? 1 : static_cast<Eigen::Index>(shape_[0]); }
  Eigen::Index cols() const {
    return shape_.empty() ? 1 : static_cast<Eigen::Index>(data_.size() / std::max<std::size_t>(shape_[0], 1));
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace hatebench::numerics
