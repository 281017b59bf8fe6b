#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace invbayes::ad {

using Shape = std::vector<std::size_t>;

/// Raised when operand shapes are incompatible for an op.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an op produces NaN or Inf.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string to_string(const Shape& shape);

/**
 * Dense row-major tensor of doubles.
 *
 * Most of the library works with rank-2 tensors laid out as [rows x cols];
 * a batch of records is always one record per row.
 */
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> data);
    explicit Tensor(Shape shape, double fill = 0.0);

    static Tensor scalar(double value) { return Tensor({1}, {value}); }
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
        return Tensor({rows, cols}, std::move(data));
    }
    static Tensor row(std::vector<double> values);
    static Tensor column(std::vector<double> values);
    static Tensor identity(std::size_t n);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::size_t rank() const { return shape_.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

    /// Single element of a one-element tensor.
    double item() const;

    bool all_finite() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Parameters, gradients and moment estimates keyed by name; ordered so that
/// iteration (and therefore every reduction over parameters) is deterministic.
using NamedTensors = std::map<std::string, Tensor, std::less<>>;

}  // namespace invbayes::ad
