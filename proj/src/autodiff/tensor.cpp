#include "invbayes/autodiff/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace invbayes::ad {

namespace {

std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_dims(const Shape& shape) {
    if (shape.empty()) {
        throw ShapeError("tensor shape must have at least one dimension");
    }
    for (auto d : shape) {
        if (d == 0) {
            throw ShapeError("tensor dimensions must be positive, got " + to_string(shape));
        }
    }
}

}  // namespace

std::string to_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_dims(shape_);
    if (data_.size() != element_count(shape_)) {
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         to_string(shape_));
    }
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_dims(shape_);
    data_.assign(element_count(shape_), fill);
}

Tensor Tensor::row(std::vector<double> values) {
    const auto n = values.size();
    return Tensor({1, n}, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
    const auto n = values.size();
    return Tensor({n, 1}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

std::size_t Tensor::rows() const {
    return shape_.size() == 2 ? shape_[0] : 1;
}

std::size_t Tensor::cols() const {
    return shape_.size() == 2 ? shape_[1] : data_.size();
}

double Tensor::item() const {
    if (data_.size() != 1) {
        throw ShapeError("item() on tensor of shape " + to_string(shape_));
    }
    return data_[0];
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace invbayes::ad
