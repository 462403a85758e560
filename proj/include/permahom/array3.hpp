#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace permahom {

/// Dense 3D array, x fastest. All grid fields in the toolkit live in one of
/// these; iteration order in reductions is always (k, j, i) lexicographic so
/// results are bit-reproducible.
class Array3 {
public:
    Array3() = default;
    Array3(int nx, int ny, int nz, double value = 0.0)
        : nx_(nx), ny_(ny), nz_(nz),
          data_(static_cast<std::size_t>(nx) * ny * nz, value) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    std::size_t size() const { return data_.size(); }

    std::size_t idx(int i, int j, int k) const {
        assert(i >= 0 && i < nx_ && j >= 0 && j < ny_ && k >= 0 && k < nz_);
        return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
    }

    double& operator()(int i, int j, int k) { return data_[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[idx(i, j, k)]; }

    double& operator[](std::size_t n) { return data_[n]; }
    double operator[](std::size_t n) const { return data_[n]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Array3& o) const {
        return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_;
    }

private:
    int nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<double> data_;
};

/// Dense 2D array, x fastest (Darcy fields, column averages).
class Array2 {
public:
    Array2() = default;
    Array2(int nx, int ny, double value = 0.0)
        : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, value) {}

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }

    std::size_t idx(int i, int j) const {
        assert(i >= 0 && i < nx_ && j >= 0 && j < ny_);
        return static_cast<std::size_t>(j) * nx_ + i;
    }

    double& operator()(int i, int j) { return data_[idx(i, j)]; }
    double operator()(int i, int j) const { return data_[idx(i, j)]; }

    double& operator[](std::size_t n) { return data_[n]; }
    double operator[](std::size_t n) const { return data_[n]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Array2& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

private:
    int nx_ = 0, ny_ = 0;
    std::vector<double> data_;
};

}  // namespace permahom
