#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace theta {

/// Mode sizes (n_1, ..., n_d) of an order-d tensor, d >= 2.
class Dims {
public:
    Dims() = default;
    explicit Dims(std::vector<int> sizes);
    Dims(std::initializer_list<int> sizes) : Dims(std::vector<int>(sizes)) {}

    [[nodiscard]] std::size_t order() const noexcept { return sizes_.size(); }
    /// Size of mode `mode` (1-based, as in the index notation used throughout).
    [[nodiscard]] int extent(std::size_t mode) const { return sizes_.at(mode - 1); }
    [[nodiscard]] const std::vector<int>& sizes() const noexcept { return sizes_; }
    /// Number of entries, prod n_i.
    [[nodiscard]] std::size_t numel() const noexcept { return numel_; }

    [[nodiscard]] std::string to_string() const; // "2x2x3"
    /// Parses "2,2,3" or "2x2x3".
    static Dims parse(const std::string& text);

    friend bool operator==(const Dims&, const Dims&) = default;

private:
    std::vector<int> sizes_;
    std::size_t numel_ = 0;
};

/// 1-based multi-index (alpha_1, ..., alpha_d).
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {}
    MultiIndex(std::initializer_list<int> entries) : entries_(entries) {}

    /// Parses compact digit strings such as "1212" (single-digit indices only).
    static MultiIndex from_digits(const std::string& digits);

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    int& operator[](std::size_t i) { return entries_[i]; }
    int operator[](std::size_t i) const { return entries_[i]; }
    [[nodiscard]] const std::vector<int>& entries() const noexcept { return entries_; }
    [[nodiscard]] auto begin() const noexcept { return entries_.begin(); }
    [[nodiscard]] auto end() const noexcept { return entries_.end(); }

    [[nodiscard]] bool valid_for(const Dims& dims) const;
    /// Componentwise <=.
    [[nodiscard]] bool precedes(const MultiIndex& other) const;
    [[nodiscard]] std::string to_string() const; // "[1,2,1]"

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<int> entries_;
};

/// Position of `index` in vectorization order (last index fastest), 0-based.
std::size_t pack(const Dims& dims, const MultiIndex& index);
MultiIndex unpack(const Dims& dims, std::size_t position);

/// (a meet b, a join b): componentwise min and max.
std::pair<MultiIndex, MultiIndex> meet_join(const MultiIndex& a, const MultiIndex& b);

/// Dense real tensor; values stored in vectorization order.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Dims dims); // zero tensor
    DenseTensor(Dims dims, std::vector<double> values);

    [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::vector<double>& values() noexcept { return values_; }

    [[nodiscard]] double at(const MultiIndex& index) const { return values_[pack(dims_, index)]; }
    double& at(const MultiIndex& index) { return values_[pack(dims_, index)]; }

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator*=(double factor);
    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator*(double factor, DenseTensor a) { return a *= factor; }

    [[nodiscard]] Eigen::Map<const Eigen::VectorXd> as_vector() const {
        return {values_.data(), static_cast<Eigen::Index>(values_.size())};
    }

private:
    Dims dims_;
    std::vector<double> values_;
};

/// Ordered set of 1-based modes.
using ModeSet = std::vector<int>;

/// S-matricization X^S; rows packed lexicographically over `row_modes` in listed
/// order, columns over the complement in ascending order.
struct Matricization {
    ModeSet row_modes;
    ModeSet col_modes;
    Eigen::MatrixXd matrix;
};

Matricization matricize(const DenseTensor& tensor, const ModeSet& row_modes);

/// Outer product of factor vectors, one per mode.
DenseTensor outer_product(const std::vector<std::vector<double>>& factors);

/// Sum of `rank` rank-one terms with i.i.d. N(0,1) factor entries.
DenseTensor random_low_rank(const Dims& dims, int rank, std::uint64_t seed);

/// Rank-one tensor with unit-norm factors (hence unit Frobenius norm).
DenseTensor random_unit_rank_one(const Dims& dims, std::uint64_t seed);

double frobenius(const DenseTensor& tensor);

Eigen::VectorXd singular_values(const Eigen::MatrixXd& matrix);
/// Sum of singular values.
double svd_nuclear(const Eigen::MatrixXd& matrix);

nlohmann::json tensor_to_json(const DenseTensor& tensor);
DenseTensor tensor_from_json(const nlohmann::json& doc);
DenseTensor read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const std::filesystem::path& path, const DenseTensor& tensor);

} // namespace theta
