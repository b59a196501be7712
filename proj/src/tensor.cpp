#include "theta/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "theta/errors.hpp"
#include "theta/rng.hpp"

namespace theta {

Dims::Dims(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) {
        throw InputError("tensor order must be at least 2");
    }
    numel_ = 1;
    for (int n : sizes_) {
        if (n < 1) {
            throw InputError("every mode size must be positive");
        }
        numel_ *= static_cast<std::size_t>(n);
    }
}

std::string Dims::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (i > 0) {
            out += 'x';
        }
        out += std::to_string(sizes_[i]);
    }
    return out;
}

Dims Dims::parse(const std::string& text) {
    std::vector<int> sizes;
    std::string token;
    auto flush = [&] {
        if (token.empty()) {
            throw InputError("malformed dims '" + text + "'");
        }
        try {
            sizes.push_back(std::stoi(token));
        } catch (const std::exception&) {
            throw InputError("malformed dims '" + text + "'");
        }
        token.clear();
    };
    for (char ch : text) {
        if (ch == ',' || ch == 'x' || ch == 'X') {
            flush();
        } else if (ch != ' ') {
            token += ch;
        }
    }
    flush();
    return Dims(std::move(sizes));
}

MultiIndex MultiIndex::from_digits(const std::string& digits) {
    std::vector<int> entries;
    for (char ch : digits) {
        if (ch < '1' || ch > '9') {
            throw InputError("multi-index digit string must contain only 1-9: '" + digits + "'");
        }
        entries.push_back(ch - '0');
    }
    return MultiIndex(std::move(entries));
}

bool MultiIndex::valid_for(const Dims& dims) const {
    if (entries_.size() != dims.order()) {
        return false;
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i] < 1 || entries_[i] > dims.sizes()[i]) {
            return false;
        }
    }
    return true;
}

bool MultiIndex::precedes(const MultiIndex& other) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i] > other.entries_[i]) {
            return false;
        }
    }
    return true;
}

std::string MultiIndex::to_string() const {
    std::string out = "[";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += std::to_string(entries_[i]);
    }
    return out + "]";
}

std::size_t pack(const Dims& dims, const MultiIndex& index) {
    if (!index.valid_for(dims)) {
        throw InputError("multi-index " + index.to_string() + " out of range for " + dims.to_string());
    }
    std::size_t position = 0;
    for (std::size_t i = 0; i < dims.order(); ++i) {
        position = position * static_cast<std::size_t>(dims.sizes()[i]) + static_cast<std::size_t>(index[i] - 1);
    }
    return position;
}

MultiIndex unpack(const Dims& dims, std::size_t position) {
    if (position >= dims.numel()) {
        throw InputError("linear position out of range");
    }
    std::vector<int> entries(dims.order());
    for (std::size_t i = dims.order(); i-- > 0;) {
        const auto n = static_cast<std::size_t>(dims.sizes()[i]);
        entries[i] = static_cast<int>(position % n) + 1;
        position /= n;
    }
    return MultiIndex(std::move(entries));
}

std::pair<MultiIndex, MultiIndex> meet_join(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) {
        throw InputError("meet/join of multi-indices with different lengths");
    }
    std::vector<int> lo(a.size());
    std::vector<int> hi(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        lo[i] = std::min(a[i], b[i]);
        hi[i] = std::max(a[i], b[i]);
    }
    return {MultiIndex(std::move(lo)), MultiIndex(std::move(hi))};
}

DenseTensor::DenseTensor(Dims dims) : dims_(std::move(dims)), values_(dims_.numel(), 0.0) {}

DenseTensor::DenseTensor(Dims dims, std::vector<double> values) : dims_(std::move(dims)), values_(std::move(values)) {
    if (values_.size() != dims_.numel()) {
        throw InputError("tensor value count " + std::to_string(values_.size()) + " does not match dims " +
                         dims_.to_string());
    }
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (!(dims_ == other.dims_)) {
        throw InputError("tensor dimension mismatch in addition");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] += other.values_[i];
    }
    return *this;
}

DenseTensor& DenseTensor::operator*=(double factor) {
    for (double& v : values_) {
        v *= factor;
    }
    return *this;
}

namespace {

// Packs the coordinates of `index` selected by `modes` (in listed order, last fastest).
std::size_t pack_modes(const Dims& dims, const MultiIndex& index, const ModeSet& modes) {
    std::size_t position = 0;
    for (int mode : modes) {
        position = position * static_cast<std::size_t>(dims.extent(static_cast<std::size_t>(mode))) +
                   static_cast<std::size_t>(index[static_cast<std::size_t>(mode - 1)] - 1);
    }
    return position;
}

} // namespace

Matricization matricize(const DenseTensor& tensor, const ModeSet& row_modes) {
    const Dims& dims = tensor.dims();
    const auto d = static_cast<int>(dims.order());
    if (row_modes.empty()) {
        throw InputError("matricization needs at least one row mode");
    }
    std::vector<bool> used(static_cast<std::size_t>(d) + 1, false);
    for (int mode : row_modes) {
        if (mode < 1 || mode > d) {
            throw InputError("matricization mode " + std::to_string(mode) + " out of range");
        }
        if (used[static_cast<std::size_t>(mode)]) {
            throw InputError("matricization mode " + std::to_string(mode) + " repeated");
        }
        used[static_cast<std::size_t>(mode)] = true;
    }
    Matricization out;
    out.row_modes = row_modes;
    std::size_t rows = 1;
    for (int mode : row_modes) {
        rows *= static_cast<std::size_t>(dims.extent(static_cast<std::size_t>(mode)));
    }
    for (int mode = 1; mode <= d; ++mode) {
        if (!used[static_cast<std::size_t>(mode)]) {
            out.col_modes.push_back(mode);
        }
    }
    const std::size_t cols = dims.numel() / rows;
    out.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t position = 0; position < dims.numel(); ++position) {
        const MultiIndex index = unpack(dims, position);
        out.matrix(static_cast<Eigen::Index>(pack_modes(dims, index, out.row_modes)),
                   static_cast<Eigen::Index>(pack_modes(dims, index, out.col_modes))) = tensor.values()[position];
    }
    return out;
}

DenseTensor outer_product(const std::vector<std::vector<double>>& factors) {
    std::vector<int> sizes;
    for (const auto& f : factors) {
        sizes.push_back(static_cast<int>(f.size()));
    }
    Dims dims(sizes);
    DenseTensor out(dims);
    for (std::size_t position = 0; position < dims.numel(); ++position) {
        const MultiIndex index = unpack(dims, position);
        double value = 1.0;
        for (std::size_t mode = 0; mode < factors.size(); ++mode) {
            value *= factors[mode][static_cast<std::size_t>(index[mode] - 1)];
        }
        out.values()[position] = value;
    }
    return out;
}

namespace {

std::vector<std::vector<double>> gaussian_factors(const Dims& dims, Rng& rng) {
    std::vector<std::vector<double>> factors;
    for (int n : dims.sizes()) {
        std::vector<double> f(static_cast<std::size_t>(n));
        for (double& v : f) {
            v = rng.normal();
        }
        factors.push_back(std::move(f));
    }
    return factors;
}

} // namespace

DenseTensor random_low_rank(const Dims& dims, int rank, std::uint64_t seed) {
    if (rank < 1) {
        throw InputError("rank must be at least 1");
    }
    Rng rng(seed);
    DenseTensor out(dims);
    for (int r = 0; r < rank; ++r) {
        out += outer_product(gaussian_factors(dims, rng));
    }
    return out;
}

DenseTensor random_unit_rank_one(const Dims& dims, std::uint64_t seed) {
    Rng rng(seed);
    auto factors = gaussian_factors(dims, rng);
    for (auto& f : factors) {
        const double norm = std::sqrt(std::inner_product(f.begin(), f.end(), f.begin(), 0.0));
        for (double& v : f) {
            v /= norm;
        }
    }
    return outer_product(factors);
}

double frobenius(const DenseTensor& tensor) {
    return tensor.as_vector().norm();
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& matrix) {
    if (!matrix.allFinite()) {
        throw InputError("matrix has non-finite entries");
    }
    if (matrix.size() == 0) {
        return Eigen::VectorXd();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
    return svd.singularValues();
}

double svd_nuclear(const Eigen::MatrixXd& matrix) {
    return singular_values(matrix).sum();
}

nlohmann::json tensor_to_json(const DenseTensor& tensor) {
    return nlohmann::json{{"dims", tensor.dims().sizes()}, {"values", tensor.values()}};
}

DenseTensor tensor_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("dims") || !doc.contains("values")) {
        throw InputError("tensor document needs \"dims\" and \"values\"");
    }
    try {
        return DenseTensor(Dims(doc.at("dims").get<std::vector<int>>()), doc.at("values").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed tensor document: ") + e.what());
    }
}

DenseTensor read_tensor_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open tensor file " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("cannot parse " + path.string() + ": " + e.what());
    }
    return tensor_from_json(doc);
}

void write_tensor_file(const std::filesystem::path& path, const DenseTensor& tensor) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write tensor file " + path.string());
    }
    out << tensor_to_json(tensor).dump() << '\n';
}

} // namespace theta
