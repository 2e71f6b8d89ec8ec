#include "wsc/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "wsc/error.hpp"

namespace wsc {

std::string_view to_string(CovariateKind kind) noexcept {
    switch (kind) {
        case CovariateKind::Binary: return "binary";
        case CovariateKind::Count: return "count";
        case CovariateKind::Continuous: return "continuous";
    }
    return "continuous";
}

CovariateKind parse_covariate_kind(std::string_view text) {
    if (text == "binary") return CovariateKind::Binary;
    if (text == "count") return CovariateKind::Count;
    if (text == "continuous") return CovariateKind::Continuous;
    throw Error(ErrorKind::InvalidSchema, "unknown covariate kind '" + std::string(text) + "'");
}

CovariateSchema::CovariateSchema(std::vector<std::string> names, std::vector<CovariateKind> kinds,
                                 std::vector<std::string> matching_subset)
    : names_(std::move(names)), kinds_(std::move(kinds)), matching_(std::move(matching_subset)) {
    if (names_.size() != kinds_.size()) {
        throw Error(ErrorKind::InvalidSchema, "names and kinds differ in length");
    }
    std::set<std::string_view> seen;
    for (const auto& n : names_) {
        if (n.empty()) throw Error(ErrorKind::InvalidSchema, "empty covariate name");
        if (!seen.insert(n).second) {
            throw Error(ErrorKind::InvalidSchema, "duplicate covariate name '" + n + "'");
        }
    }
    std::set<std::string_view> seen_matching;
    for (const auto& m : matching_) {
        auto it = std::find(names_.begin(), names_.end(), m);
        if (it == names_.end()) {
            throw Error(ErrorKind::InvalidSchema, "matching covariate '" + m + "' not in schema");
        }
        if (kinds_[static_cast<std::size_t>(it - names_.begin())] != CovariateKind::Binary) {
            throw Error(ErrorKind::InvalidSchema, "matching covariate '" + m + "' is not binary");
        }
        if (!seen_matching.insert(m).second) {
            throw Error(ErrorKind::InvalidSchema, "matching covariate '" + m + "' listed twice");
        }
    }
}

std::size_t CovariateSchema::index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        throw Error(ErrorKind::UnknownCovariate, "no covariate named '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - names_.begin());
}

std::vector<std::size_t> CovariateSchema::indices_of(std::span<const std::string> names) const {
    std::vector<std::size_t> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(index_of(n));
    return out;
}

StudyDataset::StudyDataset(CovariateSchema schema, std::vector<std::uint8_t> z,
                           std::vector<std::uint8_t> w, std::vector<double> y, Matrix covariates)
    : schema_(std::move(schema)),
      z_(std::move(z)),
      w_(std::move(w)),
      y_(std::move(y)),
      covariates_(std::move(covariates)) {
    const std::size_t n = y_.size();
    if (n == 0) throw Error(ErrorKind::EmptyDataset, "dataset has no records");
    if (z_.size() != n || w_.size() != n || covariates_.rows() != n) {
        throw Error(ErrorKind::ShapeMismatch, "column lengths disagree");
    }
    if (covariates_.cols() != schema_.size()) {
        throw Error(ErrorKind::ShapeMismatch,
                    "covariate width " + std::to_string(covariates_.cols()) +
                        " does not match schema size " + std::to_string(schema_.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (z_[i] > 1 || w_[i] > 1) {
            throw Error(ErrorKind::NonBinaryIndicator,
                        "record " + std::to_string(i) + " has a non-binary indicator");
        }
        if (z_[i] == 0 && w_[i] == 1) {
            throw Error(ErrorKind::ComplianceViolation,
                        "record " + std::to_string(i) + " is a control unit marked exposed");
        }
        if (!std::isfinite(y_[i])) {
            throw Error(ErrorKind::ShapeMismatch,
                        "record " + std::to_string(i) + " has a non-finite outcome");
        }
        const auto row = covariates_.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (!std::isfinite(row[j])) {
                throw Error(ErrorKind::MissingValue,
                            "record " + std::to_string(i) + " has a missing or non-finite covariate");
            }
            if (schema_.kinds()[j] == CovariateKind::Binary && row[j] != 0.0 && row[j] != 1.0) {
                throw Error(ErrorKind::NonBinaryCovariate,
                            "record " + std::to_string(i) + ": binary covariate '" +
                                schema_.names()[j] + "' is not 0/1");
            }
        }
    }
    recount();
}

StudyDataset::StudyDataset(Trusted, CovariateSchema schema, std::vector<std::uint8_t> z,
                           std::vector<std::uint8_t> w, std::vector<double> y, Matrix covariates)
    : schema_(std::move(schema)),
      z_(std::move(z)),
      w_(std::move(w)),
      y_(std::move(y)),
      covariates_(std::move(covariates)) {
    recount();
}

void StudyDataset::recount() {
    counts_ = {};
    for (std::size_t i = 0; i < z_.size(); ++i) {
        if (z_[i] == 1) {
            ++counts_.n_t;
            (w_[i] == 1 ? counts_.n_te : counts_.n_tu) += 1;
        } else {
            ++counts_.n_c;
        }
    }
}

UserRecord StudyDataset::record(std::size_t i) const {
    const auto row = x(i);
    return {z_[i], w_[i], y_[i], std::vector<double>(row.begin(), row.end())};
}

StudyDataset StudyDataset::resample(std::span<const std::size_t> rows) const {
    std::vector<std::uint8_t> z(rows.size());
    std::vector<std::uint8_t> w(rows.size());
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        z[i] = z_[rows[i]];
        w[i] = w_[rows[i]];
        y[i] = y_[rows[i]];
    }
    return {Trusted{}, schema_, std::move(z), std::move(w), std::move(y),
            covariates_.select_rows(rows)};
}

StudyDataset StudyDataset::with_affine_outcomes(double a, double b) const {
    std::vector<double> y(y_.size());
    std::transform(y_.begin(), y_.end(), y.begin(), [&](double v) { return a * v + b; });
    return {schema_, z_, w_, std::move(y), covariates_};
}

StudyDataset validate_dataset(std::span<const UserRecord> records, const CovariateSchema& schema) {
    if (records.empty()) throw Error(ErrorKind::EmptyDataset, "dataset has no records");
    const std::size_t n = records.size();
    const std::size_t k = schema.size();
    std::vector<std::uint8_t> z(n);
    std::vector<std::uint8_t> w(n);
    std::vector<double> y(n);
    Matrix x(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const UserRecord& r = records[i];
        if (r.x.size() != k) {
            throw Error(ErrorKind::ShapeMismatch, "record " + std::to_string(i) + " has " +
                                                      std::to_string(r.x.size()) +
                                                      " covariates, schema has " +
                                                      std::to_string(k));
        }
        if ((r.z != 0 && r.z != 1) || (r.w != 0 && r.w != 1)) {
            throw Error(ErrorKind::NonBinaryIndicator,
                        "record " + std::to_string(i) + " has a non-binary indicator");
        }
        z[i] = static_cast<std::uint8_t>(r.z);
        w[i] = static_cast<std::uint8_t>(r.w);
        y[i] = r.y;
        std::copy(r.x.begin(), r.x.end(), x.row(i).begin());
    }
    return {schema, std::move(z), std::move(w), std::move(y), std::move(x)};
}

GroupView::GroupView(const StudyDataset& dataset, Group group) : dataset_(&dataset) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (in_group(group, dataset.z(i), dataset.w(i))) rows_.push_back(i);
    }
}

std::vector<double> GroupView::outcomes() const {
    std::vector<double> out(rows_.size());
    for (std::size_t k = 0; k < rows_.size(); ++k) out[k] = dataset_->y(rows_[k]);
    return out;
}

Matrix GroupView::covariates(std::span<const std::size_t> columns) const {
    Matrix out(rows_.size(), columns.size());
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        const auto row = dataset_->x(rows_[k]);
        for (std::size_t c = 0; c < columns.size(); ++c) out(k, c) = row[columns[c]];
    }
    return out;
}

Matrix GroupView::covariates() const { return dataset_->covariates().select_rows(rows_); }

}  // namespace wsc
