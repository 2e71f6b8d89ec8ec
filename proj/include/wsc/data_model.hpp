#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsc/numeric.hpp"

namespace wsc {

enum class CovariateKind { Binary, Count, Continuous };

std::string_view to_string(CovariateKind kind) noexcept;
CovariateKind parse_covariate_kind(std::string_view text);

class CovariateSchema {
public:
    CovariateSchema() = default;
    // Throws InvalidSchema on duplicate or empty names, or a matching covariate
    // that is unknown or not binary.
    CovariateSchema(std::vector<std::string> names, std::vector<CovariateKind> kinds,
                    std::vector<std::string> matching_subset);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<CovariateKind>& kinds() const noexcept { return kinds_; }
    const std::vector<std::string>& matching_subset() const noexcept { return matching_; }

    // Column index of a covariate; throws UnknownCovariate.
    std::size_t index_of(std::string_view name) const;
    std::vector<std::size_t> indices_of(std::span<const std::string> names) const;

    bool operator==(const CovariateSchema&) const = default;

private:
    std::vector<std::string> names_;
    std::vector<CovariateKind> kinds_;
    std::vector<std::string> matching_;
};

// Input form of one experimental unit. Indicators are ints so that loaders can
// hand over out-of-range values and let validation reject them.
struct UserRecord {
    int z = 0;
    int w = 0;
    double y = 0.0;
    std::vector<double> x;
};

struct GroupCounts {
    std::size_t n_t = 0;
    std::size_t n_c = 0;
    std::size_t n_te = 0;
    std::size_t n_tu = 0;

    std::size_t total() const noexcept { return n_t + n_c; }
    bool operator==(const GroupCounts&) const = default;
};

enum class Group { Control, Treatment, TreatmentExposed, TreatmentUnexposed };

inline bool in_group(Group g, std::uint8_t z, std::uint8_t w) noexcept {
    switch (g) {
        case Group::Control: return z == 0;
        case Group::Treatment: return z == 1;
        case Group::TreatmentExposed: return z == 1 && w == 1;
        case Group::TreatmentUnexposed: return z == 1 && w == 0;
    }
    return false;
}

// Validated, immutable, column-oriented collection of units.
class StudyDataset {
public:
    // Validates and takes ownership of the columns. covariates must be
    // n x schema.size(); z and w must be 0/1 with w = 0 wherever z = 0.
    StudyDataset(CovariateSchema schema, std::vector<std::uint8_t> z, std::vector<std::uint8_t> w,
                 std::vector<double> y, Matrix covariates);

    const CovariateSchema& schema() const noexcept { return schema_; }
    const GroupCounts& counts() const noexcept { return counts_; }
    std::size_t size() const noexcept { return y_.size(); }

    std::uint8_t z(std::size_t i) const noexcept { return z_[i]; }
    std::uint8_t w(std::size_t i) const noexcept { return w_[i]; }
    double y(std::size_t i) const noexcept { return y_[i]; }
    std::span<const double> x(std::size_t i) const noexcept { return covariates_.row(i); }

    std::span<const std::uint8_t> z_column() const noexcept { return z_; }
    std::span<const std::uint8_t> w_column() const noexcept { return w_; }
    std::span<const double> y_column() const noexcept { return y_; }
    const Matrix& covariates() const noexcept { return covariates_; }

    UserRecord record(std::size_t i) const;

    // Dataset made of the given rows (with repetition). Rows of a valid
    // dataset stay valid, so only the counts are recomputed.
    StudyDataset resample(std::span<const std::size_t> rows) const;

    // Same units with every outcome replaced by a * y + b.
    StudyDataset with_affine_outcomes(double a, double b) const;

private:
    struct Trusted {};
    StudyDataset(Trusted, CovariateSchema schema, std::vector<std::uint8_t> z,
                 std::vector<std::uint8_t> w, std::vector<double> y, Matrix covariates);
    void recount();

    CovariateSchema schema_;
    std::vector<std::uint8_t> z_;
    std::vector<std::uint8_t> w_;
    std::vector<double> y_;
    Matrix covariates_;
    GroupCounts counts_;
};

StudyDataset validate_dataset(std::span<const UserRecord> records, const CovariateSchema& schema);

// Read-only selection of a dataset's rows by (z, w) pattern, in record order.
class GroupView {
public:
    GroupView(const StudyDataset& dataset, Group group);

    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    std::span<const std::size_t> rows() const noexcept { return rows_; }

    double y(std::size_t k) const noexcept { return dataset_->y(rows_[k]); }
    std::span<const double> x(std::size_t k) const noexcept { return dataset_->x(rows_[k]); }
    std::vector<double> outcomes() const;
    // Rows of the view, restricted to the given covariate columns.
    Matrix covariates(std::span<const std::size_t> columns) const;
    Matrix covariates() const;

private:
    const StudyDataset* dataset_;
    std::vector<std::size_t> rows_;
};

inline GroupView subset(const StudyDataset& dataset, Group group) { return {dataset, group}; }

}  // namespace wsc
