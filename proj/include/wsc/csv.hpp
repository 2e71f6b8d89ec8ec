#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wsc/data_model.hpp"

namespace wsc {

// Dataset interchange format: header `z,w,y,<cov1>,...`, one unit per LF line,
// plain decimal literals, no quoting.
struct CsvLoadOptions {
    // Overrides the default matching subset (the first three binary columns).
    std::optional<std::vector<std::string>> matching_subset;
};

// Covariate kinds are inferred from the column values: binary when every
// value is 0 or 1, count when every value is a non-negative integer,
// continuous otherwise.
StudyDataset read_dataset_csv(std::istream& in, const CsvLoadOptions& options = {});
StudyDataset load_dataset_csv(const std::string& path, const CsvLoadOptions& options = {});

void write_dataset_csv(std::ostream& out, const StudyDataset& dataset);
void save_dataset_csv(const std::string& path, const StudyDataset& dataset);

// Shortest decimal literal that parses back to the same double.
std::string format_double(double value);

}  // namespace wsc
