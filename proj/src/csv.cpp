#include "wsc/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "wsc/error.hpp"

namespace wsc {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_number(std::string_view field, std::size_t line_no, std::string_view column) {
    if (field.empty()) {
        throw Error(ErrorKind::MissingValue, "line " + std::to_string(line_no) + ": empty value in '" +
                                                 std::string(column) + "'");
    }
    // from_chars rejects a leading '+', which plain decimal writers may emit.
    if (field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": '" +
                                               std::string(field) + "' in '" + std::string(column) +
                                               "' is not a number");
    }
    return value;
}

std::uint8_t parse_indicator(std::string_view field, std::size_t line_no, std::string_view column) {
    const double v = parse_number(field, line_no, column);
    if (v != 0.0 && v != 1.0) {
        throw Error(ErrorKind::NonBinaryIndicator, "line " + std::to_string(line_no) + ": " +
                                                       std::string(column) + " = " +
                                                       std::string(field));
    }
    return static_cast<std::uint8_t>(v);
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw Error(ErrorKind::IoError, "cannot format number");
    return {buf, ptr};
}

StudyDataset read_dataset_csv(std::istream& in, const CsvLoadOptions& options) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::EmptyDataset, "missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_fields(line);
    if (header.size() < 3 || header[0] != "z" || header[1] != "w" || header[2] != "y") {
        throw Error(ErrorKind::ParseError, "header must start with z,w,y");
    }
    std::vector<std::string> names(header.begin() + 3, header.end());
    const std::size_t k = names.size();

    std::vector<std::uint8_t> z;
    std::vector<std::uint8_t> w;
    std::vector<double> y;
    std::vector<double> x;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != k + 3) {
            throw Error(ErrorKind::ShapeMismatch, "line " + std::to_string(line_no) + " has " +
                                                      std::to_string(fields.size()) +
                                                      " fields, header has " +
                                                      std::to_string(k + 3));
        }
        z.push_back(parse_indicator(fields[0], line_no, "z"));
        w.push_back(parse_indicator(fields[1], line_no, "w"));
        y.push_back(parse_number(fields[2], line_no, "y"));
        for (std::size_t j = 0; j < k; ++j) x.push_back(parse_number(fields[j + 3], line_no, names[j]));
    }
    const std::size_t n = y.size();

    std::vector<CovariateKind> kinds(k, CovariateKind::Binary);
    for (std::size_t j = 0; j < k; ++j) {
        bool binary = true;
        bool count = true;
        for (std::size_t i = 0; i < n && (binary || count); ++i) {
            const double v = x[i * k + j];
            binary = binary && (v == 0.0 || v == 1.0);
            count = count && v >= 0.0 && std::floor(v) == v;
        }
        kinds[j] = binary ? CovariateKind::Binary
                          : (count ? CovariateKind::Count : CovariateKind::Continuous);
    }

    std::vector<std::string> matching;
    if (options.matching_subset) {
        matching = *options.matching_subset;
        for (const auto& m : matching) {
            auto it = std::find(names.begin(), names.end(), m);
            if (it == names.end()) {
                throw Error(ErrorKind::UnknownCovariate, "no covariate named '" + m + "'");
            }
            if (kinds[static_cast<std::size_t>(it - names.begin())] != CovariateKind::Binary) {
                throw Error(ErrorKind::NonBinaryCovariate, "matching covariate '" + m +
                                                               "' is not binary in the data");
            }
        }
    } else {
        for (std::size_t j = 0; j < k && matching.size() < 3; ++j) {
            if (kinds[j] == CovariateKind::Binary) matching.push_back(names[j]);
        }
    }

    CovariateSchema schema(std::move(names), std::move(kinds), std::move(matching));
    return {std::move(schema), std::move(z), std::move(w), std::move(y), Matrix(n, k, std::move(x))};
}

StudyDataset load_dataset_csv(const std::string& path, const CsvLoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
    return read_dataset_csv(in, options);
}

void write_dataset_csv(std::ostream& out, const StudyDataset& dataset) {
    std::string buf = "z,w,y";
    for (const auto& name : dataset.schema().names()) {
        buf += ',';
        buf += name;
    }
    buf += '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        buf += dataset.z(i) ? '1' : '0';
        buf += ',';
        buf += dataset.w(i) ? '1' : '0';
        buf += ',';
        buf += format_double(dataset.y(i));
        for (double v : dataset.x(i)) {
            buf += ',';
            buf += format_double(v);
        }
        buf += '\n';
    }
    out << buf;
}

void save_dataset_csv(const std::string& path, const StudyDataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
    write_dataset_csv(out, dataset);
    if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

}  // namespace wsc
