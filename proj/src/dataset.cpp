#include "mmdval/dataset.hpp"

#include "mmdval/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace mmdval {

namespace {

constexpr std::array<char, 4> kBinaryMagic{'K', 'A', 'I', 'R'};

std::string row_ref(std::size_t row) {
    return "row " + std::to_string(row);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                        : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        fields.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_real(std::string_view text, std::size_t row, std::size_t col) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw InputError(row_ref(row) + ": column " + std::to_string(col) + " is not a number: '" +
                         std::string(text) + "'");
    }
    if (!std::isfinite(value)) {
        throw InputError(row_ref(row) + ": column " + std::to_string(col) + " is not finite");
    }
    return value;
}

int parse_label(std::string_view text, std::size_t row) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw InputError(row_ref(row) + ": label is not an integer: '" + std::string(text) + "'");
    }
    if (value < 0 || value > 1'000'000) {
        throw InputError(row_ref(row) + ": label " + std::to_string(value) + " out of range");
    }
    return static_cast<int>(value);
}

void finish_classes(Dataset& data, int declared_classes) {
    if (declared_classes > 0) {
        data.num_classes = declared_classes;
    } else {
        const int max_label = data.labels.empty() ? 0 : *std::max_element(data.labels.begin(), data.labels.end());
        data.num_classes = std::max(2, max_label + 1);
    }
    data.validate();
}

Dataset load_csv(const std::filesystem::path& path, int declared_classes) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());

    std::string line;
    bool have_header = false;
    std::size_t dim = 0;
    std::size_t row = 0;
    Dataset data;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (!have_header) {
            if (fields.size() < 2 || fields.back() != "label") {
                throw InputError(path.string() + ": header must be f0,...,f{d-1},label");
            }
            for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
                if (fields[c] != "f" + std::to_string(c)) {
                    throw InputError(path.string() + ": header column " + std::to_string(c) +
                                     " should be f" + std::to_string(c));
                }
            }
            dim = fields.size() - 1;
            data.features = Matrix(0, dim);
            have_header = true;
            continue;
        }
        if (fields.size() != dim + 1) {
            throw InputError(row_ref(row) + ": expected " + std::to_string(dim + 1) + " fields, got " +
                             std::to_string(fields.size()));
        }
        values.resize(dim);
        for (std::size_t c = 0; c < dim; ++c) values[c] = parse_real(fields[c], row, c);
        const int label = parse_label(fields[dim], row);
        if (declared_classes > 0 && label >= declared_classes) {
            throw InputError(row_ref(row) + ": label " + std::to_string(label) + " not in [0, " +
                             std::to_string(declared_classes) + ")");
        }
        data.features.append_row(values);
        data.labels.push_back(label);
        ++row;
    }
    if (row == 0) throw InputError(path.string() + ": no data rows");
    finish_classes(data, declared_classes);
    return data;
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

double read_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
    double value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

Dataset load_binary(const std::filesystem::path& path, int declared_classes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.empty()) throw InputError(path.string() + ": no data rows");
    if (bytes.size() < 16 || !std::equal(kBinaryMagic.begin(), kBinaryMagic.end(), bytes.begin())) {
        throw InputError(path.string() + ": missing KAIR header");
    }
    const std::size_t n = read_u32(bytes.data() + 4);
    const std::size_t d = read_u32(bytes.data() + 8);
    const std::uint32_t classes = read_u32(bytes.data() + 12);
    if (n == 0) throw InputError(path.string() + ": no data rows");
    if (d == 0) throw InputError(path.string() + ": feature dimension is zero");
    const std::size_t expected = 16 + n * d * 8 + n * 4;
    if (bytes.size() != expected) {
        throw InputError(path.string() + ": expected " + std::to_string(expected) + " bytes for n=" +
                         std::to_string(n) + ", d=" + std::to_string(d) + ", got " +
                         std::to_string(bytes.size()));
    }
    if (declared_classes > 0 && static_cast<int>(classes) != declared_classes) {
        throw InputError(path.string() + ": file declares " + std::to_string(classes) +
                         " classes, expected " + std::to_string(declared_classes));
    }
    Dataset data;
    std::vector<double> values(n * d);
    const unsigned char* p = bytes.data() + 16;
    for (std::size_t i = 0; i < n * d; ++i, p += 8) {
        values[i] = read_f64(p);
        if (!std::isfinite(values[i])) {
            throw InputError(row_ref(i / d) + ": column " + std::to_string(i % d) + " is not finite");
        }
    }
    data.features = Matrix(n, d, std::move(values));
    data.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i, p += 4) {
        const std::uint32_t label = read_u32(p);
        if (label >= classes) {
            throw InputError(row_ref(i) + ": label " + std::to_string(label) + " not in [0, " +
                             std::to_string(classes) + ")");
        }
        data.labels[i] = static_cast<int>(label);
    }
    data.num_classes = static_cast<int>(classes);
    data.validate();
    return data;
}

} // namespace

void Dataset::validate() const {
    if (features.rows() == 0) throw InputError("dataset has no data rows");
    if (features.cols() == 0) throw InputError("dataset has zero feature dimension");
    if (labels.size() != features.rows()) {
        throw InputError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                         std::to_string(labels.size()) + " labels");
    }
    if (num_classes < 2) throw InputError("class count must be at least 2");
    for (std::size_t i = 0; i < features.rows(); ++i) {
        for (std::size_t c = 0; c < features.cols(); ++c) {
            if (!std::isfinite(features(i, c))) {
                throw InputError(row_ref(i) + ": column " + std::to_string(c) + " is not finite");
            }
        }
        if (labels[i] < 0 || labels[i] >= num_classes) {
            throw InputError(row_ref(i) + ": label " + std::to_string(labels[i]) + " not in [0, " +
                             std::to_string(num_classes) + ")");
        }
    }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features = features.select_rows(indices);
    out.labels.reserve(indices.size());
    for (const auto i : indices) out.labels.push_back(labels[i]);
    out.num_classes = num_classes;
    return out;
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
    Dataset out;
    out.features = features.slice_rows(first, count);
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(first),
                      labels.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.num_classes = num_classes;
    return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
    Dataset out;
    out.features = vstack(a.features, b.features);
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    out.num_classes = std::max(a.num_classes, b.num_classes);
    return out;
}

DataFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".bin" ? DataFormat::binary_matrix : DataFormat::csv;
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format, int declared_classes) {
    return format == DataFormat::csv ? load_csv(path, declared_classes)
                                     : load_binary(path, declared_classes);
}

Dataset load_dataset(const std::filesystem::path& path, int declared_classes) {
    return load_dataset(path, format_from_path(path), declared_classes);
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    for (std::size_t c = 0; c < data.dim(); ++c) out << 'f' << c << ',';
    out << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t c = 0; c < data.dim(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", data.features(i, c));
            out << buf << ',';
        }
        out << data.labels[i] << '\n';
    }
}

void save_binary(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(kBinaryMagic.data(), 4);
    write_u32(out, static_cast<std::uint32_t>(data.size()));
    write_u32(out, static_cast<std::uint32_t>(data.dim()));
    write_u32(out, static_cast<std::uint32_t>(data.num_classes));
    for (const double v : data.features.data()) write_f64(out, v);
    for (const int label : data.labels) write_u32(out, static_cast<std::uint32_t>(label));
}

} // namespace mmdval
