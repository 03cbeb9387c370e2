#include "causalqa/dataset.hpp"

#include <charconv>
#include <cmath>

#include "causalqa/error.hpp"
#include "causalqa/intent.hpp"
#include "causalqa/text.hpp"

namespace causalqa {

void TabularDataset::add_numeric(std::string name, std::vector<double> values) {
    if (!columns_.empty() && values.size() != rows())
        throw Error(ErrorCode::BadDims, "column " + name + " has " + std::to_string(values.size()) +
                                            " rows, expected " + std::to_string(rows()));
    if (find(name)) throw Error(ErrorCode::BadDims, "duplicate column " + name);
    columns_.push_back({std::move(name), std::move(values), {}, false});
}

void TabularDataset::add_categorical(std::string name, std::vector<std::string> labels) {
    if (!columns_.empty() && labels.size() != rows())
        throw Error(ErrorCode::BadDims, "column " + name + " has " + std::to_string(labels.size()) +
                                            " rows, expected " + std::to_string(rows()));
    if (find(name)) throw Error(ErrorCode::BadDims, "duplicate column " + name);
    columns_.push_back({std::move(name), {}, std::move(labels), true});
}

std::vector<std::string> TabularDataset::names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
}

std::optional<std::size_t> TabularDataset::find(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == name) return i;
    return std::nullopt;
}

const Column& TabularDataset::column(std::string_view name) const {
    auto idx = find(name);
    if (!idx) throw Error(ErrorCode::ColumnNotFound, "no column named '" + std::string(name) + "'");
    return columns_[*idx];
}

const std::vector<double>& TabularDataset::numeric(std::string_view name) const {
    const Column& c = column(name);
    if (c.categorical) throw Error(ErrorCode::EstimationFailed, "column '" + c.name + "' is not numeric");
    return c.values;
}

std::string resolve_column(const TabularDataset& data, std::string_view name) {
    if (data.find(name)) return std::string(name);
    const std::string lowered = to_lower(name);
    std::vector<std::string> hits;
    for (const auto& col : data.names())
        if (to_lower(col) == lowered) hits.push_back(col);
    if (hits.empty()) {
        for (const auto& col : data.names())
            if (normalized_levenshtein(to_lower(col), lowered) <= kFuzzyThreshold) hits.push_back(col);
    }
    if (hits.size() == 1) return hits.front();
    if (hits.empty()) throw Error(ErrorCode::ColumnNotFound, "no column matches '" + std::string(name) + "'");
    std::string list;
    for (const auto& h : hits) list += (list.empty() ? "" : ", ") + h;
    throw Error(ErrorCode::AmbiguousColumn, "'" + std::string(name) + "' matches several columns: " + list);
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::string(trim(cell)));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(std::string(trim(cell)));
    return cells;
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

TabularDataset parse_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!trim(line).empty()) lines.push_back(line);
        start = end + 1;
    }
    if (lines.empty()) throw Error(ErrorCode::MalformedCsv, "empty CSV");

    const std::vector<std::string> header = split_line(lines[0]);
    for (const auto& h : header)
        if (h.empty()) throw Error(ErrorCode::MalformedCsv, "empty column name in header");
    const std::size_t ncol = header.size();

    std::vector<std::vector<std::string>> raw(ncol);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        auto cells = split_line(lines[r]);
        if (cells.size() != ncol)
            throw Error(ErrorCode::MalformedCsv, "row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                                                     " cells, expected " + std::to_string(ncol));
        for (std::size_t c = 0; c < ncol; ++c) raw[c].push_back(std::move(cells[c]));
    }

    TabularDataset data;
    for (std::size_t c = 0; c < ncol; ++c) {
        const bool numeric = raw[c].empty() || parse_number(raw[c].front()).has_value();
        if (!numeric) {
            for (std::size_t r = 0; r < raw[c].size(); ++r)
                if (raw[c][r].empty())
                    throw Error(ErrorCode::MalformedCsv,
                                "row " + std::to_string(r + 1) + ": empty cell in column " + header[c]);
            data.add_categorical(header[c], std::move(raw[c]));
            continue;
        }
        std::vector<double> values;
        values.reserve(raw[c].size());
        for (std::size_t r = 0; r < raw[c].size(); ++r) {
            auto v = parse_number(raw[c][r]);
            if (!v)
                throw Error(ErrorCode::MalformedCsv, "row " + std::to_string(r + 1) + ": cannot parse '" + raw[c][r] +
                                                         "' in numeric column " + header[c]);
            values.push_back(*v);
        }
        data.add_numeric(header[c], std::move(values));
    }
    return data;
}

TabularDataset read_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "data file not found: " + path.string());
    return parse_csv(read_text_file(path));
}

std::string to_csv(const TabularDataset& data) {
    std::string out;
    const auto names = data.names();
    for (std::size_t c = 0; c < names.size(); ++c) out += (c ? "," : "") + names[c];
    out += '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) {
            if (c) out += ',';
            const Column& col = data.column(c);
            out += col.categorical ? col.labels[r] : format_scalar(col.values[r]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const TabularDataset& data) {
    write_text_atomic(path, to_csv(data));
}

}  // namespace causalqa
