#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace causalqa {

// A numeric column, or a categorical one when the cells are non-numeric
// labels (allowed for treatment levels such as "yes"/"no" or "A"/"B"/"C").
struct Column {
    std::string name;
    std::vector<double> values;       // numeric columns
    std::vector<std::string> labels;  // categorical columns
    bool categorical = false;

    std::size_t size() const { return categorical ? labels.size() : values.size(); }
};

class TabularDataset {
public:
    void add_numeric(std::string name, std::vector<double> values);
    void add_categorical(std::string name, std::vector<std::string> labels);

    std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
    std::size_t cols() const { return columns_.size(); }
    std::vector<std::string> names() const;

    std::optional<std::size_t> find(std::string_view name) const;
    const Column& column(std::size_t index) const { return columns_.at(index); }
    // Throws Error(ColumnNotFound).
    const Column& column(std::string_view name) const;
    // Throws Error(ColumnNotFound) or Error(EstimationFailed) for categorical columns.
    const std::vector<double>& numeric(std::string_view name) const;

private:
    std::vector<Column> columns_;
};

// Maps a query variable onto a column name: exact match, then case-insensitive
// match, then a unique fuzzy match (normalized edit distance <= 0.25 on the
// lowercased names). Throws Error(ColumnNotFound) or Error(AmbiguousColumn).
std::string resolve_column(const TabularDataset& data, std::string_view name);

inline constexpr double kFuzzyThreshold = 0.25;

// Header row of column names followed by data rows. A column whose first
// cell is numeric must be numeric throughout; rows violating that are
// rejected with Error(MalformedCsv) naming the 1-based data row.
TabularDataset parse_csv(std::string_view text);
TabularDataset read_csv(const std::filesystem::path& path);

// Numbers use the shortest round-trip decimal form.
std::string to_csv(const TabularDataset& data);
void write_csv(const std::filesystem::path& path, const TabularDataset& data);

}  // namespace causalqa
