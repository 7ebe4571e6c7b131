#pragma once

#include "demandcast/date.hpp"

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace demandcast {

/// Identifies one store-item series. Ids are opaque strings; all-digit ids
/// order numerically so that "2" sorts before "10".
struct SeriesKey {
    std::string store;
    std::string item;

    bool operator==(const SeriesKey&) const = default;
    std::strong_ordering operator<=>(const SeriesKey& other) const;

    std::string label() const { return store + "/" + item; }
};

/// Natural ordering for opaque ids.
std::strong_ordering compare_ids(const std::string& a, const std::string& b);

inline const std::string kAggregateId = "ALL";

struct SalesRecord {
    Date date;
    SeriesKey key;
    double quantity = 0.0;
    bool imputed = false;
    /// Optional user-supplied numeric columns, aligned with SalesTable::extra_columns().
    std::vector<double> extras;
};

struct SeriesRange {
    SeriesKey key;
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
};

/// Immutable long-format daily sales table.
///
/// The series index is only populated once the records are ordered by
/// (store, item, date); `sorted()` reports whether that holds.
class SalesTable {
public:
    SalesTable() = default;
    explicit SalesTable(std::vector<SalesRecord> records, std::vector<std::string> extra_columns = {});

    const std::vector<SalesRecord>& records() const noexcept { return records_; }
    const std::vector<std::string>& extra_columns() const noexcept { return extra_columns_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    /// (first_date, last_date) over all records.
    std::optional<std::pair<Date, Date>> coverage() const noexcept { return coverage_; }

    bool sorted() const noexcept { return sorted_; }
    const std::vector<SeriesRange>& series() const noexcept { return series_; }
    const SeriesRange* find_series(const SeriesKey& key) const;

    double total_quantity() const noexcept;
    std::size_t imputed_count() const noexcept;

private:
    std::vector<SalesRecord> records_;
    std::vector<std::string> extra_columns_;
    std::optional<std::pair<Date, Date>> coverage_;
    std::vector<SeriesRange> series_;
    bool sorted_ = false;
};

struct CsvSchema {
    std::string date_column = "date";
    std::string store_column = "store";
    std::string item_column = "item";
    std::string quantity_column = "sales";
    /// Extra numeric columns carried through to the feature matrix unscaled.
    std::vector<std::string> extra_columns;
    /// Parsing aborts when more than this fraction of data rows is malformed.
    double max_malformed_fraction = 0.01;
};

struct RowIssue {
    std::size_t line = 0;
    std::string reason;
};

struct ParseReport {
    std::size_t data_rows = 0;
    std::size_t accepted_rows = 0;
    std::vector<RowIssue> malformed;
};

struct ParsedSales {
    SalesTable table;
    ParseReport report;
};

ParsedSales parse_sales_csv(std::istream& source, const CsvSchema& schema = {});

/// Stable ordering by (store, item, date). Throws DuplicateDate when a series
/// has two records on the same day.
SalesTable sort_chronological(const SalesTable& table);

enum class FillMethod { LinearInterpolate, ForwardFill };

struct FillOptions {
    FillMethod method = FillMethod::LinearInterpolate;
    /// Extend every series to the table-wide coverage window. Days before a
    /// series' first observation have no anchor and are reported as leading
    /// gaps; days after its last observation are forward-filled.
    bool align_to_coverage = false;
};

struct SeriesFillSummary {
    SeriesKey key;
    std::size_t imputed = 0;
    std::size_t leading_gap_days = 0;
};

struct FillResult {
    SalesTable table;
    std::vector<SeriesFillSummary> per_series;
    std::size_t imputed_total = 0;
    std::size_t leading_gap_days = 0;
};

FillResult fill_gaps(const SalesTable& table, const FillOptions& options = {});

enum class Granularity { PerSeries, Aggregate };

/// Aggregate sums quantities across all series per date into one synthetic
/// series keyed ALL/ALL. Extra columns are averaged.
SalesTable aggregate(const SalesTable& table, Granularity mode);

struct SplitSpec {
    Date train_end;
    Date test_start;
    Date test_end;

    /// Test window runs from the day after train_end to the given end date.
    static SplitSpec after(Date train_end, Date test_end) { return {train_end, train_end + 1, test_end}; }
    void validate() const;
};

struct TemporalSplit {
    SalesTable train;
    SalesTable test;
    std::size_t excluded = 0;
};

TemporalSplit split_temporal(const SalesTable& table, const SplitSpec& spec);

/// Cleaned-table export: the input schema plus an `imputed` (0/1) column.
void write_sales_csv(std::ostream& out, const SalesTable& table, const CsvSchema& schema = {},
                     bool with_imputed = true);

std::string format_quantity(double value);

} // namespace demandcast
