#include "demandcast/sales_table.hpp"

#include "demandcast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

namespace demandcast {

namespace {

bool all_digits(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string_view strip_zeros(const std::string& s) {
    std::string_view v(s);
    while (v.size() > 1 && v.front() == '0') v.remove_prefix(1);
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.emplace_back(trim(current));
    return fields;
}

std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw Error(ErrorCode::Input, "CSV header is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace

std::strong_ordering compare_ids(const std::string& a, const std::string& b) {
    if (all_digits(a) && all_digits(b)) {
        const auto sa = strip_zeros(a), sb = strip_zeros(b);
        if (sa.size() != sb.size()) return sa.size() <=> sb.size();
        if (auto c = sa.compare(sb); c != 0) return c <=> 0;
    }
    return a.compare(b) <=> 0;
}

std::strong_ordering SeriesKey::operator<=>(const SeriesKey& other) const {
    if (auto c = compare_ids(store, other.store); c != 0) return c;
    return compare_ids(item, other.item);
}

SalesTable::SalesTable(std::vector<SalesRecord> records, std::vector<std::string> extra_columns)
    : records_(std::move(records)), extra_columns_(std::move(extra_columns)) {
    if (records_.empty()) {
        sorted_ = true;
        return;
    }
    Date lo = records_.front().date, hi = lo;
    for (const auto& r : records_) {
        if (!std::isfinite(r.quantity) || r.quantity < 0.0)
            throw Error(ErrorCode::InvalidArgument,
                        "quantity must be finite and non-negative (series " + r.key.label() + ", " +
                            r.date.iso() + ")");
        if (r.extras.size() != extra_columns_.size())
            throw Error(ErrorCode::InvalidArgument, "record extras do not match extra column list");
        lo = std::min(lo, r.date);
        hi = std::max(hi, r.date);
    }
    coverage_ = std::make_pair(lo, hi);

    sorted_ = true;
    for (std::size_t i = 1; i < records_.size(); ++i) {
        const auto& a = records_[i - 1];
        const auto& b = records_[i];
        const auto c = a.key <=> b.key;
        if (c > 0 || (c == 0 && a.date >= b.date)) {
            sorted_ = false;
            break;
        }
    }
    if (!sorted_) return;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= records_.size(); ++i) {
        if (i == records_.size() || records_[i].key != records_[begin].key) {
            series_.push_back({records_[begin].key, begin, i});
            begin = i;
        }
    }
}

const SeriesRange* SalesTable::find_series(const SeriesKey& key) const {
    auto it = std::lower_bound(series_.begin(), series_.end(), key,
                               [](const SeriesRange& r, const SeriesKey& k) { return r.key < k; });
    if (it == series_.end() || it->key != key) return nullptr;
    return &*it;
}

double SalesTable::total_quantity() const noexcept {
    double s = 0.0;
    for (const auto& r : records_) s += r.quantity;
    return s;
}

std::size_t SalesTable::imputed_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [](const SalesRecord& r) { return r.imputed; }));
}

ParsedSales parse_sales_csv(std::istream& source, const CsvSchema& schema) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(source, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorCode::EmptyInput, "input has no header row");

    const std::size_t i_date = column_index(header, schema.date_column);
    const std::size_t i_store = column_index(header, schema.store_column);
    const std::size_t i_item = column_index(header, schema.item_column);
    const std::size_t i_qty = column_index(header, schema.quantity_column);
    std::vector<std::size_t> i_extra;
    for (const auto& name : schema.extra_columns) i_extra.push_back(column_index(header, name));
    // Re-ingesting a cleaned export keeps its imputation flags.
    const auto imputed_it = std::find(header.begin(), header.end(), "imputed");
    const std::optional<std::size_t> i_imputed =
        imputed_it == header.end() ? std::nullopt
                                   : std::optional<std::size_t>(static_cast<std::size_t>(imputed_it - header.begin()));

    std::vector<SalesRecord> records;
    ParseReport report;
    while (std::getline(source, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++report.data_rows;
        const auto fields = split_csv_line(line);
        auto reject = [&](std::string reason) { report.malformed.push_back({line_no, std::move(reason)}); };
        if (fields.size() != header.size()) {
            reject("expected " + std::to_string(header.size()) + " fields, found " +
                   std::to_string(fields.size()));
            continue;
        }
        const auto date = Date::parse(fields[i_date]);
        if (!date) {
            reject("unparseable date '" + fields[i_date] + "'");
            continue;
        }
        if (fields[i_store].empty() || fields[i_item].empty()) {
            reject("empty store or item id");
            continue;
        }
        const auto qty = parse_real(fields[i_qty]);
        if (!qty || !std::isfinite(*qty)) {
            reject("unparseable quantity '" + fields[i_qty] + "'");
            continue;
        }
        if (*qty < 0.0) {
            reject("negative quantity " + fields[i_qty]);
            continue;
        }
        SalesRecord rec{*date, {fields[i_store], fields[i_item]}, *qty, false, {}};
        if (i_imputed) {
            const auto& flag = fields[*i_imputed];
            if (flag != "0" && flag != "1") {
                reject("imputed flag must be 0 or 1");
                continue;
            }
            rec.imputed = flag == "1";
        }
        bool ok = true;
        for (std::size_t k = 0; k < i_extra.size(); ++k) {
            const auto v = parse_real(fields[i_extra[k]]);
            if (!v || !std::isfinite(*v)) {
                reject("unparseable value in column '" + schema.extra_columns[k] + "'");
                ok = false;
                break;
            }
            rec.extras.push_back(*v);
        }
        if (ok) records.push_back(std::move(rec));
    }
    if (report.data_rows == 0) throw Error(ErrorCode::EmptyInput, "input has no data rows");
    const double bad_fraction = static_cast<double>(report.malformed.size()) / static_cast<double>(report.data_rows);
    if (bad_fraction > schema.max_malformed_fraction) {
        const auto& first = report.malformed.front();
        throw Error(ErrorCode::TooManyMalformed,
                    std::to_string(report.malformed.size()) + " of " + std::to_string(report.data_rows) +
                        " rows malformed; first at line " + std::to_string(first.line) + ": " + first.reason);
    }
    report.accepted_rows = records.size();
    return {SalesTable(std::move(records), schema.extra_columns), std::move(report)};
}

SalesTable sort_chronological(const SalesTable& table) {
    if (table.sorted()) return table;
    std::vector<SalesRecord> records = table.records();
    std::stable_sort(records.begin(), records.end(), [](const SalesRecord& a, const SalesRecord& b) {
        if (auto c = a.key <=> b.key; c != 0) return c < 0;
        return a.date < b.date;
    });
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].key == records[i - 1].key && records[i].date == records[i - 1].date)
            throw Error(ErrorCode::DuplicateDate,
                        "series " + records[i].key.label() + " has two records on " + records[i].date.iso());
    }
    return SalesTable(std::move(records), table.extra_columns());
}

FillResult fill_gaps(const SalesTable& input, const FillOptions& options) {
    const SalesTable table = sort_chronological(input);
    FillResult result;
    if (table.empty()) {
        result.table = table;
        return result;
    }
    const auto [cov_first, cov_last] = *table.coverage();
    const std::size_t n_extra = table.extra_columns().size();
    const auto& recs = table.records();

    std::vector<SalesRecord> out;
    out.reserve(table.size());
    for (const auto& range : table.series()) {
        SeriesFillSummary summary{range.key, 0, 0};
        const SalesRecord& first = recs[range.begin];
        if (options.align_to_coverage && first.date > cov_first)
            summary.leading_gap_days = static_cast<std::size_t>(first.date - cov_first);

        out.push_back(first);
        for (std::size_t i = range.begin + 1; i < range.end; ++i) {
            const SalesRecord& prev = recs[i - 1];
            const SalesRecord& next = recs[i];
            const int gap = (next.date - prev.date) - 1;
            for (int j = 1; j <= gap; ++j) {
                SalesRecord filled{prev.date + j, range.key, prev.quantity, true, prev.extras};
                if (options.method == FillMethod::LinearInterpolate) {
                    const double frac = static_cast<double>(j) / static_cast<double>(gap + 1);
                    filled.quantity = prev.quantity + frac * (next.quantity - prev.quantity);
                    for (std::size_t k = 0; k < n_extra; ++k)
                        filled.extras[k] = prev.extras[k] + frac * (next.extras[k] - prev.extras[k]);
                }
                out.push_back(std::move(filled));
                ++summary.imputed;
            }
            out.push_back(next);
        }
        if (options.align_to_coverage) {
            const SalesRecord last = recs[range.end - 1];
            for (Date d = last.date + 1; d <= cov_last; ++d) {
                out.push_back({d, range.key, last.quantity, true, last.extras});
                ++summary.imputed;
            }
        }
        result.imputed_total += summary.imputed;
        result.leading_gap_days += summary.leading_gap_days;
        result.per_series.push_back(std::move(summary));
    }
    result.table = SalesTable(std::move(out), table.extra_columns());
    return result;
}

SalesTable aggregate(const SalesTable& table, Granularity mode) {
    if (mode == Granularity::PerSeries) return table;
    struct Acc {
        double quantity = 0.0;
        bool imputed = false;
        std::vector<double> extras;
        std::size_t count = 0;
    };
    const std::size_t n_extra = table.extra_columns().size();
    std::map<Date, Acc> by_date;
    for (const auto& r : table.records()) {
        auto& acc = by_date[r.date];
        if (acc.extras.empty()) acc.extras.assign(n_extra, 0.0);
        acc.quantity += r.quantity;
        acc.imputed = acc.imputed || r.imputed;
        for (std::size_t k = 0; k < n_extra; ++k) acc.extras[k] += r.extras[k];
        ++acc.count;
    }
    std::vector<SalesRecord> out;
    out.reserve(by_date.size());
    for (auto& [date, acc] : by_date) {
        for (auto& e : acc.extras) e /= static_cast<double>(acc.count);
        out.push_back({date, {kAggregateId, kAggregateId}, acc.quantity, acc.imputed, std::move(acc.extras)});
    }
    return SalesTable(std::move(out), table.extra_columns());
}

void SplitSpec::validate() const {
    if (!(train_end < test_start))
        throw Error(ErrorCode::InvalidArgument, "split requires train_end < test_start");
    if (test_end < test_start)
        throw Error(ErrorCode::InvalidArgument, "split requires test_start <= test_end");
}

TemporalSplit split_temporal(const SalesTable& table, const SplitSpec& spec) {
    spec.validate();
    std::vector<SalesRecord> train, test;
    std::size_t excluded = 0;
    for (const auto& r : table.records()) {
        if (r.date <= spec.train_end)
            train.push_back(r);
        else if (r.date >= spec.test_start && r.date <= spec.test_end)
            test.push_back(r);
        else
            ++excluded;
    }
    if (train.empty()) throw Error(ErrorCode::EmptyPartition, "training partition is empty");
    if (test.empty()) throw Error(ErrorCode::EmptyPartition, "test partition is empty");
    return {SalesTable(std::move(train), table.extra_columns()), SalesTable(std::move(test), table.extra_columns()),
            excluded};
}

std::string format_quantity(double value) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc{} ? std::string(buf, p) : std::to_string(value);
}

void write_sales_csv(std::ostream& out, const SalesTable& table, const CsvSchema& schema, bool with_imputed) {
    out << schema.date_column << ',' << schema.store_column << ',' << schema.item_column << ','
        << schema.quantity_column;
    for (const auto& name : table.extra_columns()) out << ',' << name;
    out << (with_imputed ? ",imputed\n" : "\n");
    for (const auto& r : table.records()) {
        out << r.date.iso() << ',' << r.key.store << ',' << r.key.item << ',' << format_quantity(r.quantity);
        for (double e : r.extras) out << ',' << format_quantity(e);
        if (with_imputed) out << ',' << (r.imputed ? 1 : 0);
        out << '\n';
    }
}

} // namespace demandcast
