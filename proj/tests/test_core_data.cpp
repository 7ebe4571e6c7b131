#include "demandcast/date.hpp"
#include "demandcast/error.hpp"
#include "demandcast/fingerprint.hpp"
#include "demandcast/sales_table.hpp"
#include "demandcast/synthetic.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <tuple>

using namespace demandcast;
using testing_support::one_series;

namespace {

// Zeller's congruence, shifted to 0 = Monday.
int zeller_weekday(int y, int m, int d) {
    if (m < 3) {
        m += 12;
        y -= 1;
    }
    const int k = y % 100, j = y / 100;
    const int h = (d + 13 * (m + 1) / 5 + k + k / 4 + j / 4 + 5 * j) % 7;  // 0 = Saturday
    return (h + 5) % 7;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::InvalidArgument;
}

ParsedSales parse(const std::string& text, CsvSchema schema = {}) {
    std::istringstream in(text);
    return parse_sales_csv(in, schema);
}

} // namespace

TEST(Date, RoundTripsCivilDates) {
    for (int y : {1999, 2000, 2013, 2016, 2017, 2100})
        for (int m = 1; m <= 12; ++m)
            for (int d : {1, 15, 28}) {
                const Date dt = Date::from_ymd(y, m, d);
                EXPECT_EQ(dt.year(), y);
                EXPECT_EQ(dt.month(), m);
                EXPECT_EQ(dt.day(), d);
                EXPECT_EQ(Date::parse_or_throw(dt.iso()), dt);
            }
    EXPECT_EQ(Date::from_ymd(1970, 1, 1).days(), 0);
    EXPECT_EQ(Date::from_ymd(2017, 12, 31) - Date::from_ymd(2013, 1, 1), 1825);
}

TEST(Date, WeekdayMatchesZeller) {
    EXPECT_EQ(Date::from_ymd(2013, 1, 1).weekday(), 1);
    EXPECT_EQ(Date::from_ymd(2017, 12, 31).weekday(), 6);
    for (Date d = Date::from_ymd(2012, 1, 1); d <= Date::from_ymd(2018, 12, 31); ++d) {
        ASSERT_EQ(d.weekday(), zeller_weekday(d.year(), d.month(), d.day())) << d.iso();
        ASSERT_EQ((d + 7).weekday(), d.weekday());
    }
}

TEST(Date, ParseRejectsBadInput) {
    EXPECT_FALSE(Date::parse("2017-02-29"));
    EXPECT_FALSE(Date::parse("2017-13-01"));
    EXPECT_FALSE(Date::parse("17-01-01"));
    EXPECT_FALSE(Date::parse(""));
    EXPECT_TRUE(Date::parse("2016-02-29"));
    EXPECT_EQ(Date::parse("2017-03-04 00:00:00"), Date::from_ymd(2017, 3, 4));
    EXPECT_EQ(Date::parse("2017-03-04T10:00"), Date::from_ymd(2017, 3, 4));
}

TEST(ParseSalesCsv, SingleRow) {
    const auto parsed = parse("date,store,item,sales\n2013-01-01,1,1,13\n");
    ASSERT_EQ(parsed.table.size(), 1u);
    const auto& r = parsed.table.records().front();
    EXPECT_EQ(r.date, Date::from_ymd(2013, 1, 1));
    EXPECT_EQ(r.key, (SeriesKey{"1", "1"}));
    EXPECT_EQ(r.quantity, 13.0);
    ASSERT_TRUE(parsed.table.coverage());
    EXPECT_EQ(parsed.table.coverage()->first, Date::from_ymd(2013, 1, 1));
    EXPECT_EQ(parsed.table.coverage()->second, Date::from_ymd(2013, 1, 1));
}

TEST(ParseSalesCsv, NegativeQuantityRowIsRejected) {
    std::string text = "date,store,item,sales\n";
    const Date start = Date::from_ymd(2013, 1, 1);
    for (int i = 0; i < 200; ++i) text += (start + i).iso() + ",1,1," + std::to_string(i == 50 ? -4 : 10) + "\n";
    const auto parsed = parse(text);
    EXPECT_EQ(parsed.report.data_rows, 200u);
    EXPECT_EQ(parsed.table.size(), 199u);
    ASSERT_EQ(parsed.report.malformed.size(), 1u);
    EXPECT_EQ(parsed.report.malformed.front().line, 52u);
}

TEST(ParseSalesCsv, ColumnsResolvedByHeaderName) {
    const auto parsed = parse("sales,item,date,store\n5,7,2014-05-06,3\n");
    ASSERT_EQ(parsed.table.size(), 1u);
    EXPECT_EQ(parsed.table.records()[0].key, (SeriesKey{"3", "7"}));
    EXPECT_EQ(parsed.table.records()[0].quantity, 5.0);
}

TEST(ParseSalesCsv, Failures) {
    EXPECT_EQ(code_of([] { parse(""); }), ErrorCode::EmptyInput);
    EXPECT_EQ(code_of([] { parse("date,store,item,sales\n"); }), ErrorCode::EmptyInput);
    EXPECT_EQ(code_of([] { parse("date,store,sales\n2013-01-01,1,3\n"); }), ErrorCode::Input);
    EXPECT_EQ(code_of([] { parse("date,store,item,sales\n2013-01-01,1,1,x\n2013-01-02,1,1,3\n"); }),
              ErrorCode::TooManyMalformed);
}

TEST(SortChronological, OrdersBySeriesThenDate) {
    const Date d1 = Date::from_ymd(2013, 1, 1), d2 = d1 + 1;
    SalesTable t({{d2, {"1", "1"}, 1, false, {}}, {d1, {"1", "1"}, 2, false, {}}});
    const auto s = sort_chronological(t);
    EXPECT_EQ(s.records()[0].date, d1);
    EXPECT_EQ(s.records()[1].date, d2);
    EXPECT_TRUE(s.sorted());
}

TEST(SortChronological, MatchesReferenceSortAndIsIdempotent) {
    std::mt19937_64 rng(7);
    std::vector<SalesRecord> recs;
    const Date start = Date::from_ymd(2015, 3, 1);
    for (const char* store : {"2", "10", "1"})
        for (const char* item : {"3", "1"})
            for (int d = 0; d < 20; ++d) recs.push_back({start + d, {store, item}, double(rng() % 50), false, {}});
    std::shuffle(recs.begin(), recs.end(), rng);

    auto reference = recs;
    std::sort(reference.begin(), reference.end(), [](const SalesRecord& a, const SalesRecord& b) {
        auto num = [](const std::string& s) { return std::stoi(s); };
        return std::make_tuple(num(a.key.store), num(a.key.item), a.date) <
               std::make_tuple(num(b.key.store), num(b.key.item), b.date);
    });
    const auto once = sort_chronological(SalesTable(recs));
    ASSERT_EQ(once.size(), reference.size());
    for (std::size_t i = 0; i < reference.size(); ++i) {
        EXPECT_EQ(once.records()[i].key, reference[i].key);
        EXPECT_EQ(once.records()[i].date, reference[i].date);
        EXPECT_EQ(once.records()[i].quantity, reference[i].quantity);
    }
    ASSERT_EQ(once.series().size(), 6u);
    EXPECT_EQ(once.series().front().key, (SeriesKey{"1", "1"}));
    EXPECT_EQ(once.series().back().key, (SeriesKey{"10", "3"}));

    const auto twice = sort_chronological(once);
    for (std::size_t i = 0; i < once.size(); ++i) {
        EXPECT_EQ(twice.records()[i].key, once.records()[i].key);
        EXPECT_EQ(twice.records()[i].date, once.records()[i].date);
    }
}

TEST(SortChronological, DuplicateDateThrows) {
    const Date d = Date::from_ymd(2013, 1, 1);
    SalesTable t({{d, {"1", "1"}, 1, false, {}}, {d, {"1", "1"}, 2, false, {}}});
    EXPECT_EQ(code_of([&] { sort_chronological(t); }), ErrorCode::DuplicateDate);
}

TEST(FillGaps, LinearAndForwardFill) {
    const Date d1 = Date::from_ymd(2013, 1, 1);
    SalesTable t = sort_chronological(SalesTable({{d1, {"1", "1"}, 10, false, {}}, {d1 + 2, {"1", "1"}, 20, false, {}}}));

    const auto lin = fill_gaps(t, {FillMethod::LinearInterpolate});
    ASSERT_EQ(lin.table.size(), 3u);
    EXPECT_EQ(lin.table.records()[1].date, d1 + 1);
    EXPECT_DOUBLE_EQ(lin.table.records()[1].quantity, 15.0);
    EXPECT_TRUE(lin.table.records()[1].imputed);
    EXPECT_EQ(lin.imputed_total, 1u);

    const auto ff = fill_gaps(t, {FillMethod::ForwardFill});
    EXPECT_DOUBLE_EQ(ff.table.records()[1].quantity, 10.0);
}

TEST(FillGaps, IdempotentAndBounded) {
    std::mt19937_64 rng(11);
    std::vector<SalesRecord> recs;
    const Date start = Date::from_ymd(2016, 1, 1);
    for (int d = 0; d < 300; ++d)
        if (d == 0 || d == 299 || rng() % 4 != 0) recs.push_back({start + d, {"1", "1"}, double(rng() % 100), false, {}});
    const SalesTable raw = sort_chronological(SalesTable(recs));
    const auto once = fill_gaps(raw);
    EXPECT_EQ(once.table.size(), 300u);
    const auto twice = fill_gaps(once.table);
    EXPECT_EQ(twice.imputed_total, 0u);
    ASSERT_EQ(twice.table.size(), once.table.size());
    for (std::size_t i = 0; i < once.table.size(); ++i)
        EXPECT_EQ(twice.table.records()[i].quantity, once.table.records()[i].quantity);

    // Every filled value sits between its anchors.
    const auto& r = once.table.records();
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!r[i].imputed) continue;
        std::size_t a = i, b = i;
        while (r[a].imputed) --a;
        while (r[b].imputed) ++b;
        EXPECT_GE(r[i].quantity, std::min(r[a].quantity, r[b].quantity));
        EXPECT_LE(r[i].quantity, std::max(r[a].quantity, r[b].quantity));
    }
}

TEST(FillGaps, GaplessSeriesUnchanged) {
    const auto t = sort_chronological(one_series({1, 2, 3, 4}));
    const auto f = fill_gaps(t);
    EXPECT_EQ(f.imputed_total, 0u);
    EXPECT_EQ(f.table.size(), 4u);
}

TEST(Aggregate, SumsPerDateAndPreservesMass) {
    const Date d = Date::from_ymd(2013, 1, 1);
    SalesTable t = sort_chronological(SalesTable({{d, {"1", "1"}, 5, false, {}},
                                                  {d + 1, {"1", "1"}, 7, false, {}},
                                                  {d, {"1", "2"}, 3, false, {}},
                                                  {d + 1, {"1", "2"}, 1, false, {}}}));
    const auto agg = aggregate(t, Granularity::Aggregate);
    ASSERT_EQ(agg.size(), 2u);
    EXPECT_EQ(agg.records()[0].quantity, 8.0);
    EXPECT_EQ(agg.records()[1].quantity, 8.0);
    EXPECT_EQ(agg.records()[0].key, (SeriesKey{kAggregateId, kAggregateId}));
    EXPECT_EQ(agg.total_quantity(), t.total_quantity());

    const auto same = aggregate(t, Granularity::PerSeries);
    EXPECT_EQ(same.size(), t.size());
}

TEST(Aggregate, BundledSampleCollapsesToCalendarDays) {
    std::ifstream in(testing_support::sample_path());
    const auto parsed = parse_sales_csv(in);
    const auto agg = aggregate(sort_chronological(parsed.table), Granularity::Aggregate);
    EXPECT_EQ(agg.size(), 1826u);
    EXPECT_NEAR(agg.total_quantity(), parsed.table.total_quantity(), 1e-6 * parsed.table.total_quantity());
}

TEST(SplitTemporal, PartitionProperty) {
    std::mt19937_64 rng(3);
    const auto t = sort_chronological(one_series(testing_support::uniform_vector(rng, 10, 0, 9)));
    const Date first = t.coverage()->first;
    for (int cut = 0; cut < 9; ++cut) {
        const auto s = split_temporal(t, SplitSpec::after(first + cut, first + 9));
        EXPECT_EQ(s.train.size() + s.test.size(), 10u);
        EXPECT_LT(s.train.coverage()->second, s.test.coverage()->first);
    }
}

TEST(SplitTemporal, LastDayOnly) {
    const auto t = sort_chronological(one_series({1, 2, 3, 4, 5}));
    const Date last = t.coverage()->second;
    const auto s = split_temporal(t, SplitSpec::after(last - 1, last));
    ASSERT_EQ(s.test.size(), 1u);
    EXPECT_EQ(s.test.records()[0].date, last);
}

TEST(SplitTemporal, EmptySideThrows) {
    const auto t = sort_chronological(one_series({1, 2, 3}));
    const Date last = t.coverage()->second;
    EXPECT_EQ(code_of([&] { split_temporal(t, SplitSpec::after(last, last + 5)); }), ErrorCode::EmptyPartition);
    EXPECT_EQ(code_of([&] { SplitSpec{last, last, last}.validate(); }), ErrorCode::InvalidArgument);
}

TEST(WriteSalesCsv, RoundTrip) {
    const auto t = sort_chronological(one_series({1.5, 2, 3}));
    std::ostringstream out;
    write_sales_csv(out, t);
    std::istringstream in(out.str());
    const auto back = parse_sales_csv(in);
    ASSERT_EQ(back.table.size(), 3u);
    EXPECT_EQ(back.table.records()[0].quantity, 1.5);
    EXPECT_EQ(fingerprint(sort_chronological(back.table)), fingerprint(t));
}

TEST(Synthetic, SubsetReproducesLargerGrid) {
    SyntheticConfig small;
    small.stores = 1;
    small.items = 2;
    small.end = Date::from_ymd(2013, 3, 31);
    SyntheticConfig big = small;
    big.stores = 2;
    big.items = 3;
    const auto a = generate_synthetic_sales(small);
    const auto b = generate_synthetic_sales(big);
    ASSERT_EQ(a.size(), 2u * 90u);
    for (const auto& r : a.series()) {
        const auto* other = b.find_series(r.key);
        ASSERT_NE(other, nullptr);
        ASSERT_EQ(other->size(), r.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            EXPECT_EQ(a.records()[r.begin + i].quantity, b.records()[other->begin + i].quantity);
    }
}
