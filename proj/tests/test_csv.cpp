#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "hierglm/csv.hpp"

using namespace hierglm;

namespace {

const char* const kFixture =
    "hotel,is_canceled,lead_time,arrival_date_year,total_of_special_requests,required_car_parking_spaces\n"
    "Resort Hotel,0,342,2015,0,0\n"
    "Resort Hotel,1,7,2015,1,0\n"
    "City Hotel,0,13,2016,2,1\n"
    "City Hotel,1,14.5,2016,0,2\n"
    "Resort Hotel,0,0,2017,5,0\n";

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("well-formed fixture ingests and round-trips") {
  const auto r = ingest_csv_text(kFixture, {});
  REQUIRE(r.records.size() == 5);
  CHECK(r.warnings.empty());
  CHECK(r.records[0] == BookingRecord{0, 342.0, 0, 0, 0});
  CHECK(r.records[2] == BookingRecord{0, 13.0, 2, 1, 1});
  CHECK(r.records[3] == BookingRecord{1, 14.5, 0, 1, 1});  // 2 spaces -> indicator

  std::ostringstream out;
  write_records_csv(out, r.records);
  const auto again = ingest_csv_text(out.str(), {});
  CHECK(again.records == r.records);
  std::ostringstream out2;
  write_records_csv(out2, again.records);
  CHECK(out2.str() == out.str());
}

TEST_CASE("record writer is lossless for awkward doubles") {
  std::vector<BookingRecord> recs{{1, 0.1 + 0.2, 3, 1, 0}, {0, 1e-300, 0, 0, 1}, {0, 123456789.123456789, 5, 0, 1}};
  std::ostringstream out;
  write_records_csv(out, recs);
  CHECK(ingest_csv_text(out.str(), {}).records == recs);
}

TEST_CASE("RFC 4180 details: quotes, CRLF, BOM and embedded newlines") {
  const std::string text =
      "\xEF\xBB\xBF"
      "is_canceled,lead_time,total_of_special_requests,required_car_parking_spaces,hotel,note\r\n"
      "1,10,0,0,\"City Hotel\",\"has, comma\"\r\n"
      "0,20,1,0,Resort Hotel,\"two\nlines and \"\"quotes\"\"\"\r\n"
      "0,30,1,0,Resort Hotel,\r\n";
  const auto rows = parse_csv(text);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].fields[0] == "is_canceled");
  CHECK(rows[1].fields[5] == "has, comma");
  CHECK(rows[2].fields[5] == "two\nlines and \"quotes\"");
  CHECK(rows[3].line == 5);
  CHECK(rows[3].fields.size() == 6);
  CHECK(rows[3].fields[5].empty());

  const auto r = ingest_csv_text(text, {});
  REQUIRE(r.records.size() == 3);
  CHECK(r.records[0].hotel == 1);
}

TEST_CASE("escaping round-trips through the parser") {
  for (std::string s : {"plain", "a,b", "say \"hi\"", "line\nbreak", ""}) {
    const auto rows = parse_csv(csv_escape(s) + ",x\n");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].fields[0] == s);
  }
}

TEST_CASE("unknown hotel category names line and value") {
  std::string text = kFixture;
  text += "Hostel,0,5,2017,0,0\n";
  const auto msg = message_of([&] { ingest_csv_text(text, {}, "bookings.csv"); });
  CHECK(code_of([&] { ingest_csv_text(text, {}); }) == ErrorCode::ParseError);
  CHECK(msg.find("bookings.csv:7") != std::string::npos);
  CHECK(msg.find("Hostel") != std::string::npos);
  CHECK(msg.find("hotel") != std::string::npos);
}

TEST_CASE("line numbers account for multi-line quoted fields") {
  const std::string text =
      "is_canceled,lead_time,total_of_special_requests,required_car_parking_spaces,hotel,note\n"
      "0,1,0,0,City Hotel,\"a\nb\nc\"\n"
      "2,1,0,0,City Hotel,x\n";
  const auto msg = message_of([&] { ingest_csv_text(text, {}, "f"); });
  CHECK(msg.find("f:5") != std::string::npos);
  CHECK(msg.find("is_canceled") != std::string::npos);
}

TEST_CASE("malformed input is rejected") {
  const std::string header = "is_canceled,lead_time,total_of_special_requests,required_car_parking_spaces,hotel\n";
  CHECK(code_of([&] { ingest_csv_text(header + "0,1,0,0\n", {}); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_csv_text(header + "0,-4,0,0,City Hotel\n", {}); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_csv_text(header + "0,abc,0,0,City Hotel\n", {}); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_csv_text(header + "0,1,1.5,0,City Hotel\n", {}); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_csv_text(header + "0,1,0,0,\"City Hotel\n", {}); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_csv_text(header + "0,1,0,0,Ci\"ty\n", {}); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { ingest_csv_text("", {}); }) == ErrorCode::SchemaError);
}

TEST_CASE("missing columns are a schema error naming the column") {
  const std::string text = "is_canceled,lead_time,hotel\n0,1,City Hotel\n";
  CHECK(code_of([&] { ingest_csv_text(text, {}); }) == ErrorCode::SchemaError);
  const auto msg = message_of([&] { ingest_csv_text(text, {}); });
  CHECK(msg.find("total_of_special_requests") != std::string::npos);
  CHECK(msg.find("required_car_parking_spaces") != std::string::npos);
}

TEST_CASE("special requests above five are clipped with a warning") {
  const std::string text =
      "is_canceled,lead_time,total_of_special_requests,required_car_parking_spaces,hotel\n"
      "0,1,7,0,City Hotel\n0,1,5,8,City Hotel\n";
  const auto r = ingest_csv_text(text, {});
  CHECK(r.records[0].special_requests == 5);
  CHECK(r.records[1].parking == 1);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("1 row") != std::string::npos);
}

TEST_CASE("column map renames source columns") {
  const std::string text = "cx,lt,sr,pk,ht\n1,3,0,0,Resort Hotel\n";
  IngestOptions opt;
  opt.columns = {"cx", "lt", "sr", "pk", "ht"};
  const auto r = ingest_csv_text(text, opt);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0] == BookingRecord{1, 3.0, 0, 0, 0});
}

TEST_CASE("seeded subsampling is deterministic and uniform in size") {
  std::ostringstream out;
  out << "is_canceled,lead_time,total_of_special_requests,required_car_parking_spaces,hotel\n";
  for (int i = 0; i < 1000; ++i) out << (i % 3 == 0) << ',' << i << ",0,0,City Hotel\n";
  IngestOptions opt;
  opt.sample_n = 100;
  opt.seed = 7;
  const auto a = ingest_csv_text(out.str(), opt);
  const auto b = ingest_csv_text(out.str(), opt);
  CHECK(a.records.size() == 100);
  CHECK(a.rows_read == 1000);
  CHECK(a.records == b.records);
  for (std::size_t i = 1; i < a.records.size(); ++i) CHECK(a.records[i - 1].lead_time < a.records[i].lead_time);
  opt.seed = 8;
  CHECK(ingest_csv_text(out.str(), opt).records != a.records);

  opt.sample_n = 5000;
  const auto all = ingest_csv_text(out.str(), opt);
  CHECK(all.records.size() == 1000);
  CHECK(all.warnings.size() == 1);
}

TEST_CASE("subsample indices are sorted, distinct and cover the range evenly") {
  std::vector<int> hits(10, 0);
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto idx = subsample_indices(10, 3, s);
    REQUIRE(idx.size() == 3);
    CHECK(idx[0] < idx[1]);
    CHECK(idx[1] < idx[2]);
    for (auto i : idx) hits[i]++;
  }
  // 60 expected per index.
  for (int h : hits) CHECK(std::abs(h - 60) < 30);
}

TEST_CASE("file errors") {
  CHECK(code_of([] { ingest_csv("/nonexistent/bookings.csv"); }) == ErrorCode::FileNotFound);
  const auto path = std::filesystem::temp_directory_path() / "hierglm_csv_fixture.csv";
  {
    std::ofstream f(path);
    f << kFixture;
  }
  CHECK(ingest_csv(path).records.size() == 5);
  std::filesystem::remove(path);
}

TEST_CASE("double formatting is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-3.879) == "-3.879");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK(format_double(std::nan("")) == "nan");
}
