#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hierglm/model.hpp"

namespace hierglm {

/// One parsed CSV record and the physical line it started on (1-based).
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// RFC 4180 parsing: quoted fields with embedded commas, quotes ("") and
/// newlines; LF or CRLF endings; a leading UTF-8 BOM is skipped.
std::vector<CsvRow> parse_csv(std::string_view text, std::string_view source = "<input>");

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

/// Source column names for each BookingRecord field.
struct ColumnMap {
  std::string is_canceled = "is_canceled";
  std::string lead_time = "lead_time";
  std::string special_requests = "total_of_special_requests";
  std::string parking = "required_car_parking_spaces";
  std::string hotel = "hotel";
};

struct IngestOptions {
  ColumnMap columns;
  std::size_t sample_n = 0;  // 0 keeps every row
  std::uint64_t seed = 42;
};

struct IngestResult {
  std::vector<BookingRecord> records;
  std::vector<std::string> warnings;
  std::size_t rows_read = 0;  // before subsampling
};

IngestResult ingest_csv_text(std::string_view text, const IngestOptions& options, std::string_view source = "<input>");

/// Throws FileNotFound, SchemaError (missing column) or ParseError (line, column, value).
IngestResult ingest_csv(const std::filesystem::path& path, const IngestOptions& options = {});

/// Uniform subsample of k indices out of n without replacement, returned in
/// ascending order.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, std::uint64_t seed);

/// Writes records with the default column names; hotel is written as its label.
void write_records_csv(std::ostream& out, const std::vector<BookingRecord>& records);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace hierglm
