#include "hierglm/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "hierglm/rng.hpp"

namespace hierglm {

namespace {

constexpr std::string_view kResort = "Resort Hotel";
constexpr std::string_view kCity = "City Hotel";
constexpr int kMaxRequests = 5;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    // Accept integral values written as decimals, e.g. "2.0".
    double d = 0.0;
    const auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (e2 != std::errc() || p2 != s.data() + s.size() || s.empty() || d != std::floor(d) || std::abs(d) > 1e15) {
      return std::nullopt;
    }
    return static_cast<long long>(d);
  }
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] void bad_value(std::string_view source, std::size_t line, std::string_view column, std::string_view value,
                            std::string_view why) {
  std::ostringstream msg;
  msg << source << ":" << line << ": column '" << column << "' value '" << value << "': " << why;
  throw Error(ErrorCode::ParseError, msg.str());
}

}  // namespace

std::vector<CsvRow> parse_csv(std::string_view text, std::string_view source) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  std::size_t line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool field_started = false;  // something was read for the current record
  bool quoted_field = false;
  std::size_t quote_line = 0;

  const auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    quoted_field = false;
  };
  const auto end_record = [&] {
    if (field_started || !row.fields.empty()) {
      end_field();
      rows.push_back(std::move(row));
    }
    row = CsvRow{};
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || quoted_field) {
          std::ostringstream msg;
          msg << source << ":" << line << ": stray quote inside an unquoted field";
          throw Error(ErrorCode::ParseError, msg.str());
        }
        in_quotes = true;
        quoted_field = true;
        quote_line = line;
        if (!field_started) row.line = line;
        field_started = true;
        break;
      case ',':
        if (!field_started) row.line = line;
        field_started = true;
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        row.line = line;
        break;
      default:
        if (quoted_field) {
          std::ostringstream msg;
          msg << source << ":" << line << ": characters after a closing quote";
          throw Error(ErrorCode::ParseError, msg.str());
        }
        if (!field_started) row.line = line;
        field_started = true;
        field.push_back(c);
    }
  }
  if (in_quotes) {
    std::ostringstream msg;
    msg << source << ":" << quote_line << ": unterminated quoted field";
    throw Error(ErrorCode::ParseError, msg.str());
  }
  end_record();
  return rows;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k >= n) return idx;
  auto rng = stream_rng(seed, 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + std::uniform_int_distribution<std::size_t>(0, n - 1 - i)(rng);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

IngestResult ingest_csv_text(std::string_view text, const IngestOptions& options, std::string_view source) {
  const auto rows = parse_csv(text, source);
  if (rows.empty()) throw Error(ErrorCode::SchemaError, std::string(source) + ": missing header row");

  const auto& header = rows.front().fields;
  const auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  const ColumnMap& cm = options.columns;
  const std::string* names[] = {&cm.is_canceled, &cm.lead_time, &cm.special_requests, &cm.parking, &cm.hotel};
  std::size_t col[5];
  std::string missing;
  for (int k = 0; k < 5; ++k) {
    const auto at = find(*names[k]);
    if (!at) {
      missing += missing.empty() ? "" : ", ";
      missing += *names[k];
    } else {
      col[k] = *at;
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::SchemaError, std::string(source) + ": missing column(s): " + missing);
  }

  IngestResult result;
  std::size_t clipped = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() == 1 && trim(row.fields[0]).empty()) continue;  // blank line
    if (row.fields.size() != header.size()) {
      std::ostringstream msg;
      msg << source << ":" << row.line << ": expected " << header.size() << " fields, found " << row.fields.size();
      throw Error(ErrorCode::ParseError, msg.str());
    }
    const auto field = [&](int k) -> const std::string& { return row.fields[col[k]]; };

    BookingRecord rec;
    const auto canceled = parse_int(field(0));
    if (!canceled || (*canceled != 0 && *canceled != 1)) {
      bad_value(source, row.line, cm.is_canceled, field(0), "expected 0 or 1");
    }
    rec.is_canceled = static_cast<int>(*canceled);

    const auto lead = parse_real(field(1));
    if (!lead || *lead < 0.0) bad_value(source, row.line, cm.lead_time, field(1), "expected a non-negative number");
    rec.lead_time = *lead;

    const auto requests = parse_int(field(2));
    if (!requests || *requests < 0) {
      bad_value(source, row.line, cm.special_requests, field(2), "expected a non-negative integer");
    }
    if (*requests > kMaxRequests) ++clipped;
    rec.special_requests = static_cast<int>(std::min<long long>(*requests, kMaxRequests));

    const auto spaces = parse_int(field(3));
    if (!spaces || *spaces < 0) bad_value(source, row.line, cm.parking, field(3), "expected a non-negative integer");
    rec.parking = *spaces > 0 ? 1 : 0;

    const std::string_view hotel = trim(field(4));
    if (hotel == kResort) {
      rec.hotel = 0;
    } else if (hotel == kCity) {
      rec.hotel = 1;
    } else {
      bad_value(source, row.line, cm.hotel, field(4), "expected 'Resort Hotel' or 'City Hotel'");
    }

    if (const auto why = validate_record(rec); !why.empty()) bad_value(source, row.line, "record", "", why);
    result.records.push_back(rec);
  }
  result.rows_read = result.records.size();
  if (clipped > 0) {
    result.warnings.push_back(std::to_string(clipped) + " row(s) had " + cm.special_requests +
                              " above 5; clipped to 5");
  }

  if (options.sample_n > 0) {
    if (options.sample_n >= result.records.size()) {
      result.warnings.push_back("--sample-n " + std::to_string(options.sample_n) + " >= " +
                                std::to_string(result.records.size()) + " rows; using every row");
    } else {
      const auto keep = subsample_indices(result.records.size(), options.sample_n, options.seed);
      std::vector<BookingRecord> picked;
      picked.reserve(keep.size());
      for (std::size_t i : keep) picked.push_back(result.records[i]);
      result.records = std::move(picked);
    }
  }
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "failed reading " + path.string());
  return ingest_csv_text(buf.str(), options, path.string());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

void write_records_csv(std::ostream& out, const std::vector<BookingRecord>& records) {
  const ColumnMap cm;
  out << cm.is_canceled << ',' << cm.lead_time << ',' << cm.special_requests << ',' << cm.parking << ','
      << cm.hotel << '\n';
  for (const auto& r : records) {
    out << r.is_canceled << ',' << format_double(r.lead_time) << ',' << r.special_requests << ',' << r.parking
        << ',' << (r.hotel == 1 ? kCity : kResort) << '\n';
  }
}

}  // namespace hierglm
