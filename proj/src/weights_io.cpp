#include "edgetune/weights_io.hpp"

#include <map>
#include <sstream>

#include "edgetune/error.hpp"
#include "edgetune/numeric_text.hpp"

namespace edgetune {

namespace {

enum class Column { ratio, count };

struct WeightRows {
  Column column;
  std::map<int, std::string_view> raw;
  std::map<int, std::size_t> line_of;
};

// Lines are kept alive by the caller.
WeightRows read_rows(const std::vector<std::string>& lines, const std::string& source) {
  WeightRows rows{Column::ratio, {}, {}};
  bool have_header = false;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      if (line == "b,r") {
        rows.column = Column::ratio;
      } else if (line == "b,n_s_acc") {
        rows.column = Column::count;
      } else {
        throw ParseError(source, n + 1, "expected header 'b,r' or 'b,n_s_acc'");
      }
      have_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw ParseError(source, n + 1, "expected 'batch_size,value'");
    const auto b = parse_int(fields[0]);
    if (!b || *b <= 0) throw ParseError(source, n + 1, "invalid batch size");
    const int key = static_cast<int>(*b);
    if (!rows.raw.emplace(key, fields[1]).second) {
      throw ParseError(source, n + 1, "duplicate batch size " + std::to_string(key));
    }
    rows.line_of[key] = n + 1;
  }
  if (!have_header) throw ParseError(source, lines.size() + 1, "missing header");
  if (rows.raw.empty()) throw ParseError(source, lines.size() + 1, "no batch sizes");
  return rows;
}

SampleCounts to_counts(const WeightRows& rows, const std::string& source) {
  SampleCounts counts;
  for (const auto& [b, text] : rows.raw) {
    const auto n = parse_int(text);
    if (!n || *n <= 0) throw ParseError(source, rows.line_of.at(b), "invalid count");
    counts[b] = *n;
  }
  return counts;
}

}  // namespace

RelationVector load_relation_vector(std::string_view text, const std::string& source,
                                    std::string source_id) {
  std::istringstream in{std::string(text)};
  const auto lines = read_lines(in);
  const auto rows = read_rows(lines, source);
  if (rows.column == Column::count) {
    return relation_vector(to_counts(rows, source), std::move(source_id));
  }
  std::map<int, double> ratios;
  for (const auto& [b, raw] : rows.raw) {
    const auto v = parse_double(raw);
    if (!v) throw ParseError(source, rows.line_of.at(b), "invalid ratio");
    ratios[b] = *v;
  }
  try {
    return RelationVector(std::move(ratios), std::move(source_id));
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
}

SampleCounts load_counts(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  const auto lines = read_lines(in);
  const auto rows = read_rows(lines, source);
  if (rows.column != Column::count) throw DataError(source + ": expected a 'b,n_s_acc' file");
  return to_counts(rows, source);
}

std::string save_relation_vector(const RelationVector& r) {
  std::string out = "b,r\n";
  for (const auto& [b, v] : r.entries()) out += std::to_string(b) + ',' + format_double(v) + '\n';
  return out;
}

std::string save_counts(const SampleCounts& counts) {
  std::string out = "b,n_s_acc\n";
  for (const auto& [b, n] : counts) out += std::to_string(b) + ',' + std::to_string(n) + '\n';
  return out;
}

}  // namespace edgetune
