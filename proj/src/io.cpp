#include "psimf/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <string_view>
#include <vector>

namespace psimf {

namespace {

struct Row {
  Index subject;
  Index feature;
  double time;
  double value;
};

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

double parse_number(std::string_view field, std::size_t row) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty() || !std::isfinite(v))
    throw Error(ErrorKind::ParseError, "row " + std::to_string(row) + ": bad number '" + std::string(field) + "'");
  return v;
}

Index intern(std::map<std::string, Index, std::less<>>& ids, std::string_view key) {
  auto it = ids.find(key);
  if (it != ids.end()) return it->second;
  const Index next = static_cast<Index>(ids.size());
  ids.emplace(std::string(key), next);
  return next;
}

}  // namespace

LongitudinalDataset read_csv(std::istream& in, const IngestOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "missing header");
  std::string_view header = trim_cr(line);
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  if (header != kCsvHeader)
    throw Error(ErrorKind::ParseError, "header must be '" + std::string(kCsvHeader) + "'");

  std::map<std::string, Index, std::less<>> subjects, features;
  std::vector<Row> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    const std::string_view text = trim_cr(line);
    if (text.empty()) continue;
    std::string_view fields[4];
    std::size_t start = 0;
    for (int f = 0; f < 4; ++f) {
      const std::size_t comma = text.find(',', start);
      if ((f < 3) == (comma == std::string_view::npos))
        throw Error(ErrorKind::ParseError, "row " + std::to_string(row_number) + ": expected 4 fields");
      fields[f] = text.substr(start, f < 3 ? comma - start : std::string_view::npos);
      start = comma + 1;
    }
    if (fields[0].empty() || fields[1].empty())
      throw Error(ErrorKind::ParseError, "row " + std::to_string(row_number) + ": empty identifier");
    const Index subject = intern(subjects, fields[0]);
    const Index feature = intern(features, fields[1]);
    rows.push_back({subject, feature, parse_number(fields[2], row_number), parse_number(fields[3], row_number)});
  }
  if (rows.empty()) throw Error(ErrorKind::ParseError, "no observations");

  if (options.normalize_time) {
    const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                              [](const Row& a, const Row& b) { return a.time < b.time; });
    const double t0 = lo->time, span = hi->time - lo->time;
    for (Row& r : rows) r.time = span > 0.0 ? (r.time - t0) / span : 0.0;
  } else {
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (rows[k].time < 0.0 || rows[k].time > 1.0)
        throw Error(ErrorKind::TimeOutOfRange, "observation " + std::to_string(k + 1) + " has time " +
                                                   std::to_string(rows[k].time) + " outside [0,1]");
  }

  const Index n = static_cast<Index>(subjects.size());
  const Index m = static_cast<Index>(features.size());
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(n * m));
  for (std::size_t k = 0; k < rows.size(); ++k)
    buckets[static_cast<std::size_t>(rows[k].subject * m + rows[k].feature)].push_back(k);

  LongitudinalDataset data(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      std::vector<std::size_t>& idx = buckets[static_cast<std::size_t>(i * m + j)];
      if (idx.empty())
        throw Error(ErrorKind::EmptyRecord, "subject #" + std::to_string(i) + " has no rows for feature #" +
                                                std::to_string(j));
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rows[a].time < rows[b].time; });
      Record& rec = data.at(i, j);
      rec.times.resize(static_cast<Index>(idx.size()));
      rec.values.resize(static_cast<Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) {
        rec.times[static_cast<Index>(k)] = rows[idx[k]].time;
        rec.values[static_cast<Index>(k)] = rows[idx[k]].value;
      }
    }
  }
  return data;
}

LongitudinalDataset ingest_csv(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  return read_csv(in, options);
}

void write_csv(std::ostream& out, const LongitudinalDataset& data) {
  out << kCsvHeader << '\n';
  char buf[64];
  auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    out.write(buf, ptr - buf);
  };
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.m(); ++j) {
      const Record& rec = data.at(i, j);
      for (Index k = 0; k < rec.times.size(); ++k) {
        out << i << ',' << j << ',';
        put(rec.times[k]);
        out << ',';
        put(rec.values[k]);
        out << '\n';
      }
    }
  }
}

void export_csv(const std::string& path, const LongitudinalDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  write_csv(out, data);
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

}  // namespace psimf
