#pragma once

#include <iosfwd>
#include <string>

#include "psimf/dataset.hpp"

namespace psimf {

/// Header line of the long-format observation table.
inline constexpr const char* kCsvHeader = "subject_id,feature_id,time,value";

struct IngestOptions {
  /// Affinely map the global [min, max] of all times onto [0,1].
  bool normalize_time = false;
};

/// Reads `subject_id,feature_id,time,value` rows (LF or CRLF). Subjects and features are
/// indexed in order of first appearance; each record is sorted by time (stable).
LongitudinalDataset read_csv(std::istream& in, const IngestOptions& options = {});
LongitudinalDataset ingest_csv(const std::string& path, const IngestOptions& options = {});

/// Writes the dataset in the same format, subject and feature ids being their indices.
/// Numbers use 17 significant digits so a re-ingest is exact.
void write_csv(std::ostream& out, const LongitudinalDataset& data);
void export_csv(const std::string& path, const LongitudinalDataset& data);

}  // namespace psimf
