#include "psimf/core.hpp"

#include <algorithm>

#include "psimf/dataset.hpp"

namespace psimf {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::OrderTooLarge: return "OrderTooLarge";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::PartitionMismatch: return "PartitionMismatch";
    case ErrorKind::EmptyTruncation: return "EmptyTruncation";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorKind::EmptyRecord: return "EmptyRecord";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

void LongitudinalDataset::validate() const {
  for (Index i = 0; i < n_; ++i) {
    for (Index j = 0; j < m_; ++j) {
      const Record& rec = at(i, j);
      const std::string where = "record (" + std::to_string(i) + ", " + std::to_string(j) + ")";
      if (rec.times.size() != rec.values.size())
        throw Error(ErrorKind::DimensionMismatch, where + " has mismatched times/values");
      if (rec.times.size() == 0) throw Error(ErrorKind::EmptyRecord, where + " is empty");
      if (rec.times.minCoeff() < 0.0 || rec.times.maxCoeff() > 1.0)
        throw Error(ErrorKind::TimeOutOfRange, where + " has times outside [0,1]");
      if (!std::is_sorted(rec.times.data(), rec.times.data() + rec.times.size()))
        throw Error(ErrorKind::InvalidArgument, where + " has unsorted times");
    }
  }
}

bool operator==(const LongitudinalDataset& a, const LongitudinalDataset& b) {
  if (a.n_ != b.n_ || a.m_ != b.m_) return false;
  for (std::size_t k = 0; k < a.records_.size(); ++k) {
    const Record& x = a.records_[k];
    const Record& y = b.records_[k];
    if (x.times.size() != y.times.size() || x.values.size() != y.values.size()) return false;
    if (x.times != y.times || x.values != y.values) return false;
  }
  return true;
}

}  // namespace psimf
