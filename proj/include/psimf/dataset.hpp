#pragma once

#include <vector>

#include "psimf/core.hpp"

namespace psimf {

/// One functional record: sorted observation times in [0,1] and the values seen there.
struct Record {
  VectorXd times;
  VectorXd values;
};

/// Ragged n x m collection of records, subject-major.
class LongitudinalDataset {
 public:
  LongitudinalDataset() = default;
  LongitudinalDataset(Index n, Index m) : n_(n), m_(m), records_(static_cast<std::size_t>(n * m)) {}

  Index n() const noexcept { return n_; }
  Index m() const noexcept { return m_; }

  Record& at(Index i, Index j) { return records_[static_cast<std::size_t>(i * m_ + j)]; }
  const Record& at(Index i, Index j) const { return records_[static_cast<std::size_t>(i * m_ + j)]; }

  Index length(Index i, Index j) const { return at(i, j).times.size(); }

  /// Checks the record invariants (equal lengths, non-empty, sorted times in [0,1]).
  void validate() const;

  friend bool operator==(const LongitudinalDataset& a, const LongitudinalDataset& b);

 private:
  Index n_ = 0;
  Index m_ = 0;
  std::vector<Record> records_;
};

}  // namespace psimf
