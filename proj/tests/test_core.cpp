#include <doctest.h>

#include <set>

#include "psimf/core.hpp"
#include "psimf/dataset.hpp"

using namespace psimf;

TEST_CASE("derived seeds are distinct and stable") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(s, i));
  CHECK(seen.size() == 4000);
  static_assert(derive_seed(1, 2) == derive_seed(1, 2));
  Rng a = make_stream(9, 3), b = make_stream(9, 3);
  CHECK(a() == b());
}

TEST_CASE("errors carry their kind") {
  const Error e(ErrorKind::EmptyTruncation, "nothing left");
  CHECK(e.kind() == ErrorKind::EmptyTruncation);
  CHECK(std::string(e.what()) == "EmptyTruncation: nothing left");
  CHECK(e.detail() == "nothing left");
}

TEST_CASE("dataset validation") {
  LongitudinalDataset d(2, 1);
  d.at(0, 0) = {VectorXd::LinSpaced(3, 0.0, 1.0), VectorXd::Zero(3)};
  d.at(1, 0) = {VectorXd::LinSpaced(2, 0.2, 0.4), VectorXd::Zero(2)};
  CHECK_NOTHROW(d.validate());

  auto kind = [](const LongitudinalDataset& x) {
    try {
      x.validate();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  LongitudinalDataset e = d;
  e.at(1, 0).values = VectorXd::Zero(3);
  CHECK(kind(e) == ErrorKind::DimensionMismatch);
  e = d;
  e.at(1, 0) = {};
  CHECK(kind(e) == ErrorKind::EmptyRecord);
  e = d;
  e.at(0, 0).times[2] = 1.5;
  CHECK(kind(e) == ErrorKind::TimeOutOfRange);
  e = d;
  e.at(0, 0).times[0] = 0.9;
  CHECK(kind(e) == ErrorKind::InvalidArgument);
}
