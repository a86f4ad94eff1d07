#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tertius {

using PubIdx = std::uint32_t;
using AuthorIdx = std::uint32_t;
using Position = std::uint32_t;  // rank of a publication in the timeline

inline constexpr std::int32_t kNoIndex = -1;

// Calendar date with optional month/day (0 = absent).
struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  // Absent month/day sort after every present value of the same year.
  [[nodiscard]] constexpr int month_key() const { return month == 0 ? 13 : month; }
  [[nodiscard]] constexpr int day_key() const { return day == 0 ? 32 : day; }

  friend constexpr std::strong_ordering operator<=>(const Date& lhs, const Date& rhs) {
    if (auto c = lhs.year <=> rhs.year; c != 0) return c;
    if (auto c = lhs.month_key() <=> rhs.month_key(); c != 0) return c;
    return lhs.day_key() <=> rhs.day_key();
  }
  friend constexpr bool operator==(const Date& lhs, const Date& rhs) {
    return (lhs <=> rhs) == 0;
  }
};

// Malformed input: bad TSV row, missing file, bad config value.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input parsed but violates a data invariant (dangling key, duplicates, ...).
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Null-model stratum where the degree constraints cannot be met.
class StratumInfeasible : public std::runtime_error {
 public:
  StratumInfeasible(std::string stratum, const std::string& what)
      : std::runtime_error(what), stratum_(std::move(stratum)) {}
  [[nodiscard]] const std::string& stratum() const { return stratum_; }

 private:
  std::string stratum_;
};

}  // namespace tertius
