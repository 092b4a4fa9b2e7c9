// Shared fixtures for the test suites: the 2x4 case-study table, a
// seed-pinned random-table generator, and an absolute-tolerance check.

#pragma once

#include <cmath>
#include <cstdint>

#include <doctest.h>

#include <Eigen/Core>

#include "lro/rng.hpp"
#include "lro/table.hpp"

// case-study 2x4 table used throughout the reference checks
inline lro::Table case_study_table() {
  Eigen::MatrixXd m(2, 4);
  m << 11, 8, 8, 5, 6, 4, 10, 12;
  return lro::Table(m);
}

// uniform counts in [min_count, max_count]; tables with an empty row are
// re-drawn so every draw is a valid Table
inline lro::Table random_table(std::uint64_t seed, std::uint64_t key,
                               std::uint64_t rep, int J, int max_count = 30,
                               int min_count = 0) {
  lro::RngStream s(seed, key, rep);
  for (;;) {
    Eigen::MatrixXd m(2, J);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < J; ++j) {
        int c = min_count +
                static_cast<int>(s.uniform01() * (max_count - min_count + 1));
        if (c > max_count) c = max_count;
        m(i, j) = c;
      }
    if (m.row(0).sum() > 0.0 && m.row(1).sum() > 0.0) return lro::Table(m);
  }
}

#define CHECK_NEAR(a, b, tol)                                  \
  do {                                                         \
    const double check_near_a = (a), check_near_b = (b);       \
    INFO(#a " = ", check_near_a, ", " #b " = ", check_near_b); \
    CHECK(std::abs(check_near_a - check_near_b) <= (tol));     \
  } while (0)
