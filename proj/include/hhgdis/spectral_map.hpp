#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hhgdis/error.hpp"

namespace hhgdis {

/// Dense 2D array over two labelled axes; row index runs over `rows`.
struct SpectralMap {
  std::string row_label;
  std::string col_label;
  std::vector<double> rows;
  std::vector<double> cols;
  std::vector<double> values;

  SpectralMap() = default;
  SpectralMap(std::string rl, std::vector<double> r, std::string cl, std::vector<double> c)
      : row_label(std::move(rl)), col_label(std::move(cl)), rows(std::move(r)), cols(std::move(c)),
        values(rows.size() * cols.size(), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return values[i * cols.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols.size() + j]; }

  friend bool operator==(const SpectralMap&, const SpectralMap&) = default;
};

}  // namespace hhgdis
