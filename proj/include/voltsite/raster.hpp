#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "voltsite/common.hpp"
#include "voltsite/geometry.hpp"

namespace voltsite {

// Row-major density grid, people/km². Row 0 starts at the origin and rows
// grow northward. Cell lookup is nearest-cell with floor indexing; the far
// extent edge folds into the last row/column so the extent is closed.
class PopulationRaster {
 public:
  PopulationRaster() = default;

  PopulationRaster(Point origin, double cell_size_km, int rows, int cols, std::vector<double> cells)
      : origin_(origin), cell_size_(cell_size_km), rows_(rows), cols_(cols), cells_(std::move(cells)) {
    if (rows_ <= 0 || cols_ <= 0) throw ValidationError("raster: rows and cols must be positive");
    if (cell_size_ <= 0.0) throw ValidationError("raster.cell_size_km: must be positive");
    if (cells_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_))
      throw ValidationError("raster.cells: size does not match rows*cols");
    rho_max_ = 0.0;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (!(cells_[i] >= 0.0))
        throw ValidationError("raster.cells[" + std::to_string(i) + "]: must be >= 0");
      rho_max_ = std::max(rho_max_, cells_[i]);
    }
  }

  const Point& origin() const { return origin_; }
  double cell_size_km() const { return cell_size_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<double>& cells() const { return cells_; }
  double rho_max() const { return rho_max_; }

  Rect extent() const {
    return {origin_.x, origin_.y, origin_.x + cols_ * cell_size_, origin_.y + rows_ * cell_size_};
  }

  double at(int row, int col) const {
    return cells_[static_cast<std::size_t>(row) * cols_ + col];
  }

  Point cell_center(int row, int col) const {
    return {origin_.x + (col + 0.5) * cell_size_, origin_.y + (row + 0.5) * cell_size_};
  }

  std::pair<int, int> cell_index(const Point& p) const {
    double fx = (p.x - origin_.x) / cell_size_;
    double fy = (p.y - origin_.y) / cell_size_;
    if (fx < 0.0 || fy < 0.0 || fx > cols_ || fy > rows_)
      throw ValidationError("density_at: point outside raster extent");
    int col = std::min(static_cast<int>(std::floor(fx)), cols_ - 1);
    int row = std::min(static_cast<int>(std::floor(fy)), rows_ - 1);
    return {row, col};
  }

  double density_at(const Point& p) const {
    auto [row, col] = cell_index(p);
    return at(row, col);
  }

 private:
  Point origin_;
  double cell_size_ = 1.0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> cells_;
  double rho_max_ = 0.0;
};

}  // namespace voltsite
