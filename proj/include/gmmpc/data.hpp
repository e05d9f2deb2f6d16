#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gmmpc {

/// Per-column z-score statistics (population standard deviation).
struct NormStats {
  std::vector<std::string> columns;
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Row-major numeric table with named columns.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> columns, std::vector<double> values);

  std::size_t rows() const { return cols() == 0 ? 0 : values_.size() / cols(); }
  std::size_t cols() const { return columns_.size(); }
  bool empty() const { return values_.empty(); }

  const std::vector<std::string>& columns() const { return columns_; }
  std::optional<std::size_t> column_index(std::string_view name) const;

  double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
  double& at(std::size_t row, std::size_t col) { return values_[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }
  const std::vector<double>& values() const { return values_; }

  const std::optional<NormStats>& norm_stats() const { return norm_; }
  void set_norm_stats(std::optional<NormStats> stats) { norm_ = std::move(stats); }

  Dataset subset(std::span<const std::size_t> row_indices) const;
  /// Reorders columns to `names`; throws Error(data) naming a missing column.
  Dataset select(const std::vector<std::string>& names) const;

 private:
  std::vector<std::string> columns_;
  std::vector<double> values_;
  std::optional<NormStats> norm_;
};

Dataset load_csv(std::string_view text);
Dataset load_csv_file(const std::string& path);
std::string to_csv(const Dataset& data);

Dataset zscore_fit_transform(const Dataset& train);
Dataset zscore_apply(const NormStats& stats, const Dataset& other);
Dataset zscore_inverse(const NormStats& stats, const Dataset& normalized);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded permutation split into k contiguous folds; the first n mod k folds
/// get one extra row. Index lists are sorted.
std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// Shuffled partition of 0..n-1 into batches of `batch_size` (last one may be
/// short), keyed by (seed, pass_index).
std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size,
                                                  std::uint64_t seed, std::uint64_t pass_index);

/// splitmix64 finaliser, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace gmmpc
