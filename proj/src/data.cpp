#include "gmmpc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "gmmpc/error.hpp"

namespace gmmpc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

Dataset::Dataset(std::vector<std::string> columns, std::vector<double> values)
    : columns_(std::move(columns)), values_(std::move(values)) {
  std::unordered_set<std::string> seen;
  for (const auto& c : columns_)
    if (!seen.insert(c).second) throw Error(ErrorCode::data, "duplicate column '" + c + "'");
  if (!columns_.empty() && values_.size() % columns_.size() != 0)
    throw Error(ErrorCode::data, "value count is not a multiple of the column count");
  if (columns_.empty() && !values_.empty())
    throw Error(ErrorCode::data, "values without columns");
  for (double v : values_)
    if (!std::isfinite(v)) throw Error(ErrorCode::data, "non-finite value in dataset");
}

std::optional<std::size_t> Dataset::column_index(std::string_view name) const {
  auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns_.begin());
}

Dataset Dataset::subset(std::span<const std::size_t> row_indices) const {
  std::vector<double> v;
  v.reserve(row_indices.size() * cols());
  for (std::size_t r : row_indices) {
    if (r >= rows()) throw Error(ErrorCode::invalid_argument, "row index out of range");
    auto src = row(r);
    v.insert(v.end(), src.begin(), src.end());
  }
  Dataset out(columns_, std::move(v));
  out.norm_ = norm_;
  return out;
}

Dataset Dataset::select(const std::vector<std::string>& names) const {
  if (names == columns_) return *this;
  std::vector<std::size_t> src;
  for (const auto& n : names) {
    auto c = column_index(n);
    if (!c) throw Error(ErrorCode::data, "dataset has no column '" + n + "'");
    src.push_back(*c);
  }
  std::vector<double> v;
  v.reserve(rows() * names.size());
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t c : src) v.push_back(at(r, c));
  Dataset out(names, std::move(v));
  if (norm_) {
    NormStats s;
    for (std::size_t c : src) {
      s.columns.push_back(norm_->columns[c]);
      s.mean.push_back(norm_->mean[c]);
      s.stddev.push_back(norm_->stddev[c]);
    }
    out.norm_ = std::move(s);
  }
  return out;
}

Dataset load_csv(std::string_view text) {
  std::vector<std::string> columns;
  std::vector<double> values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    auto cells = split_commas(line);
    if (header) {
      for (auto c : cells) {
        if (c.empty())
          throw Error(ErrorCode::data, "csv line 1: empty column name");
        columns.emplace_back(c);
      }
      header = false;
      continue;
    }
    if (cells.size() != columns.size())
      throw Error(ErrorCode::data, "csv line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(columns.size()) + " fields, found " +
                                       std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw Error(ErrorCode::data, "csv line " + std::to_string(line_no) + ", column '" +
                                         columns[c] + "': non-numeric value '" +
                                         std::string(cells[c]) + "'");
      values.push_back(v);
    }
  }
  if (header) throw Error(ErrorCode::data, "csv is empty");
  if (values.empty()) throw Error(ErrorCode::data, "csv has a header but no data rows");
  return Dataset(std::move(columns), std::move(values));
}

Dataset load_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open data file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return load_csv(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string to_csv(const Dataset& data) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t c = 0; c < data.cols(); ++c) os << (c ? "," : "") << data.columns()[c];
  os << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) os << (c ? "," : "") << data.at(r, c);
    os << '\n';
  }
  return os.str();
}

Dataset zscore_fit_transform(const Dataset& train) {
  if (train.rows() == 0) throw Error(ErrorCode::data, "cannot normalise an empty dataset");
  const std::size_t n = train.rows();
  NormStats stats;
  stats.columns = train.columns();
  for (std::size_t c = 0; c < train.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += train.at(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = train.at(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))))
      throw Error(ErrorCode::data, "column '" + train.columns()[c] + "' has zero variance");
    stats.mean.push_back(mean);
    stats.stddev.push_back(sd);
  }
  return zscore_apply(stats, train);
}

Dataset zscore_apply(const NormStats& stats, const Dataset& other) {
  Dataset aligned = other.select(stats.columns);
  std::vector<double> v = aligned.values();
  const std::size_t k = stats.columns.size();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (v[i] - stats.mean[i % k]) / stats.stddev[i % k];
  Dataset out(stats.columns, std::move(v));
  out.set_norm_stats(stats);
  return out;
}

Dataset zscore_inverse(const NormStats& stats, const Dataset& normalized) {
  Dataset aligned = normalized.select(stats.columns);
  std::vector<double> v = aligned.values();
  const std::size_t k = stats.columns.size();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i] * stats.stddev[i % k] + stats.mean[i % k];
  return Dataset(stats.columns, std::move(v));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::invalid_argument, "k-fold needs k >= 2");
  if (n < k)
    throw Error(ErrorCode::invalid_argument, "k-fold needs at least k rows (" +
                                                 std::to_string(n) + " < " + std::to_string(k) + ")");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(mix_seed(seed, 0x6b666f6c64ULL));
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Fold> folds(k);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].test.assign(perm.begin() + start, perm.begin() + start + size);
    folds[f].train.assign(perm.begin(), perm.begin() + start);
    folds[f].train.insert(folds[f].train.end(), perm.begin() + start + size, perm.end());
    std::sort(folds[f].test.begin(), folds[f].test.end());
    std::sort(folds[f].train.begin(), folds[f].train.end());
    start += size;
  }
  return folds;
}

std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size,
                                                  std::uint64_t seed, std::uint64_t pass_index) {
  if (batch_size == 0) throw Error(ErrorCode::invalid_argument, "batch size must be >= 1");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(mix_seed(seed, pass_index));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(perm.begin() + start, perm.begin() + end);
  }
  return batches;
}

}  // namespace gmmpc
