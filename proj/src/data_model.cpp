#include "outlook/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "outlook/rng.hpp"

namespace outlook {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string where(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

int Outlook::num_classes() const {
  int c = 0;
  for (int l : labels) c = std::max(c, l);
  return c;
}

void Outlook::validate() const {
  if (static_cast<Index>(labels.size()) != features.rows()) {
    throw InputError("outlook '" + id + "': " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(features.rows()) + " rows");
  }
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 1) {
      throw InputError("outlook '" + id + "': label out of range at row " + std::to_string(r + 1));
    }
  }
  if (!features.allFinite()) {
    throw InputError("outlook '" + id + "': non-finite feature value");
  }
}

Outlook parse_csv(std::istream& in, std::string id) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("csv: missing header row");
  const auto header = split_commas(trim(line));
  if (header.size() < 2 || trim(header.back()) != "label") {
    throw InputError("csv: malformed header, expected f0,...,f{d-1},label");
  }
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (trim(header[j]) != "f" + std::to_string(j)) {
      throw InputError("csv: malformed header at column " + std::to_string(j + 1) + ", expected f" +
                       std::to_string(j));
    }
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto body = trim(line);
    if (body.empty()) continue;
    ++row;
    const auto cells = split_commas(body);
    if (cells.size() != d + 1) {
      throw InputError("csv: ragged row at row " + std::to_string(row) + ": expected " +
                       std::to_string(d + 1) + " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      const auto cell = trim(cells[j]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
        throw InputError("csv: non-numeric cell at " + where(row, j + 1));
      }
      if (!std::isfinite(v)) throw InputError("csv: non-finite value at " + where(row, j + 1));
      values.push_back(v);
    }
    const auto cell = trim(cells[d]);
    long long label = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
      throw InputError("csv: non-integer label at " + where(row, d + 1));
    }
    if (label < 1 || label > 1'000'000) {
      throw InputError("csv: label out of range at row " + std::to_string(row));
    }
    labels.push_back(static_cast<int>(label));
  }

  Outlook o;
  o.id = std::move(id);
  o.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Index>(labels.size()), static_cast<Index>(d));
  o.labels = std::move(labels);
  return o;
}

Outlook load_csv(const std::filesystem::path& path, std::string id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  if (id.empty()) id = path.stem().string();
  try {
    return parse_csv(in, std::move(id));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_csv(std::ostream& out, const Matrix& features, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != features.rows()) {
    throw InputError("write_csv: label count does not match row count");
  }
  std::string buffer;
  for (Index j = 0; j < features.cols(); ++j) buffer += "f" + std::to_string(j) + ",";
  buffer += "label\n";
  char num[64];
  for (Index r = 0; r < features.rows(); ++r) {
    for (Index j = 0; j < features.cols(); ++j) {
      const auto res = std::to_chars(num, num + sizeof(num), features(r, j));
      buffer.append(num, res.ptr);
      buffer += ',';
    }
    buffer += std::to_string(labels[static_cast<std::size_t>(r)]);
    buffer += '\n';
  }
  out << buffer;
}

void write_csv(std::ostream& out, const Outlook& o) { write_csv(out, o.features, o.labels); }

void save_csv(const std::filesystem::path& path, const Outlook& o) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv(out, o);
  if (!out) throw InputError("write failed: " + path.string());
}

std::vector<ClassView> class_partition(const Outlook& o, int num_classes) {
  const int c = std::max(num_classes, o.num_classes());
  std::vector<ClassView> views(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) views[static_cast<std::size_t>(i)].class_index = i + 1;
  for (std::size_t r = 0; r < o.labels.size(); ++r) {
    views[static_cast<std::size_t>(o.labels[r] - 1)].rows.push_back(static_cast<Index>(r));
  }
  return views;
}

namespace {

void shuffle_rows(std::vector<Index>& rows, CounterRng& rng) {
  for (std::size_t i = rows.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(rows[i - 1], rows[j]);
  }
}

}  // namespace

DatasetSplit stratified_split(const Outlook& o, double label_fraction, std::uint64_t seed,
                              std::size_t min_per_class) {
  if (!(label_fraction > 0.0 && label_fraction <= 1.0)) {
    throw InputError("stratified_split: label fraction must lie in (0, 1]");
  }
  DatasetSplit split;
  for (auto& view : class_partition(o)) {
    if (view.rows.empty()) continue;
    CounterRng rng{seed, 0x5b117ULL, static_cast<std::uint64_t>(view.class_index)};
    shuffle_rows(view.rows, rng);
    // Slack absorbs products like 0.07 * 100 = 7.000000000000001.
    const double want = std::ceil(label_fraction * static_cast<double>(view.rows.size()) - 1e-9);
    const auto take = std::min(view.rows.size(), std::max(min_per_class, static_cast<std::size_t>(std::max(1.0, want))));
    split.train_rows.insert(split.train_rows.end(), view.rows.begin(), view.rows.begin() + take);
    split.test_rows.insert(split.test_rows.end(), view.rows.begin() + take, view.rows.end());
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  return split;
}

std::vector<DatasetSplit> stratified_kfold(const Outlook& o, int folds, std::uint64_t seed) {
  if (folds < 2) throw InputError("stratified_kfold: need at least 2 folds");
  std::vector<int> fold_of(o.labels.size(), 0);
  for (auto& view : class_partition(o)) {
    CounterRng rng{seed, 0xf01dULL, static_cast<std::uint64_t>(view.class_index)};
    shuffle_rows(view.rows, rng);
    for (std::size_t i = 0; i < view.rows.size(); ++i) {
      fold_of[static_cast<std::size_t>(view.rows[i])] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
  }
  std::vector<DatasetSplit> splits(static_cast<std::size_t>(folds));
  for (std::size_t r = 0; r < fold_of.size(); ++r) {
    for (int f = 0; f < folds; ++f) {
      auto& s = splits[static_cast<std::size_t>(f)];
      (fold_of[r] == f ? s.test_rows : s.train_rows).push_back(static_cast<Index>(r));
    }
  }
  return splits;
}

Matrix select_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Outlook subset(const Outlook& o, std::span<const Index> rows) {
  Outlook out;
  out.id = o.id;
  out.features = select_rows(o.features, rows);
  out.labels.reserve(rows.size());
  for (auto r : rows) out.labels.push_back(o.labels[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace outlook
