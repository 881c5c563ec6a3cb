#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "outlook/types.hpp"

namespace outlook {

/// A labeled dataset living in its own feature space.
///
/// Samples are rows and features are columns. Labels are 1-based class
/// indices in 1..c.
struct Outlook {
  std::string id;
  Matrix features;
  std::vector<int> labels;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }
  /// Largest label present; 0 for an empty outlook.
  int num_classes() const;
  /// Throws InputError unless labels and features are consistent and finite.
  void validate() const;
};

struct ClassView {
  int class_index = 0;
  std::vector<Index> rows;
};

struct DatasetSplit {
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
};

Outlook parse_csv(std::istream& in, std::string id = {});
Outlook load_csv(const std::filesystem::path& path, std::string id = {});

/// Emits `f0,...,f{d-1},label` with round-trip (17 significant digit) floats.
void write_csv(std::ostream& out, const Matrix& features, std::span<const int> labels);
void write_csv(std::ostream& out, const Outlook& o);
void save_csv(const std::filesystem::path& path, const Outlook& o);

/// One view per class 1..c. `num_classes` defaults to the outlook's max label;
/// pass the experiment-wide c to obtain (possibly empty) views for every class.
std::vector<ClassView> class_partition(const Outlook& o, int num_classes = 0);

/// Per class, max(min_per_class, ceil(fraction * class size)) rows go to
/// train (capped at the class size); the rest to test. Both row lists are sorted.
DatasetSplit stratified_split(const Outlook& o, double label_fraction, std::uint64_t seed,
                              std::size_t min_per_class = 1);

/// Stratified k-fold partition: split f holds fold f as test and the other
/// folds as train. Every class is dealt round-robin over the folds after a
/// seeded shuffle.
std::vector<DatasetSplit> stratified_kfold(const Outlook& o, int folds, std::uint64_t seed);

Matrix select_rows(const Matrix& m, std::span<const Index> rows);
Outlook subset(const Outlook& o, std::span<const Index> rows);

}  // namespace outlook
