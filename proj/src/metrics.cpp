#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "outlook/eval.hpp"
#include "outlook/parallel.hpp"

namespace outlook {

BerResult balanced_error_rate(std::span<const int> predicted, std::span<const int> actual, int num_classes) {
  if (predicted.size() != actual.size()) {
    throw InputError("balanced_error_rate: " + std::to_string(predicted.size()) + " predictions for " +
                     std::to_string(actual.size()) + " labels");
  }
  if (num_classes < 1) throw InputError("balanced_error_rate: need at least one class");
  BerResult r;
  r.confusion = Eigen::MatrixXi::Zero(num_classes, num_classes);
  for (std::size_t s = 0; s < actual.size(); ++s) {
    const int a = actual[s];
    const int p = predicted[s];
    if (a < 1 || a > num_classes) throw InputError("balanced_error_rate: actual label " + std::to_string(a) + " out of range");
    if (p < 1 || p > num_classes) {
      throw InputError("balanced_error_rate: predicted label " + std::to_string(p) + " out of range");
    }
    ++r.confusion(a - 1, p - 1);
  }
  r.per_class_error_rate = Vector::Constant(num_classes, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int present = 0;
  for (int i = 0; i < num_classes; ++i) {
    const int n = r.confusion.row(i).sum();
    if (n == 0) {
      r.excluded_classes.push_back(i + 1);
      continue;
    }
    const int errors = n - r.confusion(i, i);
    r.per_class_error_rate(i) = static_cast<double>(errors) / static_cast<double>(n);
    sum += r.per_class_error_rate(i);
    ++present;
  }
  if (present == 0) throw InputError("balanced_error_rate: empty test set");
  r.ber = sum / static_cast<double>(present);
  return r;
}

std::vector<int> knn_classify(const Matrix& train_x, std::span<const int> train_y, const Matrix& test_x, int k,
                              unsigned threads) {
  if (k < 1) throw InputError("knn_classify: k must be at least 1");
  if (train_x.rows() == 0) throw InputError("knn_classify: empty training set");
  if (train_x.rows() != static_cast<Index>(train_y.size())) {
    throw InputError("knn_classify: label count does not match training rows");
  }
  if (test_x.cols() != train_x.cols()) {
    throw InputError("knn_classify: test rows have " + std::to_string(test_x.cols()) + " features, training rows " +
                     std::to_string(train_x.cols()));
  }
  const int max_label = *std::max_element(train_y.begin(), train_y.end());
  const auto n = static_cast<std::size_t>(train_x.rows());
  const auto kk = std::min(static_cast<std::size_t>(k), n);
  // Row-major copy keeps each training point contiguous for the distance loop.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> train = train_x;
  const Index d = train_x.cols();

  std::vector<int> out(static_cast<std::size_t>(test_x.rows()));
  parallel_for(out.size(), threads, [&](std::size_t t) {
    thread_local std::vector<std::pair<double, std::size_t>> dist;
    thread_local std::vector<int> votes;
    dist.resize(n);
    const RowVector x = test_x.row(static_cast<Index>(t));
    for (std::size_t r = 0; r < n; ++r) {
      const double* p = train.data() + static_cast<Index>(r) * d;
      double s = 0.0;
      for (Index j = 0; j < d; ++j) {
        const double diff = p[j] - x(j);
        s += diff * diff;
      }
      dist[r] = {s, r};
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk - 1), dist.end());
    votes.assign(static_cast<std::size_t>(max_label) + 1, 0);
    // nth_element leaves an arbitrary order among equal distances at the
    // boundary; sort the prefix candidates by (distance, index) explicitly.
    const double cutoff = dist[kk - 1].first;
    std::vector<std::pair<double, std::size_t>> chosen;
    chosen.reserve(kk + 4);
    for (std::size_t r = 0; r < n; ++r) {
      if (dist[r].first <= cutoff) chosen.push_back(dist[r]);
    }
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i = 0; i < kk; ++i) ++votes[static_cast<std::size_t>(train_y[chosen[i].second])];
    int best = 1;
    for (int c = 1; c <= max_label; ++c) {
      if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    }
    out[t] = best;
  });
  return out;
}

}  // namespace outlook
