#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vinekde/matrix.hpp"
#include "vinekde/vinefit.hpp"

namespace vinekde {

//! Feature matrix plus binary class labels (G = signal, H = background).
struct LabeledDataset {
  Matrix features;
  std::vector<char> labels; // 'G' or 'H'

  std::size_t count(char label) const;
  //! Positional split: first floor(n*fraction) rows train, rest test.
  std::pair<LabeledDataset, LabeledDataset> split(double fraction) const;
};

//! Reads a CSV whose `label_column` holds g/h (case-insensitive). A header
//! row is used when present; a headerless file gets columns x1..xd and the
//! label column is found by content.
LabeledDataset load_labeled_csv(const std::string& path,
                                const std::string& label_column);

//! Posterior probability of class G under priors (pi_g, pi_h); falls back to
//! the prior when both densities vanish (callers may count such rows).
double bayes_posterior(double f_g, double f_h, double pi_g, double pi_h,
                       bool* prior_fallback = nullptr);

struct RocSummary {
  std::vector<std::pair<double, double>> roc; // (FPR, TPR), threshold descending
  std::map<double, double> tpr_at_fpr;        // at targets .01 .02 .05 .1 .2
  double loacc{0.0};                          // mean TPR at .01/.02/.05
  double highacc{0.0};                        // mean TPR at .1/.2
};

//! Threshold sweep over all distinct posterior values (classify G when
//! posterior > threshold); TPR at a target FPR uses the largest achieved
//! FPR below or at the target.
RocSummary roc_and_summary(std::span<const double> posteriors,
                           std::span<const char> labels);

struct ClassifyOptions {
  double prior_g{0.5};
  double margin_bandwidth_multiplier{2.0};
  bool independence_test{true};
  double independence_level{0.05};
  std::size_t subsample_per_class{0}; // 0 = use all training rows
};

struct ClassificationResult {
  RocSummary summary;
  std::vector<double> posteriors; // one per test row
  std::size_t n_train_g{0}, n_train_h{0};
  std::uint64_t prior_fallbacks{0};
  double accuracy_at_half{0.0};
};

//! Fits one vine density per class on the training rows and scores the test
//! rows with the Bayes posterior.
ClassificationResult run_classification(const LabeledDataset& train,
                                        const LabeledDataset& test,
                                        const ClassifyOptions& options = {});

} // namespace vinekde
