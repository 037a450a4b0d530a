#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "vinekde/classify.hpp"
#include "vinekde/numerics.hpp"
#include "vinekde/rng.hpp"

using namespace vinekde;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/vinekde_test_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

// two well-separated Gaussian blobs in d=2, labels alternating
LabeledDataset blobs(std::size_t n_per_class, std::uint64_t seed) {
  RngStream rng(seed);
  LabeledDataset ds;
  ds.features = Matrix(2 * n_per_class, 2);
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const bool is_g = (i % 2 == 0);
    const double mu = is_g ? 2.0 : -2.0;
    ds.features.at(i, 0) = mu + rng.normal();
    ds.features.at(i, 1) = rng.normal();
    ds.labels.push_back(is_g ? 'G' : 'H');
  }
  return ds;
}

} // namespace

TEST_CASE("labeled csv loading") {
  const auto path = write_temp("toy.csv",
                               "a,b,class\n1.0,2.0,g\n3.0,4.0,h\n5.0,6.0,G\n");
  const auto ds = load_labeled_csv(path, "class");
  CHECK(ds.features.rows == 3);
  CHECK(ds.features.cols == 2);
  CHECK(ds.labels == std::vector<char>{'G', 'H', 'G'});
  CHECK(ds.features.at(1, 1) == 4.0);

  // headerless file: label column found by content
  const auto p2 = write_temp("toy2.csv", "1.0,2.0,g\n3.0,4.0,h\n");
  const auto d2 = load_labeled_csv(p2, "class");
  CHECK(d2.features.rows == 2);
  CHECK(d2.labels == std::vector<char>{'G', 'H'});

  const auto bad = write_temp("bad.csv", "a,b,class\n1.0,2.0,x\n");
  CHECK_THROWS_WITH_AS(load_labeled_csv(bad, "class"),
                       doctest::Contains("row 2"), std::invalid_argument);
  CHECK_THROWS_AS(load_labeled_csv("/nonexistent/nope.csv", "class"),
                  std::invalid_argument);
}

TEST_CASE("positional split") {
  const auto ds = blobs(50, 1);
  const auto [train, test] = ds.split(2.0 / 3.0);
  CHECK(train.features.rows == 66);
  CHECK(test.features.rows == 34);
  CHECK(train.labels.size() == 66);
  // order preserved
  CHECK(train.labels[0] == ds.labels[0]);
  CHECK(test.labels[0] == ds.labels[66]);
  CHECK_THROWS_AS(ds.split(0.0), std::invalid_argument);
}

TEST_CASE("bayes posterior") {
  CHECK(bayes_posterior(1.0, 1.0, 0.5, 0.5) == 0.5);
  CHECK(bayes_posterior(2.0, 1.0, 0.5, 0.5) == doctest::Approx(2.0 / 3.0));
  CHECK(bayes_posterior(0.1, 5.0, 1.0, 0.0) == 1.0);
  bool fb = false;
  CHECK(bayes_posterior(0.0, 0.0, 0.4, 0.6, &fb) == 0.4);
  CHECK(fb);
  // invariant under common scaling of both densities
  for (double s : {1e-6, 1.0, 1e6})
    CHECK(bayes_posterior(2.0 * s, 1.0 * s, 0.5, 0.5) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  // monotone in f_g
  double prev = -1.0;
  for (double fg = 0.0; fg <= 5.0; fg += 0.25) {
    const double p = bayes_posterior(fg, 1.0, 0.5, 0.5);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("roc on separated and constant scores") {
  std::vector<double> sep{0.9, 0.8, 0.2, 0.1};
  std::vector<char> lab{'G', 'G', 'H', 'H'};
  auto s = roc_and_summary(sep, lab);
  CHECK(s.loacc == 1.0);
  CHECK(s.highacc == 1.0);
  for (const auto& [t, tpr] : s.tpr_at_fpr) CHECK(tpr == 1.0);

  // label-independent constant: no better than the diagonal
  std::vector<double> flat(20, 0.5);
  std::vector<char> lab20;
  for (int i = 0; i < 20; ++i) lab20.push_back(i < 10 ? 'G' : 'H');
  s = roc_and_summary(flat, lab20);
  for (const auto& [t, tpr] : s.tpr_at_fpr)
    CHECK(tpr <= t + 1.0 / 10.0 + 1e-12);

  // single-class input is an error
  std::vector<char> only_g(4, 'G');
  CHECK_THROWS_AS(roc_and_summary(sep, only_g), std::invalid_argument);
}

TEST_CASE("roc is a nondecreasing staircase") {
  RngStream rng(12);
  std::vector<double> post(300);
  std::vector<char> lab(300);
  for (std::size_t i = 0; i < post.size(); ++i) {
    lab[i] = rng.uniform01() < 0.4 ? 'G' : 'H';
    post[i] = rng.uniform01() * (lab[i] == 'G' ? 1.2 : 1.0);
    post[i] = std::min(post[i], 1.0);
  }
  const auto s = roc_and_summary(post, lab);
  double fpr = -1.0, tpr = -1.0;
  for (const auto& [f, t] : s.roc) {
    CHECK(f >= fpr);
    CHECK(t >= tpr);
    fpr = f;
    tpr = t;
  }
  CHECK(s.roc.front().first == 0.0);
  CHECK(s.roc.back().first == 1.0);
  CHECK(s.roc.back().second == 1.0);
}

TEST_CASE("well-separated blobs classify accurately") {
  const auto ds = blobs(750, 20260301);
  const auto res = run_classification(ds, ds, {});
  CHECK(res.accuracy_at_half >= 0.95);
  CHECK(res.n_train_g == 750);
  CHECK(res.n_train_h == 750);
}

TEST_CASE("prior one forces class G") {
  const auto ds = blobs(100, 5);
  ClassifyOptions opts;
  opts.prior_g = 1.0;
  const auto res = run_classification(ds, ds, opts);
  for (double p : res.posteriors) CHECK(p == 1.0);
}

TEST_CASE("subsampling caps the per-class training rows") {
  const auto ds = blobs(200, 9);
  ClassifyOptions opts;
  opts.subsample_per_class = 50;
  const auto res = run_classification(ds, ds, opts);
  CHECK(res.n_train_g == 50);
  CHECK(res.n_train_h == 50);
}

TEST_CASE("classification pipeline is deterministic") {
  const auto ds = blobs(150, 31);
  const auto [train, test] = ds.split(0.6667);
  const auto r1 = run_classification(train, test, {});
  const auto r2 = run_classification(train, test, {});
  REQUIRE(r1.posteriors.size() == r2.posteriors.size());
  for (std::size_t i = 0; i < r1.posteriors.size(); ++i)
    CHECK(r1.posteriors[i] == r2.posteriors[i]);
  CHECK(r1.summary.loacc == r2.summary.loacc);
}
