#include "vinekde/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vinekde {

std::size_t LabeledDataset::count(char label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

std::pair<LabeledDataset, LabeledDataset> LabeledDataset::split(double fraction) const {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split fraction must be in (0,1)");
  const std::size_t n = features.rows;
  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n)
    throw std::invalid_argument("split leaves an empty part");
  LabeledDataset train, test;
  const std::size_t d = features.cols;
  train.features = Matrix(n_train, d);
  test.features = Matrix(n - n_train, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = (i < n_train) ? train.features.row(i) : test.features.row(i - n_train);
    const auto src = features.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
    (i < n_train ? train.labels : test.labels).push_back(labels[i]);
  }
  return {std::move(train), std::move(test)};
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

char normalize_label(const std::string& cell, const std::string& path,
                     std::size_t line_no) {
  std::string t = cell;
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
  if (t.size() == 1) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
    if (c == 'G' || c == 'H') return c;
  }
  throw std::invalid_argument("file '" + path + "' row " + std::to_string(line_no) +
                              ": unknown label '" + cell + "' (expected g or h)");
}

} // namespace

LabeledDataset load_labeled_csv(const std::string& path,
                                const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("file '" + path + "' is empty");
  line = strip_cr(line);
  auto first_row = split_line(line);
  const std::size_t cols = first_row.size();
  if (cols < 2)
    throw std::invalid_argument("file '" + path + "' needs features and a label column");

  // header detection: a named label column means a header row; otherwise the
  // first row must already be data with exactly one non-numeric (label) cell
  std::size_t label_idx = cols;
  bool first_row_is_data = false;
  for (std::size_t c = 0; c < cols; ++c)
    if (first_row[c] == label_column) label_idx = c;
  if (label_idx == cols) {
    std::size_t non_numeric = cols;
    double tmp;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!parse_double(first_row[c], tmp)) {
        if (non_numeric != cols) { non_numeric = cols; break; }
        non_numeric = c;
      }
    }
    if (non_numeric == cols)
      throw std::invalid_argument("file '" + path + "': label column '" +
                                  label_column + "' not found in header");
    label_idx = non_numeric;
    first_row_is_data = true;
  }

  LabeledDataset ds;
  std::vector<double> buf;
  std::size_t rows = 0;
  std::size_t line_no = 1;

  auto consume_row = [&](const std::vector<std::string>& cells, std::size_t lno) {
    if (cells.size() != cols)
      throw std::invalid_argument("file '" + path + "' row " + std::to_string(lno) +
                                  ": expected " + std::to_string(cols) + " cells");
    for (std::size_t c = 0; c < cols; ++c) {
      if (c == label_idx) continue;
      double v;
      if (!parse_double(cells[c], v) || !std::isfinite(v))
        throw std::invalid_argument("file '" + path + "' row " + std::to_string(lno) +
                                    " column " + std::to_string(c + 1) +
                                    ": cannot parse '" + cells[c] + "' as a number");
      buf.push_back(v);
    }
    ds.labels.push_back(normalize_label(cells[label_idx], path, lno));
    ++rows;
  };

  if (first_row_is_data) consume_row(first_row, line_no);
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    consume_row(split_line(line), line_no);
  }
  if (rows == 0) throw std::invalid_argument("file '" + path + "' has no data rows");

  ds.features.rows = rows;
  ds.features.cols = cols - 1;
  ds.features.data = std::move(buf);
  return ds;
}

double bayes_posterior(double f_g, double f_h, double pi_g, double pi_h,
                       bool* prior_fallback) {
  if (f_g < 0.0 || f_h < 0.0)
    throw std::invalid_argument("bayes_posterior: densities must be nonnegative");
  if (std::abs(pi_g + pi_h - 1.0) > 1e-12)
    throw std::invalid_argument("bayes_posterior: priors must sum to 1");
  const double num = pi_g * f_g;
  const double den = num + pi_h * f_h;
  if (den <= 0.0) {
    if (prior_fallback) *prior_fallback = true;
    return pi_g;
  }
  return num / den;
}

RocSummary roc_and_summary(std::span<const double> posteriors,
                           std::span<const char> labels) {
  const std::size_t n = posteriors.size();
  if (n != labels.size())
    throw std::invalid_argument("roc_and_summary: size mismatch");
  const std::size_t n_pos = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), 'G'));
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_and_summary: need both classes");

  // sort by posterior descending; sweep thresholds over distinct values
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return posteriors[a] > posteriors[b];
  });

  RocSummary out;
  out.roc.emplace_back(0.0, 0.0); // threshold above every posterior
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n;) {
    const double value = posteriors[idx[i]];
    while (i < n && posteriors[idx[i]] == value) {
      if (labels[idx[i]] == 'G') ++tp; else ++fp;
      ++i;
    }
    // threshold just below `value`: everything seen so far is classified G
    out.roc.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                         static_cast<double>(tp) / static_cast<double>(n_pos));
  }

  const double targets[] = {0.01, 0.02, 0.05, 0.1, 0.2};
  for (double t : targets) {
    double best_fpr = 0.0, best_tpr = 0.0;
    for (const auto& [fpr, tpr] : out.roc) {
      if (fpr <= t && fpr >= best_fpr) {
        best_fpr = fpr;
        best_tpr = tpr; // sweep order: at equal FPR the later (larger) TPR wins
      }
    }
    out.tpr_at_fpr[t] = best_tpr;
  }
  out.loacc = (out.tpr_at_fpr[0.01] + out.tpr_at_fpr[0.02] + out.tpr_at_fpr[0.05]) / 3.0;
  out.highacc = (out.tpr_at_fpr[0.1] + out.tpr_at_fpr[0.2]) / 2.0;
  return out;
}

ClassificationResult run_classification(const LabeledDataset& train,
                                        const LabeledDataset& test,
                                        const ClassifyOptions& options) {
  const std::size_t d = train.features.cols;
  if (test.features.cols != d)
    throw std::invalid_argument("run_classification: train/test dimension mismatch");

  auto class_rows = [&](char label) {
    Matrix m;
    m.cols = d;
    std::size_t taken = 0;
    for (std::size_t i = 0; i < train.features.rows; ++i) {
      if (train.labels[i] != label) continue;
      if (options.subsample_per_class > 0 && taken >= options.subsample_per_class)
        break;
      const auto r = train.features.row(i);
      m.data.insert(m.data.end(), r.begin(), r.end());
      ++taken;
    }
    m.rows = taken;
    return m;
  };

  const Matrix rows_g = class_rows('G');
  const Matrix rows_h = class_rows('H');
  if (rows_g.rows == 0 || rows_h.rows == 0)
    throw std::invalid_argument("run_classification: both classes must be present "
                                "in the training rows");

  VineFitOptions fopts;
  fopts.independence_test = options.independence_test;
  fopts.independence_level = options.independence_level;
  fopts.margin_bandwidth_multiplier = options.margin_bandwidth_multiplier;

  VineDensityModel model_g, model_h;
  try {
    model_g = fit_vine(rows_g, fopts);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("class G fit failed: ") + e.what());
  }
  try {
    model_h = fit_vine(rows_h, fopts);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("class H fit failed: ") + e.what());
  }

  ClassificationResult res;
  res.n_train_g = rows_g.rows;
  res.n_train_h = rows_h.rows;

  const std::vector<double> dens_g = model_g.density_batch(test.features);
  const std::vector<double> dens_h = model_h.density_batch(test.features);

  const double pi_g = options.prior_g;
  const double pi_h = 1.0 - pi_g;
  res.posteriors.resize(test.features.rows);
  std::atomic<std::uint64_t> fallbacks{0};
  const std::int64_t n_test = static_cast<std::int64_t>(test.features.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n_test; ++i) {
    bool fb = false;
    res.posteriors[i] = bayes_posterior(dens_g[i], dens_h[i], pi_g, pi_h, &fb);
    if (fb) fallbacks.fetch_add(1, std::memory_order_relaxed);
  }
  res.prior_fallbacks = fallbacks.load();

  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.labels.size(); ++i) {
    const char predicted = res.posteriors[i] > 0.5 ? 'G' : 'H';
    if (predicted == test.labels[i]) ++correct;
  }
  res.accuracy_at_half =
      static_cast<double>(correct) / static_cast<double>(test.labels.size());

  res.summary = roc_and_summary(res.posteriors, test.labels);
  return res;
}

} // namespace vinekde
