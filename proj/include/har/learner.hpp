#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace har {

// Principal axes of a sample matrix. Columns of `components` are unit length
// and mutually orthogonal; explained_variance is non-increasing; the first
// `retained` components reach the requested variance fraction.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;
  Eigen::VectorXd explained_variance;
  int retained = 0;
};

// One-vs-rest linear classifiers, one weight column and bias per class.
// Class order is sorted name order and also the prediction tie-break order.
struct SvmModel {
  std::vector<std::string> classes;
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  double c = 1.0;
};

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<std::vector<long long>> confusion;  // [true][predicted]
  std::vector<double> per_class_accuracy;
  double overall_accuracy = 0.0;
  long long total = 0;
};

// Centers the data and eigendecomposes its covariance, keeping the smallest
// component count whose cumulative variance reaches variance_target. When
// there are fewer samples than dimensions the eigenproblem is solved on the
// Gram matrix instead, which shares the nonzero spectrum.
inline PcaModel pca_fit(const Eigen::MatrixXd& x, double variance_target = 0.95) {
  if (x.rows() < 2) throw std::invalid_argument("pca needs at least two samples");
  if (!(variance_target > 0.0) || variance_target > 1.0)
    throw std::invalid_argument("variance target must lie in (0, 1]");

  const Eigen::Index n = x.rows(), d = x.cols();
  PcaModel model;
  model.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();

  std::vector<double> eigenvalues;
  Eigen::MatrixXd axes;
  double total_variance = 0.0;

  if (d <= n) {
    const Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    for (Eigen::Index j = d - 1; j >= 0; --j) {
      eigenvalues.push_back(std::max(solver.eigenvalues()(j), 0.0));
      total_variance += eigenvalues.back();
    }
    axes.resize(d, d);
    for (Eigen::Index j = 0; j < d; ++j) axes.col(j) = solver.eigenvectors().col(d - 1 - j);
  } else {
    const Eigen::MatrixXd gram = centered * centered.transpose() / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    std::vector<Eigen::VectorXd> kept_axes;
    double lambda_max = std::max(solver.eigenvalues()(n - 1), 0.0);
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      const double lambda = std::max(solver.eigenvalues()(j), 0.0);
      total_variance += lambda;
      if (lambda > lambda_max * 1e-12 && lambda > 0.0) {
        Eigen::VectorXd axis = centered.transpose() * solver.eigenvectors().col(j);
        axis /= std::sqrt(double(n - 1) * lambda);
        kept_axes.push_back(std::move(axis));
        eigenvalues.push_back(lambda);
      }
    }
    axes.resize(d, static_cast<Eigen::Index>(kept_axes.size()));
    for (std::size_t j = 0; j < kept_axes.size(); ++j)
      axes.col(static_cast<Eigen::Index>(j)) = kept_axes[j];
  }

  if (total_variance <= 0.0) {
    // all rows identical: a single zero-variance component
    model.components = Eigen::MatrixXd::Zero(d, 1);
    model.components(0, 0) = 1.0;
    model.explained_variance = Eigen::VectorXd::Zero(1);
    model.retained = 1;
    return model;
  }

  // drop numerically-zero directions so stored components stay orthonormal
  Eigen::Index kept = axes.cols();
  while (kept > 1 && eigenvalues[kept - 1] <= eigenvalues[0] * 1e-12) --kept;
  model.components = axes.leftCols(kept);
  model.explained_variance.resize(kept);
  for (Eigen::Index j = 0; j < kept; ++j) model.explained_variance(j) = eigenvalues[j];

  const double target_mass = variance_target * total_variance - 1e-9 * total_variance;
  double cumulative = 0.0;
  model.retained = static_cast<int>(kept);
  for (Eigen::Index j = 0; j < kept; ++j) {
    cumulative += eigenvalues[j];
    if (cumulative >= target_mass) {
      model.retained = static_cast<int>(j + 1);
      break;
    }
  }
  return model;
}

inline Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.mean.size())
    throw std::invalid_argument("pca transform: column count does not match the model");
  return (x.rowwise() - model.mean.transpose()) * model.components.leftCols(model.retained);
}

inline Eigen::MatrixXd pca_inverse_transform(const PcaModel& model, const Eigen::MatrixXd& z) {
  if (z.cols() != model.retained)
    throw std::invalid_argument("pca inverse transform: column count does not match");
  return (z * model.components.leftCols(model.retained).transpose()).rowwise() +
         model.mean.transpose();
}

// Hinge-loss objective of one binary classifier: ||w||^2/2 + C * total hinge.
inline double svm_objective(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& x,
                            const std::vector<int>& y, double c) {
  double obj = 0.5 * w.squaredNorm();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    obj += c * std::max(0.0, 1.0 - y[i] * (x.row(i).dot(w) + b));
  return obj;
}

namespace detail {

// Dual coordinate descent on the L1-hinge linear SVM. The bias rides along
// as an implicit unit feature (so it is L2-regularized, as in liblinear).
// Cyclic fixed-order updates keep the solve fully deterministic.
inline void solve_linear_svm(const Eigen::MatrixXd& x, const std::vector<int>& y, double c,
                             Eigen::VectorXd& w_out, double& b_out) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd q(n);
  double b = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) q(i) = x.row(i).squaredNorm() + 1.0;

  constexpr int kMaxSweeps = 20000;
  constexpr double kTol = 1e-10;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = y[i] * (x.row(i).dot(w) + b) - 1.0;
      double pg = g;
      if (alpha(i) <= 0.0)
        pg = std::min(g, 0.0);
      else if (alpha(i) >= c)
        pg = std::max(g, 0.0);
      worst = std::max(worst, std::abs(pg));
      if (pg == 0.0) continue;
      const double next = std::clamp(alpha(i) - g / q(i), 0.0, c);
      const double delta = next - alpha(i);
      if (delta != 0.0) {
        w += delta * y[i] * x.row(i).transpose();
        b += delta * y[i];
        alpha(i) = next;
      }
    }
    if (worst < kTol) break;
  }
  w_out = std::move(w);
  b_out = b;
}

inline std::vector<std::string> sorted_classes(const std::vector<std::string>& labels) {
  std::set<std::string> unique(labels.begin(), labels.end());
  return {unique.begin(), unique.end()};
}

}  // namespace detail

inline SvmModel svm_train(const Eigen::MatrixXd& x, const std::vector<std::string>& labels,
                          double c = 1.0) {
  if (x.rows() == 0) throw std::invalid_argument("svm: empty training set");
  if (static_cast<Eigen::Index>(labels.size()) != x.rows())
    throw std::invalid_argument("svm: label count does not match sample count");
  if (!(c > 0.0)) throw std::invalid_argument("svm: C must be positive");

  SvmModel model;
  model.classes = detail::sorted_classes(labels);
  if (model.classes.size() < 2) throw std::invalid_argument("svm: need at least two classes");
  model.c = c;
  model.weights.resize(x.cols(), static_cast<Eigen::Index>(model.classes.size()));
  model.bias.resize(static_cast<Eigen::Index>(model.classes.size()));

  std::vector<int> y(labels.size());
  for (std::size_t k = 0; k < model.classes.size(); ++k) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      y[i] = labels[i] == model.classes[k] ? 1 : -1;
    Eigen::VectorXd w;
    double b = 0.0;
    detail::solve_linear_svm(x, y, c, w, b);
    model.weights.col(static_cast<Eigen::Index>(k)) = w;
    model.bias(static_cast<Eigen::Index>(k)) = b;
  }
  return model;
}

// Highest one-vs-rest score wins; exact ties go to the earlier class name.
inline std::string svm_predict(const SvmModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.weights.rows())
    throw std::invalid_argument("svm predict: dimension mismatch");
  const Eigen::VectorXd scores = model.weights.transpose() * x + model.bias;
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < scores.size(); ++k)
    if (scores(k) > scores(best)) best = k;
  return model.classes[static_cast<std::size_t>(best)];
}

inline double accuracy(long long tp, long long tn, long long fp, long long fn) {
  if (tp < 0 || tn < 0 || fp < 0 || fn < 0)
    throw std::invalid_argument("accuracy: counts must be non-negative");
  const long long sum = tp + tn + fp + fn;
  if (sum == 0) throw std::invalid_argument("accuracy: all counts are zero");
  return 100.0 * static_cast<double>(tp + tn) / static_cast<double>(sum);
}

enum class PcaScope { kFold, kGlobal };

struct LoocvOptions {
  double pca_variance = 0.95;
  double svm_c = 1.0;
  PcaScope pca_scope = PcaScope::kFold;
};

// Leave-one-out evaluation. With fold scope the PCA basis is refit on each
// fold's training rows, so the held-out sample never leaks into the basis.
// A fold whose training rows collapse to one class predicts that class.
inline EvalReport loocv(const Eigen::MatrixXd& x, const std::vector<std::string>& labels,
                        const LoocvOptions& opts = {}) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw std::invalid_argument("loocv needs at least two samples");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("loocv: label count does not match sample count");

  EvalReport report;
  report.classes = detail::sorted_classes(labels);
  if (report.classes.size() < 2) throw std::invalid_argument("loocv needs at least two classes");
  std::map<std::string, int> class_index;
  for (std::size_t k = 0; k < report.classes.size(); ++k) class_index[report.classes[k]] = static_cast<int>(k);
  report.confusion.assign(report.classes.size(),
                          std::vector<long long>(report.classes.size(), 0));

  PcaModel global_pca;
  Eigen::MatrixXd global_z;
  if (opts.pca_scope == PcaScope::kGlobal) {
    global_pca = pca_fit(x, opts.pca_variance);
    global_z = pca_transform(global_pca, x);
  }

  for (Eigen::Index held = 0; held < n; ++held) {
    Eigen::MatrixXd train(n - 1, x.cols());
    std::vector<std::string> train_labels;
    train_labels.reserve(static_cast<std::size_t>(n - 1));
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == held) continue;
      train.row(r++) = x.row(i);
      train_labels.push_back(labels[static_cast<std::size_t>(i)]);
    }

    std::string predicted;
    const auto distinct = detail::sorted_classes(train_labels);
    if (distinct.size() == 1) {
      predicted = distinct.front();
    } else if (opts.pca_scope == PcaScope::kGlobal) {
      Eigen::MatrixXd train_z(n - 1, global_z.cols());
      r = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != held) train_z.row(r++) = global_z.row(i);
      const SvmModel svm = svm_train(train_z, train_labels, opts.svm_c);
      predicted = svm_predict(svm, global_z.row(held).transpose());
    } else {
      const PcaModel pca = pca_fit(train, opts.pca_variance);
      const SvmModel svm = svm_train(pca_transform(pca, train), train_labels, opts.svm_c);
      const Eigen::MatrixXd z = pca_transform(pca, x.row(held));
      predicted = svm_predict(svm, z.row(0).transpose());
    }
    report.confusion[class_index[labels[static_cast<std::size_t>(held)]]]
                    [class_index[predicted]] += 1;
  }

  report.total = n;
  long long correct = 0;
  report.per_class_accuracy.resize(report.classes.size(), 0.0);
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    long long row_sum = 0;
    for (long long v : report.confusion[k]) row_sum += v;
    correct += report.confusion[k][k];
    report.per_class_accuracy[k] =
        row_sum == 0 ? 0.0 : 100.0 * static_cast<double>(report.confusion[k][k]) / row_sum;
  }
  report.overall_accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
  return report;
}

// PCA basis plus the one-vs-rest weight set trained on the reduced features.
struct TrainedModel {
  PcaModel pca;
  SvmModel svm;
};

inline TrainedModel train_model(const Eigen::MatrixXd& x, const std::vector<std::string>& labels,
                                double pca_variance = 0.95, double c = 1.0) {
  TrainedModel model;
  model.pca = pca_fit(x, pca_variance);
  model.svm = svm_train(pca_transform(model.pca, x), labels, c);
  return model;
}

inline std::string predict(const TrainedModel& model, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd z = pca_transform(model.pca, x.transpose());
  return svm_predict(model.svm, z.row(0).transpose());
}

namespace detail {

inline nlohmann::ordered_json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = r == 0 ? 0 : static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
  return m;
}

}  // namespace detail

inline constexpr int kModelFormatVersion = 1;

inline void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["pca"]["mean"] = detail::vector_to_json(model.pca.mean);
  j["pca"]["components"] = detail::matrix_to_json(model.pca.components);
  j["pca"]["explained_variance"] = detail::vector_to_json(model.pca.explained_variance);
  j["pca"]["retained"] = model.pca.retained;
  j["svm"]["classes"] = model.svm.classes;
  j["svm"]["weights"] = detail::matrix_to_json(model.svm.weights);
  j["svm"]["bias"] = detail::vector_to_json(model.svm.bias);
  j["svm"]["C"] = model.svm.c;
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open file");
  nlohmann::json j;
  in >> j;
  if (j.value("format_version", -1) != kModelFormatVersion)
    throw std::runtime_error(path.string() + ": unsupported model format version");
  TrainedModel model;
  model.pca.mean = detail::vector_from_json(j["pca"]["mean"]);
  model.pca.components = detail::matrix_from_json(j["pca"]["components"]);
  model.pca.explained_variance = detail::vector_from_json(j["pca"]["explained_variance"]);
  model.pca.retained = j["pca"]["retained"].get<int>();
  model.svm.classes = j["svm"]["classes"].get<std::vector<std::string>>();
  model.svm.weights = detail::matrix_from_json(j["svm"]["weights"]);
  model.svm.bias = detail::vector_from_json(j["svm"]["bias"]);
  model.svm.c = j["svm"]["C"].get<double>();
  return model;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["classes"] = report.classes;
  j["confusion"] = report.confusion;
  j["per_class_accuracy"] = report.per_class_accuracy;
  j["overall_accuracy"] = report.overall_accuracy;
  j["total"] = report.total;
  return j;
}

// Spreadsheet-friendly confusion matrix: true classes in rows, predictions
// in columns.
inline void write_confusion_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "true\\predicted";
  for (const auto& c : report.classes) out << "," << c;
  out << "\n";
  for (std::size_t i = 0; i < report.classes.size(); ++i) {
    out << report.classes[i];
    for (long long v : report.confusion[i]) out << "," << v;
    out << "\n";
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace har
