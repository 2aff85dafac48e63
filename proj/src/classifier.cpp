// Copyright 2026 The featforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "featforge/classifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "featforge/error.hpp"
#include "featforge/parallel.hpp"
#include "featforge/random.hpp"
#include "text_util.hpp"

namespace featforge {

std::string_view to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kRbf: return "rbf";
    case KernelKind::kSigmoid: return "sigmoid";
    case KernelKind::kPolynomial: return "polynomial";
  }
  return "?";
}

KernelKind kernel_kind_from_string(std::string_view text) {
  for (auto k : {KernelKind::kLinear, KernelKind::kRbf, KernelKind::kSigmoid,
                 KernelKind::kPolynomial}) {
    if (to_string(k) == text) return k;
  }
  if (text == "poly") return KernelKind::kPolynomial;
  throw Error(ErrorCode::kInvalidArgument, "unknown kernel '" + std::string(text) + "'");
}

void KernelSpec::validate() const {
  if (!(C > 0.0)) throw Error(ErrorCode::kInvalidArgument, "C must be positive");
  if (kind != KernelKind::kLinear && !(gamma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must be positive");
  }
  if (kind == KernelKind::kPolynomial && degree < 2) {
    throw Error(ErrorCode::kInvalidArgument, "polynomial degree must be >= 2");
  }
}

std::string KernelSpec::describe() const {
  using detail::format_double;
  std::string s = std::string(to_string(kind)) + "(C=" + format_double(C);
  if (kind != KernelKind::kLinear) s += ",gamma=" + format_double(gamma);
  if (kind == KernelKind::kSigmoid || kind == KernelKind::kPolynomial) {
    s += ",coef0=" + format_double(coef0);
  }
  if (kind == KernelKind::kPolynomial) s += ",degree=" + std::to_string(degree);
  return s + ")";
}

double kernel_value(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) {
  switch (spec.kind) {
    case KernelKind::kLinear: return a.dot(b);
    case KernelKind::kRbf: return std::exp(-spec.gamma * (a - b).squaredNorm());
    case KernelKind::kSigmoid: return std::tanh(spec.gamma * a.dot(b) + spec.coef0);
    case KernelKind::kPolynomial: return std::pow(spec.gamma * a.dot(b) + spec.coef0, spec.degree);
  }
  return 0.0;
}

std::vector<KernelSpec> make_kernel_grid(const KernelGridValues& v) {
  std::vector<KernelSpec> grid;
  for (auto kind : v.kinds) {
    for (double c : v.c_values) {
      switch (kind) {
        case KernelKind::kLinear:
          grid.push_back({kind, 0.0, 0.0, 0, c});
          break;
        case KernelKind::kRbf:
          for (double g : v.gamma_values) grid.push_back({kind, g, 0.0, 0, c});
          break;
        case KernelKind::kSigmoid:
          for (double g : v.gamma_values) {
            for (double c0 : v.coef0_values) grid.push_back({kind, g, c0, 0, c});
          }
          break;
        case KernelKind::kPolynomial:
          for (double g : v.gamma_values) {
            for (int d : v.degree_values) {
              for (double c0 : v.coef0_values) grid.push_back({kind, g, c0, d, c});
            }
          }
          break;
      }
    }
  }
  for (const auto& s : grid) s.validate();
  return grid;
}

// ---------------------------------------------------------------------------
// SMO solver (second-order working set selection)

namespace {

std::atomic<std::uint64_t> g_trained{0};
std::atomic<std::uint64_t> g_infeasible{0};
std::atomic<std::uint64_t> g_cv_runs{0};
std::atomic<std::uint64_t> g_cv_leaked{0};

constexpr double kTau = 1e-12;

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  if (spec.kind == KernelKind::kRbf) {
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    const Eigen::MatrixXd dot = x * x.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        k(i, j) = std::exp(-spec.gamma * std::max(0.0, sq(i) + sq(j) - 2.0 * dot(i, j)));
      }
      k(i, i) = 1.0;
    }
    return k;
  }
  const Eigen::MatrixXd dot = x * x.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      switch (spec.kind) {
        case KernelKind::kLinear: k(i, j) = dot(i, j); break;
        case KernelKind::kSigmoid: k(i, j) = std::tanh(spec.gamma * dot(i, j) + spec.coef0); break;
        case KernelKind::kPolynomial:
          k(i, j) = std::pow(spec.gamma * dot(i, j) + spec.coef0, spec.degree);
          break;
        case KernelKind::kRbf: break;
      }
    }
  }
  return k;
}

struct SmoSolution {
  std::vector<double> alpha;
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

SmoSolution solve_smo(const Eigen::MatrixXd& k, const std::vector<int>& y, double c,
                      const SolverOptions& opt) {
  const std::size_t n = y.size();
  SmoSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto& alpha = sol.alpha;
  auto q = [&](std::size_t i, std::size_t j) {
    return static_cast<double>(y[i] * y[j]) * k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  auto at_upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  const std::size_t max_iter = std::max(opt.max_passes, 100 * n);
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!at_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = t;
        }
      } else if (!at_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i = t;
      }
    }
    if (i == n) {
      sol.converged = true;
      break;
    }
    double obj_min = std::numeric_limits<double>::infinity();
    const double qii = q(i, i);
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (at_lower(t)) continue;
        const double grad_diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (grad_diff > 0.0) {
          double quad = qii + q(t, t) - 2.0 * y[i] * q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -grad_diff * grad_diff / quad;
          if (obj <= obj_min) {
            obj_min = obj;
            j = t;
          }
        }
      } else {
        if (at_upper(t)) continue;
        const double grad_diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (grad_diff > 0.0) {
          double quad = qii + q(t, t) + 2.0 * y[i] * q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -grad_diff * grad_diff / quad;
          if (obj <= obj_min) {
            obj_min = obj;
            j = t;
          }
        }
      }
    }
    if (gmax + gmax2 < opt.tolerance || j == n) {
      sol.converged = true;
      break;
    }

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double qij = q(i, j);
    if (y[i] != y[j]) {
      double quad = qii + q(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = qii + q(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * di + q(j, t) * dj;
  }
  sol.iterations = iter;

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      sum_free += yg;
    }
  }
  if (free_count > 0) {
    sol.rho = sum_free / static_cast<double>(free_count);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    sol.rho = (ub + lb) / 2.0;
  } else {
    sol.rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }
  return sol;
}

BinaryMachine train_machine(const Eigen::MatrixXd& x, const Eigen::MatrixXd& k,
                            const std::vector<int>& labels, int positive, const KernelSpec& spec,
                            const SolverOptions& opt) {
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == positive ? 1 : -1;
  const auto sol = solve_smo(k, y, spec.C, opt);
  BinaryMachine m;
  m.positive_class = positive;
  m.rho = sol.rho;
  m.iterations = sol.iterations;
  m.converged = sol.converged;
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (sol.alpha[i] > 0.0) {
      rows.push_back(static_cast<Eigen::Index>(i));
      m.alpha.push_back(sol.alpha[i]);
      m.y.push_back(y[i]);
      m.source_rows.push_back(i);
    }
  }
  m.support.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    m.support.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  }
  return m;
}

Eigen::MatrixXd standardize(const TrainedModel& model, const Eigen::MatrixXd& rows) {
  Eigen::MatrixXd out = rows;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    out.col(c) = (out.col(c).array() - model.scale_mean(c)) / model.scale_std(c);
  }
  return out;
}

}  // namespace

TrainedModel train_svm(const FeatureMatrix& matrix, const KernelSpec& kernel,
                       const SolverOptions& options) {
  kernel.validate();
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw Error(ErrorCode::kDegenerateMatrix, "empty training matrix");
  }
  if (matrix.labels.size() != matrix.rows()) {
    throw Error(ErrorCode::kDegenerateMatrix, "label count differs from row count");
  }
  if (!matrix.values.allFinite()) throw Error(ErrorCode::kDegenerateMatrix, "non-finite value");
  std::set<int> distinct(matrix.labels.begin(), matrix.labels.end());
  if (distinct.size() < 2) throw Error(ErrorCode::kSingleClass, "training data has one class");

  TrainedModel model;
  model.kernel = kernel;
  for (const auto& d : matrix.descriptors) model.feature_names.push_back(d.name);
  model.classes.assign(distinct.begin(), distinct.end());
  const Eigen::Index d = matrix.values.cols();
  model.scale_mean = Eigen::VectorXd::Zero(d);
  model.scale_std = Eigen::VectorXd::Ones(d);
  if (options.standardize) {
    const double n = static_cast<double>(matrix.rows());
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto col = matrix.values.col(c);
      const double mean = col.sum() / n;
      const double var = (col.array() - mean).square().sum() / n;
      model.scale_mean(c) = mean;
      const double sd = std::sqrt(var);
      model.scale_std(c) = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
    }
  }
  const Eigen::MatrixXd x = standardize(model, matrix.values);
  const Eigen::MatrixXd k = gram(kernel, x);
  if (model.classes.size() == 2) {
    model.machines.push_back(train_machine(x, k, matrix.labels, model.classes[1], kernel, options));
  } else {
    for (int c : model.classes) {
      model.machines.push_back(train_machine(x, k, matrix.labels, c, kernel, options));
    }
  }
  ++g_trained;
  if (!dual_feasible(model)) ++g_infeasible;
  return model;
}

Eigen::MatrixXd decision_values(const TrainedModel& model, const Eigen::MatrixXd& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.feature_count()) {
    throw Error(ErrorCode::kWidthMismatch, "rows have " + std::to_string(rows.cols()) +
                                               " features, model expects " +
                                               std::to_string(model.feature_count()));
  }
  const Eigen::MatrixXd x = standardize(model, rows);
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(model.machines.size()));
  for (std::size_t m = 0; m < model.machines.size(); ++m) {
    const auto& machine = model.machines[m];
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      double f = -machine.rho;
      for (Eigen::Index s = 0; s < machine.support.rows(); ++s) {
        f += machine.alpha[static_cast<std::size_t>(s)] * machine.y[static_cast<std::size_t>(s)] *
             kernel_value(model.kernel, machine.support.row(s).transpose(), x.row(r).transpose());
      }
      out(r, static_cast<Eigen::Index>(m)) = f;
    }
  }
  return out;
}

std::vector<int> predict(const TrainedModel& model, const Eigen::MatrixXd& rows) {
  const Eigen::MatrixXd f = decision_values(model, rows);
  std::vector<int> out(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    if (model.classes.size() == 2) {
      out[static_cast<std::size_t>(r)] = f(r, 0) > 0.0 ? model.classes[1] : model.classes[0];
    } else {
      Eigen::Index best = 0;
      for (Eigen::Index m = 1; m < f.cols(); ++m) {
        if (f(r, m) > f(r, best)) best = m;
      }
      out[static_cast<std::size_t>(r)] = model.classes[static_cast<std::size_t>(best)];
    }
  }
  return out;
}

double dual_objective(const TrainedModel& model, std::size_t machine) {
  const auto& m = model.machines.at(machine);
  double linear = 0.0, quad = 0.0;
  const auto s = static_cast<std::size_t>(m.support.rows());
  for (std::size_t i = 0; i < s; ++i) {
    linear += m.alpha[i];
    for (std::size_t j = 0; j < s; ++j) {
      quad += m.alpha[i] * m.alpha[j] * m.y[i] * m.y[j] *
              kernel_value(model.kernel, m.support.row(static_cast<Eigen::Index>(i)).transpose(),
                           m.support.row(static_cast<Eigen::Index>(j)).transpose());
    }
  }
  return linear - 0.5 * quad;
}

bool dual_feasible(const TrainedModel& model) {
  for (const auto& m : model.machines) {
    double balance = 0.0;
    for (std::size_t i = 0; i < m.alpha.size(); ++i) {
      if (m.alpha[i] < 0.0 || m.alpha[i] > model.kernel.C) return false;
      balance += m.alpha[i] * m.y[i];
    }
    if (std::abs(balance) > 1e-6) return false;
  }
  return true;
}

SvmAudit svm_audit() { return {g_trained.load(), g_infeasible.load()}; }

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  using detail::format_double;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const auto& k = model.kernel;
  out << "featforge-svm 1\n";
  out << "kernel " << to_string(k.kind) << " C " << format_double(k.C) << " gamma "
      << format_double(k.gamma) << " coef0 " << format_double(k.coef0) << " degree " << k.degree
      << '\n';
  out << "features " << model.feature_count() << '\n';
  for (std::size_t c = 0; c < model.feature_count(); ++c) {
    const std::string name = c < model.feature_names.size() ? model.feature_names[c] : "f" + std::to_string(c);
    out << name << ' ' << format_double(model.scale_mean(static_cast<Eigen::Index>(c))) << ' '
        << format_double(model.scale_std(static_cast<Eigen::Index>(c))) << '\n';
  }
  out << "classes " << model.classes.size();
  for (int c : model.classes) out << ' ' << c;
  out << "\nmachines " << model.machines.size() << '\n';
  for (const auto& m : model.machines) {
    out << "machine " << m.positive_class << " rho " << format_double(m.rho) << " support "
        << m.support.rows() << '\n';
    for (Eigen::Index s = 0; s < m.support.rows(); ++s) {
      const auto i = static_cast<std::size_t>(s);
      out << format_double(m.alpha[i]) << ' ' << m.y[i] << ' ' << m.source_rows[i];
      for (Eigen::Index c = 0; c < m.support.cols(); ++c) out << ' ' << format_double(m.support(s, c));
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  auto fail = [&](const std::string& what) {
    return Error(ErrorCode::kMalformedRow, path.string() + ": " + what);
  };
  std::string tag, key;
  int version = 0;
  if (!(in >> tag >> version) || tag != "featforge-svm" || version != 1) {
    throw fail("not a featforge-svm v1 model");
  }
  TrainedModel model;
  std::string kind;
  if (!(in >> key >> kind) || key != "kernel") throw fail("missing kernel line");
  model.kernel.kind = kernel_kind_from_string(kind);
  auto read_double = [&](const char* expect) {
    std::string k, v;
    if (!(in >> k >> v) || k != expect) throw fail(std::string("missing ") + expect);
    auto d = detail::parse_double(v);
    if (!d) throw fail(std::string("bad ") + expect);
    return *d;
  };
  model.kernel.C = read_double("C");
  model.kernel.gamma = read_double("gamma");
  model.kernel.coef0 = read_double("coef0");
  model.kernel.degree = static_cast<int>(read_double("degree"));
  std::size_t features = 0;
  if (!(in >> key >> features) || key != "features") throw fail("missing features");
  model.scale_mean.resize(static_cast<Eigen::Index>(features));
  model.scale_std.resize(static_cast<Eigen::Index>(features));
  for (std::size_t c = 0; c < features; ++c) {
    std::string name, mean, sd;
    if (!(in >> name >> mean >> sd)) throw fail("truncated feature table");
    model.feature_names.push_back(name);
    auto m = detail::parse_double(mean);
    auto s = detail::parse_double(sd);
    if (!m || !s) throw fail("bad scaler entry");
    model.scale_mean(static_cast<Eigen::Index>(c)) = *m;
    model.scale_std(static_cast<Eigen::Index>(c)) = *s;
  }
  std::size_t class_count = 0;
  if (!(in >> key >> class_count) || key != "classes") throw fail("missing classes");
  model.classes.resize(class_count);
  for (auto& c : model.classes) {
    if (!(in >> c)) throw fail("truncated classes");
  }
  std::size_t machine_count = 0;
  if (!(in >> key >> machine_count) || key != "machines") throw fail("missing machines");
  for (std::size_t mi = 0; mi < machine_count; ++mi) {
    BinaryMachine m;
    std::string rho_key, rho, support_key;
    std::size_t support = 0;
    if (!(in >> key >> m.positive_class >> rho_key >> rho >> support_key >> support) ||
        key != "machine") {
      throw fail("bad machine header");
    }
    auto r = detail::parse_double(rho);
    if (!r) throw fail("bad rho");
    m.rho = *r;
    m.support.resize(static_cast<Eigen::Index>(support), static_cast<Eigen::Index>(features));
    for (std::size_t s = 0; s < support; ++s) {
      std::string a;
      int y = 0;
      std::size_t src = 0;
      if (!(in >> a >> y >> src)) throw fail("truncated support row");
      auto av = detail::parse_double(a);
      if (!av) throw fail("bad alpha");
      m.alpha.push_back(*av);
      m.y.push_back(y);
      m.source_rows.push_back(src);
      for (std::size_t c = 0; c < features; ++c) {
        std::string v;
        if (!(in >> v)) throw fail("truncated support row");
        auto dv = detail::parse_double(v);
        if (!dv) throw fail("bad support value");
        m.support(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c)) = *dv;
      }
    }
    model.machines.push_back(std::move(m));
  }
  return model;
}

// ---------------------------------------------------------------------------

std::string_view to_string(MetricKind kind) noexcept {
  switch (kind) {
    case MetricKind::kAccuracy: return "accuracy";
    case MetricKind::kSensitivity: return "sensitivity";
    case MetricKind::kSpecificity: return "specificity";
    case MetricKind::kFScore: return "f_score";
  }
  return "?";
}

MetricKind metric_from_string(std::string_view text) {
  for (auto k : {MetricKind::kAccuracy, MetricKind::kSensitivity, MetricKind::kSpecificity,
                 MetricKind::kFScore}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(text) + "'");
}

double Metrics::value(MetricKind kind) const {
  switch (kind) {
    case MetricKind::kAccuracy: return accuracy;
    case MetricKind::kSensitivity: return sensitivity;
    case MetricKind::kSpecificity: return specificity;
    case MetricKind::kFScore: return f_score;
  }
  return 0.0;
}

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

struct OneVsRest {
  double sensitivity, specificity, f_score;
};

OneVsRest one_vs_rest(const std::vector<std::vector<std::size_t>>& conf, std::size_t pos) {
  double tp = 0, fn = 0, fp = 0, tn = 0;
  for (std::size_t a = 0; a < conf.size(); ++a) {
    for (std::size_t p = 0; p < conf.size(); ++p) {
      const auto v = static_cast<double>(conf[a][p]);
      if (a == pos && p == pos) tp += v;
      else if (a == pos) fn += v;
      else if (p == pos) fp += v;
      else tn += v;
    }
  }
  const double precision = ratio(tp, tp + fp);
  const double recall = ratio(tp, tp + fn);
  return {recall, ratio(tn, tn + fp), ratio(2.0 * precision * recall, precision + recall)};
}

}  // namespace

Metrics metrics_from_confusion(std::vector<int> classes,
                               std::vector<std::vector<std::size_t>> confusion) {
  Metrics m;
  const std::size_t c = classes.size();
  if (confusion.size() != c) throw Error(ErrorCode::kWidthMismatch, "confusion shape");
  double total = 0.0, correct = 0.0;
  for (std::size_t a = 0; a < c; ++a) {
    if (confusion[a].size() != c) throw Error(ErrorCode::kWidthMismatch, "confusion shape");
    for (std::size_t p = 0; p < c; ++p) total += static_cast<double>(confusion[a][p]);
    correct += static_cast<double>(confusion[a][a]);
  }
  m.accuracy = ratio(correct, total);
  if (c == 2) {
    const auto r = one_vs_rest(confusion, 1);
    m.sensitivity = r.sensitivity;
    m.specificity = r.specificity;
    m.f_score = r.f_score;
  } else if (c > 2) {
    for (std::size_t pos = 0; pos < c; ++pos) {
      const auto r = one_vs_rest(confusion, pos);
      m.sensitivity += r.sensitivity / static_cast<double>(c);
      m.specificity += r.specificity / static_cast<double>(c);
      m.f_score += r.f_score / static_cast<double>(c);
    }
  }
  m.classes = std::move(classes);
  m.confusion = std::move(confusion);
  return m;
}

Metrics compute_metrics(std::span<const int> actual, std::span<const int> predicted,
                        std::span<const int> classes) {
  if (actual.size() != predicted.size()) {
    throw Error(ErrorCode::kWidthMismatch, "actual and predicted differ in length");
  }
  std::vector<std::vector<std::size_t>> conf(classes.size(),
                                             std::vector<std::size_t>(classes.size(), 0));
  auto index = [&](int label) {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) {
      throw Error(ErrorCode::kInvalidArgument, "label " + std::to_string(label) + " not in class list");
    }
    return static_cast<std::size_t>(it - classes.begin());
  };
  for (std::size_t i = 0; i < actual.size(); ++i) ++conf[index(actual[i])][index(predicted[i])];
  return metrics_from_confusion(std::vector<int>(classes.begin(), classes.end()), std::move(conf));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::size_t>> by_class(std::span<const int> labels,
                                               std::span<const std::size_t> subset,
                                               std::vector<int>& classes) {
  std::set<int> distinct;
  for (auto i : subset) distinct.insert(labels[i]);
  classes.assign(distinct.begin(), distinct.end());
  std::vector<std::vector<std::size_t>> out(classes.size());
  for (auto i : subset) {
    const auto c = static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), labels[i]) - classes.begin());
    out[c].push_back(i);
  }
  return out;
}

std::vector<Fold> stratified(std::span<const int> labels, std::span<const std::size_t> subset,
                             std::size_t k, Rng& rng) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 folds");
  std::vector<int> classes;
  auto groups = by_class(labels, subset, classes);
  if (classes.size() < 2) {
    throw Error(ErrorCode::kProtocolCompositionImpossible, "folds need at least two classes");
  }
  std::vector<std::vector<std::size_t>> test(k);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].size() < k) {
      throw Error(ErrorCode::kProtocolCompositionImpossible,
                  "class " + std::to_string(classes[c]) + " has " +
                      std::to_string(groups[c].size()) + " instances, fewer than " +
                      std::to_string(k) + " folds");
    }
    rng.shuffle(groups[c]);
    for (auto i : groups[c]) test[offset++ % k].push_back(i);
  }
  std::vector<Fold> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(test[f].begin(), test[f].end());
    folds[f].test = test[f];
    for (auto i : subset) {
      if (!std::binary_search(test[f].begin(), test[f].end(), i)) folds[f].train.push_back(i);
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

FoldAssignment grouped(std::span<const int> labels, std::string_view protocol,
                       std::size_t group_count, std::size_t k, Rng& rng) {
  std::vector<std::size_t> all(labels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<int> classes;
  auto per_class = by_class(labels, all, classes);
  if (classes.size() != 2) {
    throw Error(ErrorCode::kProtocolCompositionImpossible,
                std::string(protocol) + " needs exactly two classes");
  }
  const std::size_t minority = per_class[0].size() <= per_class[1].size() ? 0 : 1;
  auto& shared = per_class[minority];
  auto& majority = per_class[1 - minority];
  const std::size_t per_group = majority.size() / group_count;
  if (per_group == 0 || shared.size() < k || per_group < k) {
    throw Error(ErrorCode::kProtocolCompositionImpossible,
                std::string(protocol) + " cannot be formed from " + std::to_string(shared.size()) +
                    " minority and " + std::to_string(majority.size()) + " majority instances");
  }
  FoldAssignment fa;
  fa.protocol = std::string(protocol);
  rng.shuffle(majority);
  for (std::size_t g = 0; g < group_count; ++g) {
    std::vector<std::size_t> group(shared.begin(), shared.end());
    group.insert(group.end(), majority.begin() + static_cast<std::ptrdiff_t>(g * per_group),
                 majority.begin() + static_cast<std::ptrdiff_t>((g + 1) * per_group));
    std::sort(group.begin(), group.end());
    auto inner = stratified(labels, group, k, rng);
    fa.folds.insert(fa.folds.end(), inner.begin(), inner.end());
    fa.groups.push_back(std::move(group));
  }
  fa.shared.assign(shared.begin(), shared.end());
  std::sort(fa.shared.begin(), fa.shared.end());
  fa.unassigned.assign(majority.begin() + static_cast<std::ptrdiff_t>(group_count * per_group),
                       majority.end());
  std::sort(fa.unassigned.begin(), fa.unassigned.end());
  return fa;
}

}  // namespace

FoldAssignment make_folds(std::span<const int> labels, std::string_view protocol, std::size_t k,
                          std::uint64_t seed) {
  Rng rng(seed, 0xF01D);
  if (protocol == "bearing-5fold") return grouped(labels, protocol, 5, k, rng);
  if (protocol == "bp-3set") return grouped(labels, protocol, 3, k, rng);
  if (protocol.starts_with("stratified-")) {
    auto suffix = protocol.substr(std::string_view("stratified-").size());
    std::size_t folds = k;
    if (suffix != "k") {
      auto parsed = detail::parse_int(suffix);
      if (!parsed || *parsed < 2) {
        throw Error(ErrorCode::kInvalidArgument, "bad protocol '" + std::string(protocol) + "'");
      }
      folds = static_cast<std::size_t>(*parsed);
    }
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    FoldAssignment fa;
    fa.protocol = "stratified-" + std::to_string(folds);
    fa.folds = stratified(labels, all, folds, rng);
    fa.groups.push_back(all);
    return fa;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown fold protocol '" + std::string(protocol) + "'");
}

// ---------------------------------------------------------------------------

namespace {

int kind_rank(KernelKind k) { return static_cast<int>(k); }

bool better_grid_point(const GridPointResult& a, const GridPointResult& b) {
  if (a.mean_accuracy != b.mean_accuracy) return a.mean_accuracy > b.mean_accuracy;
  if (kind_rank(a.spec.kind) != kind_rank(b.spec.kind)) {
    return kind_rank(a.spec.kind) < kind_rank(b.spec.kind);
  }
  return a.spec.C < b.spec.C;
}

}  // namespace

CvResult evaluate_cv(const FeatureMatrix& matrix, std::span<const KernelSpec> grid,
                     const FoldAssignment& folds, const CvOptions& options) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty kernel grid");
  if (folds.folds.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 folds");
  std::set<int> distinct(matrix.labels.begin(), matrix.labels.end());
  const std::vector<int> classes(distinct.begin(), distinct.end());

  CvResult result;
  // Fold data is materialized once and shared by every grid point.
  struct FoldData {
    FeatureMatrix train;
    Eigen::MatrixXd test;
    std::vector<int> test_labels;
  };
  const std::size_t nf = folds.folds.size();
  std::vector<FoldData> data(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& fold = folds.folds[f];
    std::vector<std::size_t> sorted_train = fold.train;
    std::sort(sorted_train.begin(), sorted_train.end());
    for (auto t : fold.test) {
      if (std::binary_search(sorted_train.begin(), sorted_train.end(), t)) {
        result.leakage_audit_passed = false;
      }
    }
    data[f].train = matrix.select_rows(fold.train);
    data[f].test = matrix.select_rows(fold.test).values;
    for (auto t : fold.test) data[f].test_labels.push_back(matrix.labels[t]);
    if (options.transform) {
      auto [tr, te] = options.transform(data[f].train.values, data[f].test);
      data[f].train.values = std::move(tr);
      data[f].test = std::move(te);
      data[f].train.descriptors.clear();
      for (Eigen::Index c = 0; c < data[f].train.values.cols(); ++c) {
        data[f].train.descriptors.push_back(
            {0, FeatureFamily::kTimeDomain, "component" + std::to_string(c), {"transform:fold"}});
      }
    }
  }

  struct TaskResult {
    std::vector<int> predicted;
    bool audit_ok = true;
  };
  std::vector<TaskResult> tasks(grid.size() * nf);
  parallel_for(tasks.size(), options.jobs, [&](std::size_t t) {
    const std::size_t g = t / nf;
    const std::size_t f = t % nf;
    const auto model = train_svm(data[f].train, grid[g], options.solver);
    const auto& fold = folds.folds[f];
    for (const auto& m : model.machines) {
      for (auto src : m.source_rows) {
        const std::size_t global = fold.train.at(src);
        if (std::find(fold.test.begin(), fold.test.end(), global) != fold.test.end()) {
          tasks[t].audit_ok = false;
        }
      }
    }
    tasks[t].predicted = predict(model, data[f].test);
  });
  result.models_trained = tasks.size();

  for (std::size_t g = 0; g < grid.size(); ++g) {
    GridPointResult gp;
    gp.spec = grid[g];
    std::vector<std::vector<std::size_t>> conf(classes.size(),
                                               std::vector<std::size_t>(classes.size(), 0));
    double acc_sum = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
      const auto& task = tasks[g * nf + f];
      if (!task.audit_ok) result.leakage_audit_passed = false;
      const auto fm = compute_metrics(data[f].test_labels, task.predicted, classes);
      acc_sum += fm.accuracy;
      for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t p = 0; p < classes.size(); ++p) conf[a][p] += fm.confusion[a][p];
      }
    }
    gp.mean_accuracy = acc_sum / static_cast<double>(nf);
    gp.pooled = metrics_from_confusion(classes, std::move(conf));
    result.grid.push_back(std::move(gp));
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < result.grid.size(); ++g) {
    if (better_grid_point(result.grid[g], result.grid[best])) best = g;
  }
  result.best = result.grid[best].spec;
  result.mean_accuracy = result.grid[best].mean_accuracy;
  result.metrics = result.grid[best].pooled;
  ++g_cv_runs;
  if (!result.leakage_audit_passed) ++g_cv_leaked;
  return result;
}

CvAudit cv_audit() { return {g_cv_runs.load(), g_cv_leaked.load()}; }

}  // namespace featforge
