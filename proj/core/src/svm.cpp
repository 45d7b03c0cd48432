#include "samaqm/svm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "samaqm/io.hpp"

namespace samaqm::svm {

void SvmModel::validate() const {
  if (support_vectors.empty()) throw std::invalid_argument("svm model has no support vectors");
  if (support_vectors.size() != coeffs.size())
    throw std::invalid_argument("svm model: support vector and coefficient counts differ");
  if (!(gamma > 0.0)) throw std::invalid_argument("svm model: gamma must be positive");
}

void TrainConfig::validate() const {
  if (!(C > 0.0)) throw std::invalid_argument("svm: C must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("svm: gamma must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("svm: tol must be positive");
  if (max_passes <= 0) throw std::invalid_argument("svm: max_passes must be positive");
}

SingleClassError::SingleClassError(int label)
    : TrainingError("training data contains a single class (all labels " +
                    std::string(label > 0 ? "+1" : "-1") + ")"),
      label_(label) {}

ConvergenceError::ConvergenceError(int passes, double worst_violation)
    : TrainingError([&] {
        std::ostringstream os;
        os << "SMO did not converge after " << passes << " passes; worst KKT violation "
           << worst_violation;
        return os.str();
      }()),
      worst_(worst_violation) {}

ModelFormatError::ModelFormatError(std::size_t line, const std::string& what)
    : std::runtime_error("model file line " + std::to_string(line) + ": " + what), line_(line) {}

double rbf_kernel(std::span<const double> x, std::span<const double> z, double gamma) {
  if (x.size() != z.size()) throw std::logic_error("rbf_kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - z[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double decision_value(const SvmModel& m, std::span<const double> x) {
  double f = m.bias;
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
    f += m.coeffs[i] * rbf_kernel(m.support_vectors[i], x, m.gamma);
  return f;
}

int classify(const SvmModel& m, std::span<const double> x) {
  return decision_value(m, x) > 0.0 ? +1 : -1;
}

namespace {

constexpr std::size_t kFullGramLimit = 5000;

class SmoSolver {
 public:
  SmoSolver(std::span<const Sample> data, const TrainConfig& cfg, RngStream& rng)
      : data_(data), cfg_(cfg), rng_(rng), n_(data.size()) {
    if (n_ <= kFullGramLimit) {
      gram_.resize(n_ * n_);
      for (std::size_t i = 0; i < n_; ++i) {
        gram_[i * n_ + i] = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
          const double v = rbf_kernel(data_[i].x, data_[j].x, cfg_.gamma);
          gram_[i * n_ + j] = v;
          gram_[j * n_ + i] = v;
        }
      }
    }
    alpha_.assign(n_, 0.0);
    f_.assign(n_, 0.0);
  }

  TrainResult run() {
    int passes = 0;
    bool examine_all = true;
    std::size_t bound_sweeps = 0;
    while (true) {
      std::size_t changed = 0;
      if (examine_all) {
        for (std::size_t i = 0; i < n_; ++i) changed += examine(i);
        ++passes;
        // A sweep with no step can still leave violators when the pairwise
        // bias updates drifted; refit the bias and sweep again if it helped.
        if (changed == 0 && (worst_violation() <= cfg_.tol || !refit_bias())) break;
        examine_all = false;
        bound_sweeps = 0;
      } else {
        for (std::size_t i = 0; i < n_; ++i)
          if (free(i)) changed += examine(i);
        if (changed == 0 || ++bound_sweeps > std::max<std::size_t>(50, n_)) examine_all = true;
      }
      if (passes >= cfg_.max_passes && examine_all) {
        // One last check: the final full sweep may not have been needed.
        if (worst_violation() <= cfg_.tol) break;
        throw ConvergenceError(passes, worst_violation());
      }
    }
    const double worst = worst_violation();
    if (worst > cfg_.tol) throw ConvergenceError(passes, worst);
    // Any bias inside the bracket is optimal; report the midpoint so the
    // model does not depend on the order of the last pair steps.
    refit_bias(true);

    TrainResult out;
    out.alpha = alpha_;
    out.passes = passes;
    out.steps = steps_;
    out.model.gamma = cfg_.gamma;
    out.model.bias = b_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (alpha_[i] > 0.0) {
        out.model.support_vectors.push_back(data_[i].x);
        out.model.coeffs.push_back(alpha_[i] * data_[i].y);
      }
    }
    double obj = 0.0;
    for (std::size_t i = 0; i < n_; ++i) obj += alpha_[i] - 0.5 * alpha_[i] * data_[i].y * f_[i];
    out.dual_objective = obj;
    out.max_kkt_violation = worst_violation();
    return out;
  }

 private:
  double kernel(std::size_t i, std::size_t j) const {
    if (!gram_.empty()) return gram_[i * n_ + j];
    return rbf_kernel(data_[i].x, data_[j].x, cfg_.gamma);
  }
  bool free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < cfg_.C; }
  double error(std::size_t i) const { return f_[i] + b_ - data_[i].y; }

  double violation(std::size_t i) const {
    const double r = data_[i].y * error(i);  // y f(x) - 1
    if (alpha_[i] <= 0.0) return std::max(0.0, -r);
    if (alpha_[i] >= cfg_.C) return std::max(0.0, r);
    return std::abs(r);
  }

  double worst_violation() const {
    double w = 0.0;
    for (std::size_t i = 0; i < n_; ++i) w = std::max(w, violation(i));
    return w;
  }

  std::size_t examine(std::size_t i2) {
    const double r2 = data_[i2].y * error(i2);
    const double a2 = alpha_[i2];
    if (!((r2 < -cfg_.tol && a2 < cfg_.C) || (r2 > cfg_.tol && a2 > 0.0))) return 0;

    std::size_t start = rng_.below(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start + k) % n_;
      if (free(i1) && take_step(i1, i2)) return 1;
    }
    start = rng_.below(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start + k) % n_;
      if (take_step(i1, i2)) return 1;
    }
    return 0;
  }

  double snap(double a) const {
    const double eps = 1e-12 * cfg_.C;
    if (a < eps) return 0.0;
    if (a > cfg_.C - eps) return cfg_.C;
    return a;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double C = cfg_.C;
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const int y1 = data_[i1].y, y2 = data_[i2].y;
    const double e1 = error(i1), e2 = error(i2);
    const double s = y1 * y2;

    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(C, C + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - C);
      hi = std::min(C, a1 + a2);
    }
    if (hi - lo <= 0.0) return false;

    const double k11 = kernel(i1, i1), k12 = kernel(i1, i2), k22 = kernel(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2n;
    if (eta > 1e-15) {
      a2n = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Flat curvature (duplicate points): the objective is linear along the
      // constraint line, so move to whichever end increases it.
      const double slope = y2 * (e1 - e2);
      if (slope > 1e-12)
        a2n = hi;
      else if (slope < -1e-12)
        a2n = lo;
      else
        return false;
    }
    a2n = snap(a2n);
    if (std::abs(a2n - a2) < 1e-12 * (a2n + a2 + 1e-12)) return false;

    const double a1n = snap(a1 + s * (a2 - a2n));
    const double d1 = y1 * (a1n - a1), d2 = y2 * (a2n - a2);

    const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
    const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
    if (a1n > 0.0 && a1n < C)
      b_ = b1;
    else if (a2n > 0.0 && a2n < C)
      b_ = b2;
    else
      b_ = 0.5 * (b1 + b2);

    for (std::size_t i = 0; i < n_; ++i) f_[i] += d1 * kernel(i, i1) + d2 * kernel(i, i2);
    alpha_[i1] = a1n;
    alpha_[i2] = a2n;
    ++steps_;
    return true;
  }

  // Free multipliers pin the bias exactly (their average absorbs rounding);
  // without any, the bound ones only bracket it, so take the midpoint. The
  // new bias is kept if it lowers the worst violation, or, with `canonical`,
  // if it is no worse. Returns whether the violation went down.
  bool refit_bias(bool canonical = false) {
    double sum = 0.0;
    std::size_t free_count = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const double edge = data_[i].y - f_[i];  // bias at which y f(x) == 1
      if (free(i)) {
        sum += edge;
        ++free_count;
      } else if ((data_[i].y > 0) == (alpha_[i] <= 0.0)) {
        // alpha == 0 wants y f >= 1, alpha == C wants y f <= 1.
        lower = std::max(lower, edge);
      } else {
        upper = std::min(upper, edge);
      }
    }
    double candidate;
    if (free_count > 0)
      candidate = sum / static_cast<double>(free_count);
    else if (std::isfinite(lower) && std::isfinite(upper))
      candidate = 0.5 * (lower + upper);
    else
      return false;
    const double old_b = b_;
    const double old_worst = worst_violation();
    b_ = candidate;
    const double new_worst = worst_violation();
    if (new_worst < old_worst) return true;
    if (!(canonical && new_worst <= old_worst)) b_ = old_b;
    return false;
  }

  std::span<const Sample> data_;
  TrainConfig cfg_;
  RngStream& rng_;
  std::size_t n_;
  std::vector<double> gram_;
  std::vector<double> alpha_;
  /// sum_j alpha_j y_j K(i, j), without the bias.
  std::vector<double> f_;
  double b_ = 0.0;
  std::size_t steps_ = 0;
};

}  // namespace

TrainResult smo_train(std::span<const Sample> data, const TrainConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (data.empty()) throw TrainingError("training data is empty");
  bool pos = false, neg = false;
  for (const auto& s : data) {
    if (s.y != 1 && s.y != -1) throw std::invalid_argument("labels must be +1 or -1");
    (s.y > 0 ? pos : neg) = true;
  }
  if (!pos) throw SingleClassError(-1);
  if (!neg) throw SingleClassError(+1);
  return SmoSolver(data, cfg, rng).run();
}

double dual_objective(std::span<const Sample> data, std::span<const double> alpha, double gamma) {
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    linear += alpha[i];
    for (std::size_t j = 0; j < data.size(); ++j)
      quad += alpha[i] * alpha[j] * data[i].y * data[j].y * rbf_kernel(data[i].x, data[j].x, gamma);
  }
  return linear - 0.5 * quad;
}

double kkt_violation(std::span<const Sample> data, std::span<const double> alpha,
                     const SvmModel& model, double C) {
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data[i].y * decision_value(model, data[i].x) - 1.0;
    double v;
    if (alpha[i] <= 0.0)
      v = std::max(0.0, -r);
    else if (alpha[i] >= C)
      v = std::max(0.0, r);
    else
      v = std::abs(r);
    worst = std::max(worst, v);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Model file

namespace {

std::string real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
    throw ModelFormatError(line, "invalid number '" + std::string(tok) + "'");
  return v;
}

}  // namespace

std::string format_model(const SvmModel& m) {
  m.validate();
  std::string out = "svm-rbf v1\n";
  out += "gamma " + real(m.gamma) + '\n';
  out += "bias " + real(m.bias) + '\n';
  out += "nsv " + std::to_string(m.support_vectors.size()) + '\n';
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
    out += real(m.coeffs[i]);
    for (double f : m.support_vectors[i]) out += ' ' + real(f);
    out += '\n';
  }
  return out;
}

SvmModel parse_model(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
  }

  auto keyed = [&](std::size_t idx, std::string_view key) -> std::string_view {
    const std::size_t line = idx + 1;
    if (idx >= lines.size()) throw ModelFormatError(line, "missing '" + std::string(key) + "' line");
    const auto t = tokens(lines[idx]);
    if (t.size() != 2 || t[0] != key)
      throw ModelFormatError(line, "expected '" + std::string(key) + " <value>'");
    return t[1];
  };

  if (lines.empty()) throw ModelFormatError(1, "empty model file");
  {
    const auto t = tokens(lines[0]);
    if (t.size() != 2 || t[0] != "svm-rbf" || t[1] != "v1")
      throw ModelFormatError(1, "expected header 'svm-rbf v1'");
  }
  SvmModel m;
  m.gamma = parse_real(keyed(1, "gamma"), 2);
  if (!(m.gamma > 0.0)) throw ModelFormatError(2, "gamma must be positive");
  m.bias = parse_real(keyed(2, "bias"), 3);

  const auto nsv_tok = keyed(3, "nsv");
  std::size_t nsv = 0;
  {
    auto [ptr, ec] = std::from_chars(nsv_tok.data(), nsv_tok.data() + nsv_tok.size(), nsv);
    if (ec != std::errc{} || ptr != nsv_tok.data() + nsv_tok.size())
      throw ModelFormatError(4, "invalid support-vector count");
  }
  if (nsv == 0) throw ModelFormatError(4, "empty support-vector section");

  for (std::size_t k = 0; k < nsv; ++k) {
    const std::size_t idx = 4 + k;
    const std::size_t line = idx + 1;
    if (idx >= lines.size())
      throw ModelFormatError(line, "expected " + std::to_string(nsv) + " support vectors, found " +
                                       std::to_string(k));
    const auto t = tokens(lines[idx]);
    if (t.size() != 1 + kFeatureDim)
      throw ModelFormatError(line, "expected coefficient and " + std::to_string(kFeatureDim) +
                                       " features, found " +
                                       std::to_string(t.empty() ? 0 : t.size() - 1) + " features");
    m.coeffs.push_back(parse_real(t[0], line));
    Features x{};
    for (std::size_t d = 0; d < kFeatureDim; ++d) x[d] = parse_real(t[1 + d], line);
    m.support_vectors.push_back(x);
  }
  for (std::size_t idx = 4 + nsv; idx < lines.size(); ++idx) {
    if (!tokens(lines[idx]).empty()) throw ModelFormatError(idx + 1, "unexpected trailing content");
  }
  return m;
}

void save_model(const SvmModel& m, const std::filesystem::path& path) {
  write_file_atomic(path, format_model(m));
}

SvmModel load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path));
}

}  // namespace samaqm::svm
