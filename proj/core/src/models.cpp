#include "unkml/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "unkml/error.hpp"

namespace unkml {

namespace {

constexpr double kRidge = 1e-8;

std::size_t parse_count(std::string_view text, std::string_view what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v == 0)
    throw Error(ErrorKind::config, "bad " + std::string(what) + " '" + std::string(text) + "'");
  return v;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Loss parse_loss(std::string_view name) {
  if (name == "squared") return Loss::squared;
  if (name == "absolute") return Loss::absolute;
  if (name == "zero_one") return Loss::zero_one;
  throw Error(ErrorKind::config, "unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(Loss loss) {
  switch (loss) {
    case Loss::squared: return "squared";
    case Loss::absolute: return "absolute";
    case Loss::zero_one: return "zero_one";
  }
  return "?";
}

Loss default_loss(const Schema& schema) {
  return schema.is_classification() ? Loss::zero_one : Loss::absolute;
}

double loss(Loss kind, const Value& prediction, const Value& label) {
  if (kind == Loss::zero_one) return prediction == label ? 0.0 : 1.0;
  const double* p = std::get_if<double>(&prediction);
  const double* y = std::get_if<double>(&label);
  if (!p || !y) throw Error(ErrorKind::unsupported, "numeric loss on a categorical label");
  const double d = *p - *y;
  return kind == Loss::squared ? d * d : std::abs(d);
}

ModelSpec ModelSpec::parse(std::string_view text) {
  ModelSpec spec;
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "linreg" && arg.empty()) {
    spec.kind = ModelKind::linreg;
  } else if (head == "polyreg") {
    spec.kind = ModelKind::polyreg;
    spec.degree = arg.empty() ? 2u : static_cast<unsigned>(parse_count(arg, "polynomial degree"));
  } else if (head == "logreg" && arg.empty()) {
    spec.kind = ModelKind::logreg;
  } else if (head == "knn") {
    spec.kind = ModelKind::knn;
    spec.k = arg.empty() ? 5 : parse_count(arg, "neighbor count");
  } else {
    throw Error(ErrorKind::config, "unknown model '" + std::string(text) + "'");
  }
  return spec;
}

std::string ModelSpec::name() const {
  switch (kind) {
    case ModelKind::linreg: return "linreg";
    case ModelKind::polyreg: return "polyreg:" + std::to_string(degree);
    case ModelKind::logreg: return "logreg";
    case ModelKind::knn: return "knn:" + std::to_string(k);
  }
  return "?";
}

void ModelSpec::validate() const {
  if (degree < 1) throw Error(ErrorKind::config, "polynomial degree must be >= 1");
  if (k < 1) throw Error(ErrorKind::config, "knn k must be >= 1");
  if (kind == ModelKind::logreg && (!(learning_rate > 0.0) || iterations == 0))
    throw Error(ErrorKind::config, "logreg needs a positive learning rate and iteration count");
}

std::vector<std::string> TrainedModel::coefficient_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_) {
    std::string n = schema_.feature_names[c.feature];
    if (!c.token.empty())
      n += "=" + c.token;
    else if (c.power > 1)
      n += "^" + std::to_string(c.power);
    names.push_back(std::move(n));
  }
  names.emplace_back("intercept");
  return names;
}

std::vector<double> TrainedModel::expand(std::span<const Value> features) const {
  if (features.size() != schema_.dimension())
    throw Error(ErrorKind::schema, "expected " + std::to_string(schema_.dimension()) + " features, got " +
                                       std::to_string(features.size()));
  std::vector<double> x;
  x.reserve(columns_.size());
  for (const auto& c : columns_) {
    const Value& v = features[c.feature];
    if (c.token.empty()) {
      const double* d = std::get_if<double>(&v);
      if (!d) throw Error(ErrorKind::schema, "feature '" + schema_.feature_names[c.feature] + "' must be numeric");
      x.push_back(std::pow(*d, static_cast<double>(c.power)));
    } else {
      const std::string* s = std::get_if<std::string>(&v);
      if (!s) throw Error(ErrorKind::schema, "feature '" + schema_.feature_names[c.feature] + "' must be categorical");
      x.push_back(*s == c.token ? 1.0 : 0.0);
    }
  }
  return x;
}

std::vector<double> TrainedModel::standardized(std::span<const Value> features) const {
  auto x = expand(features);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - center_[j]) / scale_[j];
  return x;
}

double TrainedModel::probability(std::span<const Value> features) const {
  if (kind_ != ModelKind::logreg) throw Error(ErrorKind::unsupported, "probability() needs a logreg model");
  const auto z = standardized(features);
  double s = std_coefficients_.back();
  for (std::size_t j = 0; j < z.size(); ++j) s += std_coefficients_[j] * z[j];
  return sigmoid(s);
}

Value TrainedModel::predict(std::span<const Value> features) const {
  switch (kind_) {
    case ModelKind::linreg:
    case ModelKind::polyreg: {
      const auto z = standardized(features);
      double s = std_coefficients_.back();
      for (std::size_t j = 0; j < z.size(); ++j) s += std_coefficients_[j] * z[j];
      return s;
    }
    case ModelKind::logreg:
      return classes_[probability(features) >= 0.5 ? 1 : 0];
    case ModelKind::knn: {
      const auto z = standardized(features);
      std::vector<std::pair<double, std::size_t>> dist;
      dist.reserve(train_x_.size());
      for (std::size_t i = 0; i < train_x_.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) s += (z[j] - train_x_[i][j]) * (z[j] - train_x_[i][j]);
        dist.emplace_back(s, i);
      }
      const std::size_t k = std::min(k_, dist.size());
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      if (!schema_.is_classification()) {
        double sum = 0.0;
        for (std::size_t t = 0; t < k; ++t) sum += std::get<double>(train_y_[dist[t].second]);
        return sum / static_cast<double>(k);
      }
      // classes_ is sorted, so the first maximum is the smallest class id
      std::vector<std::size_t> votes(classes_.size(), 0);
      for (std::size_t t = 0; t < k; ++t) {
        const auto& label = std::get<std::string>(train_y_[dist[t].second]);
        ++votes[static_cast<std::size_t>(std::lower_bound(classes_.begin(), classes_.end(), label) - classes_.begin())];
      }
      return classes_[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())];
    }
  }
  throw Error(ErrorKind::internal, "unknown model kind");
}

TrainedModel fit(const ModelSpec& spec, const IntegratedSample& data, std::span<const double> weights) {
  spec.validate();
  if (data.empty()) throw Error(ErrorKind::empty_input, "cannot fit on an empty sample");
  const std::size_t n = data.size();
  if (!weights.empty() && weights.size() != n)
    throw Error(ErrorKind::config, "weight vector length does not match the sample");
  std::vector<double> w(weights.begin(), weights.end());
  if (w.empty()) w.assign(n, 1.0);
  double wsum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::config, "weights must be finite and nonnegative");
    wsum += v;
  }
  if (!(wsum > 0.0)) throw Error(ErrorKind::config, "weights must have a positive sum");

  TrainedModel m;
  m.kind_ = spec.kind;
  m.schema_ = data.schema();
  const Schema& schema = m.schema_;

  const bool uniform = std::all_of(w.begin(), w.end(), [&](double v) { return v == w.front(); });
  if (spec.kind == ModelKind::knn && !uniform)
    throw Error(ErrorKind::unsupported, "knn cannot train on non-uniform weights; use a synthesis correction");

  if (schema.is_classification()) {
    std::set<std::string> cls;
    for (const auto& r : data.records()) cls.insert(std::get<std::string>(r.label()));
    m.classes_.assign(cls.begin(), cls.end());
  }
  if ((spec.kind == ModelKind::linreg || spec.kind == ModelKind::polyreg) && schema.is_classification())
    throw Error(ErrorKind::unsupported, "regression model on a categorical label");
  if (spec.kind == ModelKind::logreg) {
    if (!schema.is_classification()) throw Error(ErrorKind::unsupported, "logreg needs a categorical label");
    if (m.classes_.size() != 2)
      throw Error(ErrorKind::fit, "logreg needs exactly two classes, found " + std::to_string(m.classes_.size()));
  }

  const unsigned degree = spec.kind == ModelKind::polyreg ? spec.degree : 1u;
  for (std::size_t j = 0; j < schema.dimension(); ++j) {
    if (schema.feature_kinds[j] == ColumnKind::numeric) {
      for (unsigned p = 1; p <= degree; ++p) m.columns_.push_back({j, p, {}});
    } else {
      std::set<std::string> tokens;
      for (const auto& r : data.records()) tokens.insert(std::get<std::string>(r.features()[j]));
      for (const auto& t : tokens) m.columns_.push_back({j, 1, t});
    }
  }
  const std::size_t p = m.columns_.size();
  m.center_.assign(p, 0.0);
  m.scale_.assign(p, 1.0);

  Eigen::MatrixXd x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = m.expand(data[i].features());
    for (std::size_t j = 0; j < p; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  // weighted column standardization; zero-weight rows do not move it
  for (std::size_t j = 0; j < p; ++j) {
    const auto col = x.col(static_cast<Eigen::Index>(j));
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += w[i] * col(static_cast<Eigen::Index>(i));
    mean /= wsum;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = col(static_cast<Eigen::Index>(i)) - mean;
      var += w[i] * d * d;
    }
    var /= wsum;
    m.center_[j] = mean;
    m.scale_[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Eigen::MatrixXd z(n, p + 1);
  for (std::size_t j = 0; j < p; ++j)
    z.col(static_cast<Eigen::Index>(j)) =
        (x.col(static_cast<Eigen::Index>(j)).array() - m.center_[j]) / m.scale_[j];
  z.col(static_cast<Eigen::Index>(p)).setOnes();
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(n));

  if (spec.kind == ModelKind::knn) {
    m.k_ = spec.k;
    m.train_x_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      m.train_x_[i].resize(p);
      for (std::size_t j = 0; j < p; ++j)
        m.train_x_[i][j] = z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      m.train_y_.push_back(data[i].label());
    }
    return m;
  }

  Eigen::VectorXd beta(static_cast<Eigen::Index>(p + 1));
  if (spec.kind == ModelKind::logreg) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      y(static_cast<Eigen::Index>(i)) = std::get<std::string>(data[i].label()) == m.classes_[1] ? 1.0 : 0.0;
    beta.setZero();
    for (std::size_t it = 0; it < spec.iterations; ++it) {
      const Eigen::VectorXd eta = z * beta;
      Eigen::VectorXd resid(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = wv(i) * (sigmoid(eta(i)) - y(i));
      beta -= spec.learning_rate * (z.transpose() * resid) / wsum;
    }
  } else {
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = data[i].numeric_label();
    Eigen::MatrixXd gram = z.transpose() * wv.asDiagonal() * z / wsum;
    gram.diagonal().array() += kRidge;
    const Eigen::VectorXd rhs = z.transpose() * (wv.array() * y.array()).matrix() / wsum;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14))
      throw Error(ErrorKind::fit, "normal equations are singular even with ridge");
    beta = ldlt.solve(rhs);
    if (!beta.allFinite()) throw Error(ErrorKind::fit, "least-squares solution is not finite");
  }

  m.std_coefficients_.assign(beta.data(), beta.data() + beta.size());
  m.coefficients_.assign(p + 1, 0.0);
  double intercept = beta(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    m.coefficients_[j] = beta(static_cast<Eigen::Index>(j)) / m.scale_[j];
    intercept -= m.coefficients_[j] * m.center_[j];
  }
  m.coefficients_[p] = intercept;
  return m;
}

}  // namespace unkml
