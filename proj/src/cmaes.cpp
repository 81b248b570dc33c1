#include "evoshift/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "evoshift/error.hpp"

namespace evoshift {

namespace {

void set_strategy_constants(EsState& s) {
  const double n = s.dim;
  s.mu = s.lambda / 2;
  s.weights.resize(static_cast<std::size_t>(s.mu));
  const double top = std::log((s.lambda + 1) / 2.0);
  for (int i = 0; i < s.mu; ++i) s.weights[static_cast<std::size_t>(i)] = top - std::log(i + 1.0);
  const double sum = std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
  double sq = 0.0;
  for (auto& w : s.weights) {
    w /= sum;
    sq += w * w;
  }
  s.mu_eff = 1.0 / sq;

  s.c_sigma = (s.mu_eff + 2.0) / (n + s.mu_eff + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (n + 1.0)) - 1.0) + s.c_sigma;
  s.c_c = (4.0 + s.mu_eff / n) / (n + 4.0 + 2.0 * s.mu_eff / n);
  s.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + s.mu_eff);
  s.c_mu = std::min(1.0 - s.c_1, 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) / ((n + 2.0) * (n + 2.0) + s.mu_eff));
  s.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
}

// Symmetrises cov, refreshes (basis, axis_lengths) and clamps eigenvalues at
// the floor. Falls back to the diagonal when the solver fails.
void refresh_eigensystem(EsState& s) {
  s.cov = 0.5 * (s.cov + s.cov.transpose()).eval();
  const double floor = eigen_floor(s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.cov);
  bool ok = solver.info() == Eigen::Success && solver.eigenvalues().allFinite() && solver.eigenvectors().allFinite();
  if (ok) {
    Eigen::VectorXd values = solver.eigenvalues();
    bool clamped = false;
    for (Eigen::Index i = 0; i < values.size(); ++i)
      if (values(i) < floor) {
        values(i) = floor;
        clamped = true;
      }
    s.basis = solver.eigenvectors();
    s.axis_lengths = values.cwiseSqrt();
    if (clamped) {
      s.cov = s.basis * values.asDiagonal() * s.basis.transpose();
      s.cov = 0.5 * (s.cov + s.cov.transpose()).eval();
    }
    return;
  }
  ++s.eigen_repairs;
  Eigen::VectorXd diag = s.cov.diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i)
    if (!std::isfinite(diag(i)) || diag(i) < floor) diag(i) = std::isfinite(floor) && floor > 0 ? floor : 1.0;
  s.cov = diag.asDiagonal();
  s.basis = Eigen::MatrixXd::Identity(s.dim, s.dim);
  s.axis_lengths = diag.cwiseSqrt();
}

}  // namespace

double eigen_floor(const EsState& state) { return 1e-12 * state.cov.trace() / state.dim; }

EsState es_init(int dim, std::span<const double> m0, double sigma0, std::optional<int> lambda, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorCode::BadDimension, "dimension must be at least 1");
  if (m0.size() != static_cast<std::size_t>(dim)) throw Error(ErrorCode::BadDimension, "initial mean length");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw Error(ErrorCode::InvalidConfig, "sigma0 must be positive");
  EsState s;
  s.dim = dim;
  s.lambda = lambda.value_or(4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dim)))));
  if (s.lambda < 2) throw Error(ErrorCode::InvalidConfig, "population must be at least 2");
  set_strategy_constants(s);
  s.mean = Eigen::Map<const Eigen::VectorXd>(m0.data(), dim);
  s.cov = Eigen::MatrixXd::Identity(dim, dim);
  s.sigma = sigma0;
  s.p_sigma = Eigen::VectorXd::Zero(dim);
  s.p_c = Eigen::VectorXd::Zero(dim);
  s.basis = Eigen::MatrixXd::Identity(dim, dim);
  s.axis_lengths = Eigen::VectorXd::Ones(dim);
  s.rng.seed(seed);
  return s;
}

std::vector<Candidate> es_ask(const EsState& state, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Candidate> out(static_cast<std::size_t>(state.lambda));
  Eigen::VectorXd z(state.dim);
  for (auto& c : out) {
    for (int i = 0; i < state.dim; ++i) z(i) = normal(rng);
    const Eigen::VectorXd x = state.mean + state.sigma * (state.basis * state.axis_lengths.cwiseProduct(z));
    c.vector.assign(x.data(), x.data() + x.size());
  }
  return out;
}

std::vector<Candidate> es_ask(EsState& state) { return es_ask(state, state.rng); }

void es_tell(EsState& s, const std::vector<Candidate>& candidates) {
  if (candidates.size() != static_cast<std::size_t>(s.lambda))
    throw Error(ErrorCode::PopulationSizeMismatch,
                "expected " + std::to_string(s.lambda) + " candidates, got " + std::to_string(candidates.size()));
  for (const auto& c : candidates) {
    if (!c.fitness || !std::isfinite(*c.fitness)) throw Error(ErrorCode::NonFiniteFitness, "candidate fitness");
    if (c.vector.size() != static_cast<std::size_t>(s.dim)) throw Error(ErrorCode::BadDimension, "candidate length");
  }

  std::vector<std::size_t> rank(candidates.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return *candidates[a].fitness > *candidates[b].fitness; });

  const auto& top = candidates[rank.front()];
  if (!s.best || *top.fitness > *s.best->fitness) s.best = top;

  const int n = s.dim;
  Eigen::MatrixXd steps(n, s.mu);  // y_{i:lambda} = (x - m) / sigma
  for (int i = 0; i < s.mu; ++i) {
    const auto& x = candidates[rank[static_cast<std::size_t>(i)]].vector;
    steps.col(i) = (Eigen::Map<const Eigen::VectorXd>(x.data(), n) - s.mean) / s.sigma;
  }
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(s.weights.data(), s.mu);
  const Eigen::VectorXd y_w = steps * w;
  s.mean += s.sigma * y_w;

  const Eigen::VectorXd inv_sqrt_y =
      s.basis * (s.basis.transpose() * y_w).cwiseQuotient(s.axis_lengths);
  s.p_sigma = (1.0 - s.c_sigma) * s.p_sigma + std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) * inv_sqrt_y;

  const double ps_norm = s.p_sigma.norm();
  const double t = static_cast<double>(s.generation + 1);
  const bool h_sigma = ps_norm / std::sqrt(1.0 - std::pow(1.0 - s.c_sigma, 2.0 * t)) <
                       (1.4 + 2.0 / (n + 1.0)) * s.chi_n;
  s.p_c = (1.0 - s.c_c) * s.p_c;
  if (h_sigma) s.p_c += std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) * y_w;
  const double delta_h = h_sigma ? 0.0 : s.c_c * (2.0 - s.c_c);

  const Eigen::MatrixXd rank_mu = steps * w.asDiagonal() * steps.transpose();
  s.cov = (1.0 + s.c_1 * delta_h - s.c_1 - s.c_mu) * s.cov + s.c_1 * (s.p_c * s.p_c.transpose()) + s.c_mu * rank_mu;

  s.sigma *= std::exp((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0));
  if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) s.sigma = std::numeric_limits<double>::min();

  ++s.generation;
  refresh_eigensystem(s);
}

const Candidate& es_best(const EsState& state) {
  if (!state.best) throw Error(ErrorCode::NoHistory, "no generation has been told yet");
  return *state.best;
}

namespace {

using nlohmann::json;

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }
std::vector<double> to_vec(const Eigen::MatrixXd& m) { return {m.data(), m.data() + m.size()}; }

Eigen::VectorXd vector_from(const json& j, int n) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != static_cast<std::size_t>(n)) throw Error(ErrorCode::BadFormat, "vector length in ES snapshot");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

Eigen::MatrixXd matrix_from(const json& j, int n) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw Error(ErrorCode::BadFormat, "matrix size in ES snapshot");
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
}

}  // namespace

void save_es_state(const EsState& s, const std::filesystem::path& path) {
  std::ostringstream rng;
  rng << s.rng;
  json doc = {{"version", 1},
              {"dim", s.dim},
              {"lambda", s.lambda},
              {"mean", to_vec(s.mean)},
              {"cov", to_vec(s.cov)},
              {"sigma", s.sigma},
              {"p_sigma", to_vec(s.p_sigma)},
              {"p_c", to_vec(s.p_c)},
              {"generation", s.generation},
              {"basis", to_vec(s.basis)},
              {"axis_lengths", to_vec(s.axis_lengths)},
              {"eigen_repairs", s.eigen_repairs},
              {"rng", rng.str()},
              {"best", nullptr}};
  if (s.best) doc["best"] = {{"vector", s.best->vector}, {"fitness", *s.best->fitness}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
  out << doc.dump(1) << '\n';
}

EsState load_es_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    const json doc = json::parse(in);
    if (doc.at("version").get<int>() != 1) throw Error(ErrorCode::BadFormat, "unsupported ES snapshot version");
    EsState s;
    s.dim = doc.at("dim").get<int>();
    s.lambda = doc.at("lambda").get<int>();
    if (s.dim < 1 || s.lambda < 2) throw Error(ErrorCode::BadFormat, "ES snapshot dimensions");
    set_strategy_constants(s);
    s.mean = vector_from(doc.at("mean"), s.dim);
    s.cov = matrix_from(doc.at("cov"), s.dim);
    s.sigma = doc.at("sigma").get<double>();
    s.p_sigma = vector_from(doc.at("p_sigma"), s.dim);
    s.p_c = vector_from(doc.at("p_c"), s.dim);
    s.generation = doc.at("generation").get<std::uint64_t>();
    s.basis = matrix_from(doc.at("basis"), s.dim);
    s.axis_lengths = vector_from(doc.at("axis_lengths"), s.dim);
    s.eigen_repairs = doc.at("eigen_repairs").get<std::uint64_t>();
    std::istringstream rng(doc.at("rng").get<std::string>());
    rng >> s.rng;
    if (!doc.at("best").is_null())
      s.best = Candidate{doc["best"].at("vector").get<std::vector<double>>(), doc["best"].at("fitness").get<double>()};
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("ES snapshot: ") + e.what());
  }
}

}  // namespace evoshift
