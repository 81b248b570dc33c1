#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace evoshift {

struct Candidate {
  std::vector<double> vector;
  std::optional<double> fitness;
};

/// Search distribution of a (mu/mu_w, lambda)-CMA-ES with the canonical
/// strategy constants. Fitness is MAXIMISED.
struct EsState {
  int dim = 0;
  int lambda = 0;
  int mu = 0;
  std::vector<double> weights;  // mu positive, non-increasing, sum 1
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;  // E||N(0,I)||

  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double sigma = 1.0;
  Eigen::VectorXd p_sigma;
  Eigen::VectorXd p_c;
  std::uint64_t generation = 0;

  // Eigendecomposition of cov = B diag(D^2) B^T, refreshed after each tell.
  Eigen::MatrixXd basis;
  Eigen::VectorXd axis_lengths;
  std::uint64_t eigen_repairs = 0;

  std::mt19937_64 rng;
  std::optional<Candidate> best;
};

/// lambda defaults to 4 + floor(3 ln dim); mu = floor(lambda / 2).
EsState es_init(int dim, std::span<const double> m0, double sigma0, std::optional<int> lambda = std::nullopt,
                std::uint64_t seed = 0);

/// lambda candidates m + sigma * B * D * z drawn from `rng`.
std::vector<Candidate> es_ask(const EsState& state, std::mt19937_64& rng);
/// Draws from the state's own stream (the one persisted by save_es_state).
std::vector<Candidate> es_ask(EsState& state);

/// Ranks by descending fitness (stable in candidate index) and updates mean,
/// step size, evolution paths and covariance.
void es_tell(EsState& state, const std::vector<Candidate>& candidates);

/// Elitist best over every tell so far.
const Candidate& es_best(const EsState& state);

/// Smallest eigenvalue permitted after a tell: 1e-12 * trace / dim.
double eigen_floor(const EsState& state);

void save_es_state(const EsState& state, const std::filesystem::path& path);
EsState load_es_state(const std::filesystem::path& path);

}  // namespace evoshift
