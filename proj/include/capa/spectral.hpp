#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace capa {

struct ApertureGeometry {
  double wavelength_m = 0.0;
  double aperture_len_m = 0.0;
  double wavenumber = 0.0;  // 2 pi / wavelength

  // Throws DomainError for nonpositive inputs. Apertures shorter than two
  // wavelengths are accepted but reported through `warning`.
  static ApertureGeometry make(double wavelength_m, double aperture_len_m, std::string* warning = nullptr);

  int dof() const;  // round(2L/lambda)
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

struct SpectralDecomposition {
  ApertureGeometry geom;
  int t = 0;
  double epsilon_floor = 0.0;
  std::vector<double> sigmas;    // descending, metres
  std::vector<double> epsilons;  // 2 sigma / lambda
  Eigen::MatrixXd eigfun;        // column l holds phi_l at the nodes
  std::vector<double> nodes;
  std::vector<double> weights;
  int dof = 0;
  double sigma_min = 0.0;
  double trace = 0.0;  // sum over all t eigenvalues, before trimming
  std::vector<std::string> warnings;

  std::vector<double> leading_sigmas() const {
    return {sigmas.begin(), sigmas.begin() + dof};
  }
  double trace_residual() const { return std::abs(trace - geom.aperture_len_m) / geom.aperture_len_m; }
};

double kernel_value(double z, double z_prime, const ApertureGeometry& geom);

// Legendre rule on [-1, 1] by Newton iteration on the three-term recurrence.
QuadratureRule gauss_legendre_unit(int t);
QuadratureRule gauss_legendre_rule(int t, const ApertureGeometry& geom);

SpectralDecomposition decompose(const ApertureGeometry& geom, int t, double epsilon_floor = 1e-8);

int landau_count(const SpectralDecomposition& spec, double eps);
// DOF + pi^-2 ln((1 - sqrt(eps))/sqrt(eps)) ln DOF
double landau_prediction(int dof, double eps);

// Binary spectrum cache keyed by (lambda, L, t, epsilon_floor).
std::string spectrum_cache_name(const ApertureGeometry& geom, int t, double epsilon_floor);
void save_spectrum(const SpectralDecomposition& spec, const std::string& path);
std::optional<SpectralDecomposition> load_spectrum(const std::string& path);

// Looks in cache_dir first (when nonempty) and writes back on a miss.
SpectralDecomposition decompose_cached(const ApertureGeometry& geom, int t, double epsilon_floor,
                                       const std::string& cache_dir);

}  // namespace capa
