#include "capa/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "capa/simd.hpp"
#include "capa/specfun.hpp"

namespace capa {

ApertureGeometry ApertureGeometry::make(double wavelength_m, double aperture_len_m, std::string* warning) {
  if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m)) throw DomainError("wavelength must be positive");
  if (!(aperture_len_m > 0.0) || !std::isfinite(aperture_len_m))
    throw DomainError("aperture length must be positive");
  ApertureGeometry g;
  g.wavelength_m = wavelength_m;
  g.aperture_len_m = aperture_len_m;
  g.wavenumber = 2.0 * std::numbers::pi / wavelength_m;
  if (warning) {
    warning->clear();
    if (aperture_len_m < 2.0 * wavelength_m * (1.0 - 1e-12))
      *warning = "aperture shorter than two wavelengths; the eigenvalue plateau is not well formed";
  }
  return g;
}

int ApertureGeometry::dof() const {
  return static_cast<int>(std::lround(2.0 * aperture_len_m / wavelength_m));
}

double kernel_value(double z, double z_prime, const ApertureGeometry& geom) {
  const double x = geom.wavenumber * (z - z_prime);
  if (x == 0.0) return 1.0;
  return std::sin(x) / x;
}

QuadratureRule gauss_legendre_unit(int t) {
  if (t < 2) throw DomainError("gauss_legendre_rule: need at least two nodes");
  QuadratureRule r;
  r.nodes.resize(t);
  r.weights.resize(t);
  const int half = (t + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (t + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= t; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = t * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // one more derivative evaluation at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= t; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = t * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[t - 1 - i] = x;
    r.weights[i] = w;
    r.weights[t - 1 - i] = w;
  }
  if (t % 2 == 1) r.nodes[t / 2] = 0.0;
  return r;
}

QuadratureRule gauss_legendre_rule(int t, const ApertureGeometry& geom) {
  QuadratureRule r = gauss_legendre_unit(t);
  const double h = 0.5 * geom.aperture_len_m;
  for (int i = 0; i < t; ++i) {
    r.nodes[i] *= h;
    r.weights[i] *= h;
  }
  return r;
}

SpectralDecomposition decompose(const ApertureGeometry& geom, int t, double epsilon_floor) {
  if (!(epsilon_floor > 0.0 && epsilon_floor < 1.0)) throw DomainError("epsilon_floor must lie in (0, 1)");
  const int dof = geom.dof();
  if (dof < 1) throw DomainError("aperture too short: 2L/lambda rounds to zero");
  if (t < 2 * dof) throw DomainError("quadrature order t must be at least 2*dof (" + std::to_string(2 * dof) + ")");

  SpectralDecomposition spec;
  spec.geom = geom;
  spec.t = t;
  spec.epsilon_floor = epsilon_floor;
  spec.dof = dof;
  const double ratio = 2.0 * geom.aperture_len_m / geom.wavelength_m;
  if (std::abs(ratio - dof) > 1e-9 * std::max(1.0, ratio))
    spec.warnings.push_back("2L/lambda = " + std::to_string(ratio) + " is not an integer; dof rounded to " +
                            std::to_string(dof));
  if (geom.aperture_len_m < 2.0 * geom.wavelength_m * (1.0 - 1e-12))
    spec.warnings.push_back("aperture shorter than two wavelengths");

  QuadratureRule rule = gauss_legendre_rule(t, geom);
  std::vector<double> sw(t);
  for (int i = 0; i < t; ++i) sw[i] = std::sqrt(rule.weights[i]);

  // W^1/2 R W^1/2, rows assembled by the sinc kernel
  Eigen::MatrixXd a(t, t);
  std::vector<double> row(t);
  for (int i = 0; i < t; ++i) {
    simd::sinc_row(geom.wavenumber, rule.nodes[i], rule.nodes.data(), row.data(), t);
    for (int j = 0; j < t; ++j) a(j, i) = sw[i] * row[j] * sw[j];
  }
  // exact symmetry so the solver sees the same matrix regardless of kernel rounding
  for (int i = 0; i < t; ++i)
    for (int j = i + 1; j < t; ++j) {
      const double m = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = m;
      a(j, i) = m;
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "symmetric eigensolve failed (t = " << t << ", max |a| = " << a.cwiseAbs().maxCoeff() << ")";
    throw std::runtime_error(msg.str());
  }
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  spec.trace = ev.sum();

  int keep = 0;
  for (int i = t - 1; i >= 0; --i) {
    const double eps = 2.0 * ev(i) / geom.wavelength_m;
    if (eps >= epsilon_floor || keep < dof) ++keep;
    else break;
  }
  spec.sigmas.resize(keep);
  spec.epsilons.resize(keep);
  spec.eigfun.resize(t, keep);
  for (int l = 0; l < keep; ++l) {
    const int src = t - 1 - l;
    const double s = std::max(ev(src), 0.0);
    spec.sigmas[l] = s;
    spec.epsilons[l] = 2.0 * s / geom.wavelength_m;
    Eigen::VectorXd v = es.eigenvectors().col(src);
    // fix the sign so the largest-magnitude entry is positive
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0) v = -v;
    for (int k = 0; k < t; ++k) spec.eigfun(k, l) = v(k) / sw[k];
  }
  spec.nodes = std::move(rule.nodes);
  spec.weights = std::move(rule.weights);
  spec.sigma_min = spec.sigmas[dof - 1];
  if (!(spec.sigma_min > 0.0)) throw std::runtime_error("sigma_min is not positive; increase t");
  return spec;
}

int landau_count(const SpectralDecomposition& spec, double eps) {
  return static_cast<int>(std::count_if(spec.epsilons.begin(), spec.epsilons.end(),
                                        [eps](double e) { return e > eps; }));
}

double landau_prediction(int dof, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("landau_prediction: eps must lie in (0, 1)");
  const double r = std::sqrt(eps);
  return dof + std::log((1.0 - r) / r) * std::log(static_cast<double>(dof)) / (std::numbers::pi * std::numbers::pi);
}

namespace {

constexpr char kMagic[8] = {'C', 'A', 'P', 'A', 'S', 'P', 'C', '1'};

std::string hex_bits(double x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(x)));
  return buf;
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}
void put_vec(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}
bool get_vec(std::istream& is, double* p, std::size_t n) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double))));
}

}  // namespace

std::string spectrum_cache_name(const ApertureGeometry& geom, int t, double epsilon_floor) {
  return "spectrum_" + hex_bits(geom.wavelength_m) + "_" + hex_bits(geom.aperture_len_m) + "_" + std::to_string(t) +
         "_" + hex_bits(epsilon_floor) + ".bin";
}

void save_spectrum(const SpectralDecomposition& s, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write spectrum cache " + tmp);
    os.write(kMagic, sizeof kMagic);
    put(os, s.geom.wavelength_m);
    put(os, s.geom.aperture_len_m);
    put(os, static_cast<std::int64_t>(s.t));
    put(os, s.epsilon_floor);
    put(os, static_cast<std::int64_t>(s.dof));
    put(os, s.trace);
    const std::int64_t keep = static_cast<std::int64_t>(s.sigmas.size());
    put(os, keep);
    put_vec(os, s.sigmas.data(), s.sigmas.size());
    put_vec(os, s.nodes.data(), s.nodes.size());
    put_vec(os, s.weights.data(), s.weights.size());
    put_vec(os, s.eigfun.data(), static_cast<std::size_t>(s.eigfun.size()));
    if (!os) throw std::runtime_error("short write on spectrum cache " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::optional<SpectralDecomposition> load_spectrum(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  if (!is.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic)) return std::nullopt;
  double lambda, len, floor_, trace;
  std::int64_t t, dof, keep;
  if (!get(is, lambda) || !get(is, len) || !get(is, t) || !get(is, floor_) || !get(is, dof) || !get(is, trace) ||
      !get(is, keep))
    return std::nullopt;
  if (t < 2 || keep < dof || keep > t || dof < 1) return std::nullopt;
  SpectralDecomposition s;
  s.geom = ApertureGeometry::make(lambda, len);
  s.t = static_cast<int>(t);
  s.epsilon_floor = floor_;
  s.dof = static_cast<int>(dof);
  s.trace = trace;
  s.sigmas.resize(keep);
  s.nodes.resize(t);
  s.weights.resize(t);
  s.eigfun.resize(t, keep);
  if (!get_vec(is, s.sigmas.data(), keep) || !get_vec(is, s.nodes.data(), t) || !get_vec(is, s.weights.data(), t) ||
      !get_vec(is, s.eigfun.data(), static_cast<std::size_t>(t * keep)))
    return std::nullopt;
  s.epsilons.resize(keep);
  for (std::int64_t l = 0; l < keep; ++l) s.epsilons[l] = 2.0 * s.sigmas[l] / lambda;
  s.sigma_min = s.sigmas[s.dof - 1];
  return s;
}

SpectralDecomposition decompose_cached(const ApertureGeometry& geom, int t, double epsilon_floor,
                                       const std::string& cache_dir) {
  if (cache_dir.empty()) return decompose(geom, t, epsilon_floor);
  const std::filesystem::path path = std::filesystem::path(cache_dir) / spectrum_cache_name(geom, t, epsilon_floor);
  if (auto hit = load_spectrum(path.string())) {
    if (hit->geom.wavelength_m == geom.wavelength_m && hit->geom.aperture_len_m == geom.aperture_len_m &&
        hit->t == t && hit->epsilon_floor == epsilon_floor)
      return *hit;
  }
  SpectralDecomposition s = decompose(geom, t, epsilon_floor);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  try {
    save_spectrum(s, path.string());
  } catch (const std::exception&) {
    // a read-only cache directory only costs the re-decomposition next time
  }
  return s;
}

}  // namespace capa
