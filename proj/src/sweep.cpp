#include "capa/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>

#include "capa/monte_carlo.hpp"
#include "capa/spectral.hpp"

namespace capa {

const char* const kCsvHeader = "axis,value,scenario,evaluator,metric,result,std_err,seed,wall_ms";

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct PointInputs {
  double gamma_b_db, gamma_e_db, aperture_len_m;
  int k_eves;
};

PointInputs point_inputs(const SystemConfig& c, Axis axis, double v) {
  PointInputs p{c.gamma_b_db, c.gamma_e_db, c.aperture_len_m, c.k_eves};
  switch (axis) {
    case Axis::gamma_b_db: p.gamma_b_db = v; break;
    case Axis::gamma_e_db: p.gamma_e_db = v; break;
    case Axis::aperture_len: p.aperture_len_m = v; break;
    case Axis::k_eves: p.k_eves = static_cast<int>(v); break;
  }
  return p;
}

struct Spectrum {
  SpectralDecomposition spec;
  MoschopoulosSeries ms;
};

class SpectrumStore {
 public:
  SpectrumStore(const SystemConfig& c, std::string dir) : cfg_(c), dir_(std::move(dir)) {}

  std::shared_ptr<const Spectrum> get(double aperture_len_m) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(aperture_len_m);
    if (it != cache_.end()) return it->second;
    std::string warning;
    const auto geom = ApertureGeometry::make(cfg_.wavelength_m, aperture_len_m, &warning);
    auto s = std::make_shared<Spectrum>();
    s->spec = decompose_cached(geom, cfg_.t, cfg_.epsilon_floor, dir_);
    if (!warning.empty()) s->spec.warnings.push_back(warning);
    s->ms = build_psi(s->spec, cfg_.series_options());
    cache_.emplace(aperture_len_m, s);
    return s;
  }

  std::vector<std::shared_ptr<const Spectrum>> all() const {
    std::vector<std::shared_ptr<const Spectrum>> out;
    for (const auto& [k, v] : cache_) out.push_back(v);
    return out;
  }

 private:
  const SystemConfig& cfg_;
  std::string dir_;
  std::mutex mu_;
  std::map<double, std::shared_ptr<const Spectrum>> cache_;
};

std::string error_tag(const std::exception& e) {
  if (dynamic_cast<const PrecisionLoss*>(&e)) return "precision-loss";
  if (dynamic_cast<const QuadratureError*>(&e)) return "quadrature";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  return "internal";
}

struct PointJob {
  const SweepSpec* sweep;
  double value;
};

struct PointOutput {
  std::vector<SweepRow> rows;
  std::size_t clamped = 0;
};

PointOutput run_point(const SystemConfig& cfg, const SweepOptions& opt, const PointJob& job, SpectrumStore& store,
                      int mc_threads) {
  using clock = std::chrono::steady_clock;
  PointOutput out;
  const SweepSpec& sw = *job.sweep;
  const PointInputs in = point_inputs(cfg, sw.axis, job.value);
  const std::int64_t trials = opt.trials.value_or(cfg.trials);
  const std::uint64_t seed = opt.seed.value_or(cfg.seed);
  const std::vector<Evaluator>& evaluators = opt.evaluators.empty() ? sw.evaluators : opt.evaluators;

  SweepRow base;
  base.axis = std::string(to_string(sw.axis));
  base.value = job.value;

  std::shared_ptr<const Spectrum> sp;
  std::string setup_error;
  try {
    sp = store.get(in.aperture_len_m);
  } catch (const std::exception& e) {
    setup_error = error_tag(e);
  }

  for (Scenario sc : sw.scenarios) {
    for (Evaluator ev : evaluators) {
      std::vector<Metric> metrics;
      for (Metric m : sw.outputs)
        if (evaluator_supports(ev, m)) metrics.push_back(m);
      if (metrics.empty()) continue;

      auto emit = [&](Metric m, double v, std::optional<double> se, bool stochastic, double ms) {
        SweepRow r = base;
        r.scenario = sc;
        r.evaluator = ev;
        r.metric = m;
        r.result = v;
        r.std_err = se;
        if (stochastic) r.seed = seed;
        if (opt.timing) r.wall_ms = ms;
        out.rows.push_back(std::move(r));
      };
      auto emit_error = [&](Metric m, const std::string& tag) {
        SweepRow r = base;
        r.scenario = sc;
        r.evaluator = ev;
        r.metric = m;
        r.error = tag;
        out.rows.push_back(std::move(r));
      };
      if (!setup_error.empty()) {
        for (Metric m : metrics) emit_error(m, setup_error);
        continue;
      }

      const Spectrum& s = *sp;
      LinkBudget lb;
      try {
        lb = LinkBudget::from_db(in.gamma_b_db, in.gamma_e_db, in.k_eves, sc);
      } catch (const std::exception& e) {
        for (Metric m : metrics) emit_error(m, error_tag(e));
        continue;
      }

      if (ev == Evaluator::monte_carlo || ev == Evaluator::spda_mc) {
        const auto t0 = clock::now();
        try {
          McOptions mo;
          mo.threads = mc_threads;
          const McSecrecy r = ev == Evaluator::monte_carlo
                                  ? mc_secrecy(lb, s.spec, cfg.r0, trials, seed, mo)
                                  : spda_baseline(lb, s.spec.geom, cfg.r0, trials, seed, mo);
          const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
          for (Metric m : metrics) {
            const McEstimate& e = m == Metric::rate ? r.rate : r.sop;
            emit(m, e.mean, e.std_err, true, ms);
          }
        } catch (const std::exception& e) {
          for (Metric m : metrics) emit_error(m, error_tag(e));
        }
        continue;
      }

      for (Metric m : metrics) {
        const auto t0 = clock::now();
        try {
          double v = 0.0;
          const EvalPrecision prec = cfg.eval_precision();
          switch (ev) {
            case Evaluator::closed_form:
              if (m == Metric::rate) {
                v = secrecy_rate_closed(lb, s.ms, prec).value;
              } else {
                const ClosedEval ce = sop_closed(lb, s.ms, cfg.r0, prec);
                if (ce.clamped) ++out.clamped;
                v = ce.value;
              }
              break;
            case Evaluator::quadrature:
              v = m == Metric::rate ? secrecy_rate_quadrature(lb, s.ms).value : sop_quadrature(lb, s.ms, cfg.r0).value;
              break;
            case Evaluator::asymptotic:
              switch (m) {
                case Metric::rate: v = std::max(0.0, asymptotic_rate(lb, s.ms)); break;
                case Metric::sop: v = std::min(1.0, diversity_and_gain(lb, s.ms, cfg.r0).asymptotic_sop); break;
                case Metric::slope: v = high_snr_slope(s.ms); break;
                case Metric::offset: v = high_snr_offset(lb, s.ms); break;
                case Metric::gain: v = diversity_and_gain(lb, s.ms, cfg.r0).array_gain; break;
              }
              break;
            default: break;
          }
          const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
          emit(m, v, std::nullopt, false, ms);
        } catch (const std::exception& e) {
          emit_error(m, error_tag(e));
        }
      }
    }
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const SystemConfig& cfg, const SweepOptions& opt) {
  std::vector<PointJob> jobs;
  for (const auto& sw : cfg.sweeps)
    for (double v : sw.values) jobs.push_back({&sw, v});

  SpectrumStore store(cfg, opt.cache_dir);
  std::vector<PointOutput> outputs(jobs.size());
  const unsigned hw = opt.threads > 0 ? static_cast<unsigned>(opt.threads) : std::max(1u, std::thread::hardware_concurrency());
  const unsigned pool = static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(1, jobs.size())));
  // with several points in flight each Monte Carlo run stays single-threaded
  const int mc_threads = pool > 1 ? 1 : static_cast<int>(hw);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) outputs[i] = run_point(cfg, opt, jobs[i], store, mc_threads);
  };
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> th;
    for (unsigned t = 0; t < pool; ++t) th.emplace_back(worker);
    for (auto& t : th) t.join();
  }

  SweepResult res;
  for (auto& o : outputs) {
    res.clamped += o.clamped;
    for (auto& r : o.rows) {
      if (!r.error.empty()) ++res.errors;
      res.rows.push_back(std::move(r));
    }
  }
  for (const auto& s : store.all()) {
    const auto& sp = s->spec;
    char buf[400];
    std::snprintf(buf, sizeof buf,
                  "aperture_len_m=%.6g dof=%d retained=%zu sigma_min=%.6g trace_residual=%.3e "
                  "landau(0.5)=%d predicted=%.2f q_max=%d series_residual=%.3e",
                  sp.geom.aperture_len_m, sp.dof, sp.sigmas.size(), sp.sigma_min, sp.trace_residual(),
                  landau_count(sp, 0.5), landau_prediction(sp.dof, 0.5), s->ms.q_max, s->ms.residual);
    res.summary.emplace_back(buf);
    for (const auto& w : sp.warnings) res.summary.push_back("  warning: " + w);
  }
  return res;
}

std::string format_row(const SweepRow& r) {
  std::string line = r.axis + "," + fmt17(r.value) + "," + std::string(to_string(r.scenario)) + "," +
                     std::string(to_string(r.evaluator)) + "," + std::string(to_string(r.metric)) + ",";
  line += r.error.empty() ? fmt17(r.result) : "error:" + r.error;
  line += ",";
  if (r.std_err) line += fmt17(*r.std_err);
  line += ",";
  if (r.seed) line += std::to_string(*r.seed);
  line += ",";
  if (r.wall_ms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *r.wall_ms);
    line += buf;
  }
  return line;
}

void write_csv(const SweepResult& res, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : res.rows) out << format_row(r) << '\n';
}

}  // namespace capa
