#include "theta/recovery.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "theta/errors.hpp"
#include "theta/rng.hpp"
#include "theta/theta_norm.hpp"

namespace theta {

Eigen::VectorXd MeasurementMap::apply(const DenseTensor& X) const {
    if (!(X.dims() == dims)) {
        throw InputError("measurement map applied to a tensor of the wrong dims");
    }
    return rows * X.as_vector();
}

MeasurementMap gaussian_map(const Dims& dims, int m, std::uint64_t seed) {
    if (m < 1) {
        throw InputError("measurement count must be positive");
    }
    const auto N = static_cast<Eigen::Index>(dims.numel());
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(derive_seed(seed, 0x6d6170, attempt));
        MeasurementMap map{m, dims, Eigen::MatrixXd(m, N)};
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index c = 0; c < N; ++c) {
                map.rows(r, c) = scale * rng.normal();
            }
        }
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(map.rows).singularValues();
        if (sv(sv.size() - 1) > 1e-10 * sv(0)) {
            return map;
        }
        if (attempt > 100) {
            throw NumericalError("could not sample a full-rank measurement map");
        }
    }
}

SolverSettings recovery_settings() {
    SolverSettings s;
    s.eps_abs = 1e-9;
    s.eps_rel = 1e-9;
    return s;
}

void ExperimentConfig::validate() const {
    if (dims.order() < 2) {
        throw InputError("experiment needs a tensor of order at least two");
    }
    if (rank < 1 || trials < 1 || !(threshold > 0) || k < 1) {
        throw InputError("experiment needs rank >= 1, trials >= 1, threshold > 0 and k >= 1");
    }
    if (m_values.empty()) {
        throw InputError("experiment needs at least one measurement count");
    }
    for (int m : m_values) {
        if (m < 1) {
            throw InputError("measurement counts must be positive");
        }
    }
    solver.validate();
}

std::vector<int> parse_m_list(const std::string& text) {
    std::vector<int> out;
    auto to_int = [&](const std::string& s) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) {
            throw InputError("bad measurement list: " + text);
        }
        return v;
    };
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_int(item));
            continue;
        }
        const int lo = to_int(item.substr(0, dots));
        const int hi = to_int(item.substr(dots + 2));
        if (lo > hi) {
            throw InputError("empty measurement range: " + item);
        }
        for (int m = lo; m <= hi; ++m) {
            out.push_back(m);
        }
    }
    if (out.empty()) {
        throw InputError("empty measurement list");
    }
    return out;
}

int default_thread_count() {
    if (const char* env = std::getenv("THETA_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

TrialOutcome run_trial(const ExperimentConfig& cfg, int m, int trial) {
    const std::uint64_t stream = derive_seed(cfg.seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial));
    TrialOutcome out;
    out.m = m;
    out.trial = trial;
    const auto start = std::chrono::steady_clock::now();
    try {
        const DenseTensor truth = random_low_rank(cfg.dims, cfg.rank, derive_seed(stream, 1));
        const MeasurementMap map = gaussian_map(cfg.dims, m, derive_seed(stream, 2));
        const IdealSpec spec{cfg.dims, cfg.format, {}};
        const MinimizeResult result = theta_minimize(map.rows, map.apply(truth), spec, cfg.k, cfg.solver);
        double err = 0.0;
        for (std::size_t i = 0; i < truth.values().size(); ++i) {
            err = std::max(err, std::abs(result.Z.values()[i] - truth.values()[i]));
        }
        out.error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
        if (result.solution.status != SolveStatus::Optimal) {
            out.tag = "solver:" + to_string(result.solution.status);
        }
        out.success = out.tag.empty() && out.error <= cfg.threshold;
    } catch (const std::exception& e) {
        out.error = std::numeric_limits<double>::infinity();
        out.tag = std::string("error:") + e.what();
        out.success = false;
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

RecoveryStats run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<int> ms = cfg.m_values;
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());

    // Build the shared structure once, before the workers start.
    (void)cached_moment_structure(IdealSpec{cfg.dims, cfg.format, {}}, cfg.k);

    const std::size_t total = ms.size() * static_cast<std::size_t>(cfg.trials);
    std::vector<TrialOutcome> outcomes(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < total; job = next++) {
            const int m = ms[job / static_cast<std::size_t>(cfg.trials)];
            const int trial = static_cast<int>(job % static_cast<std::size_t>(cfg.trials));
            outcomes[job] = run_trial(cfg, m, trial);
        }
    };
    const int threads = std::max(1, std::min<int>(cfg.threads > 0 ? cfg.threads : default_thread_count(),
                                                  static_cast<int>(total)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    RecoveryStats stats;
    stats.dims = cfg.dims;
    stats.rank = cfg.rank;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        MeasurementRecord rec;
        rec.m = ms[i];
        rec.trials = cfg.trials;
        std::vector<double> errors;
        double seconds = 0.0;
        for (int t = 0; t < cfg.trials; ++t) {
            const auto& o = outcomes[i * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)];
            rec.successes += o.success ? 1 : 0;
            rec.solver_failures += o.tag.empty() ? 0 : 1;
            errors.push_back(o.error);
            seconds += o.seconds;
        }
        std::sort(errors.begin(), errors.end());
        const std::size_t n = errors.size();
        rec.median_error = n % 2 == 1 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
        rec.success_rate = static_cast<double>(rec.successes) / rec.trials;
        rec.mean_seconds = seconds / rec.trials;
        if (rec.successes == 0) {
            stats.m0 = rec.m;
        }
        if (rec.successes == rec.trials && !stats.m1) {
            stats.m1 = rec.m;
        }
        stats.records.push_back(rec);
    }
    stats.trials = std::move(outcomes);
    return stats;
}

namespace {

double mean_extent(const Dims& dims) {
    const auto& s = dims.sizes();
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

} // namespace

std::string RecoveryStats::csv() const {
    const double n = mean_extent(dims);
    const double numel = static_cast<double>(dims.numel());
    std::ostringstream os;
    os << std::setprecision(10);
    os << "m,m_rel,m_over_3nr,m_over_3nr_logn,success_rate,median_err,mean_seconds\n";
    for (const auto& r : records) {
        const double m = r.m;
        os << r.m << ',' << 100.0 * m / numel << ',' << m / (3.0 * n * rank) << ','
           << m / (3.0 * n * rank * std::log(n)) << ',' << r.success_rate << ',' << r.median_error << ','
           << r.mean_seconds << '\n';
    }
    return os.str();
}

nlohmann::json RecoveryStats::summary_json() const {
    nlohmann::json doc;
    doc["dims"] = dims.sizes();
    doc["rank"] = rank;
    doc["m0"] = m0 ? nlohmann::json(*m0) : nlohmann::json(nullptr);
    doc["m1"] = m1 ? nlohmann::json(*m1) : nlohmann::json(nullptr);
    doc["records"] = nlohmann::json::array();
    for (const auto& r : records) {
        doc["records"].push_back({{"m", r.m},
                                  {"successes", r.successes},
                                  {"trials", r.trials},
                                  {"solver_failures", r.solver_failures},
                                  {"success_rate", r.success_rate},
                                  {"median_error", std::isfinite(r.median_error) ? nlohmann::json(r.median_error)
                                                                                  : nlohmann::json(nullptr)},
                                  {"mean_seconds", r.mean_seconds}});
    }
    nlohmann::json failed = nlohmann::json::array();
    for (const auto& t : trials) {
        if (!t.tag.empty()) {
            failed.push_back({{"m", t.m}, {"trial", t.trial}, {"tag", t.tag}});
        }
    }
    doc["failed_solves"] = failed;
    return doc;
}

RecoveryStats phase_table(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    RecoveryStats stats = run_experiment(cfg);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
    }
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream f(path);
        f << text;
        if (!f) {
            throw std::runtime_error("cannot write " + path.string());
        }
    };
    write(out_dir / "phase.csv", stats.csv());
    write(out_dir / "summary.json", stats.summary_json().dump(2) + "\n");
    return stats;
}

} // namespace theta
