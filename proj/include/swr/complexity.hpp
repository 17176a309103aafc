#pragma once

#include "swr/linalg.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace swr {

// Inputs of the cost model.  Either per-subdomain sizes K_p with per-iteration
// per-subdomain step counts n_p^(k), or the uniform form with K_tot and N^(k).
struct ComplexityModel {
    double K_tot = 0;
    int L = 1, d = 1, N = 2;
    double beta = 2.0;
    std::vector<double> K_p;
    std::vector<std::vector<long long>> n_pk;  // [k][p]
    std::vector<double> N_k;                   // uniform per-iteration counts
    long long n_T = 0;
    int k_cvg = 0;

    void validate() const {
        require(beta > 1.0 && beta < 3.0, "complexity model needs 1 < beta < 3");
        require(L >= 1 && d >= 1 && N >= 1, "complexity model needs positive L, d, N");
        for (double k : K_p) require(k > 0, "subdomain sizes must be positive");
        for (const auto& row : n_pk) {
            require(K_p.empty() || row.size() == K_p.size(), "per-subdomain counts do not match subdomain sizes");
            for (long long n : row) require(n >= 0, "step counts must be nonnegative");
        }
        for (double n : N_k) require(n >= 0, "step counts must be nonnegative");
    }

    // L^{dN(beta-1)}: the decomposition gain of the uniform form.
    double gain() const { return std::pow(static_cast<double>(L), d * N * (beta - 1.0)); }
};

struct CostEstimate {
    double value = 0;           // the model evaluated with whichever inputs are present
    double uniform_value = 0;   // K_tot^beta / L^{dN(beta-1)} times the summed counts
    double attractiveness = 0;  // summed counts (or k_cvg) over L^{dN(beta-1)}
};

inline double sum_counts(const ComplexityModel& m) {
    if (!m.N_k.empty()) return std::accumulate(m.N_k.begin(), m.N_k.end(), 0.0);
    // Uniform reading of per-subdomain counts: the per-iteration maximum.
    double s = 0;
    for (const auto& row : m.n_pk) s += row.empty() ? 0.0 : static_cast<double>(*std::max_element(row.begin(), row.end()));
    return s;
}

inline CostEstimate cc_stationary(const ComplexityModel& m) {
    m.validate();
    CostEstimate out;
    const double counts = sum_counts(m);
    out.uniform_value = std::pow(m.K_tot, m.beta) / m.gain() * counts;
    out.attractiveness = counts / m.gain();
    if (!m.K_p.empty() && !m.n_pk.empty()) {
        double v = 0;
        for (const auto& row : m.n_pk)
            for (std::size_t p = 0; p < row.size(); ++p) v += static_cast<double>(row[p]) * std::pow(m.K_p[p], m.beta);
        out.value = v;
    } else {
        out.value = out.uniform_value;
    }
    return out;
}

inline CostEstimate cc_tdse(const ComplexityModel& m) {
    m.validate();
    require(m.n_T >= 0 && m.k_cvg >= 0, "time-step and iteration counts must be nonnegative");
    CostEstimate out;
    const double pre = static_cast<double>(m.n_T) * m.k_cvg;
    out.uniform_value = pre * std::pow(m.K_tot, m.beta) / m.gain();
    out.attractiveness = m.k_cvg / m.gain();
    if (!m.K_p.empty()) {
        double s = 0;
        for (double k : m.K_p) s += std::pow(k, m.beta);
        out.value = pre * s;
    } else {
        out.value = out.uniform_value;
    }
    return out;
}

// Measured counters of one run.
struct Counters {
    long long solves = 0;                       // counted where the solver factors/applies the system
    std::vector<long long> per_subdomain;
    std::vector<std::vector<long long>> n_pk;   // per-iteration step counts from the iteration log
    std::vector<std::pair<std::string, double>> phase_seconds;
    std::vector<double> worker_busy;

    long long logged_steps() const {
        long long s = 0;
        for (const auto& row : n_pk)
            for (long long n : row) s += n;
        return s;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["linear_solves"] = solves;
        j["logged_steps"] = logged_steps();
        j["solves_match_log"] = solves == logged_steps();
        j["per_subdomain_solves"] = per_subdomain;
        for (const auto& [name, s] : phase_seconds) j["phase_seconds"][name] = s;
        j["worker_busy_seconds"] = worker_busy;
        return j;
    }
};

struct BetaFit {
    double beta = 0;
    double log_prefactor = 0;
    std::vector<double> sizes, seconds;
};

// Least-squares slope of log(seconds) against log(size).
inline BetaFit fit_beta(const std::vector<double>& sizes, const std::vector<double>& seconds) {
    require(sizes.size() == seconds.size() && sizes.size() >= 2, "beta fit needs at least two samples");
    const int n = static_cast<int>(sizes.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        require(sizes[i] > 0 && seconds[i] > 0, "beta fit needs positive samples");
        const double x = std::log(sizes[i]), y = std::log(seconds[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    require(std::abs(den) > 1e-12, "beta fit needs at least two distinct sizes");
    BetaFit f;
    f.beta = (n * sxy - sx * sy) / den;
    f.log_prefactor = (sy - f.beta * sx) / n;
    f.sizes = sizes;
    f.seconds = seconds;
    return f;
}

// Times dense factor-and-solve of seeded SPD systems at sizes around K and
// fits the exponent.  Small systems are repeated until the timing is stable.
inline BetaFit calibrate_beta(int K, unsigned seed = 7) {
    std::vector<double> sizes, secs;
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    for (int f : {1, 2, 4, 8}) {
        const int n = std::max(16, K * f / 2);
        MatR r(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r(i, j) = nd(rng);
        const MatR a = r * r.transpose() + n * MatR::Identity(n, n);
        const VecR b = VecR::Ones(n);
        int reps = 0;
        double elapsed = 0;
        double sink = 0;
        const auto t0 = std::chrono::steady_clock::now();
        while (elapsed < 0.02 || reps < 3) {
            Eigen::PartialPivLU<MatR> lu(a);
            sink += lu.solve(b)[0];
            ++reps;
            elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        if (!std::isfinite(sink)) throw Error("calibration solve produced a non-finite value");
        sizes.push_back(n);
        secs.push_back(elapsed / reps);
    }
    return fit_beta(sizes, secs);
}

}  // namespace swr
