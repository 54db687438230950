// Acceptance run: one PASS/FAIL line per criterion, with wall time and the
// measured quantities. Exit status is nonzero when any criterion fails.

#include "helpers.hpp"
#include "repmech/analysis.hpp"
#include "repmech/cli.hpp"
#include "repmech/error.hpp"
#include "repmech/mechanisms.hpp"
#include "repmech/sampling.hpp"
#include "repmech/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace repmech;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

const double kRootTwoOverPi = std::sqrt(2.0 / M_PI);

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v) { return cli::format_number(v); }

fs::path configs_dir() {
    const char* env = std::getenv("REPMECH_CONFIGS");
    return env ? fs::path(env) : fs::path("configs");
}

// --- independent oracles built on libm -------------------------------------

double cdf(double x, double mu, double s) { return 0.5 * std::erfc(-(x - mu) / (s * std::sqrt(2.0))); }

// int_{-inf}^{c} Phi((t - mu)/s) dt
double cdf_integral(double c, double mu, double s) {
    const double z = (c - mu) / s;
    return s * (z * cdf(z, 0, 1) + std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI));
}

double expected_rhat_oracle(double x, double mu, double s, double eps) {
    return x + 0.5 * eps * (cdf(x + eps, mu, s) - 3 * cdf(x - eps, mu, s)) -
           0.5 * (cdf_integral(x + eps, mu, s) - cdf_integral(x - eps, mu, s)) - 2 * cdf_integral(x - eps, mu, s);
}

// Trapezoid rule for E h(N(mu, s^2)), s > 0.
double normal_expectation(const std::function<double(double)>& h, double mu, double s, int nodes = 4001) {
    const double lo = mu - 9 * s, step = 18 * s / (nodes - 1);
    double sum = 0;
    for (int k = 0; k < nodes; ++k) {
        const double t = lo + k * step;
        const double w = (k == 0 || k == nodes - 1) ? 0.5 : 1.0;
        sum += w * h(t) * std::exp(-0.5 * ((t - mu) / s) * ((t - mu) / s));
    }
    return sum * step / (s * std::sqrt(2 * M_PI));
}

struct MeanSe {
    double mean, se;
};

template <class Draw>
MeanSe sample_mean(std::size_t n, Draw draw) {
    double sum = 0, sq = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = draw();
        sum += v;
        sq += v * v;
    }
    const double m = sum / double(n);
    return {m, std::sqrt(std::max(0.0, sq / double(n) - m * m) / double(n))};
}

// K agents: the first `images` are image users with quality <= 1/2, the rest truth users.
Environment mixed_population(std::size_t k, std::size_t images, double sigma) {
    std::vector<Agent> agents;
    for (std::size_t i = 0; i < k; ++i) {
        const double q = 0.2 + 0.03 * double(i % 10);
        agents.push_back(i < images ? image(int(i), q, sigma) : truth(int(i), q, sigma));
    }
    return env_of(agents, sigma);
}

// --- criteria ---------------------------------------------------------------

Verdict equilibrium_suite() {
    Verdict v;
    for (const char* name : {"as_truth.cfg", "extas_truth.cfg", "fr_truth.cfg", "averaging.cfg"}) {
        std::ostringstream out, err;
        const auto t0 = std::chrono::steady_clock::now();
        const int code = cli::run({"check-equilibrium", (configs_dir() / name).string(), "--grid", "201", "--trials",
                                   "100000"},
                                  out, err);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        v.note(std::string(name) + " exit " + std::to_string(code) + " in " + fmt(std::round(secs * 10) / 10) + " s");
        v.require(code == 0, std::string(name) + " reported a deviation: " + err.str());
        v.require(secs < 60.0, std::string(name) + " exceeded 60 s");
    }
    return v;
}

Verdict pr_offset_roots() {
    Verdict v;
    double worst_residual = 0, worst_gap = 0;
    for (int n = 0; n < 50; ++n) {
        const double a = 0.5 + 4.5 * n / 49.0;
        const double y = solve_y(a);
        v.require(y > 0 && y < 1, "y out of (0, 1) at a = " + fmt(a));
        worst_residual = std::max(worst_residual, std::abs(pr_first_order_condition(y, a)));
        // Normalized setting mu = 0, sigma' = 1, eps = a: coarse then fine grid in y.
        auto value = [&](double yy) { return expected_rhat_oracle(a * yy, 0.0, 1.0, a); };
        double best = 0, best_v = -1e300;
        for (int k = 0; k <= 1000; ++k) {
            const double yy = k / 1000.0;
            if (value(yy) > best_v) best_v = value(yy), best = yy;
        }
        const double lo = std::max(0.0, best - 1e-3), hi = std::min(1.0, best + 1e-3);
        for (int k = 0; k <= 2000; ++k) {
            const double yy = lo + (hi - lo) * k / 2000.0;
            if (value(yy) > best_v) best_v = value(yy), best = yy;
        }
        worst_gap = std::max(worst_gap, std::abs(best - y));
    }
    v.require(worst_residual <= 1e-10, "residual " + fmt(worst_residual));
    v.require(worst_gap <= 1e-3, "oracle gap " + fmt(worst_gap));
    v.note("max residual " + fmt(worst_residual) + ", max |y - oracle| " + fmt(worst_gap));
    return v;
}

Verdict pr_error_minimizer() {
    Verdict v;
    for (double s : {0.05, 0.1, 0.2}) {
        const double a_star = pr_optimal_a(s);
        // Grid cross-check of the minimizer.
        double grid_best = 0, grid_min = 1e300;
        for (int k = 0; k <= 450; ++k) {
            const double a = 0.5 + 0.01 * k;
            const double e = pr_mae(a, s);
            if (e < grid_min) grid_min = e, grid_best = a;
        }
        v.require(std::abs(a_star - 1.7) <= 0.1, "argmin " + fmt(a_star) + " at sigma' " + fmt(s));
        v.require(std::abs(grid_best - 1.7) <= 0.1, "grid argmin " + fmt(grid_best) + " at sigma' " + fmt(s));
        v.require(pr_mae(1.7, s) < averaging_mae(s), "e_m(1.7) not below averaging at sigma' " + fmt(s));
        v.note("sigma' " + fmt(s) + ": argmin " + fmt(std::round(a_star * 1e4) / 1e4) + ", e_m(1.7)/avg " +
               fmt(std::round(pr_mae(1.7, s) / averaging_mae(s) * 1e4) / 1e4));
    }
    return v;
}

Verdict pr_mutual_benefit() {
    Verdict v;
    const double s = 0.1, a = 2.25;
    const double gain = pr_expected_gain(a, s);
    v.require(gain > 0, "E[r_hat] - r = " + fmt(gain));
    v.require(pr_mae(a, s) < averaging_mae(s), "e_m(2.25) not below averaging");
    std::vector<double> grid;
    for (int k = 0; k <= 50; ++k) grid.push_back(2.0 + 0.01 * k);
    const auto region = pr_mutual_benefit_region(s, grid);
    v.require(!region.empty(), "empty region in [2, 2.5]");
    v.require(std::find(region.begin(), region.end(), grid[25]) != region.end(), "2.25 outside the region");
    // Oracle cross-check of the gain at the optimal report.
    const double x = 0.5 + a * s * solve_y(a);
    const double oracle_gain = expected_rhat_oracle(x, 0.5, s, a * s) - 0.5;
    v.require(std::abs(oracle_gain - gain) <= 1e-8, "gain disagrees with oracle " + fmt(oracle_gain));
    v.note("gain " + fmt(gain) + ", e_m " + fmt(pr_mae(a, s)) + " < " + fmt(averaging_mae(s)) + ", region " +
           (region.empty() ? "empty" : "[" + fmt(region.front()) + ", " + fmt(region.back()) + "]"));
    return v;
}

Verdict budget_balance() {
    Verdict v;
    std::mt19937_64 eng(2024);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> size(3, 20);
    double worst = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t k = size(eng);
        MessageProfile msgs;
        ReportMatrix cross(k);
        MechanismContext ctx;
        for (std::size_t i = 0; i < k; ++i) {
            msgs.self_reports.push_back(u01(eng));
            ctx.system_observations.push_back(u01(eng));
            for (std::size_t j = 0; j < k; ++j) cross(j, i) = u01(eng);
        }
        msgs.cross_reports = cross;
        ctx.spec = AbsoluteScoring{};
        const Outcome as = run_as(msgs, ctx);
        double sum = 0;
        for (double t : as.taxes) sum += t;
        worst = std::max(worst, std::abs(sum));

        ExtendedAbsoluteScoring ext;
        ext.ring = identity_ring(k);
        std::shuffle(ext.ring.begin(), ext.ring.end(), eng);
        auto second = identity_ring(k);
        std::shuffle(second.begin(), second.end(), eng);
        ext.layers = 2;
        ext.second_ring = second;
        for (const auto& layer : extended_as_tax_layers(msgs, ext)) {
            double s = 0;
            for (double t : layer) s += t;
            worst = std::max(worst, std::abs(s));
        }
    }
    v.require(worst <= 1e-10, "max |sum t| " + fmt(worst));
    v.note("10000 profiles, max |sum t| " + fmt(worst));
    return v;
}

Verdict individual_rationality() {
    Verdict v;
    double min_gain = 1e300;
    std::size_t points = 0;
    for (double p : {1.0, 2.0}) {
        for (int si = 0; si <= 10; ++si) {
            const double sigma = 0.05 * si;
            for (std::size_t k = 2; k <= 20; ++k) {
                std::vector<double> q;
                for (std::size_t i = 0; i < k; ++i) q.push_back(double(i) / double(k));
                Environment env = truth_env(q, sigma);
                for (auto& a : env.agents) a.utility.f = AbsPower{p};
                const double g = as_ir_gain(env.agents[0], env);
                min_gain = std::min(min_gain, g);
                ++points;
            }
        }
    }
    v.require(min_gain >= 0, "negative gain " + fmt(min_gain));

    // Monte Carlo of the reserved loss sum_j f(R_ij - r_j) at 10^5 trials.
    std::mt19937_64 eng(77);
    int mc_points = 0;
    for (double p : {1.0, 2.0}) {
        for (double sigma : {0.1, 0.35}) {
            for (std::size_t k : {2u, 7u, 20u}) {
                std::vector<double> q(k, 0.5);
                Environment env = truth_env(q, sigma);
                for (auto& a : env.agents) a.utility.f = AbsPower{p};
                std::normal_distribution<double> noise(0.0, sigma);
                const MeanSe mc = sample_mean(100000, [&] {
                    double loss = 0;
                    for (std::size_t j = 1; j < k; ++j) loss += std::pow(std::abs(noise(eng)), p);
                    return loss;
                });
                const double closed = as_ir_gain(env.agents[0], env);
                v.require(std::abs(closed - mc.mean) <= 3 * mc.se,
                          "MC mismatch p " + fmt(p) + " sigma " + fmt(sigma) + " K " + std::to_string(k));
                ++mc_points;
            }
        }
    }
    v.note(std::to_string(points) + " sweep points, min gain " + fmt(min_gain) + "; " + std::to_string(mc_points) +
           " Monte Carlo points");
    return v;
}

Verdict heterogeneous_example() {
    Verdict v;
    // Image best response against a quadrature-and-grid maximizer of g(x) - E (x - R_0)^2.
    double worst = 0;
    const double sigma0 = 0.1;
    for (double r : {0.0, 0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0}) {
        const double closed = image_best_response_as(LinearImage{}, Quality(r), sigma0);
        double best = 0, best_u = -1e300;
        for (int k = 0; k <= 10000; ++k) {
            const double x = k / 10000.0;
            const double u = x - normal_expectation([x](double t) { return (x - t) * (x - t); }, r, sigma0, 801);
            if (u > best_u) best_u = u, best = x;
        }
        v.require(std::abs(closed - std::min(r + 0.5, 1.0)) <= 1e-12, "closed form off at r " + fmt(r));
        worst = std::max(worst, std::abs(closed - best));
    }
    v.require(worst <= 1e-3, "image best response gap " + fmt(worst));

    // Truth participation versus rho <= 4 sigma^2, K = 11.
    int truth_points = 0, truth_ok = 0;
    auto truth_case = [&](std::size_t images, double sigma2) {
        const double rho = double(images) / 10.0;
        const auto rep = hetero_truth_participation(mixed_population(11, images, std::sqrt(sigma2)));
        const bool expected = rho <= 4 * sigma2 * (1 + 1e-12);
        ++truth_points;
        if (rep.participates == expected) ++truth_ok;
        else v.require(false, "truth verdict at rho " + fmt(rho) + " sigma^2 " + fmt(sigma2));
    };
    for (std::size_t images = 1; images <= 10; ++images) {
        const double rho = double(images) / 10.0;
        truth_case(images, rho / 4 * 0.8);  // rho = 5 sigma^2: stays out
        truth_case(images, rho / 4 * 1.25); // rho = 3.2 sigma^2: joins
    }
    truth_case(4, 0.1); // on the boundary

    // Image participation versus gamma <= 4 (1 - r), K = 11.
    int image_points = 0, image_ok = 0;
    for (double r : {0.3, 0.6, 0.75, 0.9}) {
        for (std::size_t truths = 0; truths <= 10; ++truths) {
            std::vector<Agent> agents{image(0, r, sigma0)};
            for (std::size_t j = 0; j < 10; ++j) {
                agents.push_back(j < truths ? truth(int(j + 1), 0.5, sigma0) : image(int(j + 1), 0.4, sigma0));
            }
            const auto rep = hetero_image_participation(env_of(agents, sigma0), 0);
            const double gamma = double(truths) / 10.0;
            const bool expected = r <= 0.5 || gamma <= 4 * (1 - r) + 1e-12;
            ++image_points;
            if (rep.participates == expected && rep.participates_simplified == expected) ++image_ok;
            else v.require(false, "image verdict at r " + fmt(r) + " gamma " + fmt(gamma));
        }
    }

    // System gain versus rho < 2 sqrt(2/pi) sigma, K = 11.
    int gain_points = 0, gain_ok = 0;
    for (std::size_t images : {1u, 3u, 5u, 7u, 10u}) {
        const double rho = double(images) / 10.0;
        for (double ratio : {0.5, 0.8, 1.25, 2.0}) { // ratio = rho / (2 sqrt(2/pi) sigma)
            const double sigma = rho / (2 * kRootTwoOverPi * ratio);
            const auto rep = hetero_system_gain(mixed_population(11, images, sigma));
            const bool expected = rho < 2 * kRootTwoOverPi * sigma;
            ++gain_points;
            if (rep.gains == expected) ++gain_ok;
            else v.require(false, "system gain verdict at rho " + fmt(rho) + " sigma " + fmt(sigma));
        }
    }
    v.note("best response gap " + fmt(worst) + "; truth " + std::to_string(truth_ok) + "/" +
           std::to_string(truth_points) + ", image " + std::to_string(image_ok) + "/" + std::to_string(image_points) +
           ", system gain " + std::to_string(gain_ok) + "/" + std::to_string(gain_points) + " verdicts match");
    return v;
}

Verdict collusion_tax() {
    Verdict v;
    const double sigma = 0.1;
    const Quality r(0.4);
    double best_a = 0, best_b = 0, best = 1e300;
    for (int i = 0; i <= 200; ++i) {
        for (int j = 0; j <= 200; ++j) {
            const double a = 2.0 * i / 200.0, b = -0.5 + j / 200.0;
            const double t = collusion_expected_tax(a, b, r, sigma);
            if (t < best) best = t, best_a = a, best_b = b;
        }
    }
    const bool at_truth = std::abs(best_a - 1.0) <= 0.01 && std::abs(best_b) <= 0.005;
    v.require(at_truth, "grid minimizer (" + fmt(best_a) + ", " + fmt(best_b) + ") with tax " + fmt(best) +
                            ", truthful (1, 0) gives " + fmt(collusion_expected_tax(1, 0, r, sigma)));

    // Monte Carlo: the reporter sees R_ij = r + e1 and reports a R_ij + b; the tax is |x - R_0j|.
    std::mt19937_64 eng(99);
    std::normal_distribution<double> noise(0.0, sigma);
    int agree = 0, total = 0;
    for (auto [a, b] : std::vector<std::pair<double, double>>{{1, 0}, {0.5, 0.1}, {1.5, -0.2}, {0, 0.4}, {2, 0.5}}) {
        const MeanSe mc = sample_mean(1000000, [&] {
            const double x = a * (r + noise(eng)) + b;
            return std::abs(x - (r + noise(eng)));
        });
        ++total;
        if (std::abs(collusion_expected_tax(a, b, r, sigma) - mc.mean) <= 3 * mc.se) ++agree;
        else v.require(false, "Monte Carlo mismatch at (" + fmt(a) + ", " + fmt(b) + ")");
    }
    v.note("Monte Carlo agrees at " + std::to_string(agree) + "/" + std::to_string(total) + " points");
    return v;
}

Verdict pr_oracle_equivalence() {
    Verdict v;
    struct Point {
        double x, mu, sp, eps;
    };
    const std::vector<Point> points{{0.5, 0.5, 0.1, 0.17},  {0.55, 0.5, 0.1, 0.225}, {0.3, 0.5, 0.1, 0.1},
                                    {0.7, 0.5, 0.1, 0.05},  {0.62, 0.6, 0.05, 0.085}, {0.2, 0.2, 0.2, 0.34},
                                    {0.9, 0.8, 0.15, 0.3},  {0.45, 0.4, 0.05, 0.2},  {0.1, 0.3, 0.1, 0.15},
                                    {0.75, 0.7, 0.08, 0.12}};
    const std::size_t k = 4;
    int agree = 0;
    for (std::size_t n = 0; n < points.size(); ++n) {
        const Point& p = points[n];
        // Agent 0 has quality mu; everyone observes with sigma = sigma' sqrt(K).
        std::vector<double> q(k, 0.5);
        q[0] = p.mu;
        const Environment env = truth_env(q, p.sp * std::sqrt(double(k)));
        MechanismContext ctx;
        ctx.spec = PunishReward{p.eps / p.sp};
        ctx.sigma_prime = p.sp;
        random::Engine eng = random::make_engine(123, n);
        const MeanSe mc = sample_mean(1000000, [&] {
            Observations obs = sample_observations(env, eng, true);
            MessageProfile msgs;
            msgs.self_reports = q;
            msgs.self_reports[0] = p.x;
            msgs.cross_reports = obs.cross;
            ctx.system_observations = obs.system;
            return run_pr(msgs, ctx).reputations[0];
        });
        const double quad = expected_pr_reputation(p.x, p.mu, p.sp, p.eps);
        if (std::abs(quad - mc.mean) <= 3 * mc.se) ++agree;
        else v.require(false, "point " + std::to_string(n) + ": quadrature " + fmt(quad) + " vs " + fmt(mc.mean));
    }
    v.note(std::to_string(agree) + "/10 points within 3 stderr");
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism() {
    Verdict v;
    const fs::path root = fs::temp_directory_path() / "repmech_acceptance_determinism";
    fs::remove_all(root);
    struct Job {
        std::string name;
        std::vector<std::string> args;
    };
    const std::vector<Job> jobs{
        {"run_as", {"run", (configs_dir() / "as_truth.cfg").string(), "--trials", "20000"}},
        {"run_pr", {"run", (configs_dir() / "pr_mixed.cfg").string(), "--trials", "20000"}},
        {"run_avg", {"run", (configs_dir() / "averaging.cfg").string(), "--trials", "20000"}},
        {"sweep", {"sweep", (configs_dir() / "sweep_pr.cfg").string(), "--trials", "3000"}},
        {"report", {"report", (configs_dir() / "hetero_report.cfg").string(), "--trials", "5000"}},
        {"check", {"check-equilibrium", (configs_dir() / "fr_truth.cfg").string(), "--trials", "5000", "--grid", "21"}},
    };
    std::size_t files = 0;
    for (const auto& job : jobs) {
        std::vector<fs::path> dirs;
        for (const char* workers : {"1", "2", "5", "1"}) {
            const fs::path dir = root / (job.name + "_" + workers + "_" + std::to_string(dirs.size()));
            auto args = job.args;
            args.insert(args.end(), {"--workers", workers, "--seed", "31", "--out", dir.string()});
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            v.require(code == 0, job.name + " exited " + std::to_string(code) + ": " + err.str());
            dirs.push_back(dir);
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const std::string name = entry.path().filename().string();
            const std::string ref = slurp(entry.path());
            for (std::size_t d = 1; d < dirs.size(); ++d) {
                v.require(slurp(dirs[d] / name) == ref, job.name + "/" + name + " differs");
            }
            ++files;
        }
    }
    v.note(std::to_string(jobs.size()) + " commands, " + std::to_string(files) +
           " files compared across workers 1, 2, 5 and a rerun");
    return v;
}

Verdict proportional_deviation() {
    Verdict v;
    double worst_net = -1e300;
    int envs = 0;
    const std::vector<std::vector<double>> populations{{0.5, 0.3, 0.7}, {0.2, 0.9, 0.4, 0.6}, {0.8, 0.1},
                                                       {0.05, 0.5, 0.5, 0.5, 0.5, 0.5}, {0.95, 0.3, 0.3}};
    for (const auto& q : populations) {
        std::vector<Agent> agents;
        agents.push_back(mixed(0, q[0], 0.5));
        for (std::size_t i = 1; i < q.size(); ++i) agents.push_back(truth(int(i), q[i]));
        Environment env = env_of(agents, 0.1, IndexScheme::Relative);
        for (auto& a : env.agents) a.utility.f = AbsPower{1.0};
        ++envs;
        const double r = q[0];
        for (int k = 0; k <= 1000; ++k) {
            const double x = k / 1000.0;
            const auto d = proportional_deviation_profit(0, x, env, DeviationTax::AbsoluteScoring);
            worst_net = std::max(worst_net, d.net());
            v.require(d.net() <= 1e-12, "net profit " + fmt(d.net()) + " at x " + fmt(x));
            v.require(d.accuracy_loss <= 0, "positive accuracy term at x " + fmt(x));
            const double sign = x > r ? 1.0 : (x < r ? -1.0 : 0.0);
            const bool sign_ok = sign == 0 ? std::abs(d.image_gain) <= 1e-15
                                           : d.image_gain * sign > 0;
            v.require(sign_ok, "image term sign at x " + fmt(x));
        }
    }
    v.note(std::to_string(envs) + " environments x 1001 deviations, max net profit " + fmt(worst_net));
    return v;
}

} // namespace

int main() {
    struct Criterion {
        int number;
        const char* name;
        Verdict (*check)();
        double budget_s; // 0: no time limit
    };
    const std::vector<Criterion> criteria{
        {1, "equilibrium suite", equilibrium_suite, 0},
        {2, "punish-reward optimal offset", pr_offset_roots, 10},
        {3, "punish-reward error minimizer", pr_error_minimizer, 30},
        {4, "mutually beneficial band", pr_mutual_benefit, 10},
        {5, "budget balance", budget_balance, 5},
        {6, "individual rationality", individual_rationality, 60},
        {7, "heterogeneous population thresholds", heterogeneous_example, 30},
        {8, "collusion tax minimizer", collusion_tax, 30},
        {9, "quadrature versus Monte Carlo", pr_oracle_equivalence, 60},
        {10, "determinism", determinism, 0},
        {11, "proportional deviation", proportional_deviation, 10},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs >= c.budget_s) v.require(false, "over the " + fmt(c.budget_s) + " s budget");
        if (!v.pass) ++failures;
        std::cout << "criterion " << c.number << " [" << c.name << "]: " << (v.pass ? "PASS" : "FAIL") << " ("
                  << fmt(std::round(secs * 100) / 100) << " s) " << v.detail << std::endl;
    }
    std::cout << (criteria.size() - std::size_t(failures)) << "/" << criteria.size() << " criteria pass" << std::endl;
    return failures == 0 ? 0 : 1;
}
