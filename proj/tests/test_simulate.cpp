#include "doctest.h"

#include <cmath>
#include <sstream>

#include "gou/errors.hpp"
#include "gou/kernels.hpp"
#include "gou/simulate.hpp"
#include "test_util.hpp"

using namespace gou;

namespace {

GouModel make_model(std::vector<double> mu, double a, double sigma, int p1, int p2) {
    GouModel m;
    m.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    m.a = a;
    m.sigma = sigma;
    m.basis = {p1, p2};
    return m;
}

ChangePointScenario no_change(const GouModel& m, double hm = 3.0) {
    return {m, m, 0.0, hm};
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("exact step noise scale") {
    const GouModel m = make_model({0.5}, 1.3, 2.0, 1, 0);
    const auto c = exact_step_coeffs(m, 0.05);
    CHECK(c.noise_sd ==
          doctest::Approx(2.0 * std::sqrt((1.0 - std::exp(-2.0 * 1.3 * 0.05)) / (2.0 * 1.3))));
    CHECK(c.decay == doctest::Approx(std::exp(-1.3 * 0.05)));
}

TEST_CASE("exact step pure decay") {
    const GouModel m = make_model({0.0}, 2.0, 0.0, 1, 0);
    CHECK(exact_step(m, 0.3, 1.7, 0.1, 0.0) == doctest::Approx(1.7 * std::exp(-0.2)));
}

TEST_CASE("exact step matches the scalar OU recursion") {
    // p = 1: X_i = b(1-phi) + phi*X_{i-1} + sqrt((1-phi^2)/(2a)) * z
    const GouModel m = make_model({1.4}, 0.7, 1.1, 1, 0);
    const double delta = 0.2;
    const double phi = std::exp(-m.a * delta);
    const double b = m.mu(0) / m.a;
    for (double z : {-1.3, 0.0, 0.8}) {
        const double got = exact_step(m, 0.55, 2.0, delta, z);
        const double want =
            b * (1.0 - phi) + phi * 2.0 + m.sigma * std::sqrt((1.0 - phi * phi) / (2.0 * m.a)) * z;
        CHECK(got == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("sigma=0 trajectory solves the ODE") {
    const GouModel m = make_model({1.5}, 0.8, 0.0, 1, 0);
    const Trajectory traj = simulate_trajectory(no_change(m, 1.0), 200, 10.0, 1);
    const double b = m.mu(0) / m.a;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        CHECK(traj.x[i] == doctest::Approx(b * (1.0 - std::exp(-m.a * traj.t(i)))).epsilon(1e-12));
        CHECK(traj.x[i] > traj.x[i - 1]);  // monotone approach to b
    }
}

TEST_CASE("periodic drift, sigma=0: exact simulator equals htilde in the long run") {
    // After the transient decays the noise-free path tracks the
    // stationary mean h~(t).
    const GouModel noiseless = make_model({1.0, 2.0}, 1.0, 0.0, 2, 0);
    GouModel hmodel = noiseless;
    hmodel.sigma = 1.0;  // htilde does not use sigma
    const std::size_t N = 400;
    const Trajectory traj = simulate_trajectory(no_change(noiseless, 1.0), N, 40.0, 1);
    for (std::size_t i = N - 20; i <= N; ++i)
        CHECK(traj.x[i] == doctest::Approx(htilde(hmodel, traj.t(i))).epsilon(1e-10));
}

TEST_CASE("section-5 grid size") {
    const GouModel m = make_model({1.0, 2.0}, 1.0, 3.0, 2, 0);
    const Trajectory traj = simulate_trajectory(no_change(m, 3.0), 1000, 20.0, 9);
    CHECK(traj.size() == 3001);
    CHECK(traj.delta == doctest::Approx(0.02));
}

TEST_CASE("same seed is bitwise reproducible; theta*=theta0 ignores t*") {
    const GouModel m = make_model({1.0, 2.0}, 1.0, 3.0, 2, 0);
    ChangePointScenario s1{m, m, 0.0, 2.0};
    ChangePointScenario s2{m, m, 0.4, 2.0};
    const Trajectory a = simulate_trajectory(s1, 300, 6.0, 77, 5);
    const Trajectory b = simulate_trajectory(s2, 300, 6.0, 77, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.x[i] == b.x[i]);

    const Trajectory c = simulate_trajectory(s1, 300, 6.0, 77, 6);
    CHECK(a.x[10] != c.x[10]);
}

TEST_CASE("change point switches the dynamics at the right index") {
    GouModel m0 = make_model({1.0}, 1.0, 0.0, 1, 0);
    GouModel m1 = make_model({5.0}, 1.0, 0.0, 1, 0);
    ChangePointScenario s{m0, m1, 0.5, 3.0};
    const std::size_t N = 100;
    const Trajectory traj = simulate_trajectory(s, N, 10.0, 3);
    // change occurs after index N + floor(0.5*N) = 150
    const auto c0 = exact_step_coeffs(m0, traj.delta);
    const auto c1 = exact_step_coeffs(m1, traj.delta);
    CHECK(traj.x[150] ==
          doctest::Approx(exact_step_with(c0, traj.t(149), traj.x[149], 0.0)).epsilon(1e-15));
    CHECK(traj.x[151] ==
          doctest::Approx(exact_step_with(c1, traj.t(150), traj.x[150], 0.0)).epsilon(1e-15));
}

TEST_CASE("euler step basics") {
    const GouModel m = make_model({2.0, 1.0}, 1.0, 0.0, 2, 0);
    const Trajectory one = euler_maruyama_trajectory(m, 10, 1.0, 1, 0, 0.1);
    // sigma=0, one step from 0: x_1 = mu'phi(0) * delta
    const auto phi0 = eval_basis(m.basis, 0.0);
    CHECK(one.x[1] == doctest::Approx(m.mu.dot(phi0) * 0.1).epsilon(1e-14));

    const GouModel decay = make_model({0.0}, 0.5, 0.0, 1, 0);
    const Trajectory d = euler_maruyama_trajectory(decay, 10, 1.0, 1, 0, 1.0, 2.0);
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(d.x[i] == doctest::Approx(2.0 * std::pow(1.0 - 0.5 * 0.1, i)).epsilon(1e-12));
}

TEST_CASE("stationary moments of the exact simulator") {
    // a=1, mu=1, sigma=1: stationary mean 1, variance 1/(2a) = 0.5.
    const GouModel m = make_model({1.0}, 1.0, 1.0, 1, 0);
    const std::size_t reps = 10000;
    std::vector<double> endpoints(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const Trajectory traj = simulate_trajectory(no_change(m, 1.0), 50, 10.0, 31, r);
        endpoints[r] = traj.x.back();
    }
    const double mean = testutil::mean(endpoints);
    const double var = testutil::variance(endpoints);
    const double se_mean = std::sqrt(0.5 / static_cast<double>(reps));
    const double se_var = 0.5 * std::sqrt(2.0 / static_cast<double>(reps));
    CHECK(std::abs(mean - 1.0) < 3.0 * se_mean + 1e-4);
    CHECK(std::abs(var - 0.5) < 3.0 * se_var + 1e-4);
}

TEST_CASE("two half steps compose to one full step") {
    const GouModel m = make_model({1.0, 2.0}, 1.3, 3.0, 2, 0);
    const double delta = 0.04;
    const auto cf = exact_step_coeffs(m, delta);
    const auto ch = exact_step_coeffs(m, delta / 2.0);

    // deterministic part: means agree analytically
    for (double t : {0.0, 0.13, 0.5}) {
        for (double x : {-1.0, 0.0, 2.5}) {
            const double one = exact_step_with(cf, t, x, 0.0);
            const double two =
                exact_step_with(ch, t + delta / 2.0, exact_step_with(ch, t, x, 0.0), 0.0);
            CHECK(one == doctest::Approx(two).epsilon(1e-12));
        }
    }
    // conditional variances agree analytically
    const double var_two = ch.noise_sd * ch.noise_sd * ch.decay * ch.decay +
                           ch.noise_sd * ch.noise_sd;
    CHECK(cf.noise_sd * cf.noise_sd == doctest::Approx(var_two).epsilon(1e-12));

    // stochastic part: distributions agree (two-sample KS)
    const std::size_t n = 4000;
    std::vector<double> one(n), two(n), z(3 * n);
    kernels::normal_fill(5150, 0, z);
    const double t0 = 0.2, x0 = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        one[i] = exact_step_with(cf, t0, x0, z[3 * i]);
        const double mid = exact_step_with(ch, t0, x0, z[3 * i + 1]);
        two[i] = exact_step_with(ch, t0 + delta / 2.0, mid, z[3 * i + 2]);
    }
    CHECK(testutil::ks_two_sample_pvalue(one, two) > 0.01);
}

TEST_CASE("euler-maruyama approaches the exact transition moments") {
    // For the linear SDE the EM recursion is Gaussian with moments given
    // by a deterministic recursion; compare against the exact transition
    // law at t=1 as delta shrinks.
    const GouModel m = make_model({1.0}, 1.0, 1.0, 1, 0);
    const double b = m.mu(0) / m.a;
    const double exact_mean = b * (1.0 - std::exp(-m.a));
    const double exact_var =
        m.sigma * m.sigma * (1.0 - std::exp(-2.0 * m.a)) / (2.0 * m.a);
    std::vector<double> err_mean, err_var;
    for (double delta : {0.04, 0.02, 0.01}) {
        const std::size_t n = static_cast<std::size_t>(std::llround(1.0 / delta));
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * delta;
            const double drift = m.mu(0) * 1.0 - m.a * mean;
            (void)t;
            mean += drift * delta;
            var = var * (1.0 - m.a * delta) * (1.0 - m.a * delta) +
                  m.sigma * m.sigma * delta;
        }
        err_mean.push_back(std::abs(mean - exact_mean));
        err_var.push_back(std::abs(var - exact_var));
    }
    // halving delta should shrink both errors
    CHECK(err_mean[1] < err_mean[0]);
    CHECK(err_mean[2] < err_mean[1]);
    CHECK(err_var[1] < err_var[0]);
    CHECK(err_var[2] < err_var[1]);
    // observed order >= 0.5 (these are first-order for the linear SDE)
    CHECK(std::log2(err_mean[0] / err_mean[1]) > 0.5);
    CHECK(std::log2(err_var[0] / err_var[1]) > 0.5);
}

TEST_CASE("euler-vs-exact sample paths contract as delta shrinks") {
    // Strong-error proxy: same driving noise, same horizon, smaller step.
    const GouModel m = make_model({1.0, 2.0}, 1.0, 1.0, 2, 0);
    double prev = 1e9;
    for (std::size_t n : {25, 50, 100}) {
        std::vector<double> gap;
        for (std::uint64_t r = 0; r < 200; ++r) {
            const Trajectory em = euler_maruyama_trajectory(m, n, 1.0, 99, r);
            const Trajectory ex = simulate_trajectory(no_change(m, 1.0), n, 1.0, 99, r);
            gap.push_back(std::abs(em.x.back() - ex.x.back()));
        }
        const double mg = testutil::mean(gap);
        CHECK(mg < prev);
        prev = mg;
    }
}

TEST_CASE("trajectory csv round trip") {
    const GouModel m = make_model({1.0, 2.0}, 1.0, 3.0, 2, 0);
    const Trajectory traj = simulate_trajectory(no_change(m, 1.5), 50, 2.0, 12);
    std::ostringstream os;
    write_trajectory_csv(traj, os);
    std::istringstream is(os.str());
    const Trajectory back = read_trajectory_csv(is);
    REQUIRE(back.size() == traj.size());
    CHECK(back.delta == traj.delta);
    for (std::size_t i = 0; i < traj.size(); ++i) CHECK(back.x[i] == traj.x[i]);
}

TEST_CASE("scenario json round trip and validation") {
    const GouModel m0 = make_model({1.0, 2.0}, 1.0, 3.0, 2, 0);
    GouModel m1 = make_model({2.0, 4.0}, 2.0, 3.0, 2, 0);
    const ChangePointScenario s{m0, m1, 0.3, 3.0};
    const auto j = scenario_to_json(s, 500, 20.0, 42);
    const ScenarioFile back = scenario_from_json(j);
    CHECK(back.N == 500);
    CHECK(back.T == 20.0);
    CHECK(back.seed == 42);
    CHECK(back.scenario.t_star == 0.3);
    CHECK(back.scenario.theta_star.mu(1) == 4.0);

    m1.sigma = 9.0;
    const ChangePointScenario bad{m0, m1, 0.0, 3.0};
    CHECK_THROWS_AS(bad.validate(), Error);
}

}  // TEST_SUITE
