#include "sivfs/fitting.hpp"

#include "sivfs/models.hpp"
#include "sivfs/units.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace sivfs;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (const double x : values) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("exact data with a true start converges immediately") {
  const auto grid = linspace(0.0, 1000.0, 100);
  const RabiParams truth{0.05, 1.0, 0.0628, 0.1, 219.0};
  const DataSeries data = synth_rabi(grid, truth, 0.0, 3);
  const auto model = [](double x, const Eigen::VectorXd& p) {
    return rabi_model(x, RabiParams{p(0), p(1), p(2), p(3), p(4)});
  };
  const FitResult fit = fit_curve(model, data, vec({0.05, 1.0, 0.0628, 0.1, 219.0}), {"a", "b", "w", "ph", "t2"});
  CHECK(fit.converged);
  CHECK(fit.iterations <= 2);
  CHECK(fit.residual_norm < 1e-20);
}

TEST_CASE("a line is recovered to machine precision") {
  DataSeries data;
  data.x = {0.0, 1.0, 2.0, 3.0, 4.0};
  for (const double x : data.x) data.y.push_back(2.0 * x + 1.0);
  const auto model = [](double x, const Eigen::VectorXd& p) { return p(0) * x + p(1); };
  const FitResult fit = fit_curve(model, data, vec({0.0, 0.0}), {"slope", "intercept"});
  CHECK(fit.converged);
  CHECK(std::abs(fit.param("slope") - 2.0) < 1e-10);
  CHECK(std::abs(fit.param("intercept") - 1.0) < 1e-10);
}

TEST_CASE("reported uncertainties cover the truth over many noise draws") {
  const auto grid = linspace(0.0, 20.0, 60);
  const auto model = [](double x, const Eigen::VectorXd& p) { return p(0) + p(1) * std::cos(p(2) * x + p(3)); };
  const double truth[4] = {1.0, 0.5, 0.7, 0.3};
  int violations = 0;
  for (int seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::normal_distribution<double> noise(0.0, 0.01);
    DataSeries data;
    data.x = grid;
    for (const double x : grid) data.y.push_back(1.0 + 0.5 * std::cos(0.7 * x + 0.3) + noise(rng));
    const FitResult fit = fit_curve(model, data, vec({0.9, 0.45, 0.72, 0.25}), {"a", "b", "w", "ph"});
    REQUIRE(fit.converged);
    for (int i = 0; i < 4; ++i) {
      if (std::abs(fit.params[static_cast<std::size_t>(i)] - truth[i]) >
          3.0 * fit.uncertainties[static_cast<std::size_t>(i)]) {
        ++violations;
      }
    }
  }
  CHECK(violations <= 4);  // 400 parameter draws at the 3-sigma level
}

TEST_CASE("accepted steps never increase the residual norm") {
  const auto grid = linspace(0.0, 900.0, 120);
  const RabiParams truth{0.0, 1.0, 0.0628, 0.0, 219.0};
  const DataSeries data = synth_rabi(grid, truth, 0.05, 9);
  const auto model = [](double x, const Eigen::VectorXd& p) {
    return rabi_model(x, RabiParams{p(0), p(1), p(2), p(3), std::max(p(4), 1e-9)});
  };
  const Eigen::VectorXd init = vec({0.2, 0.7, 0.060, 0.4, 320.0});
  double chi2_init = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = model(data.x[i], init) - data.y[i];
    chi2_init += r * r;
  }
  const FitResult fit = fit_curve(model, data, init, {"a", "b", "w", "ph", "t2"});
  CHECK(fit.residual_norm <= chi2_init);
}

TEST_CASE("analytic Jacobians of every model match central differences") {
  const double tol = 1e-6;

  SUBCASE("angular") {
    const DataSeries data = synth_angular(linspace(0.0, 180.0, 19), 1.3, 0.7, 0.0, 1);
    const Eigen::VectorXd p0 = vec({1.3, 0.7});
    const ResidualFn residual = [&data](const Eigen::VectorXd& p) {
      Eigen::VectorXd r(static_cast<int>(data.size()));
      for (std::size_t i = 0; i < data.size(); ++i) r(static_cast<int>(i)) = angular_model(data.x[i], p(0), p(1)) - data.y[i];
      return r;
    };
    Eigen::MatrixXd analytic(static_cast<int>(data.size()), 2);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double c = std::cos(2.0 * units::deg_to_rad(data.x[i]));
      analytic(static_cast<int>(i), 0) = 1.0 + p0(1) * c;
      analytic(static_cast<int>(i), 1) = p0(0) * c;
    }
    const Eigen::MatrixXd numeric = numeric_jacobian(residual, p0);
    CHECK((numeric - analytic).cwiseAbs().maxCoeff() < tol * analytic.cwiseAbs().maxCoeff());
  }

  SUBCASE("arrhenius") {
    const DataSeries data = synth_arrhenius(linspace(10.0, 300.0, 20), -5e-3, 0.05, 43.0, 0.0, 1);
    const Eigen::VectorXd p0 = vec({-5e-3, 0.05, 43.0});
    const ResidualFn residual = [&data](const Eigen::VectorXd& p) {
      Eigen::VectorXd r(static_cast<int>(data.size()));
      for (std::size_t i = 0; i < data.size(); ++i) {
        r(static_cast<int>(i)) = arrhenius_model(data.x[i], p(0), p(1), p(2)) - data.y[i];
      }
      return r;
    };
    Eigen::MatrixXd analytic(static_cast<int>(data.size()), 3);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double boltz = std::exp(-p0(2) / (units::k_b_mev_per_k * data.x[i]));
      analytic(static_cast<int>(i), 0) = 1.0;
      analytic(static_cast<int>(i), 1) = boltz;
      analytic(static_cast<int>(i), 2) = -p0(1) * boltz / (units::k_b_mev_per_k * data.x[i]);
    }
    const Eigen::MatrixXd numeric = numeric_jacobian(residual, p0);
    CHECK((numeric - analytic).cwiseAbs().maxCoeff() < tol * analytic.cwiseAbs().maxCoeff());
  }

  SUBCASE("odmr") {
    const OdmrLineshapeParams op{16.0, 1.4, 14.0, 2.0, 0.8};
    const auto points = synth_odmr(linspace(16.0, 40.0, 25), {8.0, 16.0, 24.0}, op, 0.0, 1);
    const Eigen::VectorXd p0 = vec({16.0, 1.4, 14.0, 2.0, 0.8});
    const ResidualFn residual = [&points](const Eigen::VectorXd& p) {
      Eigen::VectorXd r(static_cast<int>(points.size()));
      for (std::size_t i = 0; i < points.size(); ++i) {
        r(static_cast<int>(i)) =
            odmr_lineshape(points[i].nu_mhz, points[i].t_k, OdmrLineshapeParams{p(0), p(1), p(2), p(3), p(4)}) -
            points[i].signal;
      }
      return r;
    };
    Eigen::MatrixXd analytic(static_cast<int>(points.size()), 5);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double x = 0.5 * points[i].nu_mhz - p0(2);
      const double delta = p0(3);
      const double g = std::exp(-x * x / (2.0 * delta * delta));
      const double amp = points[i].t_k - p0(0) - p0(1) * x;
      const int row = static_cast<int>(i);
      analytic(row, 0) = -p0(4) * g;
      analytic(row, 1) = -p0(4) * x * g;
      analytic(row, 2) = p0(4) * g * (p0(1) + amp * x / (delta * delta));
      analytic(row, 3) = p0(4) * amp * g * x * x / (delta * delta * delta);
      analytic(row, 4) = amp * g;
    }
    const Eigen::MatrixXd numeric = numeric_jacobian(residual, p0);
    CHECK((numeric - analytic).cwiseAbs().maxCoeff() < tol * analytic.cwiseAbs().maxCoeff());
  }

  SUBCASE("rabi") {
    const DataSeries data = synth_rabi(linspace(0.0, 1000.0, 40), RabiParams{0.1, 0.9, 0.0628, 0.2, 219.0}, 0.0, 1);
    const Eigen::VectorXd p0 = vec({0.1, 0.9, 0.0628, 0.2, 219.0});
    const ResidualFn residual = [&data](const Eigen::VectorXd& p) {
      Eigen::VectorXd r(static_cast<int>(data.size()));
      for (std::size_t i = 0; i < data.size(); ++i) {
        r(static_cast<int>(i)) = rabi_model(data.x[i], RabiParams{p(0), p(1), p(2), p(3), p(4)}) - data.y[i];
      }
      return r;
    };
    Eigen::MatrixXd analytic(static_cast<int>(data.size()), 5);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double tau = data.x[i];
      const double envelope = std::exp(-tau / p0(4));
      const double phase = p0(2) * tau + p0(3);
      const int row = static_cast<int>(i);
      analytic(row, 0) = 1.0;
      analytic(row, 1) = std::cos(phase) * envelope;
      analytic(row, 2) = -p0(1) * tau * std::sin(phase) * envelope;
      analytic(row, 3) = -p0(1) * std::sin(phase) * envelope;
      analytic(row, 4) = p0(1) * std::cos(phase) * envelope * tau / (p0(4) * p0(4));
    }
    const Eigen::MatrixXd numeric = numeric_jacobian(residual, p0);
    CHECK((numeric - analytic).cwiseAbs().maxCoeff() < tol * analytic.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("angular scan fits") {
  SUBCASE("recovery at five percent relative noise") {
    const auto grid = linspace(0.0, 180.0, 19);
    for (const double target : {0.96, -0.89}) {
      for (int seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
        std::normal_distribution<double> unit(0.0, 1.0);
        DataSeries data;
        data.x = grid;
        for (const double phi : grid) {
          const double m = angular_model(phi, 1.0, target);
          const double sigma = 0.05 * std::max(m, 1e-6);
          data.y.push_back(m + sigma * unit(rng));
          data.sigma.push_back(sigma);
        }
        const FitResult fit = fit_angular(data);
        REQUIRE(fit.converged);
        CHECK(std::abs(fit.param("cos2theta") - target) < 0.02);
      }
    }
  }

  SUBCASE("constant scans flag zero sensitivity") {
    DataSeries data;
    data.x = linspace(0.0, 180.0, 19);
    data.y.assign(19, 2.5);
    const FitResult fit = fit_angular(data);
    CHECK(fit.param("cos2theta") == 0.0);
    CHECK(fit.param("i0") == doctest::Approx(2.5));
    CHECK(fit.has_flag("zero_sensitivity"));
  }

  SUBCASE("short scans are rejected") {
    DataSeries data;
    data.x = linspace(0.0, 90.0, 10);
    data.y.assign(10, 1.0);
    CHECK_THROWS_AS(fit_angular(data), std::invalid_argument);
  }

  SUBCASE("the estimate stays inside the physical interval") {
    const auto grid = linspace(0.0, 180.0, 19);
    const DataSeries data = synth_angular(grid, 1.0, 0.999, 0.05, 11);
    const FitResult fit = fit_angular(data);
    CHECK(std::abs(fit.param("cos2theta")) <= 1.0);
  }
}

TEST_CASE("arrhenius fits") {
  SUBCASE("low temperature limit is the offset") {
    CHECK(arrhenius_model(1e-3, -5e-3, 0.05, 43.0) == doctest::Approx(-5e-3));
    CHECK(arrhenius_model(1e-3, -5e-4, 0.05, 4.1) == doctest::Approx(-5e-4));
    CHECK_THROWS_AS(arrhenius_model(0.0, 0.0, 1.0, 1.0), std::invalid_argument);
  }

  SUBCASE("zero activation energy is a constant") {
    for (const double t : {5.0, 50.0, 500.0}) {
      CHECK(arrhenius_model(t, 0.3, 0.2, 0.0) == doctest::Approx(0.5));
    }
  }

  SUBCASE("activation energies recover within five percent") {
    const auto temps = linspace(10.0, 300.0, 40);
    for (const auto& [ea, c0] : {std::pair{43.0, -5e-3}, std::pair{4.1, -5e-4}}) {
      for (int seed = 1; seed <= 20; ++seed) {
        const DataSeries data = synth_arrhenius(temps, c0, 0.05, ea, 1e-4, static_cast<std::uint64_t>(seed));
        const FitResult fit = fit_arrhenius(data);
        REQUIRE(fit.converged);
        CHECK(std::abs(fit.param("e_a_mev") - ea) < 0.05 * ea);
      }
    }
  }

  SUBCASE("negative activation energies are flagged") {
    const auto temps = linspace(10.0, 300.0, 30);
    const DataSeries data = synth_arrhenius(temps, 0.02, 0.05, -8.0, 0.0, 5);
    const FitResult fit = fit_arrhenius(data);
    CHECK(fit.param("e_a_mev") < 0.0);
    CHECK(fit.has_flag("anti_activation"));
  }
}

TEST_CASE("odmr lineshape model") {
  const OdmrLineshapeParams op{16.0, 1.4, 14.0, 2.0, 0.7};

  SUBCASE("antisymmetric about the line center at the critical temperature") {
    for (double d = 0.1; d < 6.0; d += 0.17) {
      const double plus = odmr_lineshape(2.0 * (op.d0_mhz + d), op.t_c0_k, op);
      const double minus = odmr_lineshape(2.0 * (op.d0_mhz - d), op.t_c0_k, op);
      CHECK(std::abs(plus + minus) < 1e-12);
    }
  }

  SUBCASE("zero at the critical point") {
    CHECK(odmr_lineshape(2.0 * op.d0_mhz, op.t_c0_k, op) == doctest::Approx(0.0).scale(1.0));
  }

  SUBCASE("strictly increasing in temperature on resonance") {
    double previous = odmr_lineshape(2.0 * op.d0_mhz, 5.0, op);
    for (double t = 6.0; t < 30.0; t += 1.0) {
      const double s = odmr_lineshape(2.0 * op.d0_mhz, t, op);
      CHECK(s > previous);
      CHECK(s == doctest::Approx(op.scale * (t - op.t_c0_k)).epsilon(1e-12));
      previous = s;
    }
  }

  SUBCASE("integrated signal changes sign across the critical temperature") {
    const auto integral = [&op](double t) {
      double acc = 0.0;
      const int n = 4001;
      const double lo = 0.0, hi = 60.0, h = (hi - lo) / (n - 1);
      for (int i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        acc += w * odmr_lineshape(lo + i * h, t, op) * h;
      }
      return acc;
    };
    CHECK(integral(op.t_c0_k - 4.0) < 0.0);
    CHECK(integral(op.t_c0_k + 4.0) > 0.0);
  }

  SUBCASE("invalid width is rejected") {
    OdmrLineshapeParams bad = op;
    bad.delta_d_mhz = 0.0;
    CHECK_THROWS_AS(odmr_lineshape(28.0, 10.0, bad), std::invalid_argument);
  }

  SUBCASE("fit recovers the generating parameters") {
    const auto nus = linspace(16.0, 40.0, 61);
    const std::vector<double> temps = {8.0, 12.0, 16.0, 20.0, 24.0};
    const OdmrLineshapeParams truth{16.0, 1.4, 14.0, 2.0, 1.0};
    for (const std::uint64_t seed : {7ull, 19ull, 23ull}) {
      const auto points = synth_odmr(nus, temps, truth, 0.3, seed);
      const FitResult fit = fit_odmr(points);
      REQUIRE(fit.converged);
      CHECK(std::abs(fit.param("t_c0_k") - truth.t_c0_k) < 0.1 * truth.t_c0_k);
      CHECK(std::abs(fit.param("gamma_k_per_mhz") - truth.gamma_k_per_mhz) < 0.1 * truth.gamma_k_per_mhz);
    }
  }
}

TEST_CASE("rabi model and fits") {
  SUBCASE("zero delay value") {
    CHECK(rabi_model(0.0, RabiParams{0.2, 0.8, 0.5, 0.0, 100.0}) == doctest::Approx(1.0));
  }

  SUBCASE("stays inside the decay envelope") {
    const RabiParams p{0.3, 0.8, 0.0628, 0.4, 219.0};
    for (double tau = 0.0; tau < 1200.0; tau += 7.3) {
      CHECK(std::abs(rabi_model(tau, p) - p.a_offset) <= std::abs(p.b_amp) * std::exp(-tau / p.t2_star_ns) + 1e-12);
    }
  }

  SUBCASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(rabi_model(-1.0, RabiParams{0, 1, 1, 0, 100.0}), std::invalid_argument);
    CHECK_THROWS_AS(rabi_model(1.0, RabiParams{0, 1, 1, 0, 0.0}), std::invalid_argument);
  }

  SUBCASE("dephasing times recover inside the reported experimental error") {
    const auto grid = linspace(0.0, 1000.0, 200);
    for (int seed = 1; seed <= 20; ++seed) {
      const DataSeries v2 = synth_rabi(grid, RabiParams{0.0, 1.0, 2.0 * units::pi / 100.0, 0.0, 219.0}, 0.03,
                                       static_cast<std::uint64_t>(seed));
      const FitResult fit = fit_rabi(v2);
      REQUIRE(fit.converged);
      CHECK(std::abs(fit.param("t2_star_ns") - 219.0) < 16.0);
    }
    const auto grid3 = linspace(0.0, 700.0, 200);
    for (int seed = 1; seed <= 20; ++seed) {
      const DataSeries v3 = synth_rabi(grid3, RabiParams{0.0, 1.0, 2.0 * units::pi / 80.0, 0.3, 129.0}, 0.03,
                                       static_cast<std::uint64_t>(seed));
      const FitResult fit = fit_rabi(v3);
      REQUIRE(fit.converged);
      CHECK(std::abs(fit.param("t2_star_ns") - 129.0) < 20.0);
    }
  }
}

TEST_CASE("multiplet splitting from two depolarization points") {
  SUBCASE("paper-flavored inversions") {
    const double v2 = delta_a_from_two_temperatures({15.0, 0.96}, {300.0, 0.72}, DepolarizationBranch::A2Lowest);
    CHECK(v2 == doctest::Approx(50.4).epsilon(2e-3));
    CHECK(v2 > 40.0);
    CHECK(v2 < 75.0);
    const double v3 = delta_a_from_two_temperatures({15.0, -0.89}, {300.0, -0.26}, DepolarizationBranch::ELowest);
    CHECK(v3 == doctest::Approx(-16.5).epsilon(5e-3));
    CHECK(v3 > -25.0);
    CHECK(v3 < -12.0);
  }

  SUBCASE("round trip with the thermal depolarization law") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> delta_dist(8.0, 70.0);
    std::uniform_real_distribution<double> c_dist(0.5, 0.98);
    for (int trial = 0; trial < 30; ++trial) {
      const double delta = delta_dist(rng);
      const double c0 = c_dist(rng);
      const double theta0 = cos2theta_to_theta_deg(c0);
      const double low = thermal_cos2theta(15.0, theta0, delta, DepolarizationBranch::A2Lowest);
      const double high = thermal_cos2theta(300.0, theta0, delta, DepolarizationBranch::A2Lowest);
      const double recovered =
          delta_a_from_two_temperatures({15.0, low}, {300.0, high}, DepolarizationBranch::A2Lowest);
      CHECK(std::abs(recovered - delta) < 1e-9 * delta);

      const double theta0_e = cos2theta_to_theta_deg(-c0);
      const double low_e = thermal_cos2theta(15.0, theta0_e, -delta, DepolarizationBranch::ELowest);
      const double high_e = thermal_cos2theta(300.0, theta0_e, -delta, DepolarizationBranch::ELowest);
      const double recovered_e =
          delta_a_from_two_temperatures({15.0, low_e}, {300.0, high_e}, DepolarizationBranch::ELowest);
      CHECK(std::abs(recovered_e + delta) < 1e-9 * delta);
    }
  }

  SUBCASE("unphysical and degenerate inputs are rejected") {
    CHECK_THROWS_AS(delta_a_from_two_temperatures({15.0, 1.0}, {300.0, 0.7}, DepolarizationBranch::A2Lowest),
                    std::invalid_argument);
    CHECK_THROWS_AS(delta_a_from_two_temperatures({15.0, 0.9}, {15.0, 0.7}, DepolarizationBranch::A2Lowest),
                    std::invalid_argument);
    // No depolarization between the two temperatures: |delta_a| unbounded.
    CHECK_THROWS_AS(delta_a_from_two_temperatures({15.0, 0.9}, {300.0, 0.9}, DepolarizationBranch::A2Lowest),
                    std::out_of_range);
    // Polarization must decrease with temperature on the A2 branch.
    CHECK_THROWS_AS(delta_a_from_two_temperatures({15.0, 0.7}, {300.0, 0.9}, DepolarizationBranch::A2Lowest),
                    std::invalid_argument);
  }
}

TEST_CASE("fit results serialize with parameters and diagnostics") {
  DataSeries data;
  data.x = {0.0, 60.0, 120.0, 180.0};
  for (const double x : data.x) data.y.push_back(angular_model(x, 1.0, 0.5));
  const FitResult fit = fit_angular(data);
  const std::string text = fit_result_to_json(fit);
  CHECK(text.find("\"params\"") != std::string::npos);
  CHECK(text.find("\"cos2theta\"") != std::string::npos);
  CHECK(text.find("\"residual_norm\"") != std::string::npos);
  CHECK(text.find("\"converged\"") != std::string::npos);
  CHECK_THROWS_AS(fit.param("nonexistent"), std::invalid_argument);
}

TEST_CASE("series csv round trip") {
  DataSeries series;
  series.x = {1.0, 2.0, 3.0};
  series.y = {0.5, -0.25, 0.125};
  series.sigma = {0.1, 0.1, 0.2};
  const std::string path = "series_roundtrip_test.csv";
  write_series_csv(path, series, "x,y,sigma");
  const DataSeries loaded = read_series_csv(path);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded.x[1] == doctest::Approx(2.0));
  CHECK(loaded.y[2] == doctest::Approx(0.125));
  CHECK(loaded.sigma[2] == doctest::Approx(0.2));
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_series_csv("/nonexistent/file.csv"), std::invalid_argument);
}
