#include <doctest.h>

#include "fdx/budget.hpp"

#include <limits>
#include <sstream>

using namespace fdx;
using namespace fdx::budget;

TEST_SUITE("budget") {

TEST_CASE("alpha_min arithmetic") {
    CHECK(alpha_min(23.0, 10.0, -15.0) == doctest::Approx(48.0));
    CHECK(alpha_min(0.0, 0.0, 0.0) == doctest::Approx(0.0));
    CHECK(alpha_min(7.0, 10.0, -15.0) == doctest::Approx(32.0));
}

TEST_CASE("delta_max arithmetic") {
    CHECK(delta_max(23.0, 10.0, -90.0, 46.0) == doctest::Approx(77.0));
    CHECK(delta_max(23.0, 10.0, -90.0, 0.0) == doctest::Approx(123.0));  // no analog stage
    CHECK(delta_max(0.0, 0.0, -90.0, 46.0) == doctest::Approx(44.0));
}

TEST_CASE("residual analog power") {
    auto r = residual_analog_power(23.0, -43.0, -58.0);
    CHECK(r.alpha_total_db == doctest::Approx(-45.9).epsilon(0.005));
    CHECK(r.p_a_dbm == doctest::Approx(23.0 + r.alpha_total_db).epsilon(1e-9));

    CHECK(residual_analog_power(10.0, -40.0, -40.0).alpha_total_db == doctest::Approx(-40.0));

    double ninf = -std::numeric_limits<double>::infinity();
    CHECK(residual_analog_power(10.0, -43.0, ninf).alpha_total_db ==
          doctest::Approx(-43.0 - 10.0 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("branch arithmetic bounds the total") {
    for (double as : {-30.0, -43.0, -50.0})
        for (double ac : {-40.0, -58.0, -70.0}) {
            double total = residual_analog_power(5.0, as, ac).alpha_total_db;
            double best = std::max(as, ac);
            CHECK(total <= best + 1e-9);
            CHECK(total >= best - 3.02);
        }
}

TEST_CASE("requirements are affine with unit slopes") {
    const double h = 0.5;
    auto da = (alpha_min(10.0 + h, 3.0, -15.0) - alpha_min(10.0, 3.0, -15.0)) / h;
    CHECK(da == doctest::Approx(1.0));
    auto dm = (delta_max(10.0, 3.0, -90.0 + h, 46.0) - delta_max(10.0, 3.0, -90.0, 46.0)) / h;
    CHECK(dm == doctest::Approx(-1.0));
    auto dal = (delta_max(10.0, 3.0, -90.0, 46.0 + h) - delta_max(10.0, 3.0, -90.0, 46.0)) / h;
    CHECK(dal == doctest::Approx(-1.0));
}

TEST_CASE("report composes to the paper totals") {
    // achieved analog 46 dB plus achieved digital 55 dB totals 101 dB
    CHECK(46.0 + 55.0 == doctest::Approx(101.0));
    SystemParams p;
    BudgetReport r = make_budget_report(p);
    CHECK(r.alpha_min_db == doctest::Approx(48.0));
    CHECK(r.alpha_total_db == doctest::Approx(-45.9).epsilon(0.005));
    CHECK(r.total_sic_db == doctest::Approx(-r.alpha_total_db + r.delta_max_db).epsilon(1e-12));

    std::ostringstream os;
    print_budget_report(os, p, r);
    CHECK(os.str().find("alpha_min") != std::string::npos);
    CHECK(os.str().find("45.8") != std::string::npos);
}

}  // TEST_SUITE
