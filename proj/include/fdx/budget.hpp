#pragma once

#include "fdx/params.hpp"

#include <iosfwd>

namespace fdx {

// Link-budget arithmetic. Measurement-facing isolation levels (alpha_s,
// alpha_c, delta readings) are negative dB ratios; budget-facing quantities
// (alpha, delta here) are positive suppression magnitudes. The conversion is
// a single negation at this boundary.
namespace budget {

// Minimum analog cancellation that keeps peak self-interference out of the
// Rx LNA's nonlinear region.
double alpha_min(double p_t_dbm, double papr_margin_db, double p1db_rx_dbm);

// Maximum digital cancellation that is useful given the achieved analog
// level (positive magnitude) and the noise floor.
double delta_max(double p_t_dbm, double papr_margin_db, double p_nf_dbm, double alpha_db);

struct ResidualAnalog {
    double p_a_dbm = 0.0;        // residual power after analog cancellation
    double alpha_total_db = 0.0; // P_A / P_T, negative
};

// Equal-split residual: P_A = P_T/2 * 10^(as/10) + P_T/2 * 10^(ac/10).
ResidualAnalog residual_analog_power(double p_t_dbm, double alpha_s_db, double alpha_c_db);

}  // namespace budget

struct BudgetReport {
    double alpha_min_db = 0.0;
    double delta_max_db = 0.0;
    double p_residual_analog_dbm = 0.0;
    double alpha_total_db = 0.0;  // negative, measurement convention
    double total_sic_db = 0.0;    // achievable: |alpha_total| + delta_max
};

BudgetReport make_budget_report(const SystemParams& p);

// Fixed-width table.
void print_budget_report(std::ostream& os, const SystemParams& p, const BudgetReport& r);

}  // namespace fdx
