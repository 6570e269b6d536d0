#include "fdx/budget.hpp"

#include <iomanip>
#include <ostream>

namespace fdx {
namespace budget {

double alpha_min(double p_t_dbm, double papr_margin_db, double p1db_rx_dbm) {
    return p_t_dbm + papr_margin_db - p1db_rx_dbm;
}

double delta_max(double p_t_dbm, double papr_margin_db, double p_nf_dbm, double alpha_db) {
    return p_t_dbm + papr_margin_db - (p_nf_dbm + alpha_db);
}

ResidualAnalog residual_analog_power(double p_t_dbm, double alpha_s_db, double alpha_c_db) {
    const double p_t = dbm_to_mw(p_t_dbm);
    const double p_a = 0.5 * p_t * db_to_lin(alpha_s_db) + 0.5 * p_t * db_to_lin(alpha_c_db);
    ResidualAnalog r;
    r.p_a_dbm = mw_to_dbm(p_a);
    r.alpha_total_db = lin_to_db(p_a / p_t);
    return r;
}

}  // namespace budget

BudgetReport make_budget_report(const SystemParams& p) {
    BudgetReport r;
    r.alpha_min_db = budget::alpha_min(p.tx_power_dbm, p.papr_margin_db, p.p1db_rx_dbm);
    auto res = budget::residual_analog_power(p.tx_power_dbm, p.alpha_selftalk_db, p.alpha_crosstalk_db);
    r.p_residual_analog_dbm = res.p_a_dbm;
    r.alpha_total_db = res.alpha_total_db;
    r.delta_max_db = budget::delta_max(p.tx_power_dbm, p.papr_margin_db, p.noise_floor_dbm,
                                       -res.alpha_total_db);
    r.total_sic_db = -res.alpha_total_db + r.delta_max_db;
    return r;
}

void print_budget_report(std::ostream& os, const SystemParams& p, const BudgetReport& r) {
    auto row = [&](const char* name, double v, const char* unit) {
        os << "  " << std::left << std::setw(34) << name << std::right << std::setw(10)
           << std::fixed << std::setprecision(2) << v << " " << unit << "\n";
    };
    os << "link budget @ P_T = " << std::fixed << std::setprecision(1) << p.tx_power_dbm << " dBm\n";
    row("PAPR margin", p.papr_margin_db, "dB");
    row("noise floor", p.noise_floor_dbm, "dBm");
    row("Rx 1-dB compression point", p.p1db_rx_dbm, "dBm");
    row("analog self-talk isolation", p.alpha_selftalk_db, "dB");
    row("analog cross-talk isolation", p.alpha_crosstalk_db, "dB");
    row("min analog cancellation (alpha_min)", r.alpha_min_db, "dB");
    row("residual analog power (P_A)", r.p_residual_analog_dbm, "dBm");
    row("total analog level (alpha)", r.alpha_total_db, "dB");
    row("max digital cancellation (delta_max)", r.delta_max_db, "dB");
    row("total cancellation budget", r.total_sic_db, "dB");
}

}  // namespace fdx
