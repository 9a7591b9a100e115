#include "mpc3/report.hpp"

#include <charconv>
#include <cmath>

namespace mpc3 {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

void put_vec(std::ostream& out, const Vec3& v) {
    out << ',' << format_double(v(0)) << ',' << format_double(v(1)) << ','
        << format_double(v(2));
}

void put_row(std::ostream& out, const std::string& label, int index, const RowVector& row) {
    out << label << ',' << index;
    for (Eigen::Index j = 0; j < row.size(); ++j) out << ',' << format_double(row(j));
    out << '\n';
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const SimTrajectory& trajectory) {
    out << kSchemaLine << '\n'
        << "t,r_x,r_y,r_z,v_x,v_y,v_z,u_x,u_y,u_z,epsilon,s,mode\n";
    out.flush();
    for (const SimStep& st : trajectory.steps) {
        out << format_double(st.t);
        put_vec(out, st.r);
        put_vec(out, st.v);
        put_vec(out, st.u);
        out << ',' << format_double(st.epsilon) << ',' << format_double(st.s) << ','
            << to_string(st.mode) << '\n';
        out.flush();
    }
}

void write_summary(std::ostream& out, const RunSummary& s) {
    out << "status        " << to_string(s.status) << '\n'
        << "docked        " << (s.docked ? "yes" : "no") << '\n'
        << "collided      " << (s.collided ? "yes" : "no") << '\n'
        << "steps         " << s.steps << '\n'
        << "min_s_active  " << format_double(s.min_s) << '\n'
        << "min_s         " << format_double(s.min_s_all) << '\n'
        << "median_s_inj  " << format_double(s.median_s_injected) << '\n'
        << "max_abs_v     " << format_double(s.max_speed_component) << '\n'
        << "effort        " << format_double(s.effort) << '\n'
        << "control_tv    " << format_double(s.control_tv) << '\n';
    if (!s.message.empty()) out << "message       " << s.message << '\n';
}

void write_runs_csv(std::ostream& out, const std::vector<RunSummary>& runs) {
    out << kSchemaLine << '\n'
        << "run,seed,status,docked,collided,min_s_active,min_s,median_s_injected,max_abs_v,"
           "effort,control_tv,steps\n";
    for (const RunSummary& r : runs) {
        out << r.run << ',' << r.seed << ',' << to_string(r.status) << ',' << (r.docked ? 1 : 0)
            << ',' << (r.collided ? 1 : 0) << ',' << format_double(r.min_s) << ','
            << format_double(r.min_s_all) << ',' << format_double(r.median_s_injected) << ','
            << format_double(r.max_speed_component) << ',' << format_double(r.effort) << ','
            << format_double(r.control_tv) << ',' << r.steps << '\n';
    }
}

void write_band_csv(std::ostream& out, const QuantileBand& band) {
    out << kSchemaLine << '\n' << "t,count";
    for (double level : band.levels) out << ",q" << format_double(100.0 * level);
    out << '\n';
    for (std::size_t k = 0; k < band.t.size(); ++k) {
        out << format_double(band.t[k]) << ',' << band.count[k];
        for (double v : band.values[k]) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_comparison_csv(std::ostream& out, const ComparisonResult& r) {
    out << kSchemaLine << '\n' << "t,x_mpc3,x_base,u_mpc3,u_base\n";
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        const bool has_u = k < r.u_mpc3.size();
        out << format_double(r.t[k]) << ',' << format_double(r.x_mpc3[k]) << ','
            << format_double(r.x_base[k]) << ',' << (has_u ? format_double(r.u_mpc3[k]) : "") << ','
            << (has_u ? format_double(r.u_base[k]) : "") << '\n';
    }
}

void write_basis_csv(std::ostream& out, const ChebyshevBasis& basis) {
    const int m = basis.size();
    out << kSchemaLine << '\n' << "# order=" << basis.order() << '\n' << "block,index";
    for (int j = 0; j < m; ++j) out << ",c" << j;
    out << '\n';
    put_row(out, "nodes", 0, basis.nodes().transpose());
    put_row(out, "weights", 0, basis.weights().transpose());
    for (int i = 0; i < m; ++i) put_row(out, "T", i, basis.T_mat().row(i));
    for (int i = 0; i < m; ++i) put_row(out, "beta", i, basis.beta_mat().row(i));
    for (int i = 0; i < m; ++i) put_row(out, "gamma", i, basis.gamma_mat().row(i));
    put_row(out, "T_start", 0, basis.T_start());
    put_row(out, "beta_start", 0, basis.beta_start());
    put_row(out, "gamma_start", 0, basis.gamma_start());
}

}  // namespace mpc3
