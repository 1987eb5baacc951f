#include "pani/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "pani/errors.hpp"

namespace pani {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

json number_or_inf(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // trim to the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
        double back = std::strtod(shorter, nullptr);
        if (back == v) return shorter;
    }
    return buf;
}

std::string theory_report_json(const TheoryReport& rep) {
    json j;
    j["regime"] = regime_name(rep.regime);
    j["criterion_value"] = number_or_inf(rep.criterion_value);
    if (rep.lambda_star)
        j["lambda_star"] = *rep.lambda_star;
    else
        j["lambda_star"] = nullptr;
    j["g_tilde_star"] = rep.g_tilde_star;
    j["condensate_mass"] = rep.condensate_mass;
    j["diagnostics"] = {{"solver_iterations", rep.diagnostics.solver_iterations},
                        {"solver_residual", rep.diagnostics.solver_residual},
                        {"quadrature_tol", rep.diagnostics.quadrature_tol},
                        {"boundary_tol", rep.diagnostics.boundary_tol}};
    return j.dump(2);
}

std::string urn_report_json(const UrnEReport& e, const EigResult& eig_e, int types_e,
                            const UrnDReport& d, const EigResult& eig_d, int types_d) {
    json j;
    j["lambda"] = e.lambda;
    j["eigvec_residual_max"] =
        std::max({eig_e.residual, e.residual_singleton, e.residual_pair});
    j["B_m"] = e.b_m;
    j["E_m"] = e.e_m;
    j["R_K"] = d.r_k;
    j["E_K"] = d.e_k;
    j["F_K"] = d.f_k;
    j["type_count"] = types_e;
    j["lambda_urn_d"] = d.lambda;
    j["eigvec_residual_max_urn_d"] = std::max(eig_d.residual, d.residual_closed_form);
    j["type_count_urn_d"] = types_d;
    return j.dump(2);
}

void write_degrees_csv(const std::string& path, const EmpiricalMeasures& m) {
    auto out = open_out(path);
    out << "k,bin_lo,bin_hi,count,n,replicas\n";
    double width = m.w_star / m.bins;
    for (int k = 0; k <= m.k_max; ++k)
        for (int b = 0; b < m.bins; ++b) {
            out << k << ',' << fmt_double(b * width) << ',' << fmt_double((b + 1) * width)
                << ',' << m.n_geq(k, b) << ',' << m.n_total << ',' << m.replicas_merged
                << '\n';
        }
}

void write_edges_csv(const std::string& path, const EmpiricalMeasures& m) {
    auto out = open_out(path);
    out << "bin_lo,bin_hi,xi";
    for (int b = 0; b < m.bins; ++b) out << ",xi2_" << b;
    out << '\n';
    double width = m.w_star / m.bins;
    for (int b = 0; b < m.bins; ++b) {
        out << fmt_double(b * width) << ',' << fmt_double((b + 1) * width) << ','
            << m.xi[b];
        for (int c = 0; c < m.bins; ++c) out << ',' << m.xi2(b, c);
        out << '\n';
    }
}

void write_zpath_csv(const std::string& path, const EmpiricalMeasures& m) {
    auto out = open_out(path);
    out << "n,z_over_n\n";
    for (std::size_t i = 0; i < m.z_checkpoints.size(); ++i)
        out << m.z_checkpoints[i] << ','
            << fmt_double(m.z_over_n[i] / m.replicas_merged) << '\n';
}

void write_condensate_csv(const std::string& path,
                          const std::vector<CondensateRow>& rows) {
    auto out = open_out(path);
    out << "eps,n,empirical,predicted,excess\n";
    for (const auto& r : rows)
        out << fmt_double(r.eps) << ',' << r.n << ',' << fmt_double(r.empirical) << ','
            << fmt_double(r.predicted) << ',' << fmt_double(r.excess) << '\n';
}

void write_manifest(const std::string& path, const ExperimentConfig& cfg,
                    std::uint64_t master_seed, int replicas,
                    const std::vector<std::string>& artifacts) {
    json j;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(cfg.config_hash));
    j["config_fnv1a64"] = hash;
    j["master_seed"] = master_seed;
    j["replicas"] = replicas;
    std::vector<std::string> seeds;
    for (int r = 0; r < replicas; ++r) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(
                          derive_seed(master_seed, static_cast<std::uint64_t>(r))));
        seeds.emplace_back(buf);
    }
    j["derived_seeds"] = seeds;
    j["artifacts"] = artifacts;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    auto out = open_out(path);
    out << "param,criterion,regime,lambda_or_gstar,condensate_mass\n";
    for (const auto& r : rows) {
        out << fmt_double(r.param) << ',';
        if (std::isinf(r.criterion))
            out << "inf";
        else
            out << fmt_double(r.criterion);
        out << ',' << r.regime << ',' << fmt_double(r.lambda_or_gstar) << ','
            << fmt_double(r.condensate_mass) << '\n';
    }
}

}  // namespace pani
