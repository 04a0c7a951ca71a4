#include "mtlab/io.hpp"

#include <fstream>

#include "mtlab/errors.hpp"
#include "mtlab/util.hpp"

namespace mtlab {

json mesh_to_json(const SurfaceMesh& mesh) {
    json j;
    if (mesh.is_torus()) {
        j["backend"] = "torus";
        j["n"] = mesh.resolution;
        j["phi_c"] = mesh.conformal_factor;
    } else {
        j["backend"] = "icosphere";
        j["level"] = mesh.resolution;
        json nodes = json::array();
        for (const auto& p : mesh.nodes) nodes.push_back({p[0], p[1], p[2]});
        j["nodes"] = nodes;
    }
    return j;
}

SurfaceMesh mesh_from_json(const json& j) {
    const std::string backend = j.at("backend").get<std::string>();
    if (backend == "torus") {
        return build_torus(j.at("n").get<int>(), j.at("phi_c").get<std::vector<double>>());
    }
    if (backend == "icosphere") return build_icosphere(j.at("level").get<int>());
    throw InvalidArgument("mesh_from_json: unknown backend '" + backend + "'");
}

json field_to_json(const SurfaceMesh& mesh, const ScalarField& f) {
    require_bound(mesh, f);
    json j;
    j["mesh_hash"] = hex64(mesh.id);
    j["values"] = f.values;
    return j;
}

ScalarField field_from_json(const SurfaceMesh& mesh, const json& j) {
    if (j.at("mesh_hash").get<std::string>() != hex64(mesh.id))
        throw MeshMismatch("field_from_json: mesh hash mismatch");
    ScalarField f;
    f.values = j.at("values").get<std::vector<double>>();
    f.mesh_id = mesh.id;
    if (int(f.values.size()) != mesh.node_count())
        throw MeshMismatch("field_from_json: wrong length");
    return f;
}

json expansion_to_json(const GreenExpansion& e) {
    json j;
    j["pole"] = e.pole;
    j["A"] = e.A;
    j["b1"] = e.b[0];
    j["b2"] = e.b[1];
    j["c1"] = e.c[0];
    j["c2"] = e.c[1];
    j["c3"] = e.c[2];
    j["fit_rms"] = e.fit_rms;
    j["r_in"] = e.r_in;
    j["r_out"] = e.r_out;
    return j;
}

json minimizer_result_to_json(const MinimizerResult& r) {
    json j;
    j["J"] = r.J;
    j["eps"] = r.eps;
    j["residual_norm"] = r.residual_norm;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["line_search_backtracks"] = r.line_search_backtracks;
    return j;
}

json continuation_to_json(const ContinuationReport& rep) {
    json j;
    j["verdict"] = verdict_name(rep.verdict);
    j["blowup_infimum"] = rep.blowup_infimum;
    json recs = json::array();
    for (const auto& r : rep.records) {
        json jr;
        jr["eps"] = r.eps;
        jr["J"] = r.J;
        jr["c_eps"] = r.c_eps;
        jr["x_eps"] = r.x_eps;
        jr["lambda_eps"] = r.lambda_eps;
        jr["grad_l2_sq"] = r.grad_l2_sq;
        for (const auto& [q, v] : r.grad_q_norms)
            jr["grad_q_" + format_g17(q).substr(0, 3)] = v;
        jr["mass_radius"] = r.mass_radius;
        jr["converged"] = r.converged;
        recs.push_back(jr);
    }
    j["records"] = recs;
    return j;
}

std::string continuation_csv(const ContinuationReport& rep) {
    CsvWriter csv(
        "eps,J,c_eps,lambda_eps,grad_l2_sq,grad_q_1_2,grad_q_1_5,grad_q_1_8,mass_radius,converged");
    for (const auto& r : rep.records) {
        csv.row_start();
        csv.cell(r.eps);
        csv.cell(r.J);
        csv.cell(r.c_eps);
        csv.cell(r.lambda_eps);
        csv.cell(r.grad_l2_sq);
        csv.cell(r.grad_q_norms.at(1.2));
        csv.cell(r.grad_q_norms.at(1.5));
        csv.cell(r.grad_q_norms.at(1.8));
        csv.cell(r.mass_radius);
        csv.cell(static_cast<long long>(r.converged ? 1 : 0));
        csv.row_end();
    }
    return csv.str();
}

json blowup_report_to_json(const BlowupReport& rep) {
    json j;
    j["center"] = rep.center;
    j["c_eps"] = rep.c_eps;
    j["lambda_eps"] = rep.lambda_eps;
    j["r_eps"] = rep.r_eps;
    j["profile_sup_error"] = rep.profile_sup_error;
    json mf = json::object();
    for (const auto& [r, f] : rep.mass_fraction) mf[format_g17(r)] = f;
    j["mass_fraction"] = mf;
    j["lower_bound_violation"] = rep.lower_bound_violation;
    return j;
}

CsvWriter::CsvWriter(std::string header) : body_(std::move(header)) { body_ += '\n'; }

void CsvWriter::row_start() { first_in_row_ = true; }

void CsvWriter::cell(double v) {
    if (!first_in_row_) body_ += ',';
    body_ += format_g17(v);
    first_in_row_ = false;
}

void CsvWriter::cell(long long v) {
    if (!first_in_row_) body_ += ',';
    body_ += std::to_string(v);
    first_in_row_ = false;
}

void CsvWriter::cell(const std::string& s) {
    if (!first_in_row_) body_ += ',';
    body_ += s;
    first_in_row_ = false;
}

void CsvWriter::row_end() { body_ += '\n'; }

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << body;
}

}  // namespace mtlab
