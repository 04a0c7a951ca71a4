#include "mtlab/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "mtlab/blowup.hpp"
#include "mtlab/errors.hpp"
#include "mtlab/expr.hpp"
#include "mtlab/io.hpp"
#include "mtlab/rng.hpp"
#include "mtlab/util.hpp"

namespace mtlab {

namespace {

const double kPi = 3.14159265358979323846;

const char* kBlocks[] = {"green",       "robin",    "minimize",  "continuation",
                         "sweep",       "mt_check", "condition", "bubble_check"};

std::string block_for_command(const std::string& command) {
    if (command == "green") return "green";
    if (command == "robin-map") return "robin";
    if (command == "minimize") return "minimize";
    if (command == "continuation") return "continuation";
    if (command == "sweep") return "sweep";
    if (command == "mt-check") return "mt_check";
    if (command == "condition") return "condition";
    if (command == "bubble-check") return "bubble_check";
    throw ConfigError("unknown command '" + command + "'");
}

struct Setup {
    SurfaceMesh mesh;
    ProblemSpec spec;
    std::uint64_t seed = 0;
};

Setup build_setup(const nlohmann::json& config) {
    Setup s;
    try {
        const auto& surf = config.at("surface");
        const std::string backend = surf.at("backend").get<std::string>();
        if (backend == "torus") {
            Expression phi = Expression::parse(surf.value("phi_c", std::string("0")));
            s.mesh = build_torus(surf.at("n").get<int>(), [&](double x, double y) {
                return phi.eval_torus(x, y);
            });
        } else if (backend == "icosphere") {
            s.mesh = build_icosphere(surf.at("level").get<int>());
        } else {
            throw ConfigError("surface.backend must be 'torus' or 'icosphere'");
        }
        Expression psi_expr = Expression::parse(config.at("psi").get<std::string>());
        Expression h_expr = Expression::parse(config.at("h").get<std::string>());
        const double h_zero_tol = config.value("h_zero_tol", -1.0);
        s.spec = make_problem(s.mesh, psi_expr.evaluate(s.mesh), h_expr.evaluate(s.mesh),
                              h_zero_tol);
        s.seed = config.value("seed", std::uint64_t(0));
    } catch (const ConfigError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const ParseError& e) {
        throw ConfigError("expression parse error at byte " + std::to_string(e.offset) + ": " +
                          e.what());
    } catch (const EvalDomainError& e) {
        throw ConfigError(e.what());
    } catch (const InvalidWeight& e) {
        // violates the standing hypothesis int psi dv_g != 0
        throw ConfigError(e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

int resolve_node(const SurfaceMesh& mesh, const nlohmann::json& block, const char* key) {
    const auto& v = block.at(key);
    if (v.is_number_integer()) {
        const int node = v.get<int>();
        if (node < 0 || node >= mesh.node_count()) throw ConfigError("node index out of range");
        return node;
    }
    if (v.is_array()) {  // nearest node to the given coordinates
        const auto xy = v.get<std::vector<double>>();
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < mesh.node_count(); ++i) {
            double d = 0.0;
            for (std::size_t k = 0; k < xy.size() && k < 3; ++k) {
                double diff = mesh.nodes[std::size_t(i)][k] - xy[k];
                if (mesh.is_torus()) diff -= std::round(diff);
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }
    throw ConfigError(std::string(key) + " must be a node index or a coordinate array");
}

}  // namespace

void apply_override(nlohmann::json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
        value = raw;  // plain string
    }
    nlohmann::json* cur = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw ConfigError("--set: empty key segment");
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            break;
        }
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

RunOutcome run_command(const nlohmann::json& config, const std::string& command,
                       const std::string& out_dir, int threads) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string block_name = block_for_command(command);
    int present = 0;
    for (const char* b : kBlocks) present += config.contains(b) ? 1 : 0;
    if (present != 1) throw ConfigError("config must contain exactly one command block");
    if (!config.contains(block_name))
        throw ConfigError("config has no '" + block_name + "' block for command " + command);
    const nlohmann::json& block = config.at(block_name);

    Setup s = build_setup(config);
    std::filesystem::create_directories(out_dir);
    RunOutcome out;
    auto emit = [&](const std::string& name, const std::string& body) {
        write_text_file(out_dir + "/" + name, body);
        out.outputs.push_back(name);
    };
    auto emit_json = [&](const std::string& name, const json& j) { emit(name, j.dump(2) + "\n"); };

    if (command == "green") {
        const int pole = resolve_node(s.mesh, block, "pole");
        ScalarField G = solve_green(s.mesh, s.spec.psi, pole);
        GreenExpansion e = fit_expansion(s.mesh, G, pole);
        emit_json("green_field.json", field_to_json(s.mesh, G));
        emit_json("green_expansion.json", expansion_to_json(e));
    } else if (command == "robin-map") {
        std::vector<int> nodes;
        if (block.contains("samples")) {
            nodes = block.at("samples").get<std::vector<int>>();
        } else if (block.contains("grid") && s.mesh.is_torus()) {
            const int m = block.at("grid").get<int>();
            const int n = s.mesh.resolution;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) nodes.push_back((a * n / m) * n + (b * n / m));
        } else {
            nodes = default_robin_samples(s.mesh);
        }
        RobinField rf = robin_field(s.mesh, s.spec.psi, s.spec.h, nodes, s.spec.h_zero_tol,
                                    threads);
        std::ostringstream csv;
        write_robin_csv(csv, s.mesh, rf);
        emit("robin_map.csv", csv.str());
        json summary;
        summary["argmax_node"] = rf.argmax_node;
        summary["max_two_log_h_plus_A"] = rf.max_value;
        summary["blowup_infimum"] =
            -8.0 * kPi - 8.0 * kPi * std::log(kPi) - 4.0 * kPi * rf.max_value;
        emit_json("robin_summary.json", summary);
    } else if (command == "minimize") {
        MinimizeOptions opts;
        opts.tol_grad = block.value("tol_grad", 1e-8);
        opts.max_iter = block.value("max_iter", 500);
        const double eps = block.at("eps").get<double>();
        const double amp = block.value("init_amplitude", 0.1);
        ScalarField init = amp == 0.0 ? constant_field(s.mesh, 0.0)
                                      : random_smooth(s.mesh, amp, s.seed);
        MinimizerResult r = minimize(s.spec, eps, init, opts);
        emit_json("minimize_result.json", minimizer_result_to_json(r));
        emit_json("minimize_u.json", field_to_json(s.mesh, r.u));
    } else if (command == "continuation") {
        MinimizeOptions opts;
        opts.tol_grad = block.value("tol_grad", 1e-8);
        opts.max_iter = block.value("max_iter", 500);
        const auto schedule = block.at("eps_schedule").get<std::vector<double>>();
        ContinuationReport rep = continuation(s.spec, schedule, opts);
        emit("continuation.csv", continuation_csv(rep));
        emit_json("continuation.json", continuation_to_json(rep));
    } else if (command == "sweep") {
        const int p = resolve_node(s.mesh, block, "point");
        const auto eps_list = block.at("eps_list").get<std::vector<double>>();
        ScalarField G = solve_green(s.mesh, s.spec.psi, p);
        GreenExpansion e = fit_expansion(s.mesh, G, p);
        LocalJet h_jet = local_jet(s.mesh, s.spec.h, p);
        LocalJet psi_jet = local_jet(s.mesh, s.spec.psi, p);
        const double K_p = gaussian_curvature(s.mesh).values[std::size_t(p)];
        CsvWriter csv("eps,alpha,J_numeric,J_asymptotic,gap,gap_over_eps_neglog_eps");
        int idx = 0;
        for (double eps : eps_list) {
            TestFunctionParams params = make_test_function_params(s.spec, p, eps, G, e);
            ScalarField phi = build_test_function(s.spec, params);
            const double Jn = eval_J(s.spec, phi, 0.0).J;
            const double Ja = asymptotic_J(s.spec, p, h_jet, psi_jet, e, K_p, eps);
            const double gap = Jn - Ja;
            csv.row_start();
            csv.cell(eps);
            csv.cell(params.alpha);
            csv.cell(Jn);
            csv.cell(Ja);
            csv.cell(gap);
            csv.cell(gap / (eps * (-std::log(eps))));
            csv.row_end();
            const double r_eps_guess = std::sqrt(kPi * h_jet.value) * std::sqrt(eps);
            BlowupReport rep = make_blowup_report(
                s.spec, phi, p, G, e, h_jet.value, 5.0,
                {5.0 * r_eps_guess, 10.0 * r_eps_guess, 20.0 * r_eps_guess}, 10.0);
            emit_json("blowup_report_" + std::to_string(idx) + ".json",
                      blowup_report_to_json(rep));
            ++idx;
        }
        emit("sweep.csv", csv.str());
    } else if (command == "mt-check") {
        const int count = block.value("num_random_fields", 1000);
        const double amplitude = block.value("amplitude", 5.0);
        const int bandlimit = block.value("bandlimit", 8);
        std::vector<double> bubble_eps =
            block.value("bubble_eps", std::vector<double>{1e-2, 1e-3, 1e-4, 1e-5});
        CsvWriter csv("kind,index,eps,mt_ratio,weakened_ratio");
        double B = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < count; ++i) {
            ScalarField u = random_bandlimited(s.mesh, bandlimit, amplitude, s.seed + i);
            const double v = mt_ratio(s.spec, u);
            const double w = mt_ratio_weakened(s.spec, u, 1.1);
            B = std::max(B, v);
            csv.row_start();
            csv.cell(std::string("random"));
            csv.cell(static_cast<long long>(i));
            csv.cell(0.0);
            csv.cell(v);
            csv.cell(w);
            csv.row_end();
        }
        std::vector<double> weakened;
        if (s.mesh.is_torus()) {
            const int p = 0;
            ScalarField G = solve_green(s.mesh, s.spec.psi, p);
            GreenExpansion e = fit_expansion(s.mesh, G, p);
            int idx = 0;
            for (double eps : bubble_eps) {
                TestFunctionParams params = make_test_function_params(s.spec, p, eps, G, e);
                ScalarField u = build_test_function(s.spec, params);
                const double v = mt_ratio(s.spec, u);
                const double w = mt_ratio_weakened(s.spec, u, 1.1);
                B = std::max(B, v);
                weakened.push_back(w);
                csv.row_start();
                csv.cell(std::string("bubble"));
                csv.cell(static_cast<long long>(idx++));
                csv.cell(eps);
                csv.cell(v);
                csv.cell(w);
                csv.row_end();
            }
        }
        emit("mt_check.csv", csv.str());
        json j;
        j["bound_B"] = B;
        json incs = json::array();
        for (std::size_t i = 1; i < weakened.size(); ++i) incs.push_back(weakened[i] - weakened[i - 1]);
        j["weakened_increments"] = incs;
        emit_json("mt_check.json", j);
    } else if (command == "condition") {
        const int p = resolve_node(s.mesh, block, "point");
        ScalarField G = solve_green(s.mesh, s.spec.psi, p);
        GreenExpansion e = fit_expansion(s.mesh, G, p);
        LocalJet h_jet = local_jet(s.mesh, s.spec.h, p);
        const double K_p = gaussian_curvature(s.mesh).values[std::size_t(p)];
        const double margin = condition_margin(s.spec, p, h_jet, e, K_p);
        const double bracket =
            asymptotic_bracket(s.spec.psi.values[std::size_t(p)] / s.spec.psi_integral, K_p, e,
                               h_jet);
        json j;
        j["point"] = p;
        j["margin"] = margin;
        j["holds"] = margin > 0.0;
        j["bracket"] = bracket;
        j["eps_slope_coefficient"] = -16.0 * kPi * kPi * bracket;
        j["identity_residual"] = margin - 8.0 * kPi * h_jet.value * bracket;
        j["expansion"] = expansion_to_json(e);
        emit_json("condition.json", j);
    } else if (command == "bubble-check") {
        const double h_p = block.value("h_p", 1.0);
        const auto radii = block.value("radii", std::vector<double>{1.0, 5.0, 20.0});
        CsvWriter csv("h_p,R,quadrature,closed_form,abs_error");
        for (double R : radii) {
            const double q = bubble_mass_quadrature(h_p, R);
            const double cf = bubble_mass_closed_form(h_p, R);
            csv.row_start();
            csv.cell(h_p);
            csv.cell(R);
            csv.cell(q);
            csv.cell(cf);
            csv.cell(std::abs(q - cf));
            csv.row_end();
        }
        emit("bubble_check.csv", csv.str());
        json j;
        const double r1 = bubble_pde_residual_max(h_p, 4.0, 256);
        const double r2 = bubble_pde_residual_max(h_p, 4.0, 512);
        j["pde_residual_coarse"] = r1;
        j["pde_residual_fine"] = r2;
        j["observed_order"] = std::log2(r1 / r2);
        emit_json("bubble_check.json", j);
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }

    const auto t1 = std::chrono::steady_clock::now();
    json manifest;
    manifest["command"] = command;
    manifest["config_hash"] = hex64(fnv1a64(config.dump()));
    manifest["seed"] = s.seed;
    manifest["versions"] = {{"mtlab", "0.1.0"}};
    manifest["timings"] = {
        {"total_seconds", std::chrono::duration<double>(t1 - t0).count()}};
    manifest["outputs"] = out.outputs;
    write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
    out.outputs.push_back("manifest.json");
    return out;
}

int run_cli(const std::string& config_path, const std::string& command,
            const std::vector<std::string>& overrides, const std::string& out_dir, int threads,
            std::ostream& err) {
    auto report = [&err](const std::string& type, const std::string& message, int code) {
        json j;
        j["error"] = {{"type", type}, {"message", message}};
        err << j.dump() << "\n";
        return code;
    };
    nlohmann::json config;
    try {
        std::ifstream is(config_path);
        if (!is) return report("config", "cannot open config file " + config_path, 2);
        config = nlohmann::json::parse(is);
        for (const auto& o : overrides) apply_override(config, o);
    } catch (const nlohmann::json::exception& e) {
        return report("config", e.what(), 2);
    } catch (const ConfigError& e) {
        return report("config", e.what(), 2);
    }
    try {
        run_command(config, command, out_dir, threads);
        return 0;
    } catch (const ConfigError& e) {
        return report("config", e.what(), 2);
    } catch (const ParseError& e) {
        return report("config", std::string(e.what()) + " (byte " + std::to_string(e.offset) + ")",
                      2);
    } catch (const Error& e) {
        return report("numeric", e.what(), 3);
    } catch (const std::exception& e) {
        return report("numeric", e.what(), 3);
    }
}

}  // namespace mtlab
