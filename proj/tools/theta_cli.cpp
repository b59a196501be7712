#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "theta/errors.hpp"
#include "theta/ideal.hpp"
#include "theta/recovery.hpp"
#include "theta/theta_norm.hpp"

using namespace theta;
using nlohmann::json;

namespace {

// Parses "1;1,2" into {{1}, {1, 2}}.
std::vector<ModeSet> parse_custom(const std::string& text) {
    std::vector<ModeSet> out;
    std::stringstream groups(text);
    std::string group;
    while (std::getline(groups, group, ';')) {
        ModeSet set;
        std::stringstream items(group);
        std::string item;
        while (std::getline(items, item, ',')) {
            try {
                set.push_back(std::stoi(item));
            } catch (const std::exception&) {
                throw InputError("bad mode list: " + text);
            }
        }
        out.push_back(set);
    }
    return out;
}

IdealSpec make_spec(const std::string& dims, const std::string& format, const std::string& custom) {
    IdealSpec spec{Dims::parse(dims), parse_format(format), {}};
    if (spec.format == TensorFormat::Custom) {
        spec.custom = parse_custom(custom);
    }
    return spec;
}

Eigen::MatrixXd read_matrix(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw InputError("cannot open " + path);
    }
    json doc;
    try {
        f >> doc;
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    if (doc.is_array()) {
        const auto rows = static_cast<Eigen::Index>(doc.size());
        const auto cols = rows > 0 ? static_cast<Eigen::Index>(doc[0].size()) : 0;
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (static_cast<Eigen::Index>(doc[i].size()) != cols) {
                throw InputError(path + ": ragged matrix");
            }
            for (Eigen::Index j = 0; j < cols; ++j) {
                m(i, j) = doc[i][j].get<double>();
            }
        }
        return m;
    }
    const DenseTensor t = tensor_from_json(doc);
    if (t.dims().order() != 2) {
        throw InputError(path + ": expected a matrix");
    }
    return matricize(t, {1}).matrix;
}

SolverSettings make_settings(const std::string& method, double eps, int verbosity) {
    SolverSettings s = precise_settings();
    if (method == "admm") {
        s.method = SolverMethod::Admm;
    } else if (method != "ipm") {
        throw InputError("unknown solver method: " + method);
    }
    if (eps > 0) {
        s.eps_abs = s.eps_rel = eps;
    }
    s.verbosity = verbosity;
    return s;
}

int cmd_certify(const std::string& dims_text) {
    const Dims dims = Dims::parse(dims_text);
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    json doc;
    doc["dims"] = dims.sizes();
    try {
        const auto basis = certified_basis(dims);
        const auto& r = basis->report();
        doc["basis_size"] = basis->elements().size();
        doc["pairs_total"] = r.pairs_total;
        doc["pairs_coprime"] = r.pairs_coprime;
        doc["pairs_reduced"] = r.pairs_reduced;
        doc["buchberger"] = r.passes;
        doc["reduced"] = is_reduced(basis->elements());
        ok = r.passes && doc["reduced"].get<bool>();
        for (auto format : {TensorFormat::Hosvd, TensorFormat::TT}) {
            const auto gens = generators(IdealSpec{dims, format, {}});
            bool inside = true;
            for (const auto& g : gens.minors) {
                inside = inside && basis->contains(g);
            }
            doc["contains_" + to_string(format)] = inside;
            ok = ok && inside;
        }
    } catch (const InvariantError& e) {
        doc["error"] = e.what();
        ok = false;
    }
    doc["certified"] = ok;
    doc["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << doc.dump(2) << '\n';
    return ok ? 0 : 1;
}

int cmd_ideal(const IdealSpec& spec, int k, bool list) {
    const auto gens = generators(spec);
    json doc;
    doc["dims"] = spec.dims.sizes();
    doc["format"] = to_string(spec.format);
    doc["num_minors"] = gens.minors.size();
    if (list) {
        json polys = json::array();
        for (const auto& g : gens.minors) {
            polys.push_back(to_string(g, spec.dims));
        }
        polys.push_back(to_string(gens.frobenius_poly, spec.dims));
        doc["generators"] = polys;
    }
    if (k > 0) {
        const auto structure = cached_moment_structure(spec, k);
        doc["k"] = k;
        doc["moment_matrix_dim"] = structure->dim;
        doc["num_y"] = structure->num_y();
        if (list) {
            json basis = json::array();
            for (const auto& m : structure->basis->monomials) {
                basis.push_back(to_string(m, spec.dims));
            }
            doc["theta_basis"] = basis;
        }
    }
    std::cout << doc.dump(2) << '\n';
    return 0;
}

int cmd_norm(const std::string& input, const IdealSpec& base, int k, const SolverSettings& settings,
             const std::string& dump) {
    const DenseTensor X = read_tensor_file(input);
    IdealSpec spec = base;
    spec.dims = X.dims();
    if (!dump.empty()) {
        std::ofstream f(dump);
        f << norm_program(*cached_moment_structure(spec, k), X).to_json().dump() << '\n';
    }
    json doc;
    try {
        const auto r = theta_norm(X, spec, k, settings);
        doc["norm"] = r.value;
        doc["solver"] = r.solution.to_json();
    } catch (const SolverError& e) {
        doc["error"] = e.what();
        doc["solver"] = e.solution().to_json();
        std::cout << doc.dump(2) << '\n';
        return 3;
    }
    doc["dims"] = X.dims().sizes();
    doc["k"] = k;
    doc["format"] = to_string(spec.format);
    std::cout << doc.dump(2) << '\n';
    return 0;
}

int cmd_nuclear(const std::string& input, const SolverSettings& settings) {
    const Eigen::MatrixXd X = read_matrix(input);
    json doc;
    doc["svd_nuclear"] = svd_nuclear(X);
    try {
        const auto r = nuclear_norm_sdp(X, settings);
        doc["sdp_nuclear"] = r.value;
        doc["solver"] = r.solution.to_json();
    } catch (const SolverError& e) {
        doc["error"] = e.what();
        std::cout << doc.dump(2) << '\n';
        return 3;
    }
    std::cout << doc.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"theta: theta-body norms of tensors, Groebner certification and recovery experiments"};
    app.require_subcommand(1);

    std::string dims = "2,2,2", format = "full", custom, input, method = "ipm", dump, out = "results", m_text;
    int k = 1, verbosity = 0, rank = 1, trials = 200, threads = 0, max_k = 2;
    double eps = 0, threshold = 1e-6;
    std::uint64_t seed = 0;
    bool list = false;

    auto* certify = app.add_subcommand("certify", "Buchberger certificate for the full ideal and format containment");
    certify->add_option("--dims", dims, "Tensor dims, e.g. 2,2,2,2")->required();

    auto* ideal = app.add_subcommand("ideal", "Generators, theta basis and moment-matrix size");
    ideal->add_option("--dims", dims)->required();
    ideal->add_option("--format", format, "full | hosvd | tt | custom");
    ideal->add_option("--custom", custom, "Row-mode sets for --format custom, e.g. \"1;1,2\"");
    ideal->add_option("--k", k, "Theta level (0 to skip the moment structure)");
    ideal->add_flag("--list", list, "Print generators and basis monomials");

    auto* norm = app.add_subcommand("norm", "Theta_k norm of a tensor given as JSON {dims, values}");
    norm->add_option("--input", input)->required();
    norm->add_option("--k", k);
    norm->add_option("--max-k", max_k, "Refuse levels above this cap");
    norm->add_option("--format", format);
    norm->add_option("--custom", custom);
    norm->add_option("--method", method, "ipm | admm");
    norm->add_option("--eps", eps, "Solver tolerance (default 1e-9)");
    norm->add_option("--dump-program", dump, "Write the cone program as JSON");
    norm->add_option("-v,--verbosity", verbosity);

    auto* nuclear = app.add_subcommand("nuclear", "Matrix nuclear norm by SDP and by SVD");
    nuclear->add_option("--input", input, "Matrix JSON: nested rows or {dims, values}")->required();
    nuclear->add_option("--method", method);
    nuclear->add_option("--eps", eps);

    auto* recover = app.add_subcommand("recover", "Monte-Carlo recovery sweep; writes phase.csv and summary.json");
    recover->add_option("--dims", dims)->required();
    recover->add_option("--rank", rank);
    recover->add_option("--m", m_text, "Measurement counts: 11..30 or 4,8,12")->required();
    recover->add_option("--trials", trials);
    recover->add_option("--seed", seed);
    recover->add_option("--threshold", threshold, "Elementwise success threshold (1e-6, or 1e-3 for the loose regime)");
    recover->add_option("--k", k);
    recover->add_option("--format", format);
    recover->add_option("--method", method);
    recover->add_option("--eps", eps);
    recover->add_option("--threads", threads, "Worker threads (default THETA_THREADS or all cores)");
    recover->add_option("--out", out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*certify) {
            return cmd_certify(dims);
        }
        if (*ideal) {
            return cmd_ideal(make_spec(dims, format, custom), k, list);
        }
        if (*norm) {
            if (k < 1 || k > max_k) {
                throw InputError("--k must be between 1 and --max-k");
            }
            return cmd_norm(input, make_spec("2,2", format, custom), k, make_settings(method, eps, verbosity), dump);
        }
        if (*nuclear) {
            return cmd_nuclear(input, make_settings(method, eps, 0));
        }
        if (*recover) {
            ExperimentConfig cfg;
            cfg.dims = Dims::parse(dims);
            cfg.rank = rank;
            cfg.m_values = parse_m_list(m_text);
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.threshold = threshold;
            cfg.k = k;
            cfg.format = parse_format(format);
            cfg.solver = make_settings(method, eps, 0);
            cfg.threads = threads;
            const RecoveryStats stats = phase_table(cfg, out);
            std::cout << stats.csv();
            std::cout << stats.summary_json().dump(2) << '\n';
            return 0;
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
