// nct: command-line front end for the noncommutative torus toolkit.
//
// exit codes: 0 success, 1 a check failed, 2 usage error, 3 input or I/O error

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nct/nct.hpp"

namespace fs = std::filesystem;
using namespace nct;

namespace {

enum Exit { ok = 0, failed = 1, usage = 2, input = 3 };

void emit(const std::string &out, const std::string &content) {
    if (out.empty() || out == "-")
        std::cout << content;
    else
        write_file_atomic(out, content);
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

Point parse_point(const std::string &s, int n) {
    Point p;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        try {
            p.push_back(std::stod(tok));
        } catch (const std::exception &) {
            throw usage_error("--at: not a number: \"" + tok + "\"");
        }
    if (p.size() == 1 && n > 1)
        p.assign(std::size_t(n), p[0]);
    if (p.size() != std::size_t(n))
        throw usage_error("--at: expected " + std::to_string(n) + " comma-separated values");
    return p;
}

std::optional<MultiIndex> integer_point(const Point &p) {
    MultiIndex m;
    for (double v : p) {
        if (v != std::round(v))
            return std::nullopt;
        m.push_back(int(v));
    }
    return m;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Pseudodifferential calculus on the noncommutative torus"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string out;

    auto *verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    verify->add_option("suite", suite, "core|symbols|pdo|sobolev|module|osc|all")->required();
    verify->add_option("--seed", cfg.seed, "RNG seed (env NCT_SEED)");
    verify->add_option("--box", cfg.box, "coefficient box radius (env NCT_BOX)");
    verify->add_option("--trials", cfg.trials, "randomized trials per check");
    verify->add_option("--tol", cfg.tol, "exactness tolerance");
    verify->add_option("--radii", cfg.radii, "radii for decay fits")->delimiter(',');
    verify->add_option("--report", cfg.report_path, "write the report here");
    verify->add_option("--format", cfg.format, "json|csv|md");

    auto *apply_cmd = app.add_subcommand("apply", "apply P_rho to an element");
    std::string symbol_path, symbol2_path, element_path;
    apply_cmd->add_option("--symbol", symbol_path)->required();
    apply_cmd->add_option("--element", element_path)->required();
    apply_cmd->add_option("--out", out);

    auto *norm_cmd = app.add_subcommand("norm", "Sobolev norm of an element");
    double s = 0.0, t = 0.0, eps = 0.0;
    norm_cmd->add_option("--s", s)->required();
    norm_cmd->add_option("--element", element_path)->required();
    norm_cmd->add_option("--out", out);

    auto *expand = app.add_subcommand("expand", "adjoint or composition expansion at a point");
    std::string kind, at;
    int order = 1;
    bool oracle = false;
    expand->add_option("kind", kind, "adjoint|compose")->required();
    expand->add_option("--symbol", symbol_path)->required();
    expand->add_option("--symbol2", symbol2_path, "right factor for compose");
    expand->add_option("--at", at, "point xi, comma-separated")->required();
    expand->add_option("--order", order, "number of levels N")->required();
    expand->add_flag("--oracle", oracle, "report the residual against the exact symbol");
    expand->add_option("--out", out);

    auto *rellich = app.add_subcommand("rellich", "extract an H^t-Cauchy subsequence");
    std::string seq_dir;
    std::optional<double> C;
    rellich->add_option("--seq", seq_dir, "directory of element files, read in name order")->required();
    rellich->add_option("--s", s)->required();
    rellich->add_option("--t", t)->required();
    rellich->add_option("--eps", eps)->required();
    rellich->add_option("--C", C, "bound on ||a_N||_s (default: measured maximum)");
    rellich->add_option("--out", out);

    auto *osc = app.add_subcommand("osc", "regularized pairing integral (2 pi)^{-n} int int e^{-i y.eta} a(y)");
    std::string amplitude = "gaussian", cutoff = "gaussian";
    int dim = 1;
    osc->add_option("--amplitude", amplitude, "gaussian|poly-gauss|one");
    osc->add_option("--dim", dim, "1 or 2");
    osc->add_option("--cutoff", cutoff, "gaussian|cos");
    osc->add_option("--report", out);

    try {
        apply_environment(cfg);
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? Exit::ok : Exit::usage;
    } catch (const usage_error &e) {
        std::cerr << "nct: " << e.what() << "\n";
        return Exit::usage;
    }

    try {
        if (*verify) {
            const VerificationReport rep = run_suite(suite, cfg);
            const std::string text = format_report(rep, cfg.format);
            if (!cfg.report_path.empty())
                write_file_atomic(cfg.report_path, text);
            else
                std::cout << text;
            const auto failing = std::count_if(rep.checks.begin(), rep.checks.end(), [](const Check &c) { return !c.passed; });
            std::cerr << rep.suite << ": " << (rep.passed() ? "PASS" : "FAIL") << " (" << rep.checks.size()
                      << " checks, " << failing << " failing)\n";
            return rep.passed() ? Exit::ok : Exit::failed;
        }
        if (*apply_cmd) {
            const TorusElement a = element_from_json(read_json_file(element_path));
            const Symbol sym = symbol_from_json(read_json_file(symbol_path), a.theta());
            emit(out, dump(element_to_json(apply(sym, a))));
            return Exit::ok;
        }
        if (*norm_cmd) {
            const TorusElement a = element_from_json(read_json_file(element_path));
            emit(out, dump({{"s", s}, {"norm", sobolev_norm(a, s)}, {"norm2", sobolev_norm2(a, s)}}));
            return Exit::ok;
        }
        if (*expand) {
            const Symbol phi = symbol_from_json(read_json_file(symbol_path));
            const Point xi = parse_point(at, phi.dim());
            json j{{"kind", kind}, {"at", xi}, {"order", order}};
            TorusElement exact(phi.theta());
            if (kind == "adjoint") {
                const ExpansionResult r = adjoint_expansion(phi, xi, order);
                j["expansion"] = expansion_to_json(r);
                if (oracle) {
                    exact = adjoint_oracle(phi, xi);
                    j["oracle"] = element_to_json(exact);
                    j["residual"] = norm0(r.value - exact);
                }
            } else if (kind == "compose") {
                if (symbol2_path.empty())
                    throw usage_error("expand compose: --symbol2 is required");
                const Symbol rho = symbol_from_json(read_json_file(symbol2_path), phi.theta());
                const ExpansionResult r = compose_expansion(phi, rho, xi, order);
                j["expansion"] = expansion_to_json(r);
                if (oracle) {
                    const auto m = integer_point(xi);
                    exact = m ? compose_oracle(phi, rho, *m) : composition_symbol(phi, rho).eval(xi);
                    j["oracle"] = element_to_json(exact);
                    j["oracle_kind"] = m ? "operator" : "exact-symbol";
                    j["residual"] = norm0(r.value - exact);
                }
            } else {
                throw usage_error("expand: kind must be adjoint or compose");
            }
            emit(out, dump(j));
            return Exit::ok;
        }
        if (*rellich) {
            if (!fs::is_directory(seq_dir))
                throw io_error("not a directory: " + seq_dir);
            std::vector<fs::path> files;
            for (const auto &e : fs::directory_iterator(seq_dir))
                if (e.path().extension() == ".json")
                    files.push_back(e.path());
            std::sort(files.begin(), files.end());
            if (files.empty())
                throw io_error("no .json files in " + seq_dir);
            std::vector<TorusElement> seq;
            for (const auto &f : files) {
                if (seq.empty())
                    seq.push_back(element_from_json(read_json_file(f)));
                else
                    seq.push_back(element_from_json_checked(read_json_file(f), seq.front().theta()));
            }
            double bound = 0.0;
            for (const auto &a : seq)
                bound = std::max(bound, sobolev_norm(a, s));
            const RellichResult r = rellich_extract(seq, s, t, C.value_or(bound), eps);
            json j = rellich_to_json(r);
            json names = json::array();
            for (std::size_t i : r.indices)
                names.push_back(files[i].filename().string());
            j["files"] = names;
            j["C"] = C.value_or(bound);
            emit(out, dump(j));
            return r.certified ? Exit::ok : Exit::failed;
        }
        if (*osc) {
            if (dim < 1 || dim > 2)
                throw usage_error("osc: --dim must be 1 or 2");
            CutoffFamily cut;
            if (cutoff == "cos" || cutoff == "raised-cosine")
                cut.kind = CutoffFamily::Kind::raised_cosine;
            else if (cutoff != "gaussian")
                throw usage_error("osc: --cutoff must be gaussian or cos");
            const Amplitude a = named_amplitude(amplitude);
            const std::vector<double> zero(std::size_t(dim), 0.0);
            OscResult r = pairing_integral(a, zero, cut);
            const double norm = std::pow(2.0 * std::numbers::pi, -dim);
            json j = osc_result_json(r);
            const Complex v = r.value * norm, a0 = a(zero);
            j["normalized_value"] = {v.real(), v.imag()};
            j["normalized_error"] = r.error_estimate * norm;
            j["a0"] = {a0.real(), a0.imag()};
            j["cutoff"] = cut.name();
            j["amplitude"] = amplitude;
            j["dim"] = dim;
            emit(out, dump(j));
            return r.diverged ? Exit::failed : Exit::ok;
        }
    } catch (const usage_error &e) {
        std::cerr << "nct: usage: " << e.what() << "\n";
        return Exit::usage;
    } catch (const io_error &e) {
        std::cerr << "nct: I/O error: " << e.what() << "\n";
        return Exit::input;
    } catch (const validation_error &e) {
        std::cerr << "nct: validation error: " << e.what() << "\n";
        return Exit::input;
    } catch (const std::exception &e) {
        std::cerr << "nct: error: " << e.what() << "\n";
        return Exit::input;
    }
    return Exit::usage;
}
