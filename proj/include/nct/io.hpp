#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <unistd.h>

#include "nct/calculus.hpp"
#include "nct/module.hpp"
#include "nct/report.hpp"

namespace nct {

/// File could not be read, parsed or written.
class io_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input parsed but is inconsistent (wrong shape, theta mismatch, bad kind).
class validation_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline json theta_to_json(const Theta &t) {
    json rows = json::array();
    for (int j = 0; j < t.dim(); ++j) {
        json row = json::array();
        for (int k = 0; k < t.dim(); ++k)
            row.push_back(t(j, k));
        rows.push_back(row);
    }
    return rows;
}

inline Theta theta_from_json(const json &j, int n) {
    if (!j.is_array() || j.size() != std::size_t(n))
        throw validation_error("theta must be an n x n array");
    std::vector<double> e;
    for (const auto &row : j) {
        if (!row.is_array() || row.size() != std::size_t(n))
            throw validation_error("theta must be an n x n array");
        for (const auto &v : row)
            e.push_back(v.get<double>());
    }
    try {
        return Theta(n, std::move(e));
    } catch (const contract_error &err) {
        throw validation_error(err.what());
    }
}

inline json element_to_json(const TorusElement &a) {
    json coeffs = json::array();
    for (const auto &t : a.terms())
        coeffs.push_back({{"m", t.mode}, {"re", t.coeff.real()}, {"im", t.coeff.imag()}});
    return {{"n", a.dim()}, {"theta", theta_to_json(a.theta())}, {"coeffs", coeffs}};
}

/// Coefficients only; theta supplied by the caller.
inline TorusElement element_from_json(const json &j, const Theta &theta) {
    if (!j.is_object() || !j.contains("coeffs"))
        throw validation_error("element: expected an object with \"coeffs\"");
    std::vector<Term> terms;
    for (const auto &c : j.at("coeffs")) {
        MultiIndex m = c.at("m").get<MultiIndex>();
        if (m.size() != std::size_t(theta.dim()))
            throw validation_error("element: mode length does not match n");
        terms.push_back({std::move(m), Complex(c.value("re", 0.0), c.value("im", 0.0))});
    }
    return TorusElement(theta, std::move(terms));
}

inline Theta theta_of_json(const json &j) {
    const int n = j.at("n").get<int>();
    if (n < 1)
        throw validation_error("n must be positive");
    if (!j.contains("theta"))
        return Theta(n);
    return theta_from_json(j.at("theta"), n);
}

inline TorusElement element_from_json(const json &j) {
    try {
        return element_from_json(j, theta_of_json(j));
    } catch (const json::exception &e) {
        throw validation_error(std::string("element: ") + e.what());
    }
}

/// Requires an element's own theta (if present) to match `expected`.
inline TorusElement element_from_json_checked(const json &j, const Theta &expected) {
    if (j.contains("n")) {
        const Theta own = theta_of_json(j);
        if (!(own == expected))
            throw validation_error("theta mismatch across inputs");
    }
    return element_from_json(j, expected);
}

inline json symbol_to_json(const Symbol &sym) {
    json j{{"n", sym.dim()}, {"theta", theta_to_json(sym.theta())}, {"order", sym.order()}};
    if (auto *p = sym.get_if<PolynomialSymbol>()) {
        j["kind"] = "polynomial";
        json terms = json::array();
        for (const auto &[e, c] : p->terms())
            terms.push_back({{"exp", e}, {"coeff", element_to_json(c)}});
        j["terms"] = terms;
    } else if (auto *l = sym.get_if<LambdaSymbol>()) {
        j["kind"] = "lambda";
        j["s"] = l->s();
        if (!(l->coeff().size() == 1 && l->coeff().coeff(MultiIndex(std::size_t(sym.dim()), 0)) == Complex(1.0)))
            j["coeff"] = element_to_json(l->coeff());
    } else {
        throw validation_error("callback symbols are not serializable");
    }
    return j;
}

/// Theta comes from the symbol's own "n"/"theta", from its coefficients, or
/// from `context` (e.g. the element it is applied to), in that order.
inline Symbol symbol_from_json(const json &j, const std::optional<Theta> &context = std::nullopt) {
    try {
        std::optional<Theta> theta;
        if (j.contains("n"))
            theta = theta_of_json(j);
        const std::string kind = j.at("kind").get<std::string>();
        if (!theta && kind == "polynomial")
            for (const auto &t : j.value("terms", json::array()))
                if (t.at("coeff").contains("n")) {
                    theta = theta_of_json(t.at("coeff"));
                    break;
                }
        if (!theta && kind == "lambda" && j.contains("coeff") && j.at("coeff").contains("n"))
            theta = theta_of_json(j.at("coeff"));
        if (!theta)
            theta = context;
        if (!theta)
            throw validation_error("symbol: dimension unknown (no \"n\" and no context)");
        if (context && !(*theta == *context))
            throw validation_error("theta mismatch across inputs");
        if (kind == "polynomial") {
            PolynomialSymbol p(*theta);
            for (const auto &t : j.value("terms", json::array())) {
                MultiIndex e = t.at("exp").get<MultiIndex>();
                if (e.size() != std::size_t(theta->dim()))
                    throw validation_error("symbol: exponent length does not match n");
                for (int v : e)
                    if (v < 0)
                        throw validation_error("symbol: negative exponent");
                p.add_term(e, element_from_json_checked(t.at("coeff"), *theta));
            }
            if (j.contains("order"))
                p.set_order(j.at("order").get<double>());
            return p;
        }
        if (kind == "lambda") {
            const double s = j.at("s").get<double>();
            if (j.contains("coeff"))
                return LambdaSymbol(*theta, s, element_from_json_checked(j.at("coeff"), *theta));
            return LambdaSymbol(*theta, s);
        }
        throw validation_error("symbol: unknown kind \"" + kind + "\"");
    } catch (const json::exception &e) {
        throw validation_error(std::string("symbol: ") + e.what());
    }
}

inline json matrix_to_json(const MatrixElement &m) {
    json rows = json::array();
    for (int i = 0; i < m.size(); ++i) {
        json row = json::array();
        for (int k = 0; k < m.size(); ++k)
            row.push_back(element_to_json(m(i, k)));
        rows.push_back(row);
    }
    return rows;
}

inline MatrixElement matrix_from_json(const json &j, const Theta &theta) {
    if (!j.is_array() || j.empty())
        throw validation_error("matrix: expected a nonempty array of rows");
    const int r = int(j.size());
    std::vector<TorusElement> e;
    for (const auto &row : j) {
        if (!row.is_array() || row.size() != std::size_t(r))
            throw validation_error("matrix: rows must have length r");
        for (const auto &x : row)
            e.push_back(element_from_json_checked(x, theta));
    }
    return MatrixElement(theta, r, std::move(e));
}

inline json vector_to_json(const ModuleVector &v) {
    json arr = json::array();
    for (const auto &e : v.entries())
        arr.push_back(element_to_json(e));
    return arr;
}

inline ModuleVector vector_from_json(const json &j, const Theta &theta) {
    if (!j.is_array() || j.empty())
        throw validation_error("module vector: expected a nonempty array");
    std::vector<TorusElement> e;
    for (const auto &x : j)
        e.push_back(element_from_json_checked(x, theta));
    return ModuleVector(theta, std::move(e));
}

/// Idempotent file: validated as self-adjoint and idempotent on load.
inline MatrixElement idempotent_from_json(const json &j, const Theta &theta, double tol = 1e-10) {
    MatrixElement e = matrix_from_json(j, theta);
    if (!idempotent_check(e, tol))
        throw validation_error("idempotent: matrix is not a self-adjoint idempotent");
    return e;
}

inline json expansion_to_json(const ExpansionResult &r) {
    json terms = json::array();
    for (const auto &t : r.terms)
        terms.push_back(element_to_json(t));
    return {{"N", r.N}, {"value", element_to_json(r.value)}, {"terms", terms}};
}

inline json rellich_to_json(const RellichResult &r) {
    return {{"indices", r.indices},     {"radius", r.radius},
            {"low_modes", r.low_modes}, {"clusters", r.clusters},
            {"max_pair_distance2", r.max_pair_distance2},
            {"certified", r.certified}, {"diagnostic", r.diagnostic}};
}

inline json read_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw io_error(path.string() + ": " + e.what());
    }
}

/// Writes through a temporary file in the same directory and renames it.
inline void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
    const std::filesystem::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw io_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw io_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw io_error("cannot rename into " + path.string());
    }
}

} // namespace nct
