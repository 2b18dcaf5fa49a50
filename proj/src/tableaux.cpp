#include "fimex/tableaux.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fimex/errors.hpp"

namespace fimex {

namespace {

std::vector<double> shifted(const std::vector<double>& z, double by)
{
    std::vector<double> out(z);
    for (double& v : out) v += by;
    return out;
}

RealMatrix unit_column(int q, int col)
{
    RealMatrix m = RealMatrix::Zero(q, q);
    m.col(col).setOnes();
    return m;
}

// Implicit weights: integrals over [-1, z_i] of the basis on nodes 2..q. By
// shift invariance these equal the integrals over [1, z_i + 2] of the basis
// on the output nodes z_j + 2.
RealMatrix implicit_weights(const NodeSet& nodes)
{
    const int q = nodes.q;
    const std::span<const double> tail(nodes.z.data() + 1, nodes.z.size() - 1);
    RealMatrix b1 = RealMatrix::Zero(q, q);
    b1.rightCols(q - 1) = quad_weights(tail, nodes.z.front(), nodes.z);
    return b1;
}

RealMatrix explicit_weights(const NodeSet& nodes, Variant variant)
{
    const int q = nodes.q;
    const auto bounds = shifted(nodes.z, 2.0);
    const double lower = nodes.z.back();
    if (variant == Variant::RadauStar) return quad_weights(nodes.z, lower, bounds);
    const std::span<const double> tail(nodes.z.data() + 1, nodes.z.size() - 1);
    RealMatrix b2 = RealMatrix::Zero(q, q);
    b2.rightCols(q - 1) = quad_weights(tail, lower, bounds);
    return b2;
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_matrix_csv(std::ostringstream& os, std::string_view name, const RealMatrix& m)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            os << name << ',' << (i + 1) << ',' << (j + 1) << ',' << format_double(m(i, j)) << '\n';
}

nlohmann::json matrix_to_json(const RealMatrix& m)
{
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

RealMatrix matrix_from_json(const nlohmann::json& j, int q)
{
    RealMatrix m(q, q);
    if (!j.is_array() || static_cast<int>(j.size()) != q) throw InvalidArgument("coefficient matrix has wrong shape");
    for (int r = 0; r < q; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != q)
            throw InvalidArgument("coefficient matrix has wrong shape");
        for (int c = 0; c < q; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

}  // namespace

std::string_view to_string(Variant v)
{
    return v == Variant::Radau ? "radau" : "radau-star";
}

Variant parse_variant(std::string_view s)
{
    if (s == "radau") return Variant::Radau;
    if (s == "radau-star" || s == "radau*" || s == "radaustar") return Variant::RadauStar;
    throw InvalidArgument("unknown variant '" + std::string(s) + "'");
}

MethodTableau build_propagator(int q, Variant variant)
{
    require_supported_order(q);
    MethodTableau t;
    t.q = q;
    t.variant = variant;
    t.nodes = radau_nodes(q);
    t.A = unit_column(q, q - 1);
    t.B1 = implicit_weights(t.nodes);
    t.B2 = explicit_weights(t.nodes, variant);
    t.A_tilde = unit_column(q, 0);
    t.B_it = t.B1;
    return t;
}

IteratorCoefficients build_iterator(int q)
{
    require_supported_order(q);
    return {unit_column(q, 0), implicit_weights(radau_nodes(q))};
}

int expected_order(Variant variant, int q, int kappa)
{
    const int explicit_order = (variant == Variant::Radau ? q - 1 : q) + kappa;
    return std::min(2 * q - 3, explicit_order);
}

GlmEmbedding to_glm(const MethodTableau& t)
{
    const int q = t.q;
    GlmEmbedding g;
    // The propagator never reads f1 at the input nodes, so its U/V blocks for
    // the f1 history are zero; B1 couples the stages (= outputs) implicitly.
    g.U = RealMatrix::Zero(q, 3 * q);
    g.U.leftCols(q) = t.A;
    g.U.rightCols(q) = t.B2;

    g.V = RealMatrix::Zero(3 * q, 3 * q);
    g.V.topRows(q) = g.U;

    g.A1 = t.B1;
    g.A2 = RealMatrix::Zero(q, q);

    g.Bg1 = RealMatrix::Zero(3 * q, q);
    g.Bg1.topRows(q) = t.B1;
    g.Bg1.middleRows(q, q).setIdentity();

    g.Bg2 = RealMatrix::Zero(3 * q, q);
    g.Bg2.bottomRows(q).setIdentity();
    return g;
}

Vector glm_step_dahlquist(const GlmEmbedding& glm, const Vector& augmented, Complex lambda1, Complex lambda2,
                          double r)
{
    const auto q = glm.A1.rows();
    if (augmented.size() != 3 * q) throw InvalidArgument("glm_step_dahlquist: augmented state has wrong length");
    const Matrix stage_matrix = Matrix::Identity(q, q) - (r * lambda1) * glm.A1.cast<Complex>() -
                                (r * lambda2) * glm.A2.cast<Complex>();
    const Vector stage_rhs = glm.U.cast<Complex>() * augmented;
    const Vector stages = stage_matrix.partialPivLu().solve(stage_rhs);
    return glm.V.cast<Complex>() * augmented + (r * lambda1) * (glm.Bg1.cast<Complex>() * stages) +
           (r * lambda2) * (glm.Bg2.cast<Complex>() * stages);
}

std::string export_coeffs(const MethodTableau& t, CoeffFormat format)
{
    if (format == CoeffFormat::Json) {
        nlohmann::json j;
        j["q"] = t.q;
        j["variant"] = std::string(to_string(t.variant));
        j["nodes"] = t.nodes.z;
        j["A"] = matrix_to_json(t.A);
        j["B1"] = matrix_to_json(t.B1);
        j["B2"] = matrix_to_json(t.B2);
        j["A_tilde"] = matrix_to_json(t.A_tilde);
        j["B_it"] = matrix_to_json(t.B_it);
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "# q=" << t.q << " variant=" << to_string(t.variant) << '\n';
    os << "matrix,row,col,value\n";
    for (std::size_t j = 0; j < t.nodes.z.size(); ++j)
        os << "z," << (j + 1) << ",1," << format_double(t.nodes.z[j]) << '\n';
    write_matrix_csv(os, "A", t.A);
    write_matrix_csv(os, "B1", t.B1);
    write_matrix_csv(os, "B2", t.B2);
    write_matrix_csv(os, "A_tilde", t.A_tilde);
    write_matrix_csv(os, "B_it", t.B_it);
    return os.str();
}

MethodTableau import_coeffs(std::string_view text, CoeffFormat format)
{
    MethodTableau t;
    if (format == CoeffFormat::Json) {
        const auto j = nlohmann::json::parse(text);
        t.q = j.at("q").get<int>();
        require_supported_order(t.q);
        t.variant = parse_variant(j.at("variant").get<std::string>());
        t.nodes.q = t.q;
        t.nodes.z = j.at("nodes").get<std::vector<double>>();
        t.A = matrix_from_json(j.at("A"), t.q);
        t.B1 = matrix_from_json(j.at("B1"), t.q);
        t.B2 = matrix_from_json(j.at("B2"), t.q);
        t.A_tilde = matrix_from_json(j.at("A_tilde"), t.q);
        t.B_it = matrix_from_json(j.at("B_it"), t.q);
        return t;
    }

    std::istringstream is{std::string(text)};
    std::string line;
    if (!std::getline(is, line) || line.rfind("# q=", 0) != 0) throw InvalidArgument("coefficient CSV: missing header");
    {
        const auto space = line.find(" variant=");
        if (space == std::string::npos) throw InvalidArgument("coefficient CSV: malformed header");
        t.q = std::stoi(line.substr(4, space - 4));
        require_supported_order(t.q);
        t.variant = parse_variant(line.substr(space + 9));
    }
    if (!std::getline(is, line) || line != "matrix,row,col,value")
        throw InvalidArgument("coefficient CSV: missing column header");

    const int q = t.q;
    t.nodes.q = q;
    t.nodes.z.assign(static_cast<std::size_t>(q), 0.0);
    for (RealMatrix* m : {&t.A, &t.B1, &t.B2, &t.A_tilde, &t.B_it}) *m = RealMatrix::Zero(q, q);

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string name, row, col, value;
        if (!std::getline(ls, name, ',') || !std::getline(ls, row, ',') || !std::getline(ls, col, ',') ||
            !std::getline(ls, value))
            throw InvalidArgument("coefficient CSV: malformed row '" + line + "'");
        const int i = std::stoi(row) - 1;
        const int c = std::stoi(col) - 1;
        if (i < 0 || i >= q || c < 0 || c >= q) throw InvalidArgument("coefficient CSV: index out of range");
        const double v = std::stod(value);
        if (name == "z") t.nodes.z[static_cast<std::size_t>(i)] = v;
        else if (name == "A") t.A(i, c) = v;
        else if (name == "B1") t.B1(i, c) = v;
        else if (name == "B2") t.B2(i, c) = v;
        else if (name == "A_tilde") t.A_tilde(i, c) = v;
        else if (name == "B_it") t.B_it(i, c) = v;
        else throw InvalidArgument("coefficient CSV: unknown matrix '" + name + "'");
    }
    return t;
}

}  // namespace fimex
