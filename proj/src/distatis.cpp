#include "crowdsim/distatis.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "crowdsim/eigen.hpp"

namespace crowd::distatis {

CrossProductTable double_center(const Matrix& d, std::string observable) {
    if (!d.square()) {
        throw std::invalid_argument("distance matrix must be square");
    }
    const std::size_t n = d.rows();
    Matrix xi = Matrix::identity(n);
    for (auto i = std::size_t{0}; i < n; ++i) {
        for (auto j = std::size_t{0}; j < n; ++j) {
            xi(i, j) -= 1.0 / static_cast<double>(n);
        }
    }
    Matrix s = (xi * d * xi.transposed()) * -0.5;
    // Symmetrize away rounding so downstream checks see an exactly symmetric table.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (s(i, j) + s(j, i));
            s(i, j) = s(j, i) = avg;
        }
    }
    return {std::move(observable), std::move(s), 1.0};
}

CrossProductTable normalize_table(CrossProductTable table) {
    const auto eig = symmetric_eigen(table.values);
    const double top = eig.values.empty() ? 0.0 : eig.values.front();
    if (!(top > 1e-12)) {
        throw DegenerateTable(table.observable,
                              "observable '" + table.observable +
                                  "' does not separate the models (largest eigenvalue " +
                                  std::to_string(top) + ")");
    }
    table.values *= 1.0 / top;
    table.normalization *= top;
    return table;
}

Matrix inter_table_similarity(std::span<const CrossProductTable> tables) {
    const std::size_t k = tables.size();
    Matrix c(k, k);
    std::vector<double> norms(k);
    for (std::size_t i = 0; i < k; ++i) {
        norms[i] = frobenius_norm(tables[i].values);
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            const double sim = i == j ? 1.0
                                      : frobenius_inner(tables[i].values, tables[j].values) /
                                            (norms[i] * norms[j]);
            c(i, j) = c(j, i) = sim;
        }
    }
    return c;
}

CompromiseResult compromise(std::span<const CrossProductTable> tables, const Matrix& similarity) {
    if (tables.empty()) {
        throw std::invalid_argument("compromise needs at least one table");
    }
    CompromiseResult r;
    for (const auto& t : tables) {
        r.observables.push_back(t.observable);
    }
    r.similarity = similarity;

    const auto c_eig = symmetric_eigen(similarity);
    r.similarity_eigenvalues = c_eig.values;
    double total = 0.0;
    for (const double l : c_eig.values) {
        total += l;
    }
    r.quality = c_eig.values.front() / total;

    const std::size_t k = tables.size();
    r.alpha.resize(k);
    double alpha_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double a = c_eig.vectors(i, 0);
        if (a < -1e-9) {
            throw std::runtime_error("first eigenvector of the table similarity matrix has mixed "
                                     "signs; tables disagree pathologically");
        }
        r.alpha[i] = std::max(a, 0.0);
        alpha_sum += r.alpha[i];
    }
    for (auto& a : r.alpha) {
        a /= alpha_sum;
    }

    const std::size_t n = tables.front().values.rows();
    r.compromise = Matrix(n, n);
    for (std::size_t i = 0; i < k; ++i) {
        r.compromise += tables[i].values * r.alpha[i];
    }

    const auto eig = symmetric_eigen(r.compromise);
    r.eigenvalues = eig.values;
    r.eigenvectors = eig.vectors;
    while (r.kept_axes < n && eig.values[r.kept_axes] > kAxisTolerance) {
        ++r.kept_axes;
    }

    Matrix v(n, r.kept_axes);
    Matrix sqrt_l(r.kept_axes, r.kept_axes);
    Matrix inv_sqrt_l(r.kept_axes, r.kept_axes);
    for (std::size_t a = 0; a < r.kept_axes; ++a) {
        for (std::size_t row = 0; row < n; ++row) {
            v(row, a) = eig.vectors(row, a);
        }
        sqrt_l(a, a) = std::sqrt(eig.values[a]);
        inv_sqrt_l(a, a) = 1.0 / sqrt_l(a, a);
    }
    r.factor_scores = v * sqrt_l;
    const Matrix projector = v * inv_sqrt_l;
    for (const auto& t : tables) {
        r.table_scores.push_back(t.values * projector);
    }
    return r;
}

CompromiseResult analyze(std::span<const stats::DistanceMatrix> distances) {
    std::vector<CrossProductTable> tables;
    tables.reserve(distances.size());
    for (const auto& d : distances) {
        tables.push_back(normalize_table(double_center(d)));
    }
    return compromise(tables, inter_table_similarity(tables));
}

namespace {

void write_matrix(std::ostream& out, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out << (j ? "," : "") << m(i, j);
        }
        out << '\n';
    }
}

}  // namespace

std::string format_report(const CompromiseResult& r, std::span<const std::string> labels) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "# distatis report\n";
    out << "tables = " << r.observables.size() << '\n';
    out << "objects = " << r.compromise.rows() << '\n';
    out << "quality_tau = " << r.quality << "\n\n";

    out << "[similarity]\n";
    for (std::size_t i = 0; i < r.observables.size(); ++i) {
        out << (i ? "," : "") << r.observables[i];
    }
    out << '\n';
    write_matrix(out, r.similarity);

    out << "\n[similarity_eigenvalues]\n";
    for (std::size_t i = 0; i < r.similarity_eigenvalues.size(); ++i) {
        out << (i ? "," : "") << r.similarity_eigenvalues[i];
    }
    out << "\n\n[alpha]\n";
    for (std::size_t i = 0; i < r.alpha.size(); ++i) {
        out << r.observables[i] << "," << r.alpha[i] << '\n';
    }

    out << "\n[compromise]\n";
    write_matrix(out, r.compromise);
    out << "\n[compromise_eigenvalues]\n";
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
        out << (i ? "," : "") << r.eigenvalues[i];
    }
    out << "\n\n[barycenters]\nmodel";
    for (std::size_t a = 0; a < r.kept_axes; ++a) {
        out << ",axis" << a + 1;
    }
    out << '\n';
    for (std::size_t i = 0; i < r.factor_scores.rows(); ++i) {
        out << (i < labels.size() ? labels[i] : std::to_string(i));
        for (std::size_t a = 0; a < r.kept_axes; ++a) {
            out << ',' << r.factor_scores(i, a);
        }
        out << '\n';
    }
    out << "\n[table_projections]\nobservable,model";
    for (std::size_t a = 0; a < r.kept_axes; ++a) {
        out << ",axis" << a + 1;
    }
    out << '\n';
    for (std::size_t t = 0; t < r.table_scores.size(); ++t) {
        for (std::size_t i = 0; i < r.table_scores[t].rows(); ++i) {
            out << r.observables[t] << ','
                << (i < labels.size() ? labels[i] : std::to_string(i));
            for (std::size_t a = 0; a < r.kept_axes; ++a) {
                out << ',' << r.table_scores[t](i, a);
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace crowd::distatis
