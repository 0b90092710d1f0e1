#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdsim/divergence.hpp"
#include "crowdsim/matrix.hpp"

// Multi-table analysis of several distance matrices over the same objects:
// each matrix becomes a centered, eigen-normalized cross-product table, the
// tables are weighted by their agreement with one another, and the weighted
// sum (the compromise) is decomposed to place the objects on common axes.

namespace crowd::distatis {

/// Axes whose compromise eigenvalue does not exceed this are not projected.
inline constexpr double kAxisTolerance = 1e-10;

struct CrossProductTable {
    std::string observable;
    Matrix values;
    double normalization = 1.0;  ///< largest eigenvalue divided out (1 before normalizing)
};

/// A table whose largest eigenvalue vanishes, i.e. all objects coincide.
class DegenerateTable : public std::runtime_error {
public:
    DegenerateTable(std::string observable_name, const std::string& what)
        : std::runtime_error(what), observable(std::move(observable_name)) {}
    std::string observable;
};

/// -1/2 * X D X^T with X = I - (1/n) 11^T (uniform masses).
CrossProductTable double_center(const Matrix& distances, std::string observable = {});
inline CrossProductTable double_center(const stats::DistanceMatrix& d) {
    return double_center(d.values, d.observable);
}

/// Divides the table by its largest eigenvalue. Throws DegenerateTable when that
/// eigenvalue is at most 1e-12.
CrossProductTable normalize_table(CrossProductTable table);

/// Cosine similarity of the vectorized tables (RV coefficient).
Matrix inter_table_similarity(std::span<const CrossProductTable> tables);

struct CompromiseResult {
    std::vector<std::string> observables;
    Matrix similarity;                       ///< C
    std::vector<double> similarity_eigenvalues;
    std::vector<double> alpha;               ///< table weights, sum 1
    double quality = 0.0;                    ///< tau = lambda_1(C) / sum lambda(C)
    Matrix compromise;
    std::vector<double> eigenvalues;         ///< compromise eigenvalues, descending
    Matrix eigenvectors;                     ///< columns
    std::size_t kept_axes = 0;
    Matrix factor_scores;                    ///< objects x kept axes, V Lambda^(1/2)
    std::vector<Matrix> table_scores;        ///< per table, S_k V Lambda^(-1/2)
};

/// Weights from the first eigenvector of `similarity`, compromise and
/// projections. Throws std::runtime_error if that eigenvector mixes signs
/// beyond 1e-9.
CompromiseResult compromise(std::span<const CrossProductTable> tables, const Matrix& similarity);

/// Full pipeline from distance matrices.
CompromiseResult analyze(std::span<const stats::DistanceMatrix> distances);

/// Plain-text report: C, alpha, tau, eigenvalues, barycenters and per-table
/// coordinates, with object labels.
std::string format_report(const CompromiseResult& result, std::span<const std::string> labels);

}  // namespace crowd::distatis
