#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crowdsim/matrix.hpp"

namespace crowd::stats {

/// Equal-width histogram: `edges` has one more entry than `mass`, and the
/// masses sum to 1 (or are all zero for an empty sample).
struct Histogram {
    std::vector<double> edges;
    std::vector<double> mass;

    std::size_t bins() const { return mass.size(); }
};

class MisalignedBins : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bin edges over [lo, hi]; a zero-width range is widened to [lo - 0.5, lo + 0.5].
std::vector<double> equal_width_edges(double lo, double hi, std::size_t n_bins);

/// Normalized histogram of `samples` on the given edges; values on the last
/// edge fall into the last bin, values outside are clamped to the end bins.
Histogram bin_samples(std::span<const double> samples, std::vector<double> edges);

/// Histogram over the sample's own min-max range.
Histogram make_histogram(std::span<const double> samples, std::size_t n_bins);

/// Both sample sets binned on shared edges spanning the pooled min-max.
/// Throws std::invalid_argument if either set is empty or n_bins is 0.
std::pair<Histogram, Histogram> common_histogram(std::span<const double> a,
                                                 std::span<const double> b,
                                                 std::size_t n_bins);

/// -sum p ln p over nonzero masses, in nats.
double shannon_entropy(std::span<const double> masses);
inline double shannon_entropy(const Histogram& h) { return shannon_entropy(h.mass); }

/// H[(f + g)/2] - H[f]/2 - H[g]/2 for distributions on the same support.
/// Throws MisalignedBins when the lengths differ.
double js_divergence(std::span<const double> f, std::span<const double> g);

/// Same, additionally requiring identical bin edges.
double js_divergence(const Histogram& f, const Histogram& g);

/// Symmetric model-by-model divergence table for one observable.
struct DistanceMatrix {
    std::string observable;
    std::vector<std::string> labels;
    Matrix values;
};

/// Pairwise divergences of sample sets, each pair binned on its own shared range.
DistanceMatrix distance_matrix(std::string observable, std::vector<std::string> labels,
                               std::span<const std::vector<double>> samples,
                               std::size_t n_bins);

/// Pairwise divergences of ready-made distributions over a common support.
DistanceMatrix distance_matrix_from_distributions(std::string observable,
                                                  std::vector<std::string> labels,
                                                  std::span<const std::vector<double>> pmfs);

/// Divergence of one zone: ln 2 when exactly one side is empty, nullopt when
/// both are.
std::optional<double> zone_divergence(std::span<const double> a, std::span<const double> b,
                                      std::size_t n_bins);

/// Mean of the per-zone divergences over zones that at least one model populates.
DistanceMatrix zoned_distance_matrix(std::string observable, std::vector<std::string> labels,
                                     std::span<const std::vector<std::vector<double>>> zones,
                                     std::size_t n_bins);

}  // namespace crowd::stats
