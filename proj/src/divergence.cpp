#include "crowdsim/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crowd::stats {

std::vector<double> equal_width_edges(double lo, double hi, std::size_t n_bins) {
    if (n_bins == 0) {
        throw std::invalid_argument("histogram needs at least one bin");
    }
    if (!(hi > lo)) {
        lo -= 0.5;
        hi = lo + 1.0;
    }
    std::vector<double> edges(n_bins + 1);
    const double width = (hi - lo) / static_cast<double>(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        edges[i] = lo + width * static_cast<double>(i);
    }
    edges[n_bins] = hi;
    return edges;
}

Histogram bin_samples(std::span<const double> samples, std::vector<double> edges) {
    if (edges.size() < 2) {
        throw std::invalid_argument("histogram needs at least one bin");
    }
    Histogram h;
    const std::size_t n_bins = edges.size() - 1;
    h.mass.assign(n_bins, 0.0);
    const double lo = edges.front();
    const double width = (edges.back() - lo) / static_cast<double>(n_bins);
    for (const double x : samples) {
        const double pos = (x - lo) / width;
        std::size_t bin = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
        bin = std::min(bin, n_bins - 1);
        // Guard against rounding placing x one bin off its edges.
        while (bin > 0 && x < edges[bin]) {
            --bin;
        }
        while (bin + 1 < n_bins && x >= edges[bin + 1]) {
            ++bin;
        }
        h.mass[bin] += 1.0;
    }
    if (!samples.empty()) {
        const double n = static_cast<double>(samples.size());
        for (auto& m : h.mass) {
            m /= n;
        }
    }
    h.edges = std::move(edges);
    return h;
}

Histogram make_histogram(std::span<const double> samples, std::size_t n_bins) {
    if (samples.empty()) {
        return bin_samples(samples, equal_width_edges(0.0, 1.0, n_bins));
    }
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    return bin_samples(samples, equal_width_edges(*lo, *hi, n_bins));
}

std::pair<Histogram, Histogram> common_histogram(std::span<const double> a,
                                                 std::span<const double> b,
                                                 std::size_t n_bins) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("common_histogram needs non-empty sample sets");
    }
    const auto [alo, ahi] = std::minmax_element(a.begin(), a.end());
    const auto [blo, bhi] = std::minmax_element(b.begin(), b.end());
    auto edges = equal_width_edges(std::min(*alo, *blo), std::max(*ahi, *bhi), n_bins);
    return {bin_samples(a, edges), bin_samples(b, std::move(edges))};
}

double shannon_entropy(std::span<const double> masses) {
    double h = 0.0;
    for (const double p : masses) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

double js_divergence(std::span<const double> f, std::span<const double> g) {
    if (f.size() != g.size()) {
        throw MisalignedBins("distributions have different numbers of bins");
    }
    // Written as the mean of the two divergences to the mixture, which equals the
    // entropy form term by term but is exactly zero for identical inputs and
    // exactly symmetric.
    double to_mix_f = 0.0;
    double to_mix_g = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double m = f[i] + g[i];
        if (f[i] > 0.0) {
            to_mix_f += f[i] * std::log(2.0 * f[i] / m);
        }
        if (g[i] > 0.0) {
            to_mix_g += g[i] * std::log(2.0 * g[i] / m);
        }
    }
    const double js = 0.5 * to_mix_f + 0.5 * to_mix_g;
    return std::clamp(js, 0.0, std::numbers::ln2);
}

double js_divergence(const Histogram& f, const Histogram& g) {
    if (f.edges != g.edges) {
        throw MisalignedBins("histograms do not share bin edges");
    }
    return js_divergence(std::span<const double>(f.mass), std::span<const double>(g.mass));
}

namespace {

template <class PairFn>
DistanceMatrix pairwise(std::string observable, std::vector<std::string> labels,
                        std::size_t n, PairFn&& fn) {
    if (labels.size() != n) {
        throw std::invalid_argument("one label per model required");
    }
    DistanceMatrix out{std::move(observable), std::move(labels), Matrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = fn(i, j);
            out.values(i, j) = d;
            out.values(j, i) = d;
        }
    }
    return out;
}

}  // namespace

DistanceMatrix distance_matrix(std::string observable, std::vector<std::string> labels,
                               std::span<const std::vector<double>> samples,
                               std::size_t n_bins) {
    return pairwise(std::move(observable), std::move(labels), samples.size(),
                    [&](std::size_t i, std::size_t j) {
                        const auto [f, g] = common_histogram(samples[i], samples[j], n_bins);
                        return js_divergence(f, g);
                    });
}

DistanceMatrix distance_matrix_from_distributions(std::string observable,
                                                  std::vector<std::string> labels,
                                                  std::span<const std::vector<double>> pmfs) {
    return pairwise(std::move(observable), std::move(labels), pmfs.size(),
                    [&](std::size_t i, std::size_t j) {
                        return js_divergence(std::span<const double>(pmfs[i]),
                                             std::span<const double>(pmfs[j]));
                    });
}

std::optional<double> zone_divergence(std::span<const double> a, std::span<const double> b,
                                      std::size_t n_bins) {
    if (a.empty() && b.empty()) {
        return std::nullopt;
    }
    if (a.empty() || b.empty()) {
        return std::numbers::ln2;
    }
    const auto [f, g] = common_histogram(a, b, n_bins);
    return js_divergence(f, g);
}

DistanceMatrix zoned_distance_matrix(std::string observable, std::vector<std::string> labels,
                                     std::span<const std::vector<std::vector<double>>> zones,
                                     std::size_t n_bins) {
    return pairwise(std::move(observable), std::move(labels), zones.size(),
                    [&](std::size_t i, std::size_t j) {
                        const std::size_t n_zones = std::max(zones[i].size(), zones[j].size());
                        double sum = 0.0;
                        std::size_t used = 0;
                        static const std::vector<double> empty;
                        for (std::size_t z = 0; z < n_zones; ++z) {
                            const auto& a = z < zones[i].size() ? zones[i][z] : empty;
                            const auto& b = z < zones[j].size() ? zones[j][z] : empty;
                            if (const auto d = zone_divergence(a, b, n_bins)) {
                                sum += *d;
                                ++used;
                            }
                        }
                        return used == 0 ? 0.0 : sum / static_cast<double>(used);
                    });
}

}  // namespace crowd::stats
