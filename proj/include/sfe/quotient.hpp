#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfe/entropy.hpp"
#include "sfe/metric_space.hpp"
#include "sfe/semiflow.hpp"

namespace sfe {

inline constexpr double identification_tol = 1e-7;

bool lex_less(const Point& a, const Point& b);

// x = y, y = I(x), x = I(y) or I(x) = I(y), with I applied only on D.
bool related(const SemiflowSystem& sys, const Point& x, const Point& y, double tol = identification_tol);

struct QuotientPoint {
    PointSet representatives;  // lexicographically sorted

    const Point& canonical() const { return representatives.front(); }
};

// Closure of {x} under the relation, preimages of I resolved over d_sample.
QuotientPoint equivalence_class(const SemiflowSystem& sys, const Point& x, const PointSet& d_sample);

struct IdentificationGraph {
    PointSet nodes;
    std::vector<std::pair<std::size_t, std::size_t>> zero_edges;  // i < j, related nodes
    std::vector<std::size_t> class_of;                            // component under zero edges
    std::vector<double> weight;                                   // dense, distance(p, q)

    std::size_t size() const { return nodes.size(); }
    double w(std::size_t i, std::size_t j) const { return weight[i * nodes.size() + j]; }
    // Index of the node equal to p within coord_tol; throws domain_error otherwise.
    std::size_t index_of(const Point& p) const;
};

// Nodes plus the D sample and its image (added when missing).
IdentificationGraph build_identification_graph(const SemiflowSystem& sys, const PointSet& nodes,
                                               const PointSet& d_sample);

// Chain infimum restricted to chains through the graph nodes.
double quotient_pseudometric(const SemiflowSystem& sys, const QuotientPoint& x, const QuotientPoint& y,
                             const IdentificationGraph& graph);

// Node-level all-pairs shortest paths (zero edges inside classes).
std::vector<double> quotient_distance_matrix(const IdentificationGraph& graph);

// The same infimum evaluated directly for arbitrary points: only the
// identified points can shorten a chain, so {x, y} together with D and I(D)
// samples are the only waypoints needed.
class QuotientMetric final : public PairMetric {
public:
    QuotientMetric(const SemiflowSystem& sys, const PointSet& d_sample);
    explicit QuotientMetric(const SemiflowSystem& sys);

    double distance(const Point& x, const Point& y) const override;
    const PointSet& anchors() const override { return k_; }

private:
    const MetricSpace& space_;
    PointSet k_;
    std::vector<double> kk_;  // shortest paths among anchors
};

struct MetricityReport {
    std::size_t nodes = 0;
    std::size_t classes = 0;
    std::size_t pairs_checked = 0;
    std::size_t triples_checked = 0;
    std::size_t symmetry_violations = 0;
    std::size_t triangle_violations = 0;
    std::size_t zero_distance_violations = 0;  // distinct classes at distance < tol
    std::size_t domination_violations = 0;     // quotient distance above the space distance
    double max_triangle_excess = 0.0;
    bool hypothesis_ok = true;  // I(D) and D apart, I Lipschitz
    std::string hypothesis_detail;
    std::vector<std::string> violations;  // first few, human readable

    bool metric_ok() const {
        return symmetry_violations == 0 && triangle_violations == 0 && zero_distance_violations == 0 &&
               domination_violations == 0;
    }
    bool pass() const { return hypothesis_ok && metric_ok(); }
};

MetricityReport metricity_check(const SemiflowSystem& sys, const IdentificationGraph& graph, double tol = 1e-6,
                                std::size_t symmetry_probes = 200);

// Class of the orbit of the canonical representative, which must lie in X_xi.
QuotientPoint induced_evolve(const SemiflowSystem& sys, double t, const QuotientPoint& x);
// Representatives in X_xi evolve into pairwise related points.
bool induced_well_defined(const SemiflowSystem& sys, double t, const QuotientPoint& x);

// Max over (t, x) of the quotient distance between the induced flow composed
// along t_grid and the class of the direct orbit. The induced side may come
// from a different system (fault injection).
double semiconjugation_residual(const SemiflowSystem& sys, const std::vector<double>& t_grid, const PointSet& sample,
                                const SemiflowSystem* induced_side = nullptr);

// Sample points classified IN_X_XI.
PointSet restrict_to_x_xi(const SemiflowSystem& sys, const PointSet& sample);

struct QuotientCompareConfig {
    std::vector<double> resolution_path{0.02};
    std::vector<double> eps_path{0.1};
    std::vector<double> delta_path{0.5};
    std::vector<double> schedule;
    std::optional<std::pair<double, double>> window;
    Sampler sampler;  // defaults to the space's sample_grid
};

struct QuotientCompareReport {
    EntropyMatrix modified_x;
    EntropyMatrix modified_xi;
    EntropyMatrix bowen_quotient;
    EntropyMatrix modified_quotient;

    // Reported rates of the three compared headlines.
    std::vector<double> rates() const;
    double max_gap() const;
};

// Throws domain_error naming the failing clause when the system is not regular.
QuotientCompareReport quotient_entropy_compare(const SemiflowSystem& sys, const QuotientCompareConfig& cfg);

void write_graph_nodes_csv(std::ostream& os, const IdentificationGraph& graph);
void write_graph_edges_csv(std::ostream& os, const IdentificationGraph& graph);

}  // namespace sfe
