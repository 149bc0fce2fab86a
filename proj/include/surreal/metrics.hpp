#pragma once

#include "surreal/networks.hpp"

#include <optional>
#include <string>
#include <vector>

namespace surreal::metrics {

class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Harrell's concordance: pairs with tied truth are skipped, prediction ties
// earn half credit. O(n log n).
double c_index(const Vector& pred, const Vector& truth);

// Reference O(n^2) enumeration with the same conventions.
double c_index_bruteforce(const Vector& pred, const Vector& truth);

struct AlignmentResult {
    std::vector<int> permutation;  // permutation[k] = column of r matched to truth column k
    std::vector<double> per_dimension;
    double mean = 0.0;
};

// Exhaustive search over the M! column permutations of r for the highest mean
// c-index against truth. M <= 8.
AlignmentResult pattern_c_index(const Matrix& r, const Matrix& truth);

// pattern_c_index with r_b taking the truth role.
AlignmentResult pattern_agr_index(const Matrix& r_a, const Matrix& r_b);

// out[:, k] = r[:, permutation[k]]
Matrix apply_permutation(const Matrix& r, const std::vector<int>& permutation);

struct AgreementTable {
    Matrix pairwise;                // symmetric, unit diagonal
    std::vector<double> per_replica;  // mean agreement with the other replicas
    double mean_pairwise = 0.0;     // mean over unordered pairs
};

AgreementTable agreement_table(const std::vector<Matrix>& replicas);

struct GridCell {
    int num_patterns = 0;
    double lambda = 0.0;
    std::vector<Matrix> replica_indices;  // R-indices of each replica on the PT rows
};

struct Selection {
    std::size_t cell = 0;
    std::size_t replica = 0;
    int num_patterns = 0;
    double lambda = 0.0;
    std::vector<AgreementTable> tables;  // one per cell, grid order
};

// Cell with the highest mean pairwise agreement, then the replica in it with
// the highest mean agreement. Ties go to lower lambda, then lower M, then the
// lower replica index.
Selection select_hyper(const std::vector<GridCell>& grid);

// Largest ||g(a) - g(b)|| / ||a - b|| over the given row pairs.
double estimate_lipschitz(const ModelBundle& bundle, const Matrix& ys_a, const Matrix& ys_b);

// d(f(x,z1), f(x,z2)) - [d(z1,z2) - d(g(f(x,z1)),z1) - d(g(f(x,z2)),z2)] / K2
double lemma1_slack(const ModelBundle& bundle, const RowVector& x, const RowVector& z1, const RowVector& z2,
                    double k2);

struct SlackSummary {
    double k2 = 0.0;
    double min_slack = 0.0;
    double mean_slack = 0.0;
    std::size_t samples = 0;
    std::size_t violations = 0;  // slack < -1e-9
};

// Samples triples (x from cn_rows, z1, z2 ~ U[0,1]^M), estimates K2 over the
// synthesized pairs plus extra random pairs, then evaluates the slack.
SlackSummary lemma1_diagnostic(const ModelBundle& bundle, const Matrix& cn_rows, std::size_t samples,
                               std::uint64_t seed);

struct MonotonicitySummary {
    double mean_loss = 0.0;            // mono_loss over the sampled triples
    double violation_fraction = 0.0;   // elements whose shrinkage exceeds the tolerance
    double max_violation = 0.0;
    std::size_t samples = 0;
};

// Samples triples (x from cn_rows, z ~ U[0,1]^M, z' ~ U(z, 1]) and measures
// how much |f(x, z) - x| exceeds |f(x, z') - x| elementwise.
MonotonicitySummary monotonicity_diagnostic(const ModelBundle& bundle, const Matrix& cn_rows, std::size_t samples,
                                            std::uint64_t seed, double tolerance = 0.01);

enum class GroupKind { Mid, High, MixedLow, Mixed };

struct GroupLabel {
    GroupKind kind = GroupKind::Mixed;
    int dimension = -1;  // 0-based; -1 for the mixed kinds

    std::string to_string() const;  // "p1-high", "p2-mid", "mixed-low", "mixed"
    bool operator==(const GroupLabel&) const = default;
};

// Subject i belongs to dimension k's mid group when lo < r_k < hi and high
// group when r_k > hi, provided every other r_j < lo. Rows with all entries
// below lo are "mixed-low"; everything else is "mixed".
std::vector<GroupLabel> subgroup_by_r(const Matrix& r, double lo = 0.4, double hi = 0.7);

}  // namespace surreal::metrics
