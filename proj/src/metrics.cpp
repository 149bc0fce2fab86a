#include "surreal/metrics.hpp"

#include "surreal/random.hpp"
#include "surreal/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace surreal::metrics {

namespace {

void check_inputs(const Vector& pred, const Vector& truth)
{
    if (pred.size() != truth.size()) {
        throw ShapeError("c_index: prediction length " + std::to_string(pred.size()) + " != truth length " +
                         std::to_string(truth.size()));
    }
    if (pred.size() < 2) {
        throw ArgumentError("c_index: need at least two samples");
    }
    if (!pred.allFinite() || !truth.allFinite()) {
        throw ArgumentError("c_index: inputs must be finite");
    }
}

struct PairCounts {
    std::uint64_t concordant = 0;
    std::uint64_t tied = 0;
    std::uint64_t comparable = 0;
};

double finish(const PairCounts& c)
{
    if (c.comparable == 0) {
        throw UndefinedMetric("c_index: all truth values are tied");
    }
    return (2.0 * static_cast<double>(c.concordant) + static_cast<double>(c.tied)) /
           (2.0 * static_cast<double>(c.comparable));
}

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t idx)
    {
        for (std::size_t i = idx + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }
    // count of inserted entries with index < idx
    std::uint64_t below(std::size_t idx) const
    {
        std::uint64_t s = 0;
        for (std::size_t i = idx; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::uint64_t> tree_;
};

// Sum in ascending order so the mean does not depend on column order.
double canonical_mean(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

}  // namespace

double c_index(const Vector& pred, const Vector& truth)
{
    check_inputs(pred, truth);
    const auto n = static_cast<std::size_t>(pred.size());

    std::vector<double> levels(pred.data(), pred.data() + pred.size());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        rank[i] = static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), pred(static_cast<Eigen::Index>(i))) -
                                           levels.begin());
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return truth(static_cast<Eigen::Index>(a)) < truth(static_cast<Eigen::Index>(b));
    });

    Fenwick seen(levels.size());
    PairCounts counts;
    std::uint64_t inserted = 0;
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start;
        const double t = truth(static_cast<Eigen::Index>(order[start]));
        while (end < n && truth(static_cast<Eigen::Index>(order[end])) == t) ++end;
        for (std::size_t k = start; k < end; ++k) {
            const std::size_t r = rank[order[k]];
            const std::uint64_t less = seen.below(r);
            const std::uint64_t equal = seen.below(r + 1) - less;
            counts.concordant += less;
            counts.tied += equal;
            counts.comparable += inserted;
        }
        for (std::size_t k = start; k < end; ++k) seen.add(rank[order[k]]);
        inserted += end - start;
        start = end;
    }
    return finish(counts);
}

double c_index_bruteforce(const Vector& pred, const Vector& truth)
{
    check_inputs(pred, truth);
    PairCounts counts;
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        for (Eigen::Index j = i + 1; j < pred.size(); ++j) {
            if (truth(i) == truth(j)) continue;
            ++counts.comparable;
            const bool i_lower = truth(i) < truth(j);
            const double lo = i_lower ? pred(i) : pred(j);
            const double hi = i_lower ? pred(j) : pred(i);
            if (lo < hi) {
                ++counts.concordant;
            } else if (lo == hi) {
                ++counts.tied;
            }
        }
    }
    return finish(counts);
}

AlignmentResult pattern_c_index(const Matrix& r, const Matrix& truth)
{
    require_shape(r, truth.rows(), truth.cols(), "pattern_c_index");
    const Eigen::Index m = truth.cols();
    if (m < 1 || m > kMaxPatterns) {
        throw ArgumentError("pattern_c_index: M must be in [1, 8], got " + std::to_string(m));
    }
    Matrix c(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index k = 0; k < m; ++k) c(j, k) = c_index(r.col(j), truth.col(k));

    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    AlignmentResult best;
    bool first = true;
    std::vector<double> values(static_cast<std::size_t>(m));
    do {
        for (Eigen::Index k = 0; k < m; ++k) values[static_cast<std::size_t>(k)] = c(perm[static_cast<std::size_t>(k)], k);
        const double mean = canonical_mean(values);
        if (first || mean > best.mean) {
            best.mean = mean;
            best.permutation = perm;
            best.per_dimension = values;
            first = false;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

AlignmentResult pattern_agr_index(const Matrix& r_a, const Matrix& r_b)
{
    return pattern_c_index(r_a, r_b);
}

Matrix apply_permutation(const Matrix& r, const std::vector<int>& permutation)
{
    if (static_cast<Eigen::Index>(permutation.size()) != r.cols()) {
        throw ShapeError("apply_permutation: permutation length does not match column count");
    }
    std::vector<int> check = permutation;
    std::sort(check.begin(), check.end());
    for (std::size_t k = 0; k < check.size(); ++k) {
        if (check[k] != static_cast<int>(k)) throw ArgumentError("apply_permutation: not a permutation");
    }
    Matrix out(r.rows(), r.cols());
    for (std::size_t k = 0; k < permutation.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = r.col(permutation[k]);
    }
    return out;
}

AgreementTable agreement_table(const std::vector<Matrix>& replicas)
{
    if (replicas.size() < 2) {
        throw ArgumentError("agreement_table: need at least two replicas");
    }
    const auto n = static_cast<Eigen::Index>(replicas.size());
    AgreementTable table;
    table.pairwise = Matrix::Identity(n, n);
    std::vector<double> pair_values;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const double v = pattern_agr_index(replicas[static_cast<std::size_t>(a)],
                                               replicas[static_cast<std::size_t>(b)]).mean;
            table.pairwise(a, b) = v;
            table.pairwise(b, a) = v;
            pair_values.push_back(v);
        }
    }
    table.per_replica.resize(static_cast<std::size_t>(n));
    for (Eigen::Index a = 0; a < n; ++a) {
        std::vector<double> others;
        for (Eigen::Index b = 0; b < n; ++b)
            if (b != a) others.push_back(table.pairwise(a, b));
        table.per_replica[static_cast<std::size_t>(a)] = canonical_mean(others);
    }
    table.mean_pairwise = canonical_mean(pair_values);
    return table;
}

Selection select_hyper(const std::vector<GridCell>& grid)
{
    if (grid.empty()) {
        throw ArgumentError("select_hyper: empty grid");
    }
    Selection sel;
    for (const auto& cell : grid) sel.tables.push_back(agreement_table(cell.replica_indices));

    auto better_cell = [&](std::size_t a, std::size_t b) {
        const double ma = sel.tables[a].mean_pairwise;
        const double mb = sel.tables[b].mean_pairwise;
        if (ma != mb) return ma > mb;
        if (grid[a].lambda != grid[b].lambda) return grid[a].lambda < grid[b].lambda;
        if (grid[a].num_patterns != grid[b].num_patterns) return grid[a].num_patterns < grid[b].num_patterns;
        return a < b;
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (better_cell(i, best)) best = i;

    const auto& per = sel.tables[best].per_replica;
    std::size_t replica = 0;
    for (std::size_t i = 1; i < per.size(); ++i)
        if (per[i] > per[replica]) replica = i;

    sel.cell = best;
    sel.replica = replica;
    sel.num_patterns = grid[best].num_patterns;
    sel.lambda = grid[best].lambda;
    return sel;
}

double estimate_lipschitz(const ModelBundle& bundle, const Matrix& ys_a, const Matrix& ys_b)
{
    require_shape(ys_b, ys_a.rows(), ys_a.cols(), "estimate_lipschitz");
    const Matrix ga = reconstruct_indices(bundle, ys_a);
    const Matrix gb = reconstruct_indices(bundle, ys_b);
    double k = 0.0;
    for (Eigen::Index i = 0; i < ys_a.rows(); ++i) {
        const double dy = (ys_a.row(i) - ys_b.row(i)).norm();
        if (dy > 0.0) k = std::max(k, (ga.row(i) - gb.row(i)).norm() / dy);
    }
    return k;
}

double lemma1_slack(const ModelBundle& bundle, const RowVector& x, const RowVector& z1, const RowVector& z2, double k2)
{
    if (!(k2 > 0.0)) {
        throw ArgumentError("lemma1_slack: Lipschitz estimate must be positive");
    }
    const Matrix y1 = transform(bundle, x, z1);
    const Matrix y2 = transform(bundle, x, z2);
    const Matrix g1 = reconstruct_indices(bundle, y1);
    const Matrix g2 = reconstruct_indices(bundle, y2);
    const double bound = ((z1 - z2).norm() - (g1.row(0) - z1).norm() - (g2.row(0) - z2).norm()) / k2;
    return (y1 - y2).norm() - bound;
}

SlackSummary lemma1_diagnostic(const ModelBundle& bundle, const Matrix& cn_rows, std::size_t samples,
                               std::uint64_t seed)
{
    if (samples == 0 || cn_rows.rows() == 0) {
        throw ArgumentError("lemma1_diagnostic: need samples and CN rows");
    }
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(samples);
    const Eigen::Index m = bundle.num_patterns;
    Matrix x(n, cn_rows.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = cn_rows.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(cn_rows.rows()))));
    }
    const Matrix z1 = sample_latent(n, m, rng);
    const Matrix z2 = sample_latent(n, m, rng);
    const Matrix y1 = transform(bundle, x, z1);
    const Matrix y2 = transform(bundle, x, z2);

    // Cross pairs between unrelated synthesized rows widen the K2 estimate.
    Matrix shuffled = y2;
    for (Eigen::Index i = 0; i < n; ++i) shuffled.row(i) = y2.row((i + 1) % n);

    SlackSummary out;
    out.samples = samples;
    out.k2 = std::max(estimate_lipschitz(bundle, y1, y2), estimate_lipschitz(bundle, y1, shuffled));
    if (!(out.k2 > 0.0)) {
        throw ArgumentError("lemma1_diagnostic: degenerate Lipschitz estimate");
    }
    out.min_slack = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = lemma1_slack(bundle, x.row(i), z1.row(i), z2.row(i), out.k2);
        out.min_slack = std::min(out.min_slack, s);
        total += s;
        if (s < -1e-9) ++out.violations;
    }
    out.mean_slack = total / static_cast<double>(n);
    return out;
}

MonotonicitySummary monotonicity_diagnostic(const ModelBundle& bundle, const Matrix& cn_rows, std::size_t samples,
                                            std::uint64_t seed, double tolerance)
{
    if (samples == 0 || cn_rows.rows() == 0) {
        throw ArgumentError("monotonicity_diagnostic: need samples and CN rows");
    }
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(samples);
    Matrix x(n, cn_rows.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = cn_rows.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(cn_rows.rows()))));
    }
    const Matrix z = sample_latent(n, bundle.num_patterns, rng);
    const Matrix zp = sample_severity_conditioned(z, rng);
    const Matrix y_z = transform(bundle, x, z);
    const Matrix y_zp = transform(bundle, x, zp);
    const Matrix excess = ((y_z - x).cwiseAbs() - (y_zp - x).cwiseAbs()).cwiseMax(0.0);

    MonotonicitySummary out;
    out.samples = samples;
    out.mean_loss = loss::mono_loss(x, y_z, y_zp);
    out.violation_fraction =
        static_cast<double>((excess.array() > tolerance).count()) / static_cast<double>(excess.size());
    out.max_violation = excess.maxCoeff();
    return out;
}

std::string GroupLabel::to_string() const
{
    switch (kind) {
    case GroupKind::Mid: return "p" + std::to_string(dimension + 1) + "-mid";
    case GroupKind::High: return "p" + std::to_string(dimension + 1) + "-high";
    case GroupKind::MixedLow: return "mixed-low";
    case GroupKind::Mixed: return "mixed";
    }
    return "mixed";
}

std::vector<GroupLabel> subgroup_by_r(const Matrix& r, double lo, double hi)
{
    if (!(lo < hi)) {
        throw ArgumentError("subgroup_by_r: lower threshold must be below the upper threshold");
    }
    std::vector<GroupLabel> labels(static_cast<std::size_t>(r.rows()));
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        int raised = -1;
        int raised_count = 0;
        for (Eigen::Index k = 0; k < r.cols(); ++k) {
            if (!(r(i, k) < lo)) {
                raised = static_cast<int>(k);
                ++raised_count;
            }
        }
        GroupLabel& label = labels[static_cast<std::size_t>(i)];
        if (raised_count == 0) {
            label.kind = GroupKind::MixedLow;
        } else if (raised_count == 1) {
            const double v = r(i, raised);
            if (v > lo && v < hi) {
                label = {GroupKind::Mid, raised};
            } else if (v > hi) {
                label = {GroupKind::High, raised};
            }
        }
    }
    return labels;
}

}  // namespace surreal::metrics
