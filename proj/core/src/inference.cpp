#include "gsa/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "gsa/catalog.hpp"
#include "gsa/errors.hpp"
#include "gsa/expression.hpp"

namespace gsa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream-id / tag layout. Relabeling b draws from RandomStream(seed, b);
// everything else lives in derived child streams so nothing can collide.
constexpr std::uint64_t kKsDrawTag = 0x6B7364726177ULL;

// Content hash of a double sequence. The nested ks-moment draws are keyed
// by the z-ensemble itself, so identical data (an identity relabeling, a
// rerun, any thread schedule) gets identical moment estimates.
std::uint64_t hash_doubles(std::span<const double> values) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (double v : values) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int shift = 0; shift < 64; shift += 8) {
            h ^= (bits >> shift) & 0xFF;
            h *= 0x100000001B3ULL;
        }
    }
    return h;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(0..count-1) on up to `threads` workers. Each index writes only to
// its own output slots, so results are independent of scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::min(resolve_threads(threads), count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Signed KS of a set against its complement, given the set's sorted values
// and the sorted values of the whole ensemble (set included).
double ks_signed_from_sorted(std::span<const double> set_sorted,
                             std::span<const double> all_sorted) {
    const std::size_t m = set_sorted.size();
    const std::size_t n_all = all_sorted.size();
    const std::size_t n_comp = n_all - m;
    if (m == 0 || n_comp == 0) {
        throw std::invalid_argument("ks_signed: both samples must be nonempty");
    }
    const double inv_set = 1.0 / static_cast<double>(m);
    const double inv_comp = 1.0 / static_cast<double>(n_comp);

    double best = 0.0;
    double best_abs = -1.0;
    std::size_t ia = 0, is = 0;
    while (ia < n_all) {
        const double x = all_sorted[ia];
        while (ia < n_all && all_sorted[ia] <= x) ++ia;
        while (is < m && set_sorted[is] <= x) ++is;
        const double f_set = static_cast<double>(is) * inv_set;
        const double f_comp = static_cast<double>(ia - is) * inv_comp;
        const double d = f_comp - f_set;
        if (std::fabs(d) > best_abs) {
            best_abs = std::fabs(d);
            best = d;
        }
    }
    return best;
}

double standardized(double raw, const Moments& mom, double sqrt_m) {
    return (raw - mom.mean) / (mom.stdev / sqrt_m);
}

// Signed reporting score: maxmean carries an explicit winning side; the
// other statistics are stored signed already.
double signed_score(SetStatisticKind kind, double value, Side side) {
    if (kind == SetStatisticKind::maxmean) {
        return side == Side::positive ? value : -value;
    }
    return value;
}

struct FuncMoments {
    Moments m[4];
    bool valid[4] = {false, false, false, false};
};

std::optional<Moments> basis_moments(std::span<const double> z, std::span<const int> basis,
                                     ScoreFunctionKind f) {
    double sum = 0.0;
    std::size_t count = 0;
    for (int idx : basis) {
        const double v = z[static_cast<std::size_t>(idx)];
        if (std::isnan(v)) continue;
        sum += apply_score(f, v);
        ++count;
    }
    if (count < 2) return std::nullopt;
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (int idx : basis) {
        const double v = z[static_cast<std::size_t>(idx)];
        if (std::isnan(v)) continue;
        const double d = apply_score(f, v) - mean;
        ss += d * d;
    }
    return Moments{mean, std::sqrt(ss / static_cast<double>(count))};
}

// Raw set statistic for the mean-type kinds; NaN members invalidate a cell.
struct RawParts {
    double value = kNaN;
    double plus = kNaN;   // maxmean only
    double minus = kNaN;  // maxmean only
    bool valid = false;
};

RawParts raw_mean_type(SetStatisticKind kind, std::span<const double> z,
                       std::span<const int> indices) {
    RawParts r;
    const double m = static_cast<double>(indices.size());
    if (kind == SetStatisticKind::maxmean) {
        double sum_plus = 0.0, sum_minus = 0.0;
        for (int idx : indices) {
            const double v = z[static_cast<std::size_t>(idx)];
            if (std::isnan(v)) return r;
            if (v > 0.0) {
                sum_plus += v;
            } else {
                sum_minus -= v;
            }
        }
        r.plus = sum_plus / m;
        r.minus = sum_minus / m;
        r.value = std::max(r.plus, r.minus);
        r.valid = true;
        return r;
    }
    const ScoreFunctionKind f = kind == SetStatisticKind::mean ? ScoreFunctionKind::identity
                                                               : ScoreFunctionKind::absolute;
    double sum = 0.0;
    for (int idx : indices) {
        const double v = z[static_cast<std::size_t>(idx)];
        if (std::isnan(v)) return r;
        sum += apply_score(f, v);
    }
    r.value = sum / m;
    r.valid = true;
    return r;
}

std::vector<double> gather_sorted(std::span<const double> z, std::span<const int> indices) {
    std::vector<double> vals;
    vals.reserve(indices.size());
    for (int idx : indices) vals.push_back(z[static_cast<std::size_t>(idx)]);
    std::sort(vals.begin(), vals.end());
    return vals;
}

std::optional<Moments> ks_moments_from_draws(std::span<const double> all_sorted, int m, int draws,
                                             RandomStream stream) {
    const int n = static_cast<int>(all_sorted.size());
    if (m >= n || draws < 1) return std::nullopt;
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(draws));
    for (int r = 0; r < draws; ++r) {
        const auto idx = stream.sample_without_replacement(n, m);
        std::vector<double> vals;
        vals.reserve(idx.size());
        for (int i : idx) vals.push_back(all_sorted[static_cast<std::size_t>(i)]);
        std::sort(vals.begin(), vals.end());
        stats.push_back(ks_signed_from_sorted(vals, all_sorted));
    }
    return sample_moments(stats);
}

}  // namespace

// ---------------------------------------------------------------------------
// Plan
// ---------------------------------------------------------------------------

PermutationPlan make_permutation_plan(std::uint64_t seed, int count, int n1, int n2) {
    if (count < 0 || n1 < 0 || n2 < 0) {
        throw std::invalid_argument("make_permutation_plan: negative argument");
    }
    PermutationPlan plan;
    plan.seed = seed;
    plan.n1 = n1;
    plan.n2 = n2;
    plan.labels.reserve(static_cast<std::size_t>(count));

    std::vector<int> base(static_cast<std::size_t>(n1 + n2), 2);
    std::fill(base.begin(), base.begin() + n1, 1);
    for (int b = 0; b < count; ++b) {
        std::vector<int> labels = base;
        RandomStream stream(seed, static_cast<std::uint64_t>(b));
        stream.shuffle(labels);
        plan.labels.push_back(std::move(labels));
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Standardization
// ---------------------------------------------------------------------------

double restandardize_value(double s_star, const Moments& randomization,
                           const Moments& permutation) {
    if (permutation.stdev == 0.0) {
        throw DegenerateStatisticError("restandardize_value: permutation stdev is zero");
    }
    return randomization.mean +
           (randomization.stdev / permutation.stdev) * (s_star - permutation.mean);
}

Moments score_moments(std::span<const double> z, std::span<const int> basis,
                      ScoreFunctionKind f) {
    const auto mom = basis_moments(z, basis, f);
    if (!mom) {
        throw std::invalid_argument("score_moments: fewer than 2 usable basis values");
    }
    return *mom;
}

StandardizedScore standardize_score(SetStatisticKind kind, std::span<const double> z,
                                    std::span<const int> set_indices,
                                    std::span<const int> basis,
                                    const std::optional<Moments>& ks_moments) {
    if (set_indices.empty()) {
        throw std::invalid_argument("standardize_score: empty set");
    }
    const double sqrt_m = std::sqrt(static_cast<double>(set_indices.size()));

    if (kind == SetStatisticKind::ks_signed) {
        if (!ks_moments) {
            throw std::invalid_argument(
                "standardize_score: ks_signed requires empirical row-randomization moments");
        }
        if (ks_moments->stdev == 0.0) {
            throw DegenerateStatisticError("standardize_score: zero ks randomization stdev");
        }
        std::vector<char> in_set(z.size(), 0);
        for (int idx : set_indices) in_set[static_cast<std::size_t>(idx)] = 1;
        std::vector<double> z_set, z_comp;
        for (std::size_t i = 0; i < z.size(); ++i) {
            (in_set[i] ? z_set : z_comp).push_back(z[i]);
        }
        const double raw = set_ks_signed(z_set, z_comp);
        const double value = (raw - ks_moments->mean) / ks_moments->stdev;
        return {value, value >= 0.0 ? Side::positive : Side::negative};
    }

    if (kind == SetStatisticKind::maxmean) {
        const Moments mom_p = score_moments(z, basis, ScoreFunctionKind::positive_part);
        const Moments mom_n = score_moments(z, basis, ScoreFunctionKind::negative_part);
        if (mom_p.stdev == 0.0 || mom_n.stdev == 0.0) {
            throw DegenerateStatisticError("standardize_score: zero score stdev over basis");
        }
        const RawParts raw = raw_mean_type(kind, z, set_indices);
        const double std_plus = standardized(raw.plus, mom_p, sqrt_m);
        const double std_minus = standardized(raw.minus, mom_n, sqrt_m);
        if (std_minus > std_plus) return {std_minus, Side::negative};
        return {std_plus, Side::positive};
    }

    const ScoreFunctionKind f = kind == SetStatisticKind::mean ? ScoreFunctionKind::identity
                                                               : ScoreFunctionKind::absolute;
    const Moments mom = score_moments(z, basis, f);
    if (mom.stdev == 0.0) {
        throw DegenerateStatisticError("standardize_score: zero score stdev over basis");
    }
    const RawParts raw = raw_mean_type(kind, z, set_indices);
    const double value = standardized(raw.value, mom, sqrt_m);
    return {value, value >= 0.0 ? Side::positive : Side::negative};
}

// ---------------------------------------------------------------------------
// Row randomization
// ---------------------------------------------------------------------------

std::vector<double> row_randomization_scores(std::span<const double> z, int m,
                                             SetStatisticKind kind, int draws,
                                             RandomStream& stream) {
    const int n = static_cast<int>(z.size());
    if (m < 1 || m > n) {
        throw std::invalid_argument("row_randomization_scores: need 1 <= m <= N");
    }
    if (draws < 1) {
        throw std::invalid_argument("row_randomization_scores: need at least one draw");
    }
    if (kind == SetStatisticKind::ks_signed && m == n) {
        throw std::invalid_argument("row_randomization_scores: ks needs a nonempty complement");
    }
    for (double v : z) {
        if (std::isnan(v)) {
            throw std::invalid_argument("row_randomization_scores: z contains NaN");
        }
    }

    std::vector<double> all_sorted;
    if (kind == SetStatisticKind::ks_signed) {
        all_sorted.assign(z.begin(), z.end());
        std::sort(all_sorted.begin(), all_sorted.end());
    }

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(draws));
    for (int r = 0; r < draws; ++r) {
        const auto idx = stream.sample_without_replacement(n, m);
        if (kind == SetStatisticKind::ks_signed) {
            std::vector<double> vals;
            vals.reserve(idx.size());
            for (int i : idx) vals.push_back(z[static_cast<std::size_t>(i)]);
            std::sort(vals.begin(), vals.end());
            out.push_back(ks_signed_from_sorted(vals, all_sorted));
        } else {
            const RawParts raw = raw_mean_type(kind, z, idx);
            out.push_back(raw.value);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Permutation engine
// ---------------------------------------------------------------------------

namespace {

struct KindStore {
    SetStatisticKind kind;
    std::vector<double> value;  // K x B raw values (maxmean: positive part)
    std::vector<double> minus;  // K x B, maxmean only
};

struct ColumnContext {
    FuncMoments funcs;
    std::vector<std::optional<Moments>> ks_by_size;  // aligned with distinct sizes
};

struct EngineSetup {
    bool need_func[4] = {false, false, false, false};
    bool need_ks = false;
    std::vector<int> distinct_sizes;
    std::vector<int> size_slot;  // per set
};

EngineSetup make_setup(const ResolvedCatalog& resolved,
                       std::span<const SetStatisticKind> kinds) {
    EngineSetup s;
    for (const auto kind : kinds) {
        switch (kind) {
            case SetStatisticKind::mean:
                s.need_func[static_cast<int>(ScoreFunctionKind::identity)] = true;
                break;
            case SetStatisticKind::mean_abs:
                s.need_func[static_cast<int>(ScoreFunctionKind::absolute)] = true;
                break;
            case SetStatisticKind::maxmean:
                s.need_func[static_cast<int>(ScoreFunctionKind::positive_part)] = true;
                s.need_func[static_cast<int>(ScoreFunctionKind::negative_part)] = true;
                break;
            case SetStatisticKind::ks_signed:
                s.need_ks = true;
                break;
        }
    }
    for (const auto& set : resolved.sets) s.distinct_sizes.push_back(set.size());
    std::sort(s.distinct_sizes.begin(), s.distinct_sizes.end());
    s.distinct_sizes.erase(std::unique(s.distinct_sizes.begin(), s.distinct_sizes.end()),
                           s.distinct_sizes.end());
    for (const auto& set : resolved.sets) {
        const auto it = std::lower_bound(s.distinct_sizes.begin(), s.distinct_sizes.end(),
                                         set.size());
        s.size_slot.push_back(static_cast<int>(it - s.distinct_sizes.begin()));
    }
    return s;
}

ColumnContext column_context(std::span<const double> z, std::span<const int> basis,
                             const EngineSetup& setup, const AnalysisOptions& options) {
    ColumnContext ctx;
    for (int f = 0; f < 4; ++f) {
        if (!setup.need_func[f]) continue;
        const auto mom = basis_moments(z, basis, static_cast<ScoreFunctionKind>(f));
        if (mom) {
            ctx.funcs.m[f] = *mom;
            ctx.funcs.valid[f] = mom->stdev > 0.0;
        }
    }
    if (setup.need_ks) {
        ctx.ks_by_size.resize(setup.distinct_sizes.size());
        bool clean = true;
        for (double v : z) {
            if (std::isnan(v)) {
                clean = false;
                break;
            }
        }
        if (clean) {
            std::vector<double> all_sorted(z.begin(), z.end());
            std::sort(all_sorted.begin(), all_sorted.end());
            const RandomStream ks_parent(options.seed, hash_doubles(all_sorted));
            for (std::size_t slot = 0; slot < setup.distinct_sizes.size(); ++slot) {
                const int m = setup.distinct_sizes[slot];
                auto mom = ks_moments_from_draws(
                    all_sorted, m, options.ks_randomization_draws,
                    ks_parent.derive(kKsDrawTag + static_cast<std::uint64_t>(m)));
                if (mom && mom->stdev > 0.0) {
                    ctx.ks_by_size[slot] = mom;
                }
            }
        }
    }
    return ctx;
}

// Standardized (value, side) for one cell; nullopt marks a degenerate cell.
std::optional<StandardizedScore> standardize_cell(
    SetStatisticKind kind, const RawParts& raw, double raw_ks, double sqrt_m, int size_slot,
    const ColumnContext& ctx, StandardizationMode mode) {
    if (mode == StandardizationMode::raw) {
        if (kind == SetStatisticKind::ks_signed) {
            if (std::isnan(raw_ks)) return std::nullopt;
            return StandardizedScore{raw_ks, raw_ks >= 0.0 ? Side::positive : Side::negative};
        }
        if (!raw.valid) return std::nullopt;
        if (kind == SetStatisticKind::maxmean) {
            if (raw.minus > raw.plus) return StandardizedScore{raw.minus, Side::negative};
            return StandardizedScore{raw.plus, Side::positive};
        }
        return StandardizedScore{raw.value, raw.value >= 0.0 ? Side::positive : Side::negative};
    }

    switch (kind) {
        case SetStatisticKind::maxmean: {
            const int fp = static_cast<int>(ScoreFunctionKind::positive_part);
            const int fn = static_cast<int>(ScoreFunctionKind::negative_part);
            if (!raw.valid || !ctx.funcs.valid[fp] || !ctx.funcs.valid[fn]) return std::nullopt;
            const double std_plus = standardized(raw.plus, ctx.funcs.m[fp], sqrt_m);
            const double std_minus = standardized(raw.minus, ctx.funcs.m[fn], sqrt_m);
            if (std_minus > std_plus) return StandardizedScore{std_minus, Side::negative};
            return StandardizedScore{std_plus, Side::positive};
        }
        case SetStatisticKind::ks_signed: {
            if (std::isnan(raw_ks)) return std::nullopt;
            const auto& mom = ctx.ks_by_size[static_cast<std::size_t>(size_slot)];
            if (!mom) return std::nullopt;
            const double value = (raw_ks - mom->mean) / mom->stdev;
            return StandardizedScore{value, value >= 0.0 ? Side::positive : Side::negative};
        }
        default: {
            const int f = kind == SetStatisticKind::mean
                              ? static_cast<int>(ScoreFunctionKind::identity)
                              : static_cast<int>(ScoreFunctionKind::absolute);
            if (!raw.valid || !ctx.funcs.valid[f]) return std::nullopt;
            const double value = standardized(raw.value, ctx.funcs.m[f], sqrt_m);
            return StandardizedScore{value, value >= 0.0 ? Side::positive : Side::negative};
        }
    }
}

ColumnContext pool_columns(const std::vector<ColumnContext>& cols, const EngineSetup& setup) {
    ColumnContext pooled;
    for (int f = 0; f < 4; ++f) {
        if (!setup.need_func[f]) continue;
        double sum_mean = 0.0, sum_msq = 0.0;
        int count = 0;
        for (const auto& c : cols) {
            if (!c.funcs.valid[f]) continue;
            sum_mean += c.funcs.m[f].mean;
            sum_msq += c.funcs.m[f].stdev * c.funcs.m[f].stdev +
                       c.funcs.m[f].mean * c.funcs.m[f].mean;
            ++count;
        }
        if (count > 0) {
            const double mean = sum_mean / count;
            const double var = std::max(0.0, sum_msq / count - mean * mean);
            pooled.funcs.m[f] = {mean, std::sqrt(var)};
            pooled.funcs.valid[f] = pooled.funcs.m[f].stdev > 0.0;
        }
    }
    if (setup.need_ks) {
        pooled.ks_by_size.resize(setup.distinct_sizes.size());
        for (std::size_t slot = 0; slot < setup.distinct_sizes.size(); ++slot) {
            double sum_mean = 0.0, sum_msq = 0.0;
            int count = 0;
            for (const auto& c : cols) {
                const auto& mom = c.ks_by_size[slot];
                if (!mom) continue;
                sum_mean += mom->mean;
                sum_msq += mom->stdev * mom->stdev + mom->mean * mom->mean;
                ++count;
            }
            if (count > 0) {
                const double mean = sum_mean / count;
                const double var = std::max(0.0, sum_msq / count - mean * mean);
                if (var > 0.0) pooled.ks_by_size[slot] = Moments{mean, std::sqrt(var)};
            }
        }
    }
    return pooled;
}

}  // namespace

std::vector<PermutationScores> permutation_scores_multi(
    const ExpressionMatrix& matrix, const ResolvedCatalog& resolved,
    std::span<const SetStatisticKind> kinds, const PermutationPlan& plan,
    const AnalysisOptions& options) {
    if (kinds.empty()) {
        throw std::invalid_argument("permutation_scores: no statistics requested");
    }
    const int K = static_cast<int>(resolved.sets.size());
    const int B = plan.size();
    const int N = matrix.n_genes();
    const int n = matrix.n_samples();
    const int df = n - 2;
    for (const auto& labels : plan.labels) {
        if (static_cast<int>(labels.size()) != n) {
            throw std::invalid_argument("permutation plan does not match the sample count");
        }
    }

    const EngineSetup setup = make_setup(resolved, kinds);
    const std::vector<int> basis = moments_basis(resolved, N, options.moments_mode);

    // Observed scores (zero-variance genes abort here unless floored).
    const GeneScores observed = compute_gene_scores(matrix, options.gene_score_options);
    const ColumnContext observed_ctx = column_context(observed.z, basis, setup, options);

    std::vector<double> observed_all_sorted;
    if (setup.need_ks) {
        observed_all_sorted.assign(observed.z.begin(), observed.z.end());
        std::sort(observed_all_sorted.begin(), observed_all_sorted.end());
    }

    // Raw permutation statistics, filled in parallel over columns.
    std::vector<KindStore> stores(kinds.size());
    for (std::size_t t = 0; t < kinds.size(); ++t) {
        stores[t].kind = kinds[t];
        stores[t].value.assign(static_cast<std::size_t>(K) * B, kNaN);
        if (kinds[t] == SetStatisticKind::maxmean) {
            stores[t].minus.assign(static_cast<std::size_t>(K) * B, kNaN);
        }
    }
    std::vector<ColumnContext> columns(static_cast<std::size_t>(B));

    parallel_for(B, options.threads, [&](int b) {
        const auto t_star = detail::two_sample_t_permissive(matrix, plan.labels[b]);
        const auto z_star = t_to_z(t_star, df);
        columns[static_cast<std::size_t>(b)] = column_context(z_star, basis, setup, options);

        std::vector<double> all_sorted;
        bool ks_clean = false;
        if (setup.need_ks) {
            ks_clean = std::none_of(z_star.begin(), z_star.end(),
                                    [](double v) { return std::isnan(v); });
            if (ks_clean) {
                all_sorted.assign(z_star.begin(), z_star.end());
                std::sort(all_sorted.begin(), all_sorted.end());
            }
        }

        for (std::size_t t = 0; t < kinds.size(); ++t) {
            const SetStatisticKind kind = kinds[t];
            for (int k = 0; k < K; ++k) {
                const std::size_t cell = static_cast<std::size_t>(k) * B + b;
                const auto& indices = resolved.sets[static_cast<std::size_t>(k)].row_indices;
                if (kind == SetStatisticKind::ks_signed) {
                    if (ks_clean) {
                        const auto set_sorted = gather_sorted(z_star, indices);
                        stores[t].value[cell] = ks_signed_from_sorted(set_sorted, all_sorted);
                    }
                } else {
                    const RawParts raw = raw_mean_type(kind, z_star, indices);
                    if (kind == SetStatisticKind::maxmean) {
                        stores[t].value[cell] = raw.plus;
                        stores[t].minus[cell] = raw.minus;
                    } else {
                        stores[t].value[cell] = raw.value;
                    }
                }
            }
        }
    });

    std::optional<ColumnContext> pooled;
    if (options.standardization == StandardizationMode::restandardized &&
        options.moments_scope == PermutationMomentsScope::pooled) {
        pooled = pool_columns(columns, setup);
    }

    // Assemble standardized scores.
    std::vector<PermutationScores> out(kinds.size());
    for (std::size_t t = 0; t < kinds.size(); ++t) {
        const SetStatisticKind kind = kinds[t];
        PermutationScores ps;
        ps.kind = kind;
        ps.n_sets = K;
        ps.n_permutations = B;
        ps.observed.resize(static_cast<std::size_t>(K));
        ps.observed_side.resize(static_cast<std::size_t>(K));
        ps.perm.assign(static_cast<std::size_t>(K) * B, kNaN);
        ps.perm_side.assign(static_cast<std::size_t>(K) * B, Side::positive);

        for (int k = 0; k < K; ++k) {
            const auto& set = resolved.sets[static_cast<std::size_t>(k)];
            const double sqrt_m = std::sqrt(static_cast<double>(set.size()));
            const int slot = setup.size_slot[static_cast<std::size_t>(k)];

            RawParts obs_raw;
            double obs_ks = kNaN;
            if (kind == SetStatisticKind::ks_signed) {
                const auto set_sorted = gather_sorted(observed.z, set.row_indices);
                obs_ks = ks_signed_from_sorted(set_sorted, observed_all_sorted);
            } else {
                obs_raw = raw_mean_type(kind, observed.z, set.row_indices);
            }
            const auto obs_score = standardize_cell(kind, obs_raw, obs_ks, sqrt_m, slot,
                                                    observed_ctx, options.standardization);
            if (!obs_score) {
                throw DegenerateStatisticError("degenerate observed statistic for gene-set \"" +
                                               set.name + "\"");
            }
            ps.observed[static_cast<std::size_t>(k)] = obs_score->value;
            ps.observed_side[static_cast<std::size_t>(k)] = obs_score->side;

            for (int b = 0; b < B; ++b) {
                const std::size_t cell = static_cast<std::size_t>(k) * B + b;
                RawParts raw;
                double raw_ks = kNaN;
                if (kind == SetStatisticKind::ks_signed) {
                    raw_ks = stores[t].value[cell];
                } else if (kind == SetStatisticKind::maxmean) {
                    raw.plus = stores[t].value[cell];
                    raw.minus = stores[t].minus[cell];
                    raw.valid = !std::isnan(raw.plus);
                    if (raw.valid) raw.value = std::max(raw.plus, raw.minus);
                } else {
                    raw.value = stores[t].value[cell];
                    raw.valid = !std::isnan(raw.value);
                }
                const ColumnContext& ctx =
                    pooled ? *pooled : columns[static_cast<std::size_t>(b)];
                const auto score = standardize_cell(kind, raw, raw_ks, sqrt_m, slot, ctx,
                                                    options.standardization);
                if (score) {
                    ps.perm[cell] = score->value;
                    ps.perm_side[cell] = score->side;
                } else {
                    ++ps.degenerate_cells;
                }
            }
        }
        out[t] = std::move(ps);
    }
    return out;
}

PermutationScores permutation_scores(const ExpressionMatrix& matrix,
                                     const ResolvedCatalog& resolved, SetStatisticKind kind,
                                     const PermutationPlan& plan,
                                     const AnalysisOptions& options) {
    const SetStatisticKind kinds[1] = {kind};
    auto v = permutation_scores_multi(matrix, resolved, kinds, plan, options);
    return std::move(v.front());
}

// ---------------------------------------------------------------------------
// P-values and FDR
// ---------------------------------------------------------------------------

PValueTriple pvalues(SetStatisticKind kind, double observed, Side observed_side,
                     std::span<const double> perm, std::span<const Side> perm_side,
                     PValueConvention convention) {
    if (perm.size() != perm_side.size()) {
        throw std::invalid_argument("pvalues: value/side length mismatch");
    }
    const double obs_main = kind == SetStatisticKind::ks_signed ? std::fabs(observed) : observed;
    const double obs_signed = signed_score(kind, observed, observed_side);

    int valid = 0, c_main = 0, c_hi = 0, c_lo = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        const double v = perm[i];
        if (std::isnan(v)) continue;
        ++valid;
        const double v_main = kind == SetStatisticKind::ks_signed ? std::fabs(v) : v;
        const double v_signed = signed_score(kind, v, perm_side[i]);
        if (v_main >= obs_main) ++c_main;
        if (v_signed >= obs_signed) ++c_hi;
        if (v_signed <= obs_signed) ++c_lo;
    }
    if (valid == 0) {
        throw DegenerateStatisticError("pvalues: no valid permutation values");
    }

    PValueTriple out;
    out.valid = valid;
    if (convention == PValueConvention::add_one) {
        const double denom = static_cast<double>(valid) + 1.0;
        out.p = (c_main + 1) / denom;
        out.p_hi = (c_hi + 1) / denom;
        out.p_lo = (c_lo + 1) / denom;
    } else {
        const double denom = static_cast<double>(valid);
        out.p = c_main / denom;
        out.p_hi = c_hi / denom;
        out.p_lo = c_lo / denom;
    }
    return out;
}

BhResult bh_fdr(std::span<const double> p, double q_cut) {
    const int K = static_cast<int>(p.size());
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("bh_fdr: p-values must lie in [0, 1]");
        }
    }
    std::vector<int> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (p[static_cast<std::size_t>(a)] != p[static_cast<std::size_t>(b)]) {
            return p[static_cast<std::size_t>(a)] < p[static_cast<std::size_t>(b)];
        }
        return a < b;
    });

    BhResult out;
    out.q.assign(static_cast<std::size_t>(K), 0.0);
    double running = std::numeric_limits<double>::infinity();
    for (int j = K - 1; j >= 0; --j) {
        const double candidate =
            (static_cast<double>(K) * p[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]) /
            static_cast<double>(j + 1);
        running = std::min(running, candidate);
        out.q[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = running;
    }
    for (int k = 0; k < K; ++k) {
        if (out.q[static_cast<std::size_t>(k)] <= q_cut) out.significant.push_back(k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full analysis
// ---------------------------------------------------------------------------

std::vector<SetScoreTable> analyze_multi(const ExpressionMatrix& matrix,
                                         const ResolvedCatalog& resolved,
                                         std::span<const SetStatisticKind> kinds,
                                         const AnalysisOptions& options) {
    const PermutationPlan plan = make_permutation_plan(
        options.seed, options.permutations, matrix.class_size(1), matrix.class_size(2));
    const auto scores = permutation_scores_multi(matrix, resolved, kinds, plan, options);

    const GeneScores observed = compute_gene_scores(matrix, options.gene_score_options);
    std::vector<double> observed_sorted;
    if (std::find(kinds.begin(), kinds.end(), SetStatisticKind::ks_signed) != kinds.end()) {
        observed_sorted.assign(observed.z.begin(), observed.z.end());
        std::sort(observed_sorted.begin(), observed_sorted.end());
    }

    std::vector<SetScoreTable> tables;
    tables.reserve(kinds.size());
    for (std::size_t t = 0; t < kinds.size(); ++t) {
        const auto& ps = scores[t];
        const SetStatisticKind kind = kinds[t];
        const int K = ps.n_sets;

        SetScoreTable table;
        table.kind = kind;
        table.permutations = ps.n_permutations;
        table.degenerate_cells = ps.degenerate_cells;

        std::vector<double> main_p(static_cast<std::size_t>(K));
        std::vector<PValueTriple> triples(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            const std::span<const double> row{
                ps.perm.data() + static_cast<std::size_t>(k) * ps.n_permutations,
                static_cast<std::size_t>(ps.n_permutations)};
            const std::span<const Side> row_side{
                ps.perm_side.data() + static_cast<std::size_t>(k) * ps.n_permutations,
                static_cast<std::size_t>(ps.n_permutations)};
            triples[static_cast<std::size_t>(k)] =
                pvalues(kind, ps.observed[static_cast<std::size_t>(k)],
                        ps.observed_side[static_cast<std::size_t>(k)], row, row_side,
                        options.pvalue_convention);
            main_p[static_cast<std::size_t>(k)] = triples[static_cast<std::size_t>(k)].p;
        }
        const BhResult bh = bh_fdr(main_p, options.q_cut);

        table.rows.resize(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            const auto& set = resolved.sets[static_cast<std::size_t>(k)];
            SetScoreRow& row = table.rows[static_cast<std::size_t>(k)];
            row.name = set.name;
            row.m = set.size();
            row.s_prime = ps.observed[static_cast<std::size_t>(k)];
            row.side = ps.observed_side[static_cast<std::size_t>(k)];
            row.p = triples[static_cast<std::size_t>(k)].p;
            row.p_lo = triples[static_cast<std::size_t>(k)].p_lo;
            row.p_hi = triples[static_cast<std::size_t>(k)].p_hi;
            row.q = bh.q[static_cast<std::size_t>(k)];

            if (kind == SetStatisticKind::ks_signed) {
                const auto set_sorted = gather_sorted(observed.z, set.row_indices);
                row.raw = ks_signed_from_sorted(set_sorted, observed_sorted);
            } else {
                const RawParts raw = raw_mean_type(kind, observed.z, set.row_indices);
                row.raw = raw.value;
            }
        }
        std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
            if (a.p != b.p) return a.p < b.p;
            return a.name < b.name;
        });
        tables.push_back(std::move(table));
    }
    return tables;
}

SetScoreTable analyze(const ExpressionMatrix& matrix, const ResolvedCatalog& resolved,
                      SetStatisticKind kind, const AnalysisOptions& options) {
    const SetStatisticKind kinds[1] = {kind};
    auto tables = analyze_multi(matrix, resolved, kinds, options);
    return std::move(tables.front());
}

}  // namespace gsa
