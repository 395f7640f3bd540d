#pragma once

// Command cores behind the ortho-lens CLI. Each cmd_* function consumes an
// AnalysisOptions bag and returns the finished JSON report; argument
// plumbing, serialization, timing, and exit codes live in the tool itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "olens/errors.hpp"
#include "olens/independence.hpp"
#include "olens/io.hpp"
#include "olens/ipe.hpp"
#include "olens/markov.hpp"
#include "olens/rng.hpp"

namespace olens {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr std::size_t kMaxReportedViolations = 100;

struct AnalysisOptions {
    std::string input;
    std::string format = "text";
    std::string target;
    std::uint64_t seed = 0;
    // Defaults sized for f32 on-disk coordinates (quantization noise ~1e-7),
    // not the f64 exact-arithmetic regime of the core library. The axioms
    // command resets these to the exact-regime values.
    double ortho_tol = 1e-5;
    double zero_tol = 1e-6;
    bool no_normalize = false;
    std::string exclude_path;

    // gmb / rank
    double filter_threshold = 0.9;
    std::size_t n_r = 10;
    std::size_t d_r = 50;
    std::size_t top_k = 10;
    double gmb_tol = 0.02;
    bool sweep = false;
    std::size_t sweep_lo = 1, sweep_hi = 10;

    // mb-exact
    std::size_t max_size = 0;  // 0 = unlimited

    // condition-matrix
    std::string categories_path;
    std::size_t null_samples = 10000;

    // angles
    std::vector<std::string> boundary;
    std::vector<std::string> reference;
    std::size_t random_baselines = 50;

    // axioms
    std::vector<std::string> axioms;  // empty = all
    std::size_t trials = 1000;
    bool exhaustive = false;

    // ipe-*
    std::string graph_path;
    bool has_epsilon = false;
    double epsilon = 0.0;
    std::string map_out;
    bool normalize_rows = false;
    std::size_t cap_k = 0;
    bool bypass_identity = false;
};

inline Tolerance make_tolerance(const AnalysisOptions& o) {
    Tolerance t;
    t.ortho_tol = o.ortho_tol;
    t.zero_tol = o.zero_tol;
    return t;
}

namespace detail {

inline ordered_json json_vec(const Vec& v) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline ordered_json json_mat(const Mat& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ordered_json json_index_set(const IndexSet& s) {
    ordered_json a = ordered_json::array();
    for (std::size_t i : s) a.push_back(i);
    return a;
}

inline ordered_json json_labels(const EmbeddingTable& t, const IndexSet& s) {
    ordered_json a = ordered_json::array();
    for (std::size_t i : s) a.push_back(t.label(i));
    return a;
}

// One raw label per line; blank lines skipped.
inline std::vector<std::string> load_label_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input_error("cannot open label list '" + path + "'");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

}  // namespace detail

inline ordered_json make_report(const std::string& command) {
    ordered_json doc;
    doc["command"] = command;
    doc["version"] = kToolVersion;
    doc["config"] = ordered_json::object();
    return doc;
}

// Loads the table, drops excluded labels, and unit-normalizes unless told
// not to. Labels from the exclusion list that are absent are ignored; the
// ones actually removed are reported through `removed`.
inline EmbeddingTable load_analysis_table(const AnalysisOptions& o,
                                          std::vector<std::string>* removed = nullptr) {
    EmbeddingTable t = load_table(o.input, o.format);
    if (!o.exclude_path.empty()) {
        const auto drop = detail::load_label_list(o.exclude_path);
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (std::find(drop.begin(), drop.end(), t.label(i)) == drop.end())
                keep.push_back(i);
            else if (removed)
                removed->push_back(t.label(i));
        }
        if (keep.empty())
            throw invalid_input_error("exclusion list removes every record from '" + o.input +
                                      "'");
        t = t.select(keep);
    }
    if (!o.no_normalize) t = t.normalized();
    return t;
}

struct FilteredTable {
    EmbeddingTable table;
    std::size_t target = 0;
    std::vector<std::string> removed;
};

// Drops every non-target record whose |cosine| with the target meets the
// threshold. Expects a normalized table for the usual cosine reading but
// works on raw vectors too.
inline FilteredTable filter_near_duplicates(const EmbeddingTable& t, std::size_t target,
                                            double threshold, const Tolerance& tol = {}) {
    t.check_index(target);
    const Vec v = t.vector(target);
    std::vector<std::size_t> keep;
    std::vector<std::string> removed;
    std::size_t new_target = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i == target) {
            new_target = keep.size();
            keep.push_back(i);
            continue;
        }
        const CosineResult c = cosine(t.vector(i), v, tol);
        if (!c.degenerate && std::abs(c.value) >= threshold)
            removed.push_back(t.label(i));
        else
            keep.push_back(i);
    }
    return {t.select(keep), new_target, std::move(removed)};
}

// ---------------------------------------------------------------------------
// gmb
// ---------------------------------------------------------------------------

inline ordered_json cmd_gmb(const AnalysisOptions& o) {
    const Tolerance tol = make_tolerance(o);
    std::vector<std::string> excluded;
    EmbeddingTable loaded = load_analysis_table(o, &excluded);
    const std::size_t raw_target = loaded.index_of(o.target);
    FilteredTable f = filter_near_duplicates(loaded, raw_target, o.filter_threshold, tol);
    const EmbeddingTable& t = f.table;
    const std::size_t n = t.size();
    if (n < 2) throw invalid_input_error("gmb: need at least 2 records after filtering");

    // The library is strict about d_r and K; the CLI clamps them to the
    // table that remains after filtering and echoes the effective values.
    const std::size_t d_r = std::min(o.d_r, n - 1);
    const std::size_t k = std::min(o.top_k, n - 1);

    const GmbResult r = find_generalized_mb(t, f.target, o.n_r, d_r, k, o.seed, tol, o.gmb_tol);

    ordered_json doc = make_report("gmb");
    auto& cfg = doc["config"];
    cfg["input"] = o.input;
    cfg["format"] = o.format;
    cfg["target"] = o.target;
    cfg["seed"] = o.seed;
    cfg["normalize"] = !o.no_normalize;
    cfg["ortho_tol"] = o.ortho_tol;
    cfg["zero_tol"] = o.zero_tol;
    cfg["filter_threshold"] = o.filter_threshold;
    cfg["n_r"] = o.n_r;
    cfg["d_r"] = d_r;
    cfg["top_k"] = k;
    cfg["gmb_tol"] = o.gmb_tol;
    cfg["excluded_labels"] = excluded;

    doc["filtered_near_duplicates"] = f.removed;

    ordered_json res;
    res["target"] = t.label(f.target);
    res["members"] = detail::json_labels(t, r.members);
    res["cbar"] = r.cbar;
    res["excluded"] = r.excluded;
    ordered_json pool = ordered_json::array();
    for (const auto& [idx, agg] : r.candidate_pool) {
        ordered_json e;
        e["label"] = t.label(idx);
        e["aggregate"] = agg;
        pool.push_back(std::move(e));
    }
    res["candidate_pool"] = std::move(pool);
    doc["result"] = std::move(res);

    if (o.sweep) {
        const std::size_t hi = std::min(o.sweep_hi, n - 1);
        const std::size_t lo = std::min(o.sweep_lo, hi);
        ordered_json sw = ordered_json::array();
        for (const SweepEntry& e : sweep_generalized_mb(t, f.target, o.n_r, d_r, lo, hi, o.seed,
                                                        tol)) {
            ordered_json row;
            row["k"] = e.k;
            row["best_abs_cbar"] = e.best_abs_cbar;
            row["members"] = detail::json_labels(t, e.members);
            sw.push_back(std::move(row));
        }
        doc["sweep"] = std::move(sw);
    }
    return doc;
}

// ---------------------------------------------------------------------------
// mb-exact
// ---------------------------------------------------------------------------

inline ordered_json cmd_mb_exact(const AnalysisOptions& o) {
    const Tolerance tol = make_tolerance(o);
    std::vector<std::string> excluded;
    EmbeddingTable t = load_analysis_table(o, &excluded);
    const std::size_t v = t.index_of(o.target);
    const std::size_t max_size = o.max_size == 0 ? t.size() : o.max_size;

    const auto boundaries = enumerate_markov_boundaries(t, v, tol, max_size);

    IndexSet rest;
    for (std::size_t u = 0; u < t.size(); ++u)
        if (u != v) rest.push_back(u);
    const Vec res_v = residual(t.vector(v), orthonormal_basis_of_columns(t.coords(), rest, tol));
    const bool in_span = res_v.norm() <= 1e-8 * std::max(1.0, t.vector(v).norm());

    double max_pair_diff = 0.0;
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i)
        for (std::size_t j = i + 1; j < boundaries.size(); ++j)
            max_pair_diff = std::max(max_pair_diff, (boundaries[i].projection_of_target -
                                                     boundaries[j].projection_of_target)
                                                        .norm());
    double max_target_diff = 0.0;
    for (const auto& b : boundaries)
        max_target_diff =
            std::max(max_target_diff, (b.projection_of_target - t.vector(v)).norm());

    ordered_json doc = make_report("mb-exact");
    auto& cfg = doc["config"];
    cfg["input"] = o.input;
    cfg["format"] = o.format;
    cfg["target"] = o.target;
    cfg["normalize"] = !o.no_normalize;
    cfg["ortho_tol"] = o.ortho_tol;
    cfg["zero_tol"] = o.zero_tol;
    cfg["max_size"] = o.max_size;
    cfg["excluded_labels"] = excluded;

    ordered_json res;
    res["target"] = t.label(v);
    res["count"] = boundaries.size();
    ordered_json bl = ordered_json::array();
    for (const auto& b : boundaries) {
        ordered_json e;
        e["members"] = detail::json_labels(t, b.members);
        e["projection"] = detail::json_vec(b.projection_of_target);
        bl.push_back(std::move(e));
    }
    res["boundaries"] = std::move(bl);
    res["in_span_of_rest"] = in_span;
    res["max_projection_diff"] = max_pair_diff;
    res["projections_agree"] = max_pair_diff <= 1e-8;
    res["max_target_projection_diff"] = max_target_diff;
    res["projection_equals_target"] = in_span && max_target_diff <= 1e-8;
    doc["result"] = std::move(res);
    return doc;
}

// ---------------------------------------------------------------------------
// condition-matrix
// ---------------------------------------------------------------------------

inline ordered_json cmd_condition_matrix(const AnalysisOptions& o) {
    const Tolerance tol = make_tolerance(o);
    std::vector<std::string> excluded;
    EmbeddingTable t = load_analysis_table(o, &excluded);

    std::ifstream catf(o.categories_path);
    if (!catf)
        throw invalid_input_error("cannot open categories file '" + o.categories_path + "'");
    ordered_json spec;
    try {
        spec = ordered_json::parse(catf);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(std::string("categories file: ") + e.what());
    }
    if (!spec.is_object() || spec.empty())
        throw invalid_input_error("categories file must be a non-empty JSON object");

    std::vector<std::string> cats;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::string> missing;
    for (auto it = spec.begin(); it != spec.end(); ++it) {
        cats.push_back(it.key());
        if (!t.contains(it.key())) missing.push_back(it.key());
        if (!it.value().is_array() || it.value().size() < 2)
            throw invalid_input_error("category '" + it.key() +
                                      "' must list at least 2 member labels");
        std::vector<std::size_t> idx;
        for (const auto& m : it.value()) {
            if (!m.is_string())
                throw invalid_input_error("category '" + it.key() + "' has a non-string member");
            const std::string label = m.get<std::string>();
            if (!t.contains(label)) {
                missing.push_back(label);
                continue;
            }
            idx.push_back(t.index_of(label));
        }
        std::vector<std::size_t> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw invalid_input_error("category '" + it.key() + "' lists a member twice");
        members.push_back(std::move(idx));
    }
    if (!missing.empty()) {
        std::string msg = "labels not present in the table:";
        for (const auto& m : missing) msg += " '" + m + "'";
        throw invalid_input_error(msg);
    }

    const std::size_t n = t.size();
    if (n < 2) throw invalid_input_error("condition-matrix: need at least 2 records");
    const std::size_t rows = cats.size();

    // Reduction of one pair under one conditioning span; degenerate cosines
    // contribute 0 so zero vectors cannot poison a mean.
    auto reduction = [&](std::size_t u, std::size_t w, const Subspace& s) {
        const CosineResult raw = cosine(t.vector(u), t.vector(w), tol);
        const CosineResult proj = projected_cosine(t.vector(u), t.vector(w), s, tol);
        return (raw.degenerate ? 0.0 : raw.value) - (proj.degenerate ? 0.0 : proj.value);
    };

    // One shared null-pair sample, reused for every conditioning row, so
    // identical rows produce identical z-scores.
    SplitMix64 rng(o.seed);
    std::vector<std::pair<std::size_t, std::size_t>> null_pairs;
    null_pairs.reserve(o.null_samples);
    for (std::size_t s = 0; s < o.null_samples; ++s) {
        const auto i = static_cast<std::size_t>(rng.below(n));
        auto j = static_cast<std::size_t>(rng.below(n - 1));
        if (j >= i) ++j;
        null_pairs.emplace_back(i, j);
    }

    Mat raw(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    Mat z(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    std::vector<double> null_mean(rows), null_std(rows);
    std::vector<std::size_t> pair_counts(rows);

    for (std::size_t r = 0; r < rows; ++r) {
        const Subspace s =
            orthonormal_basis_of_columns(t.coords(), {t.index_of(cats[r])}, tol);

        double sum = 0.0, sum2 = 0.0;
        for (const auto& [i, j] : null_pairs) {
            const double d = reduction(i, j, s);
            sum += d;
            sum2 += d * d;
        }
        const double mean = sum / static_cast<double>(o.null_samples);
        const double var =
            std::max(0.0, sum2 / static_cast<double>(o.null_samples) - mean * mean);
        const double sd = std::sqrt(var);
        null_mean[r] = mean;
        null_std[r] = sd;

        for (std::size_t c = 0; c < rows; ++c) {
            double acc = 0.0;
            std::size_t cnt = 0;
            for (std::size_t a = 0; a + 1 < members[c].size(); ++a)
                for (std::size_t b = a + 1; b < members[c].size(); ++b) {
                    acc += reduction(members[c][a], members[c][b], s);
                    ++cnt;
                }
            pair_counts[c] = cnt;
            const double mval = acc / static_cast<double>(cnt);
            raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = mval;
            z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                sd <= 1e-15 ? 0.0 : (mval - mean) / sd;
        }
    }

    ordered_json doc = make_report("condition-matrix");
    auto& cfg = doc["config"];
    cfg["input"] = o.input;
    cfg["format"] = o.format;
    cfg["categories"] = o.categories_path;
    cfg["seed"] = o.seed;
    cfg["null_samples"] = o.null_samples;
    cfg["normalize"] = !o.no_normalize;
    cfg["ortho_tol"] = o.ortho_tol;
    cfg["zero_tol"] = o.zero_tol;
    cfg["excluded_labels"] = excluded;

    ordered_json res;
    res["categories"] = cats;
    res["pair_counts"] = pair_counts;
    res["raw"] = detail::json_mat(raw);
    res["null_mean"] = null_mean;
    res["null_std"] = null_std;
    res["z"] = detail::json_mat(z);
    res["null_conditioning"] = "per-row";
    doc["result"] = std::move(res);
    return doc;
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

inline ordered_json cmd_rank(const AnalysisOptions& o) {
    const Tolerance tol = make_tolerance(o);
    std::vector<std::string> excluded;
    EmbeddingTable t = load_analysis_table(o, &excluded);
    const std::size_t v = t.index_of(o.target);
    const std::size_t n = t.size();
    if (n < 2) throw invalid_input_error("rank: need at least 2 records");
    const std::size_t d_r = std::min(o.d_r, n - 1);
    const std::size_t top = std::min(o.top_k, n - 1);

    std::vector<std::pair<std::size_t, double>> before;
    for (std::size_t u = 0; u < n; ++u) {
        if (u == v) continue;
        const CosineResult c = cosine(t.vector(v), t.vector(u), tol);
        before.emplace_back(u, c.degenerate ? 0.0 : c.value);
    }
    std::stable_sort(before.begin(), before.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    // With d_r = 0 every round conditions on the empty set and the
    // aggregate ordering coincides with raw cosine ordering.
    const std::vector<double> agg = detail::gmb_aggregates(t, v, o.n_r, d_r, o.seed, tol);
    const auto after = detail::rank_candidates(agg, v);

    ordered_json doc = make_report("rank");
    auto& cfg = doc["config"];
    cfg["input"] = o.input;
    cfg["format"] = o.format;
    cfg["target"] = o.target;
    cfg["seed"] = o.seed;
    cfg["n_r"] = o.n_r;
    cfg["d_r"] = d_r;
    cfg["top_k"] = top;
    cfg["normalize"] = !o.no_normalize;
    cfg["ortho_tol"] = o.ortho_tol;
    cfg["zero_tol"] = o.zero_tol;
    cfg["excluded_labels"] = excluded;

    ordered_json res;
    res["target"] = t.label(v);
    ordered_json jb = ordered_json::array();
    for (std::size_t i = 0; i < top; ++i) {
        ordered_json e;
        e["label"] = t.label(before[i].first);
        e["cosine"] = before[i].second;
        jb.push_back(std::move(e));
    }
    res["before"] = std::move(jb);
    ordered_json ja = ordered_json::array();
    for (std::size_t i = 0; i < top && i < after.size(); ++i) {
        ordered_json e;
        e["label"] = t.label(after[i].first);
        e["aggregate"] = after[i].second;
        ja.push_back(std::move(e));
    }
    res["after"] = std::move(ja);
    doc["result"] = std::move(res);
    return doc;
}

// ---------------------------------------------------------------------------
// angles
// ---------------------------------------------------------------------------

inline ordered_json cmd_angles(const AnalysisOptions& o) {
    const Tolerance tol = make_tolerance(o);
    std::vector<std::string> excluded;
    EmbeddingTable t = load_analysis_table(o, &excluded);
    if (o.boundary.empty() || o.reference.empty())
        throw invalid_input_error("angles: boundary and reference label sets must be non-empty");

    IndexSet bidx, ridx;
    for (const auto& l : o.boundary) bidx.push_back(t.index_of(l));
    for (const auto& l : o.reference) ridx.push_back(t.index_of(l));

    const Subspace bspan = orthonormal_basis_of_columns(t.coords(), bidx, tol);
    const Subspace rspan = orthonormal_basis_of_columns(t.coords(), ridx, tol);
    const std::vector<double> angles = principal_angles(bspan, rspan);
    const double smallest = angles.front();

    if (o.random_baselines < 1)
        throw invalid_input_error("angles: need at least one random baseline");
    const auto d = t.dim();
    std::vector<double> baseline;
    for (std::size_t b = 0; b < o.random_baselines; ++b) {
        SplitMix64 rng(mix_seed(o.seed, b));
        std::vector<Vec> draws;
        for (Eigen::Index r = 0; r < rspan.rank(); ++r) {
            Vec g(d);
            for (Eigen::Index i = 0; i < d; ++i) g(i) = rng.normal();
            draws.push_back(std::move(g));
        }
        const Subspace rand_span = orthonormal_basis(draws, tol);
        baseline.push_back(principal_angles(bspan, rand_span).front());
    }
    std::vector<double> sorted = baseline;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t p5_idx =
        std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::ceil(0.05 * static_cast<double>(o.random_baselines)))) -
        1;
    const double p5 = sorted[p5_idx];

    ordered_json doc = make_report("angles");
    auto& cfg = doc["config"];
    cfg["input"] = o.input;
    cfg["format"] = o.format;
    cfg["boundary"] = o.boundary;
    cfg["reference"] = o.reference;
    cfg["seed"] = o.seed;
    cfg["random_baselines"] = o.random_baselines;
    cfg["normalize"] = !o.no_normalize;
    cfg["ortho_tol"] = o.ortho_tol;
    cfg["zero_tol"] = o.zero_tol;
    cfg["excluded_labels"] = excluded;

    ordered_json res;
    res["boundary_rank"] = static_cast<std::size_t>(bspan.rank());
    res["reference_rank"] = static_cast<std::size_t>(rspan.rank());
    res["angles"] = angles;
    res["smallest_angle"] = smallest;
    res["baseline_smallest"] = baseline;
    res["baseline_p5"] = p5;
    res["below_p5"] = smallest < p5;
    doc["result"] = std::move(res);
    return doc;
}

// ---------------------------------------------------------------------------
// axioms
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Axiom> parse_axiom_names(const std::vector<std::string>& names) {
    if (names.empty()) return all_axioms();
    std::vector<Axiom> out;
    for (const auto& raw : names) {
        if (raw == "all") return all_axioms();
        bool matched = false;
        for (Axiom ax : all_axioms()) {
            const std::string full = axiom_name(ax);
            const std::string shorthand = full.substr(0, full.find('-'));
            if (raw == full || raw == shorthand) {
                out.push_back(ax);
                matched = true;
                break;
            }
        }
        if (!matched)
            throw invalid_input_error("unknown axiom '" + raw +
                                      "' (use A1..A6, full names, or 'all')");
    }
    return out;
}

}  // namespace detail

inline ordered_json cmd_axioms(const AnalysisOptions& o) {
    const Tolerance tol = make_tolerance(o);
    const bool from_graph = !o.graph_path.empty();
    if (from_graph == !o.input.empty())
        throw invalid_input_error("axioms: pass exactly one of --input (table) or --graph");

    const std::vector<Axiom> axioms = detail::parse_axiom_names(o.axioms);
    const AxiomCheckMode mode =
        o.exhaustive ? AxiomCheckMode::Exhaustive : AxiomCheckMode::Auto;

    AxiomReport rep;
    std::size_t universe = 0;
    std::vector<std::string> excluded;
    if (from_graph) {
        const UndirectedGraph g = load_graph(o.graph_path);
        universe = g.vertex_count();
        rep = check_axioms(graph_separation_relation(g), universe, axioms, o.trials, o.seed,
                           mode);
    } else {
        const EmbeddingTable t = load_analysis_table(o, &excluded);
        universe = t.size();
        rep = check_axioms(partial_orthogonality_relation(t, tol), universe, axioms, o.trials,
                           o.seed, mode);
    }

    ordered_json doc = make_report("axioms");
    auto& cfg = doc["config"];
    if (from_graph) {
        cfg["graph"] = o.graph_path;
    } else {
        cfg["input"] = o.input;
        cfg["format"] = o.format;
        cfg["normalize"] = !o.no_normalize;
        cfg["ortho_tol"] = o.ortho_tol;
        cfg["zero_tol"] = o.zero_tol;
        cfg["excluded_labels"] = excluded;
    }
    ordered_json names = ordered_json::array();
    for (Axiom ax : axioms) names.push_back(axiom_name(ax));
    cfg["axioms"] = std::move(names);
    cfg["trials"] = o.trials;
    cfg["seed"] = o.seed;
    cfg["mode"] = o.exhaustive ? "exhaustive" : "auto";

    ordered_json res;
    res["universe"] = universe;
    res["exhaustive"] = rep.exhaustive;
    res["tuples_checked"] = rep.tuples_checked;
    ordered_json per = ordered_json::object();
    for (Axiom ax : axioms) per[axiom_name(ax)] = rep.count(ax);
    res["violations_by_axiom"] = std::move(per);
    ordered_json viols = ordered_json::array();
    for (std::size_t i = 0; i < rep.violations.size() && i < kMaxReportedViolations; ++i) {
        const AxiomViolation& v = rep.violations[i];
        ordered_json e;
        e["tuple_index"] = v.tuple_index;
        e["axiom"] = axiom_name(v.axiom);
        e["A"] = detail::json_index_set(v.A);
        e["B"] = detail::json_index_set(v.B);
        e["C"] = detail::json_index_set(v.C);
        e["D"] = detail::json_index_set(v.D);
        viols.push_back(std::move(e));
    }
    res["violations"] = std::move(viols);
    res["violations_truncated"] = rep.violations.size() > kMaxReportedViolations;
    res["violation_count"] = rep.violations.size();
    res["passed"] = rep.passed();
    doc["result"] = std::move(res);
    return doc;
}

// ---------------------------------------------------------------------------
// ipe-build
// ---------------------------------------------------------------------------

inline ordered_json cmd_ipe_build(const AnalysisOptions& o) {
    const Tolerance tol = make_tolerance(o);
    if (o.graph_path.empty()) throw invalid_input_error("ipe-build: --graph is required");
    const UndirectedGraph g = load_graph(o.graph_path);
    const std::size_t n = g.vertex_count();

    double eps = 0.0;
    std::string source;
    ordered_json perfect;  // true / false / null (skipped above guard size)
    if (o.has_epsilon) {
        eps = o.epsilon;
        source = "given";
        if (n <= 14)
            perfect = is_perfect_perturbation(g, eps, tol).perfect;
        else
            perfect = nullptr;
    } else {
        eps = find_perfect_epsilon(g, {}, tol);
        source = "search";
        perfect = true;
    }

    const IpeMap map = construct_ipe(g, eps, o.normalize_rows);
    if (!o.map_out.empty()) save_table(ipe_table(map), o.map_out, "binary");

    ordered_json doc = make_report("ipe-build");
    auto& cfg = doc["config"];
    cfg["graph"] = o.graph_path;
    cfg["epsilon_source"] = source;
    cfg["normalize_rows"] = o.normalize_rows;
    cfg["ortho_tol"] = o.ortho_tol;
    cfg["map_out"] = o.map_out.empty() ? ordered_json(nullptr) : ordered_json(o.map_out);

    ordered_json res;
    res["n"] = n;
    res["epsilon"] = eps;
    res["perfect"] = perfect;
    res["gram"] = detail::json_mat(map.gram);
    doc["result"] = std::move(res);
    return doc;
}

// ---------------------------------------------------------------------------
// ipe-check
// ---------------------------------------------------------------------------

inline ordered_json cmd_ipe_check(const AnalysisOptions& o) {
    const Tolerance tol = make_tolerance(o);
    if (o.graph_path.empty()) throw invalid_input_error("ipe-check: --graph is required");
    // Norms are structural here: the rows are never normalized.
    const EmbeddingTable t = load_table(o.input, o.format);
    const UndirectedGraph g = load_graph(o.graph_path);

    const IpeVerification ver = verify_ipe(t, g, tol);

    ordered_json doc = make_report("ipe-check");
    auto& cfg = doc["config"];
    cfg["input"] = o.input;
    cfg["format"] = o.format;
    cfg["graph"] = o.graph_path;
    cfg["ortho_tol"] = o.ortho_tol;

    ordered_json res;
    res["n"] = t.size();
    res["triples_checked"] = ver.triples_checked;
    ordered_json mm = ordered_json::array();
    for (std::size_t i = 0; i < ver.mismatches.size() && i < kMaxReportedViolations; ++i) {
        const IpeMismatch& m = ver.mismatches[i];
        ordered_json e;
        e["i"] = m.i;
        e["j"] = m.j;
        e["conditioning"] = detail::json_index_set(m.c);
        e["orthogonal"] = m.orthogonal;
        e["separated"] = m.separated;
        mm.push_back(std::move(e));
    }
    res["mismatches"] = std::move(mm);
    res["mismatches_truncated"] = ver.mismatches.size() > kMaxReportedViolations;
    res["mismatch_count"] = ver.mismatches.size();
    res["faithful"] = ver.faithful();
    doc["result"] = std::move(res);
    return doc;
}

// ---------------------------------------------------------------------------
// ipe-reduce
// ---------------------------------------------------------------------------

inline ordered_json cmd_ipe_reduce(const AnalysisOptions& o) {
    const Tolerance tol = make_tolerance(o);
    // The plan needs exactly-unit vectors, so the rows are re-unitized here
    // regardless of flags (f32 storage rounds norms off unit).
    const EmbeddingTable t = load_table(o.input, o.format).normalized();
    const std::size_t n = t.size();
    const double eps = o.has_epsilon ? o.epsilon : 0.25;

    std::vector<IndexSet> boundaries(n);
    std::string source;
    if (!o.graph_path.empty()) {
        const UndirectedGraph g = load_graph(o.graph_path);
        if (g.vertex_count() != n)
            throw invalid_input_error("ipe-reduce: graph size does not match the table");
        for (std::size_t i = 0; i < n; ++i) boundaries[i] = g.neighbors(i);
        source = "graph";
    } else {
        for (std::size_t i = 0; i < n; ++i)
            boundaries[i] = enumerate_markov_boundaries(t, i, tol).front().members;
        source = "enumerated";
    }
    std::vector<std::size_t> sizes;
    for (const auto& b : boundaries) sizes.push_back(b.size());

    const ReductionPlan plan = reduction_plan(t.coords(), eps, sizes, o.seed);

    std::size_t k_eff = plan.k;
    bool capped = false;
    Mat reduced;
    if (o.bypass_identity) {
        k_eff = static_cast<std::size_t>(t.dim());
        reduced = t.coords();
    } else {
        if (o.cap_k > 0 && k_eff > o.cap_k) {
            k_eff = o.cap_k;
            capped = true;
        }
        reduced = jl_project(t.coords(), k_eff, o.seed);
    }

    const ReducedOrthReport rep = verify_reduced_orthogonality(reduced, boundaries, eps, tol);

    ordered_json doc = make_report("ipe-reduce");
    auto& cfg = doc["config"];
    cfg["input"] = o.input;
    cfg["format"] = o.format;
    cfg["graph"] = o.graph_path.empty() ? ordered_json(nullptr) : ordered_json(o.graph_path);
    cfg["epsilon"] = eps;
    cfg["seed"] = o.seed;
    cfg["cap_k"] = o.cap_k;
    cfg["bypass_identity"] = o.bypass_identity;
    cfg["ortho_tol"] = o.ortho_tol;
    cfg["zero_tol"] = o.zero_tol;

    ordered_json res;
    res["n"] = n;
    ordered_json pj;
    pj["k"] = plan.k;
    pj["epsilon_prime"] = plan.epsilon_prime;
    pj["lambda_min"] = plan.lambda_min;
    pj["lambda_max"] = plan.lambda_max;
    pj["r"] = plan.r;
    pj["big_c"] = plan.big_c;
    res["plan"] = std::move(pj);
    res["k_effective"] = k_eff;
    res["capped"] = capped;
    res["best_effort"] = capped || o.bypass_identity;
    res["boundaries_source"] = source;
    res["boundary_sizes"] = sizes;
    res["max_abs"] = rep.max_abs;
    res["pairs_checked"] = rep.pairs_checked;
    ordered_json viols = ordered_json::array();
    for (std::size_t i = 0; i < rep.violations.size() && i < kMaxReportedViolations; ++i) {
        ordered_json e;
        e["i"] = rep.violations[i].i;
        e["j"] = rep.violations[i].j;
        e["value"] = rep.violations[i].value;
        viols.push_back(std::move(e));
    }
    res["violations"] = std::move(viols);
    res["violations_truncated"] = rep.violations.size() > kMaxReportedViolations;
    res["violation_count"] = rep.violations.size();
    res["bound_holds"] = rep.violations.empty();
    doc["result"] = std::move(res);
    return doc;
}

}  // namespace olens
