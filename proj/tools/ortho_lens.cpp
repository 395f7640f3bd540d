// ortho-lens: partial-orthogonality analysis of embedding tables.
//
// Every report is deterministic for a fixed command line: byte-identical
// JSON across runs. Wall-clock timing goes to stderr only.

#include <chrono>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "olens/analysis.hpp"

namespace {

struct Ctx {
    CLI::App* cmd = nullptr;
    olens::AnalysisOptions opts;
    std::string output;
    std::string sweep_spec;
    CLI::Option* eps_opt = nullptr;
    std::function<olens::ordered_json(olens::AnalysisOptions&)> run;
};

void add_table_flags(CLI::App* cmd, olens::AnalysisOptions& o, bool required_input = true) {
    auto* in = cmd->add_option("--input", o.input, "embedding table file");
    if (required_input) in->required();
    cmd->add_option("--format", o.format, "table format (default text)")
        ->check(CLI::IsMember({"text", "binary"}));
    cmd->add_flag("--no-normalize", o.no_normalize, "keep raw vector norms");
    cmd->add_option("--exclude", o.exclude_path, "file with one label per line to drop");
}

void add_tol_flags(CLI::App* cmd, olens::AnalysisOptions& o) {
    cmd->add_option("--tol", o.ortho_tol, "orthogonality tolerance");
    cmd->add_option("--zero-tol", o.zero_tol, "degeneracy tolerance");
}

std::size_t parse_size(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw olens::invalid_input_error(std::string("cannot parse ") + what + " '" + s + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partial-orthogonality structure of embedding tables"};
    app.require_subcommand(1);
    app.set_version_flag("--version", olens::kToolVersion);

    std::deque<Ctx> ctxs;
    auto add = [&](const char* name, const char* desc,
                   olens::ordered_json (*fn)(const olens::AnalysisOptions&)) -> Ctx& {
        ctxs.emplace_back();
        Ctx& c = ctxs.back();
        c.cmd = app.add_subcommand(name, desc);
        c.cmd->add_option("--output", c.output, "write the JSON report here (default stdout)");
        c.run = [fn](olens::AnalysisOptions& o) { return fn(o); };
        return c;
    };

    {
        Ctx& c = add("gmb", "randomized generalized boundary search", olens::cmd_gmb);
        auto& o = c.opts;
        add_table_flags(c.cmd, o);
        add_tol_flags(c.cmd, o);
        c.cmd->add_option("--target", o.target, "target label")->required();
        c.cmd->add_option("--seed", o.seed, "RNG seed (default 0)");
        c.cmd->add_option("--filter-threshold", o.filter_threshold,
                          "drop |cos| >= threshold near-duplicates (default 0.9)");
        c.cmd->add_option("--nr", o.n_r, "conditioning rounds (default 10)");
        c.cmd->add_option("--dr", o.d_r, "conditioning set size (default 50)");
        c.cmd->add_option("--topk", o.top_k, "candidate pool size (default 10)");
        c.cmd->add_option("--gmb-tol", o.gmb_tol, "qualification threshold (default 0.02)");
        c.cmd->add_option("--sweep-k", c.sweep_spec, "also sweep pool sizes, e.g. 1..10");
    }
    {
        Ctx& c = add("mb-exact", "exhaustive minimal Markov boundaries", olens::cmd_mb_exact);
        auto& o = c.opts;
        add_table_flags(c.cmd, o);
        add_tol_flags(c.cmd, o);
        c.cmd->add_option("--target", o.target, "target label")->required();
        c.cmd->add_option("--max-size", o.max_size, "cap boundary cardinality (0 = none)");
    }
    {
        Ctx& c = add("condition-matrix", "category-pair similarity reduction z-matrix",
                     olens::cmd_condition_matrix);
        auto& o = c.opts;
        add_table_flags(c.cmd, o);
        add_tol_flags(c.cmd, o);
        c.cmd->add_option("--categories", o.categories_path,
                          "JSON object: category label -> member labels")
            ->required();
        c.cmd->add_option("--seed", o.seed, "RNG seed for the null pairs (default 0)");
        c.cmd->add_option("--null-samples", o.null_samples,
                          "null pair count per invocation (default 10000)");
    }
    {
        Ctx& c = add("rank", "neighbor ranking before/after random conditioning",
                     olens::cmd_rank);
        auto& o = c.opts;
        add_table_flags(c.cmd, o);
        add_tol_flags(c.cmd, o);
        c.cmd->add_option("--target", o.target, "target label")->required();
        c.cmd->add_option("--seed", o.seed, "RNG seed (default 0)");
        c.cmd->add_option("--nr", o.n_r, "conditioning rounds (default 10)");
        c.cmd->add_option("--dr", o.d_r, "conditioning set size, 0 allowed (default 50)");
        c.cmd->add_option("--topk", o.top_k, "list length (default 10)");
    }
    {
        Ctx& c = add("angles", "principal angles against random baselines", olens::cmd_angles);
        auto& o = c.opts;
        add_table_flags(c.cmd, o);
        add_tol_flags(c.cmd, o);
        c.cmd->add_option("--boundary", o.boundary, "boundary labels")
            ->required()
            ->delimiter(',');
        c.cmd->add_option("--reference", o.reference, "reference labels")
            ->required()
            ->delimiter(',');
        c.cmd->add_option("--seed", o.seed, "RNG seed (default 0)");
        c.cmd->add_option("--random-baselines", o.random_baselines,
                          "random subspace draws (default 50)");
    }
    {
        Ctx& c = add("axioms", "graphoid axiom check on a table or graph", olens::cmd_axioms);
        auto& o = c.opts;
        // exact-arithmetic regime: axiom checks are threshold-sensitive and
        // are specified against the core-library tolerances
        o.ortho_tol = 1e-8;
        o.zero_tol = 1e-10;
        add_table_flags(c.cmd, o, /*required_input=*/false);
        add_tol_flags(c.cmd, o);
        c.cmd->add_option("--graph", o.graph_path, "check graph separation instead of a table");
        c.cmd->add_option("--axioms", o.axioms, "subset like A1,A4 (default all)")
            ->delimiter(',');
        c.cmd->add_option("--trials", o.trials, "sampled tuples (default 1000)");
        c.cmd->add_option("--seed", o.seed, "RNG seed (default 0)");
        c.cmd->add_flag("--exhaustive", o.exhaustive,
                        "force full tuple enumeration (refused above 8 elements)");
    }
    {
        Ctx& c = add("ipe-build", "construct an exact independence-preserving map",
                     olens::cmd_ipe_build);
        auto& o = c.opts;
        c.cmd->add_option("--graph", o.graph_path, "undirected graph file")->required();
        c.eps_opt = c.cmd->add_option("--epsilon", o.epsilon,
                                      "perturbation factor (default: searched)");
        c.cmd->add_option("--map-out", o.map_out, "write the map here (binary table format)");
        c.cmd->add_flag("--normalize", o.normalize_rows, "unit-normalize the map rows");
        add_tol_flags(c.cmd, o);
    }
    {
        Ctx& c = add("ipe-check", "verify a map against graph separation",
                     olens::cmd_ipe_check);
        auto& o = c.opts;
        c.cmd->add_option("--input", o.input, "map table file")->required();
        c.cmd->add_option("--format", o.format, "table format (default text)")
            ->check(CLI::IsMember({"text", "binary"}));
        c.cmd->add_option("--graph", o.graph_path, "undirected graph file")->required();
        add_tol_flags(c.cmd, o);
    }
    {
        Ctx& c = add("ipe-reduce", "dimension-reduce a map and verify the epsilon bound",
                     olens::cmd_ipe_reduce);
        auto& o = c.opts;
        c.cmd->add_option("--input", o.input, "map table file")->required();
        c.cmd->add_option("--format", o.format, "table format (default text)")
            ->check(CLI::IsMember({"text", "binary"}));
        c.cmd->add_option("--graph", o.graph_path,
                          "graph whose neighborhoods are the boundaries (default: enumerate)");
        c.eps_opt = c.cmd->add_option("--epsilon", o.epsilon, "target bound (default 0.25)");
        c.cmd->add_option("--seed", o.seed, "RNG seed (default 0)");
        c.cmd->add_option("--cap-k", o.cap_k, "best-effort cap on the plan dimension");
        c.cmd->add_flag("--bypass-identity", o.bypass_identity,
                        "skip the projection (identity map)");
        add_tol_flags(c.cmd, o);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    Ctx* active = nullptr;
    for (auto& c : ctxs)
        if (c.cmd->parsed()) active = &c;
    if (!active) {
        std::cerr << "error: no subcommand\n";
        return 2;
    }
    if (active->eps_opt) active->opts.has_epsilon = active->eps_opt->count() > 0;

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (!active->sweep_spec.empty()) {
            active->opts.sweep = true;
            const auto dots = active->sweep_spec.find("..");
            if (dots == std::string::npos) {
                active->opts.sweep_lo = active->opts.sweep_hi =
                    parse_size(active->sweep_spec, "--sweep-k");
            } else {
                active->opts.sweep_lo =
                    parse_size(active->sweep_spec.substr(0, dots), "--sweep-k");
                active->opts.sweep_hi =
                    parse_size(active->sweep_spec.substr(dots + 2), "--sweep-k");
            }
        }

        const olens::ordered_json doc = active->run(active->opts);
        std::string text = doc.dump(2);
        text += '\n';
        if (active->output.empty()) {
            std::fwrite(text.data(), 1, text.size(), stdout);
        } else {
            std::ofstream out(active->output, std::ios::binary);
            if (!out)
                throw olens::invalid_input_error("cannot open output '" + active->output + "'");
            out.write(text.data(), static_cast<std::streamsize>(text.size()));
        }
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        std::fprintf(stderr, "elapsed_seconds %.3f\n", dt.count());
        return 0;
    } catch (const olens::guard_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const olens::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const olens::invalid_input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const olens::not_found_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const olens::construction_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
