#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hypising/families.hpp"
#include "hypising/geometry.hpp"
#include "hypising/gibbs.hpp"
#include "hypising/manifest.hpp"
#include "hypising/svg.hpp"
#include "hypising/tiling.hpp"
#include "hypising/treestates.hpp"

// Experiment driver: builds geodesic families and lattices, runs the Ising
// experiments, and renders disk scenes.  Every command is a pure function of
// (flags, input files, seed); a manifest sits next to each output.
//
// Exit codes: 0 ok, 1 usage/config, 2 verification/bound failure,
// 3 runtime data inconsistency.

namespace {

using namespace hypising;

struct OutputGuard {
    std::vector<std::string> created;
    bool commit = false;
    ~OutputGuard() {
        if (commit) return;
        for (const std::string& path : created) std::remove(path.c_str());
    }
    void write_text(const std::string& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << text;
        created.push_back(path);
    }
};

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    if (out.empty()) throw CLI::ValidationError("empty numeric grid");
    return out;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

int nearest_vertex(const lat::LatticeGraph& g, const geom::ModelPoint& target) {
    geom::ModelPoint t = geom::to_halfplane(target);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int v = 0; v < g.vertex_count(); ++v) {
        double d = geom::point_distance(geom::to_halfplane(g.coords[v]), t);
        if (d < best_d) {
            best_d = d;
            best = v;
        }
    }
    return best;
}

// --------------------------------------------------------------------------

int cmd_family(double alpha, double eta, int depth, int construction, double threshold,
               const std::string& out, const std::string& svg_out) {
    nlohmann::json config{{"alpha", alpha},       {"eta", eta},
                          {"depth", depth},       {"construction", construction},
                          {"threshold", threshold}, {"out", out},
                          {"svg", svg_out}};
    RunManifest manifest = RunManifest::make("family", config, 0, {});
    OutputGuard guard;

    fam::SignedGeodesicFamily family = construction == 1
                                           ? fam::construct1(alpha, depth)
                                           : fam::construct2(alpha, eta, depth);
    double thr = threshold > 0 ? threshold : std::max(alpha, eta) * (1 + 1e-6);
    fam::VerifyReport rep = fam::verify_geodesical(family, thr);

    nlohmann::json fj = fam::family_to_json(family);
    fj["manifest"] = manifest.run_id;
    guard.write_text(out, fj.dump(2) + "\n");
    nlohmann::json vj{{"pass", rep.pass},
                      {"max_pairwise_R", rep.max_pairwise_r},
                      {"crossings", rep.crossings},
                      {"threshold", thr},
                      {"worst_pair", {rep.worst_i, rep.worst_j}},
                      {"manifest", manifest.run_id}};
    guard.write_text(out + ".verify.json", vj.dump(2) + "\n");
    if (!svg_out.empty()) guard.write_text(svg_out, svg::render_family(family));
    manifest.write(out + ".manifest.json");
    guard.created.push_back(out + ".manifest.json");
    guard.commit = true;

    std::cout << "family: " << family.geodesics.size() << " geodesics, max pairwise R "
              << rep.max_pairwise_r << (rep.pass ? " (pass)" : " (FAIL)") << "\n";
    return rep.pass ? 0 : 2;
}

int cmd_ising(const std::string& experiment, int p, int q, int radius, int generations,
              const std::string& family_file, const std::string& beta_csv,
              const std::string& m_csv, int sweeps, int burn_in, int replicas,
              std::uint64_t seed, int measure_every, const std::string& dynamics, int tree_n,
              int tree_depth, int tree_k, int inner_depth, double probe_radius,
              const std::string& out) {
    nlohmann::json config{{"experiment", experiment}, {"p", p},
                          {"q", q},                   {"radius", radius},
                          {"generations", generations}, {"family", family_file},
                          {"beta_grid", beta_csv},    {"m_grid", m_csv},
                          {"sweeps", sweeps},         {"burn_in", burn_in},
                          {"replicas", replicas},     {"seed", seed},
                          {"measure_every", measure_every}, {"dynamics", dynamics},
                          {"tree_n", tree_n},         {"tree_depth", tree_depth},
                          {"tree_k", tree_k},         {"inner_depth", inner_depth},
                          {"probe_radius", probe_radius}, {"out", out}};
    std::vector<std::string> inputs;
    if (!family_file.empty()) inputs.push_back(family_file);
    RunManifest manifest = RunManifest::make("ising", config, seed, inputs);
    OutputGuard guard;

    mc::SamplerConfig cfg;
    cfg.sweeps = sweeps;
    cfg.burn_in = burn_in;
    cfg.replicas = replicas;
    cfg.seed = seed;
    cfg.measure_every = measure_every;
    cfg.dynamics = dynamics == "heat_bath" ? mc::Dynamics::heat_bath : mc::Dynamics::metropolis;
    std::vector<double> betas = parse_grid(beta_csv);

    std::vector<mc::StatRow> rows;
    if (experiment == "tree-stability") {
        auto g = lat::build_cayley_tree(tree_n, tree_depth);
        auto cov = tree::left_greedy_covering(g, tree_k);
        auto dimers = tree::middle_dimers(cov);
        rows = tree::tree_stability_experiment(g, dimers, cfg, inner_depth, betas,
                                               manifest.run_id);
    } else {
        auto family = fam::family_from_json(load_json(family_file));
        int gens = generations > 0 ? generations : radius + 3;
        auto g = lat::build_tiling(p, q, gens);
        if (experiment == "rigidity") {
            auto box = lat::graph_ball(g, nearest_vertex(g, geom::ModelPoint::disk(0, 0)), radius);
            auto res = mc::rigidity_experiment(g, family, box, cfg, parse_grid(m_csv), betas,
                                               manifest.run_id);
            rows = res.rows;
        } else if (experiment == "phase") {
            if (family.geodesics.size() < 2)
                throw CLI::ValidationError("phase experiment needs at least two geodesics");
            auto cp = geom::common_perpendicular(family.geodesics[0], family.geodesics[1]);
            geom::ModelPoint Z = geom::hyperbolic_midpoint(cp.foot1, cp.foot2);
            auto box = lat::graph_ball(g, nearest_vertex(g, Z), radius);
            rows = mc::phase_probe(g, family, box, cfg, Z, probe_radius, betas, manifest.run_id);
        } else {
            throw CLI::ValidationError("unknown experiment: " + experiment);
        }
    }
    std::ostringstream csv;
    mc::write_stats_csv(csv, rows);
    guard.write_text(out, csv.str());
    manifest.write(out + ".manifest.json");
    guard.created.push_back(out + ".manifest.json");
    guard.commit = true;
    std::cout << "ising: wrote " << rows.size() << " rows to " << out << "\n";
    return 0;
}

int cmd_tree(int n, int depth, int k, int l, int n_offset, int max_interior, int anchor,
             const std::string& out_covering, const std::string& out_ratio) {
    nlohmann::json config{{"n", n}, {"depth", depth},      {"k", k},
                          {"l", l}, {"n_offset", n_offset}, {"max_interior", max_interior},
                          {"anchor", anchor}, {"out_covering", out_covering},
                          {"out_ratio", out_ratio}};
    RunManifest manifest = RunManifest::make("tree", config, 0, {});
    OutputGuard guard;

    auto g = lat::build_cayley_tree(n, depth);
    auto cov = tree::left_greedy_covering(g, k);
    bool offset = l > 0 || n_offset > 0;
    tree::DimerSet dimers = offset ? tree::offset_dimers(cov, l, n_offset)
                                   : tree::middle_dimers(cov);
    auto rep = tree::peierls_ratio(g, dimers, max_interior, anchor);

    double bound = offset ? 1.0 / (n_offset + 1) : 1.0 / ((k - 1) / 2 + 1);
    nlohmann::json cj = tree::covering_to_json(cov, dimers);
    cj["manifest"] = manifest.run_id;
    guard.write_text(out_covering, cj.dump(2) + "\n");
    std::ostringstream csv;
    tree::write_ratio_csv(csv, rep);
    guard.write_text(out_ratio, csv.str());
    manifest.write(out_ratio + ".manifest.json");
    guard.created.push_back(out_ratio + ".manifest.json");
    guard.commit = true;

    std::cout << "tree: sup ratio " << rep.sup_ratio << " over " << rep.enumerated
              << " enclosures (bound " << bound << ")\n";
    if (rep.sup_ratio >= 0.5)
        std::cout << "warning: a contour crosses dimers on at least half its bonds; "
                     "the Peierls condition fails for this dimer set\n";
    if (k > 1 && rep.sup_ratio > bound + 1e-12) {
        std::cout << "bound violation: sup ratio exceeds " << bound << "\n";
        return 2;
    }
    return 0;
}

int cmd_render(const std::string& input, const std::string& out) {
    OutputGuard guard;
    nlohmann::json j = load_json(input);
    std::string svg_text;
    if (j.contains("construction")) {
        svg_text = svg::render_family(fam::family_from_json(j));
    } else if (j.contains("kind")) {
        auto g = lat::graph_from_json(j);
        svg_text = svg::render_graph(g);
    } else if (j.contains("chains")) {
        int k = j.at("k").get<int>();
        // the covering file stands alone; regenerate a tree big enough to
        // hold its vertex ids
        int max_vertex = 0;
        for (const auto& c : j.at("chains"))
            for (int v : c.get<std::vector<int>>()) max_vertex = std::max(max_vertex, v);
        int n = 2, depth = 1;
        while (true) {
            long count = 1, level = n + 1;
            for (int d = 1; d <= depth; ++d) {
                count += level;
                level *= n;
            }
            if (count > max_vertex) break;
            ++depth;
        }
        auto g = lat::build_cayley_tree(n, depth);
        auto cov = tree::left_greedy_covering(g, k);
        tree::DimerSet d;
        d.tree = &g;
        d.provenance = j.at("provenance").get<std::string>();
        for (const auto& e : j.at("dimers"))
            d.dimers.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
        svg_text = svg::render_covering(g, cov, d);
    } else {
        throw std::runtime_error("unrecognized input format: " + input);
    }
    guard.write_text(out, svg_text);
    guard.commit = true;
    std::cout << "render: wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geodesic families, hyperbolic tessellations and Ising interfaces"};
    app.require_subcommand(1);

    auto* fam_cmd = app.add_subcommand("family", "build and verify a geodesic family");
    int construction = 1;
    double alpha = 0.05, eta = 0.05, threshold = -1;
    int depth = 1;
    std::string fam_out, fam_svg;
    fam_cmd->add_option("--construction", construction)->check(CLI::Range(1, 2));
    fam_cmd->add_option("--alpha", alpha)->required()->check(CLI::Range(1e-12, 0.9999999));
    fam_cmd->add_option("--eta", eta)->check(CLI::Range(1e-12, 0.9999999));
    fam_cmd->add_option("--depth", depth)->required()->check(CLI::Range(0, 64));
    fam_cmd->add_option("--threshold", threshold);
    fam_cmd->add_option("--out", fam_out)->required();
    fam_cmd->add_option("--svg", fam_svg);

    auto* ising_cmd = app.add_subcommand("ising", "run an Ising experiment");
    std::string experiment = "rigidity", family_file, beta_csv = "0.5,1.0,1.5,2.0";
    std::string m_csv = "0.5,1.0,2.0", dynamics = "metropolis", ising_out;
    int p = 3, q = 7, radius = 5, generations = 0, sweeps = 5000, burn_in = 500, replicas = 4;
    int measure_every = 10, tree_n = 2, tree_depth = 8, tree_k = 5, inner_depth = 5;
    double probe_radius = 1.0;
    std::uint64_t seed = 1;
    ising_cmd->add_option("--experiment", experiment);
    ising_cmd->add_option("--p", p)->check(CLI::Range(3, 64));
    ising_cmd->add_option("--q", q)->check(CLI::Range(3, 64));
    ising_cmd->add_option("--radius", radius)->check(CLI::Range(0, 32));
    ising_cmd->add_option("--generations", generations);
    ising_cmd->add_option("--family", family_file);
    ising_cmd->add_option("--beta-grid", beta_csv);
    ising_cmd->add_option("--m-grid", m_csv);
    ising_cmd->add_option("--sweeps", sweeps)->check(CLI::Range(0, 100000000));
    ising_cmd->add_option("--burn-in", burn_in)->check(CLI::Range(0, 100000000));
    ising_cmd->add_option("--replicas", replicas)->check(CLI::Range(1, 4096));
    ising_cmd->add_option("--seed", seed);
    ising_cmd->add_option("--measure-every", measure_every)->check(CLI::Range(1, 1000000));
    ising_cmd->add_option("--dynamics", dynamics);
    ising_cmd->add_option("--tree-n", tree_n);
    ising_cmd->add_option("--tree-depth", tree_depth);
    ising_cmd->add_option("--tree-k", tree_k);
    ising_cmd->add_option("--inner-depth", inner_depth);
    ising_cmd->add_option("--probe-radius", probe_radius);
    ising_cmd->add_option("--out", ising_out)->required();

    auto* tree_cmd = app.add_subcommand("tree", "coverings and Peierls ratios on Cayley trees");
    int tn = 2, tdepth = 8, tk = 5, tl = 0, tnoff = 0, max_interior = 12, anchor = 0;
    std::string cov_out = "covering.json", ratio_out = "ratios.csv";
    tree_cmd->add_option("--n", tn)->check(CLI::Range(2, 16));
    tree_cmd->add_option("--depth", tdepth)->required()->check(CLI::Range(1, 24));
    tree_cmd->add_option("--k", tk)->required()->check(CLI::Range(1, 23));
    tree_cmd->add_option("--l", tl);
    tree_cmd->add_option("--n-offset", tnoff);
    tree_cmd->add_option("--max-interior", max_interior)->check(CLI::Range(1, 24));
    tree_cmd->add_option("--anchor", anchor);
    tree_cmd->add_option("--out-covering", cov_out);
    tree_cmd->add_option("--out-ratio", ratio_out);

    auto* render_cmd = app.add_subcommand("render", "render a data file to SVG");
    std::string render_in, render_out;
    render_cmd->add_option("--input", render_in)->required();
    render_cmd->add_option("--out", render_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (fam_cmd->parsed())
            return cmd_family(alpha, eta, depth, construction, threshold, fam_out, fam_svg);
        if (ising_cmd->parsed())
            return cmd_ising(experiment, p, q, radius, generations, family_file, beta_csv, m_csv,
                             sweeps, burn_in, replicas, seed, measure_every, dynamics, tree_n,
                             tree_depth, tree_k, inner_depth, probe_radius, ising_out);
        if (tree_cmd->parsed())
            return cmd_tree(tn, tdepth, tk, tl, tnoff, max_interior, anchor, cov_out, ratio_out);
        if (render_cmd->parsed()) return cmd_render(render_in, render_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const mc::InconsistentBoundary& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const lat::DegenerateIncidence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
