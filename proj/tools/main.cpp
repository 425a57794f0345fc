#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "stnas/cost_model.hpp"
#include "stnas/evo_search.hpp"
#include "stnas/genome.hpp"
#include "stnas/rank_stats.hpp"
#include "stnas/snn_sim.hpp"

using json = nlohmann::json;
using namespace stnas;

namespace {

// Exit codes: 0 success, 2 validation failure, 3 infeasible band,
// 4 verification failure, 5 I/O error. CLI11 usage errors stay at 1.
enum ExitCode { kOk = 0, kValidation = 2, kInfeasible = 3, kVerification = 4, kIo = 5 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

SearchSpaceTier load_tier_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open tier file: " + path);
    json j;
    in >> j;
    auto range = [&](const char* key) {
        auto v = j.at(key);
        return GeneRange{v.at(0).get<int>(), v.at(1).get<int>(), v.at(2).get<int>()};
    };
    SearchSpaceTier tier;
    tier.name = j.value("name", std::string("custom"));
    tier.embed_range = range("embed");
    tier.ratio_range = range("ratio");
    tier.head_range = range("heads");
    tier.depth_range = range("depth");
    if (j.contains("param_band")) {
        tier.min_params = j["param_band"].at(0).get<std::uint64_t>();
        tier.max_params = j["param_band"].at(1).get<std::uint64_t>();
    } else {
        tier.min_params = 0;
        tier.max_params = std::numeric_limits<std::uint64_t>::max();
    }
    if (!tier.valid()) throw std::invalid_argument("tier file violates grid invariants: " + path);
    return tier;
}

SearchSpaceTier resolve_tier(const std::string& name, const std::string& file) {
    if (!file.empty()) return load_tier_file(file);
    const SearchSpaceTier* t = builtin_tier(name);
    if (!t) throw std::invalid_argument("unknown tier: " + name);
    return *t;
}

void echo_config(const std::string& command, const std::string& tier, const RunConfig& cfg) {
    std::cout << "# config: command=" << command << " tier=" << tier << " seed=" << cfg.seed
              << " timesteps=" << cfg.timesteps << " image=" << cfg.image_h << "x"
              << cfg.image_w << " channels=" << cfg.in_channels
              << " classes=" << cfg.num_classes << "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

json genome_record(const std::string& tier_name, const ArchGenome& g) {
    return json{{"tier", tier_name},
                {"embed_dim", g.embed_dim},
                {"mlp_ratio", g.mlp_ratio},
                {"num_heads", g.num_heads},
                {"depth", g.depth}};
}

int cmd_sample(const SearchSpaceTier& tier, const RunConfig& cfg, int count,
               const std::string& out_path) {
    echo_config("sample", tier.name, cfg);
    Rng rng(cfg.seed);
    std::string csv = genome_csv_header() + "\n";
    for (int i = 0; i < count; ++i)
        csv += genome_csv_row(tier.name, sample(tier, rng)) + "\n";
    std::cout << csv;
    if (!out_path.empty()) write_file(out_path, csv);
    return kOk;
}

int cmd_score(const ArchGenome& g, const std::string& tier_name,
              const std::string& tier_file, const RunConfig& cfg,
              const std::string& csv_path) {
    echo_config("score", tier_name.empty() ? "none" : tier_name, cfg);
    if (!tier_name.empty() || !tier_file.empty()) {
        SearchSpaceTier tier = resolve_tier(tier_name, tier_file);
        Verdict v = validate(g, tier);
        if (!v) {
            std::cerr << "invalid genome: " << v.reason << "\n";
            return kValidation;
        }
    } else if (g.embed_dim <= 0 || g.mlp_ratio <= 0 || g.num_heads <= 0 || g.depth <= 0 ||
               g.embed_dim % g.num_heads != 0) {
        std::cerr << "invalid genome: fields must be positive and embed_dim divisible by num_heads\n";
        return kValidation;
    }
    const auto flops = cost::flops_snn(g, cfg);
    const auto params = cost::param_count(g, cfg);
    std::cout << "sa_flops     " << flops.sa_flops << "\n"
              << "mlp_flops    " << flops.mlp_flops << "\n"
              << "ann_total    " << flops.ann_total << "\n"
              << "snn_total    " << flops.snn_total << "   (metric)\n"
              << "block_params " << params.block_params << "\n"
              << "spe_params   " << params.spe_params << "\n"
              << "head_params  " << params.head_params << "\n"
              << "total_params " << params.total << "\n";
    if (!csv_path.empty()) {
        std::string csv = std::string(cost::score_csv_header()) + "\n" +
                          std::to_string(flops.sa_flops) + "," + std::to_string(flops.mlp_flops) +
                          "," + std::to_string(flops.ann_total) + "," +
                          std::to_string(flops.snn_total) + "," + std::to_string(params.total) +
                          "\n";
        write_file(csv_path, csv);
    }
    return kOk;
}

int run_search_command(const SearchSpaceTier& tier, const RunConfig& cfg,
                       const evo::SearchConfig& scfg, bool exhaustive,
                       const std::string& out_dir) {
    echo_config(exhaustive ? "exhaustive" : "search", tier.name, cfg);
    evo::Candidate best;
    std::string history_csv = "generation,best_score,best_params\n";
    if (exhaustive) {
        best = evo::exhaustive_search(tier, cfg);
        history_csv += "0," + std::to_string(best.score) + "," + std::to_string(best.params) + "\n";
    } else {
        std::cout << "# search: population=" << scfg.population_size
                  << " generations=" << scfg.generations
                  << " tournament=" << scfg.tournament_size
                  << " mutation_prob=" << scfg.mutation_prob
                  << " crossover_prob=" << scfg.crossover_prob << " seed=" << scfg.seed << "\n";
        evo::SearchResult result = evo::run_search(tier, cfg, scfg);
        best = result.best;
        for (std::size_t gen = 0; gen < result.history.size(); ++gen)
            history_csv += std::to_string(gen) + "," + std::to_string(result.history[gen]) +
                           "," + std::to_string(result.history_params[gen]) + "\n";
        std::cout << "evaluated " << result.evaluated_count << " candidates\n";
    }
    std::cout << "best " << genome_csv_row(tier.name, best.genome) << "\n"
              << "score " << best.score << "\n"
              << "params " << best.params << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file(out_dir + "/best.json", genome_record(tier.name, best.genome).dump(2) + "\n");
        write_file(out_dir + "/history.csv", history_csv);
    }
    return kOk;
}

int cmd_verify(const std::vector<ArchGenome>& genomes, const std::string& tier_name,
               const RunConfig& cfg) {
    echo_config("verify", tier_name, cfg);
    bool all_ok = true;
    for (const auto& g : genomes) {
        sim::VerifyReport rep = sim::verify_flops(g, cfg);
        std::cout << "genome " << genome_csv_row(tier_name, g) << "\n" << rep.to_text();
        if (!rep.passed()) {
            std::cerr << "verification failed for genome " << genome_csv_row(tier_name, g) << "\n";
            all_ok = false;
        }
    }
    return all_ok ? kOk : kVerification;
}

int cmd_correlate(const std::string& input, const std::string& out_path, const RunConfig& cfg) {
    echo_config("correlate", "none", cfg);
    auto rows = read_csv(input);
    if (rows.size() < 3) {   // header plus at least 2 samples
        std::cerr << "need >= 2 samples in " << input << "\n";
        return kValidation;
    }
    const auto& header = rows[0];
    auto col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return int(i);
        return -1;
    };
    const int acc_col = col("accuracy");
    if (acc_col < 0) {
        std::cerr << "CSV missing accuracy column\n";
        return kValidation;
    }
    const int score_col = col("score");
    stats::Pairs pairs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        double score;
        if (score_col >= 0) {
            score = std::stod(row.at(score_col));
        } else {
            ArchGenome g{std::stoi(row.at(col("embed_dim"))), std::stoi(row.at(col("mlp_ratio"))),
                         std::stoi(row.at(col("num_heads"))), std::stoi(row.at(col("depth")))};
            score = double(cost::flops_snn(g, cfg).snn_total);
        }
        pairs.emplace_back(score, std::stod(row.at(acc_col)));
    }
    const double kendall = stats::kendall_tau(pairs);
    const double spearman = stats::spearman_rho(pairs);
    std::ostringstream report;
    report.precision(12);
    report << "kendall=" << kendall << "\nspearman=" << spearman << "\nn=" << pairs.size()
           << "\n";
    std::cout << report.str();
    if (!out_path.empty()) write_file(out_path, report.str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Training-free spiking-transformer architecture search"};
    app.require_subcommand(1);

    std::string tier_name = "tiny", tier_file;
    RunConfig cfg;
    std::vector<int> image_size;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--tier", tier_name, "Built-in tier: tiny, small, base");
        sub->add_option("--tier-file", tier_file, "Custom tier JSON file");
        sub->add_option("--seed", cfg.seed, "Random seed");
        sub->add_option("--timesteps", cfg.timesteps, "Simulation timesteps T")
            ->check(CLI::PositiveNumber);
        sub->add_option("--image-size", image_size, "Input height and width")->expected(2);
        sub->add_option("--channels", cfg.in_channels, "Input channels");
        sub->add_option("--classes", cfg.num_classes, "Output classes");
    };

    int count = 1;
    std::string out_path, csv_path, input_path;
    int g_embed = 0, g_ratio = 0, g_heads = 0, g_depth = 0;
    auto add_genome_flags = [&](CLI::App* sub) {
        sub->add_option("--embed", g_embed, "Embedding dimension");
        sub->add_option("--ratio", g_ratio, "MLP ratio");
        sub->add_option("--heads", g_heads, "Attention heads");
        sub->add_option("--depth", g_depth, "Transformer blocks");
    };

    evo::SearchConfig scfg;

    CLI::App* sc_sample = app.add_subcommand("sample", "Sample genomes from a tier");
    add_common(sc_sample);
    sc_sample->add_option("--count", count, "Number of genomes");
    sc_sample->add_option("--out", out_path, "Output CSV path");

    CLI::App* sc_score = app.add_subcommand("score", "Score one genome");
    add_common(sc_score);
    add_genome_flags(sc_score);
    sc_score->add_option("--csv", csv_path, "Optional CSV output path");
    tier_name.clear();   // score validates against a tier only when given

    CLI::App* sc_search = app.add_subcommand("search", "Evolutionary search over a tier");
    add_common(sc_search);
    sc_search->add_option("--population", scfg.population_size, "Population size");
    sc_search->add_option("--generations", scfg.generations, "Generations");
    sc_search->add_option("--tournament", scfg.tournament_size, "Tournament size");
    sc_search->add_option("--mutation-prob", scfg.mutation_prob, "Per-gene mutation probability");
    sc_search->add_option("--crossover-prob", scfg.crossover_prob, "Per-child crossover probability");
    sc_search->add_option("--max-resamples", scfg.max_rejection_resamples,
                          "Rejection-sampling budget per slot");
    sc_search->add_option("--out", out_path, "Output directory for best.json and history.csv");

    CLI::App* sc_exh = app.add_subcommand("exhaustive", "Enumerate a tier exactly");
    add_common(sc_exh);
    sc_exh->add_option("--out", out_path, "Output directory");

    CLI::App* sc_verify = app.add_subcommand("verify", "Check simulator MAC identities");
    add_common(sc_verify);
    add_genome_flags(sc_verify);
    sc_verify->add_option("--count", count, "Random genomes to verify when no genome given");

    CLI::App* sc_corr = app.add_subcommand("correlate", "Rank correlation from a CSV");
    add_common(sc_corr);
    sc_corr->add_option("--input", input_path, "Input CSV")->required();
    sc_corr->add_option("--out", out_path, "Report output path");

    CLI11_PARSE(app, argc, argv);

    if (image_size.size() == 2) {
        cfg.image_h = image_size[0];
        cfg.image_w = image_size[1];
    }
    if (tier_name.empty() && tier_file.empty() && !sc_score->parsed()) tier_name = "tiny";

    try {
        if (sc_sample->parsed()) {
            if (tier_name.empty()) tier_name = "tiny";
            return cmd_sample(resolve_tier(tier_name, tier_file), cfg, count, out_path);
        }
        if (sc_score->parsed()) {
            return cmd_score({g_embed, g_ratio, g_heads, g_depth}, tier_name, tier_file, cfg,
                             csv_path);
        }
        if (sc_search->parsed() || sc_exh->parsed()) {
            if (tier_name.empty()) tier_name = "tiny";
            scfg.seed = cfg.seed;
            return run_search_command(resolve_tier(tier_name, tier_file), cfg, scfg,
                                      sc_exh->parsed(), out_path);
        }
        if (sc_verify->parsed()) {
            std::vector<ArchGenome> genomes;
            std::string label = "custom";
            if (g_embed > 0) {
                genomes.push_back({g_embed, g_ratio, g_heads, g_depth});
            } else {
                if (tier_name.empty()) tier_name = "tiny";
                SearchSpaceTier tier = resolve_tier(tier_name, tier_file);
                label = tier.name;
                Rng rng(cfg.seed);
                for (int i = 0; i < count; ++i) genomes.push_back(sample(tier, rng));
            }
            return cmd_verify(genomes, label, cfg);
        }
        if (sc_corr->parsed()) return cmd_correlate(input_path, out_path, cfg);
    } catch (const evo::InfeasibleBand& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInfeasible;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    }
    return kOk;
}
