// Command-line surface: game analysis, experiment runs, growth-rate checks.
//
//   bobw analyze-game <game.json>
//   bobw run <config.json> [--out DIR] [--workers N]
//   bobw slope-check <artifact.json> --model {logT|sqrtT|T23|linear}
//
// Exit codes: 0 success, 2 config or classification refusal, 1 internal fault.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bobw/harness.hpp"
#include "bobw/pm/analysis.hpp"
#include "bobw/pm/game.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bobw::env::config_error("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw bobw::env::config_error(std::string("JSON parse error in ") + path + ": " + e.what());
    }
}

int cmd_analyze(const std::string& path) {
    const auto game = bobw::pm::parse_game(load_json(path));
    const auto analysis = bobw::pm::analyze(game);
    std::cout << bobw::pm::analysis_to_json(analysis).dump(2) << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int workers) {
    const auto cfg = bobw::harness::parse_config(load_json(config_path));
    const auto t0 = std::chrono::steady_clock::now();
    const auto artifact = bobw::harness::run(cfg, workers);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();

    std::filesystem::create_directories(out_dir);
    const auto j = bobw::harness::artifact_to_json(artifact);
    {
        std::ofstream out(out_dir + "/artifact.json");
        out << j.dump(2) << "\n";
    }
    {
        std::ofstream csv(out_dir + "/regret.csv");
        csv << "t,mean,q10,median,q90\n";
        for (std::size_t i = 0; i < artifact.checkpoints.size(); ++i)
            csv << artifact.checkpoints[i] << "," << artifact.mean[i] << "," << artifact.q10[i]
                << "," << artifact.median[i] << "," << artifact.q90[i] << "\n";
    }
    {
        // wall-clock lives in a sidecar so artifact.json stays reproducible
        nlohmann::json timing{{"wall_clock_seconds", secs}, {"workers", workers}};
        std::ofstream out(out_dir + "/timing.json");
        out << timing.dump(2) << "\n";
    }
    std::cout << "wrote " << out_dir << "/artifact.json ("
              << artifact.replications.size() << " replications, final mean regret "
              << artifact.mean.back() << ", " << secs << " s)\n";
    return 0;
}

int cmd_slope(const std::string& artifact_path, const std::string& model) {
    const auto j = load_json(artifact_path);
    bobw::harness::validate_artifact(j);
    const auto checkpoints = j.at("checkpoints").get<std::vector<long>>();
    const auto mean = j.at("aggregate").at("mean").get<std::vector<double>>();
    const auto report =
        bobw::harness::slope_check(checkpoints, mean, bobw::harness::parse_model(model));
    std::cout << bobw::harness::slope_report_to_json(report).dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"best-of-both-worlds partial monitoring and semi-bandit lab"};
    app.require_subcommand(1);

    std::string game_path;
    auto* analyze = app.add_subcommand("analyze-game", "classify a game file and print the analysis");
    analyze->add_option("file", game_path, "game JSON file")->required();

    std::string config_path, out_dir = ".";
    int workers = 0;
    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "experiment config JSON")->required();
    run->add_option("--out", out_dir, "output directory (default .)");
    run->add_option("--workers", workers,
                    "parallel replications (default: BOBW_WORKERS or hardware)");

    std::string artifact_path, model = "logT";
    auto* slope = app.add_subcommand("slope-check", "fit a growth model to a run artifact");
    slope->add_option("artifact", artifact_path, "artifact JSON from `run`")->required();
    slope->add_option("--model", model, "logT|sqrtT|T23|linear")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return cmd_analyze(game_path);
        if (*run) return cmd_run(config_path, out_dir, workers);
        if (*slope) return cmd_slope(artifact_path, model);
    } catch (const bobw::env::config_error& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const bobw::pm::game_error& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
