#include "zl/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"zlab: zero-energy resolvent experiments"};
    app.require_subcommand(1);

    std::string config, out;
    int workers = 1;
    std::int64_t seed = -1;
    auto* run = app.add_subcommand("run", "run the scenarios of a configuration");
    run->add_option("--config", config, "configuration file (YAML)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory (overrides output.dir)");
    run->add_option("--workers", workers, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "seed (overrides the configuration)")->check(CLI::NonNegativeNumber);

    std::string scenario;
    auto* desc = app.add_subcommand("describe", "explain what a scenario checks");
    desc->add_option("scenario", scenario, "scenario name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*desc) {
            std::cout << zl::describe(scenario);
            return 0;
        }
        auto cfg = zl::load_config(config);
        if (seed >= 0) cfg.seed = std::uint64_t(seed);
        const std::string dir = out.empty() ? cfg.out_dir : out;
        auto sum = zl::run(cfg, dir, workers);
        for (const auto& r : sum.results) {
            if (!r.error.empty()) std::cout << "FAIL " << r.name << ": " << r.error << "\n";
            for (const auto& c : r.checks)
                std::cout << (c.pass ? "pass " : "FAIL ") << c.scenario << "/" << c.id << "  " << zl::fmt_num(c.value)
                          << " " << c.comparison << " " << zl::fmt_num(c.threshold) << "\n";
        }
        std::cout << "summary: " << dir << "/summary.json\n";
        return sum.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "zlab: " << e.what() << "\n";
        return 2;
    }
}
