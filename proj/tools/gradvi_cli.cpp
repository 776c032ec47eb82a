// gradvi: solve, compare and diagnose gradient-constrained problems from a JSON config.

#include "gradvi/config.hpp"
#include "gradvi/error.hpp"
#include "gradvi/runner.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::vector<double> parse_h_list(const std::string& text) {
    std::vector<double> hs;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) throw gradvi::Error("--h-list: empty entry");
        hs.push_back(gradvi::parse_spacing(nlohmann::json(item), "--h-list"));
    }
    if (hs.empty()) throw gradvi::Error("--h-list: no entries");
    return hs;
}

void print_summary(const gradvi::RunOutcome& out) {
    for (const auto& c : out.report["checks"]) {
        std::printf("%-4s %-34s %.6g (limit %.6g)\n", c["pass"].get<bool>() ? "ok" : "FAIL",
                    c["name"].get<std::string>().c_str(), c["value"].get<double>(), c["limit"].get<double>());
    }
    std::printf("%s -> %s\n", out.passed ? "passed" : "FAILED", out.run_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient-constrained variational inequality solvers"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = "runs";
    std::string h_list;
    bool quiet = false;

    const std::pair<const char*, gradvi::Command> commands[] = {
        {"solve", gradvi::Command::Solve},
        {"equivalence", gradvi::Command::Equivalence},
        {"vector", gradvi::Command::Vector},
        {"regularity", gradvi::Command::Regularity},
        {"distance", gradvi::Command::Distance},
    };
    const char* help[] = {
        "run the formulation named in the config",
        "obstacle and gradient solvers side by side",
        "vector problem via the scalar reduction, plus a direct solve for ball constraints",
        "second-difference bound under mesh refinement",
        "gauge distance to the boundary",
    };
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        auto* sub = app.add_subcommand(commands[i].first, help[i]);
        sub->add_option("--config", config, "problem config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output root")->capture_default_str();
        sub->add_option("--h-list", h_list, "comma-separated spacings, e.g. 1/64,1/128");
        sub->add_flag("--quiet", quiet, "no summary on stdout");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        gradvi::Command command = gradvi::Command::Solve;
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (subs[i]->parsed()) command = commands[i].second;
        }
        gradvi::RunOptions options;
        options.out_dir = out_dir;
        if (!h_list.empty()) options.h_list = parse_h_list(h_list);
        const auto spec = gradvi::load_config(config);
        const auto outcome = gradvi::run(command, spec, options);
        if (!quiet) print_summary(outcome);
        return outcome.passed ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "gradvi: " << e.what() << "\n";
        return 2;
    }
}
