#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "auctionlab/driver.hpp"

// auction-lab: run, settle, verify and price scenarios for stochastic
// capacity auctions.  Exit codes: 0 success, 2 scenario parse error,
// 3 validation error (the report names the error), 4 verification failure.

int main(int argc, char** argv) {
    CLI::App app{"stochastic-capacity auction laboratory"};
    app.require_subcommand(1);

    std::string path;
    std::string report_path;
    auctionlab::CliOptions opt;
    std::map<const CLI::App*, auctionlab::CliCommand> command_of;

    const auto add = [&](const char* name, const char* desc,
                         auctionlab::CliCommand cmd) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("scenario", path, "scenario file (JSON)")->required();
        sub->add_option("--seed", opt.seed,
                        "base seed for sampled realizations");
        sub->add_option("--trials", opt.trials, "number of sampled trials");
        sub->add_option("--tolerance", opt.tolerance,
                        "bound for verification checks");
        sub->add_option("--report", report_path,
                        "also write the report to this file");
        command_of[sub] = cmd;
    };
    add("run", "award the contract and print it", auctionlab::CliCommand::run);
    add("settle", "sample realizations and settle the contract",
        auctionlab::CliCommand::settle);
    add("verify", "run the mechanism's invariant suite",
        auctionlab::CliCommand::verify);
    add("revenue", "closed-form and Monte Carlo auctioneer revenue",
        auctionlab::CliCommand::revenue);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    auctionlab::CliCommand cmd = auctionlab::CliCommand::run;
    for (const CLI::App* sub : app.get_subcommands()) {
        cmd = command_of.at(sub);
    }

    const auctionlab::CliResult res =
        auctionlab::run_scenario_file(path, cmd, opt);
    std::fputs(res.report.c_str(), stdout);
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        out << res.report;
        if (!out) {
            std::fprintf(stderr, "error: cannot write report file %s\n",
                         report_path.c_str());
            return res.exit_code == 0 ? 3 : res.exit_code;
        }
    }
    return res.exit_code;
}
