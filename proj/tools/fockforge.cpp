#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fockforge/errors.hpp"
#include "fockforge/report.hpp"
#include "fockforge/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Fock-state control sequence synthesis and robustness analysis"};
    app.set_version_flag("--version", fockforge::code_version());

    std::string mode;
    std::string config;
    std::string out;
    int workers = 0;
    app.add_option("mode", mode, "optimize | simulate | detuning | noise | lindblad | wigner | sweep")
        ->required()
        ->check(CLI::IsMember({"optimize", "simulate", "detuning", "noise", "lindblad", "wigner",
                               "sweep"}));
    app.add_option("--config", config, "JSON run configuration")->required();
    app.add_option("--out", out, "output directory (overrides io.output_dir)");
    app.add_option("--workers", workers, "worker threads (overrides the configuration)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fockforge::kExitValidation;
    }

    std::optional<std::filesystem::path> out_dir;
    if (!out.empty()) out_dir = out;
    std::optional<int> worker_count;
    if (workers > 0) worker_count = workers;
    return fockforge::run(fockforge::mode_from_string(mode), config, out_dir, worker_count,
                          std::cerr);
}
