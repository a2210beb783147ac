#include <CLI11.hpp>

#include "gals/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"galsim: discrete-event simulator for token-based GALS networks"};
    app.require_subcommand(1);

    gals::DriverOptions opts;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opts.config_path, "topology config file")
            ->required();
        sub->add_option("--out-dir", opts.out_dir,
                        "output directory (default out/<config>/<command>)");
        sub->add_option("--seed", opts.seed, "override the config seed");
        sub->add_option("--until", opts.until,
                        "run limit: time (10ms) or event count (50000ev)");
        sub->add_flag("--strict", opts.strict, "treat warnings as errors");
        return sub;
    };

    auto* validate =
        add_common(app.add_subcommand("validate", "check a topology config"));
    auto* run = add_common(
        app.add_subcommand("run", "simulate and export trace CSVs"));
    auto* spectrum = add_common(app.add_subcommand(
        "spectrum", "compare clock spectra of fixed vs dithered delays"));
    spectrum->add_option("--compare", opts.compare,
                         "variant to run against the fixed reference")
        ->check(CLI::IsMember({"fixed", "spread"}));
    auto* thermal = add_common(app.add_subcommand(
        "thermal", "simulate with the thermal environment and export series"));
    auto* resources = add_common(app.add_subcommand(
        "resources", "estimate GPRM LUT/flip-flop costs"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0)
            std::cerr << "error: usage: " << e.what() << "\n";
        return app.exit(e);
    }

    if (app.got_subcommand(validate)) return gals::cmd_validate(opts);
    if (app.got_subcommand(run)) return gals::cmd_run(opts);
    if (app.got_subcommand(spectrum)) return gals::cmd_spectrum(opts);
    if (app.got_subcommand(thermal)) return gals::cmd_thermal(opts);
    if (app.got_subcommand(resources)) return gals::cmd_resources(opts);
    return 2;
}
