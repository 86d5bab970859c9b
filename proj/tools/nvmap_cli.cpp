#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>

#include "commands.hpp"
#include "nvmap/errors.hpp"

namespace {

void add_common(CLI::App* sub, nvmap::cli::CommonArgs& a, bool config_required) {
    auto* c = sub->add_option("--config", a.config, "run configuration file");
    if (config_required) c->required();
    sub->add_option("--seed", a.seed, "master seed");
    sub->add_option("--out", a.out, "output directory");
    sub->add_option("--threads", a.threads, "worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace nvmap::cli;
    CLI::App app{"nvmap: nuclear spin mapping from weak-measurement spectra"};
    app.require_subcommand(1);

    CommonArgs common;
    FitArgs fit;
    BootstrapArgs boot;
    std::string input;
    std::optional<int> grid;

    auto* sim = app.add_subcommand("simulate", "synthesize FID traces from a configured cluster");
    add_common(sim, common, true);

    auto* fitc = app.add_subcommand("fit", "multi-start annealing fit over a range of spin counts");
    add_common(fitc, common, false);
    fitc->add_option("data", fit.data, "directory of .fid traces")->required();
    fitc->add_option("--n-range", fit.n_range, "spin counts, e.g. 3-7");
    fitc->add_option("--restarts", fit.restarts, "restarts per spin count");
    fitc->add_option("--iters", fit.iters, "annealing iterations per restart");
    fitc->add_flag("--no-polish", fit.no_polish, "skip local refinement of each restart");

    auto* loc = app.add_subcommand("localize", "hyperfine parameters to positions");
    add_common(loc, common, false);
    loc->add_option("input", input, "model file or reference table CSV")->required();

    auto* bs = app.add_subcommand("bootstrap", "bootstrap parameter and position uncertainties");
    add_common(bs, common, false);
    bs->add_option("data", boot.data, "directory of .fid traces")->required();
    bs->add_option("--model", boot.model, "fitted model file")->required();
    bs->add_option("--resamples", boot.resamples, "number of synthetic datasets");

    auto* sl = app.add_subcommand("slice", "sensitive-slice maps, ridge radii and sensitive volume");
    add_common(sl, common, true);
    sl->add_option("--grid", grid, "voxels per axis of the 3D grid");

    auto* st = app.add_subcommand("stats", "azimuth test, closest pairs, uncertainty classes, pair counts");
    add_common(st, common, false);
    st->add_option("input", input, "reference table, positions CSV or model file")->required();
    st->add_option("--grid", grid, "voxels per axis of the 3D grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) return cmd_simulate(common);
        if (*fitc) return cmd_fit(common, fit);
        if (*loc) return cmd_localize(common, input);
        if (*bs) return cmd_bootstrap(common, boot);
        if (*sl) return cmd_slice(common, grid);
        if (*st) return cmd_stats(common, input, grid);
    } catch (const nvmap::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const nvmap::DomainError& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return 2;
    } catch (const nvmap::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const nvmap::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    }
    return 2;
}
