// hilbert-gp: fit, predict, cross-validate, sample and diagnose reduced-rank GP models.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hgp/cli/commands.hpp"
#include "hgp/error.hpp"

namespace {

void add_overrides(CLI::App* cmd, hgp::cli::Overrides& o) {
    cmd->add_option("--m", o.m, "Basis size (overrides basis.m)");
    cmd->add_option("--mode", o.mode, "Basis selection: sorted or grid");
    cmd->add_option("--extension", o.extension, "Domain extension beyond the data range (fraction of half-range)");
    cmd->add_option("--target", o.target, "Target column name (default: last column)");
    cmd->add_option("--max-iters", o.max_iters, "Optimizer iteration cap");
    cmd->add_option("--restarts", o.restarts, "Optimizer restarts");
    cmd->add_option("--opt-seed", o.seed, "Seed for restart jitter");
    cmd->add_flag("--center-y", o.center_y, "Subtract the training mean of y before fitting");
    cmd->add_flag("--no-optimize", o.no_optimize, "Keep the configured hyperparameters fixed");
}

}  // namespace

int main(int argc, char** argv) {
    namespace cli = hgp::cli;
    CLI::App app{"Reduced-rank Gaussian-process regression with Laplacian eigenfunction bases"};
    app.require_subcommand(1);

    cli::FitRequest fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit hyperparameters and write a model file");
    fit_cmd->add_option("--config", fit.config, "JSON config file")->check(CLI::ExistingFile);
    fit_cmd->add_option("--data", fit.data, "Training CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--out", fit.out, "Model file to write")->required();
    fit_cmd->add_option("--report", fit.report, "Fit report JSON (default: <out>.report.json)");
    add_overrides(fit_cmd, fit.overrides);

    cli::PredictRequest pred;
    auto* pred_cmd = app.add_subcommand("predict", "Predict with a saved model");
    pred_cmd->add_option("--model", pred.model, "Model file")->required()->check(CLI::ExistingFile);
    pred_cmd->add_option("--data", pred.data, "Test CSV")->required()->check(CLI::ExistingFile);
    pred_cmd->add_option("--out", pred.out, "Predictions CSV")->required();

    cli::CvRequest cv;
    auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation");
    cv_cmd->add_option("--config", cv.config, "JSON config file")->check(CLI::ExistingFile);
    cv_cmd->add_option("--data", cv.data, "Data CSV")->required()->check(CLI::ExistingFile);
    cv_cmd->add_option("--k", cv.k, "Number of folds")->capture_default_str();
    cv_cmd->add_option("--seed", cv.seed, "Fold-assignment seed")->capture_default_str();
    cv_cmd->add_option("--out", cv.out, "Metrics report JSON")->required();
    cv_cmd->add_option("--sweep-out", cv.sweep, "Per-fold CSV (default: <out>.sweep.csv)");
    cv_cmd->add_option("--method", cv.overrides.method, "reduced-rank, full or ssgp");
    cv_cmd->add_option("--methods", cv.overrides.methods, "Several methods to compare")->delimiter(',');
    cv_cmd->add_flag("--smse-verbatim", cv.smse_verbatim, "Report SMSE without the 1/n* normalization");
    add_overrides(cv_cmd, cv.overrides);

    cli::SampleRequest sample;
    auto* sample_cmd = app.add_subcommand("sample", "Draw from the reduced-rank prior on a grid");
    sample_cmd->add_option("--config", sample.config, "JSON config file")->required()->check(CLI::ExistingFile);
    sample_cmd->add_option("--grid", sample.grid, "CSV of input points")->required()->check(CLI::ExistingFile);
    sample_cmd->add_option("--seed", sample.seed, "Sampling seed")->capture_default_str();
    sample_cmd->add_option("--draws", sample.draws, "Number of draws")->capture_default_str();
    sample_cmd->add_option("--out", sample.out, "Draws CSV")->required();
    add_overrides(sample_cmd, sample.overrides);

    cli::DiagnoseRequest diag;
    auto* diag_cmd = app.add_subcommand("diagnose", "Convergence diagnostics: tail terms, sup errors, learning curve");
    diag_cmd->add_option("--config", diag.config, "JSON config file")->required()->check(CLI::ExistingFile);
    diag_cmd->add_option("--out", diag.out, "Diagnostics JSON (default: stdout)");
    add_overrides(diag_cmd, diag.overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cli::kOk : cli::kUsage;
    }

    try {
        if (*fit_cmd) cli::run_fit(fit);
        else if (*pred_cmd) cli::run_predict(pred);
        else if (*cv_cmd) cli::run_cv(cv);
        else if (*sample_cmd) cli::run_sample(sample);
        else if (*diag_cmd) cli::run_diagnose(diag);
    } catch (const hgp::ParseError& e) {
        std::cerr << "error: " << e.what();
        if (e.line() > 0) std::cerr << " (line " << e.line() << (e.column() > 0 ? ", column " + std::to_string(e.column()) : "") << ")";
        std::cerr << '\n';
        return cli::kUsage;
    } catch (const hgp::UnsupportedKernel& e) {
        std::cerr << "error: unsupported kernel: " << e.what() << '\n';
        return cli::kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kRuntime;
    }
    return cli::kOk;
}
