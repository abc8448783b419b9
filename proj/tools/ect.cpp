/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: tools/ect.cpp
 *
 * Copyright 2026 The ect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: train-pdm, synth, fit and eval.

#include "ect/commands.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using ect::cli::fs::path;

int run(int argc, char** argv)
{
    CLI::App app{"Estimation-Correction-Tuning shape fitting"};
    app.fallthrough();
    std::vector<std::string> overrides;
    bool dump_config = false;
    app.add_option("--set", overrides, "override a setting, key=value (repeatable)");
    app.add_flag("--dump-config", dump_config, "print the effective settings and exit");

    // train-pdm
    auto* train = app.add_subcommand("train-pdm", "train a point distribution model from a directory of .pts files");
    path train_shapes;
    path train_out;
    std::optional<double> variance;
    std::optional<int> components;
    train->add_option("--shapes", train_shapes, "directory of training .pts files")->required();
    train->add_option("--out", train_out, "model file to write")->required();
    auto* variance_opt = train->add_option("--variance-retained", variance, "variance fraction to keep");
    train->add_option("--components", components, "fixed number of deformation modes")->excludes(variance_opt);

    // synth
    auto* synth = app.add_subcommand("synth", "write synthetic scenarios or training shapes");
    path synth_out;
    std::optional<path> synth_model;
    std::uint64_t seed = 0;
    std::size_t count = 1;
    std::optional<std::size_t> training_shapes;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", seed, "random seed");
    auto* model_opt = synth->add_option("--model", synth_model, "model to sample scenarios from");
    synth->add_option("--count", count, "number of scenarios (more than one gives scene_NNNN subdirectories)");
    synth->add_option("--training-shapes", training_shapes, "write this many generator training shapes instead")
        ->excludes(model_opt);

    // fit
    auto* fit = app.add_subcommand("fit", "fit a model to a response stack");
    path fit_model;
    std::optional<path> fit_stack;
    std::optional<path> fit_out;
    std::optional<path> fit_scenes;
    std::string fit_out_name = "fit.json";
    std::string fit_format = "json";
    fit->add_option("--model", fit_model, "model file")->required();
    auto* stack_opt = fit->add_option("--stack", fit_stack, "response stack (.rspm)");
    auto* out_opt = fit->add_option("--out", fit_out, "result file");
    auto* scenes_opt = fit->add_option("--scenes", fit_scenes, "fit every <dir>/*/stack.rspm");
    fit->add_option("--out-name", fit_out_name, "result file name inside each scene (with --scenes)");
    fit->add_option("--format", fit_format, "result format")->check(CLI::IsMember({"json", "pts"}));
    scenes_opt->excludes(stack_opt)->excludes(out_opt);
    stack_opt->needs(out_opt);

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    std::optional<path> eval_pred;
    std::optional<path> eval_truth;
    std::optional<path> eval_meta;
    std::optional<path> eval_scenes;
    std::string eval_pred_name = "fit.json";
    path eval_report;
    std::optional<path> eval_ced;
    auto* pred_opt = eval->add_option("--pred", eval_pred, "prediction (.pts or fit result)");
    auto* truth_opt = eval->add_option("--truth", eval_truth, "ground-truth .pts");
    eval->add_option("--meta", eval_meta, "scenario meta file (occlusion mask)")->needs(pred_opt);
    auto* eval_scenes_opt = eval->add_option("--scenes", eval_scenes, "score every <dir>/*/ with a prediction");
    eval->add_option("--pred-name", eval_pred_name, "prediction file name inside each scene (with --scenes)");
    eval->add_option("--report", eval_report, "report file to write")->required();
    eval->add_option("--ced", eval_ced, "CED table file to write");
    eval_scenes_opt->excludes(pred_opt)->excludes(truth_opt);
    pred_opt->needs(truth_opt);
    truth_opt->needs(pred_opt);

    try
    {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e)
    {
        return app.exit(e) == 0 ? ect::cli::exit_ok : ect::cli::exit_usage;
    }

    ect::Settings settings;
    for (const auto& o : overrides)
    {
        ect::apply_override(settings, o);
    }
    if (variance)
    {
        settings.pdm.variance_retained = *variance;
    }
    if (components)
    {
        ect::detail::require(*components >= 1, ect::ErrorKind::InvalidArgument, "--components must be >= 1");
        settings.pdm.component_count = *components;
    }
    if (dump_config)
    {
        std::cout << ect::dump_settings(settings);
        return ect::cli::exit_ok;
    }

    if (train->parsed())
    {
        ect::cli::train_pdm_command(train_shapes, train_out, settings, std::cout);
    } else if (synth->parsed())
    {
        if (training_shapes)
        {
            ect::cli::synth_shapes_command(synth_out, *training_shapes, seed, settings, std::cout);
        } else
        {
            ect::detail::require(synth_model.has_value(), ect::ErrorKind::InvalidArgument,
                                 "synth: --model or --training-shapes is required");
            ect::cli::synth_scenes_command(*synth_model, synth_out, count, seed, settings, std::cout);
        }
    } else if (fit->parsed())
    {
        const auto format = fit_format == "pts" ? ect::cli::FitFormat::Pts : ect::cli::FitFormat::Json;
        if (fit_scenes)
        {
            ect::cli::fit_batch_command(fit_model, *fit_scenes, fit_out_name, format, settings, std::cout);
        } else
        {
            ect::detail::require(fit_stack.has_value(), ect::ErrorKind::InvalidArgument,
                                 "fit: --stack/--out or --scenes is required");
            ect::cli::fit_command(fit_model, *fit_stack, *fit_out, format, settings, std::cout);
        }
    } else if (eval->parsed())
    {
        if (eval_scenes)
        {
            ect::cli::eval_batch_command(*eval_scenes, eval_pred_name, eval_report, eval_ced, settings, std::cout);
        } else
        {
            ect::detail::require(eval_pred.has_value(), ect::ErrorKind::InvalidArgument,
                                 "eval: --pred/--truth or --scenes is required");
            ect::cli::eval_pair_command(*eval_pred, *eval_truth, eval_meta, eval_report, eval_ced, settings,
                                        std::cout);
        }
    } else
    {
        std::cerr << app.help();
        return ect::cli::exit_usage;
    }
    return ect::cli::exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    try
    {
        return run(argc, argv);
    } catch (const ect::Error& e)
    {
        std::cerr << "ect: " << ect::to_string(e.kind()) << ": " << e.what() << "\n";
        return ect::cli::exit_code(e.kind());
    } catch (const std::exception& e)
    {
        std::cerr << "ect: " << e.what() << "\n";
        return ect::cli::exit_usage;
    }
}
