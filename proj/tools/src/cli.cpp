// Copyright (c) 2026, The posereg Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "posereg/error.hpp"
#include "posereg/parallel.hpp"

namespace posereg::cli {

namespace {

int dispatch(CLI::App& app, std::vector<std::unique_ptr<Command>>& commands,
             const std::vector<CLI::App*>& subs, int threads, std::ostream& out, std::ostream& err) {
  set_thread_count(threads);
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) return commands[i]->execute(out, err);
  }
  err << app.help();
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pose regression toolkit: synthetic data, training, inference and evaluation.", "posereg"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flag values from a file ([command] sections, key = value)");
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads; 0 uses every core, 1 is bit-stable")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  std::vector<std::unique_ptr<Command>> commands;
  commands.push_back(make_synth_command());
  commands.push_back(make_validate_command());
  commands.push_back(make_augment_command());
  commands.push_back(make_train_command());
  commands.push_back(make_predict_command());
  commands.push_back(make_eval_command());
  commands.push_back(make_gradcheck_command());
  commands.push_back(make_bench_command());
  std::vector<CLI::App*> subs;
  for (auto& c : commands) {
    CLI::App* sub = c->attach(app);
    sub->fallthrough();
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    for (CLI::App* sub : subs) {
      if (sub->parsed()) {
        out << sub->help();
        return kOk;
      }
    }
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::FileError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsage;
  }

  try {
    return dispatch(app, commands, subs, threads, out, err);
  } catch (const NonFiniteLoss& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const CorruptCheckpoint& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const UnsupportedVersion& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace posereg::cli
