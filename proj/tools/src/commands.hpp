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

#ifndef POSEREG_TOOLS_COMMANDS_HPP_
#define POSEREG_TOOLS_COMMANDS_HPP_

#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace CLI {
class App;
}

namespace posereg::cli {

class Command {
 public:
  virtual ~Command() = default;
  /// Adds the subcommand and its flags to root.
  virtual CLI::App* attach(CLI::App& root) = 0;
  /// Runs after parsing; library exceptions propagate to run().
  virtual int execute(std::ostream& out, std::ostream& err) = 0;
};

std::unique_ptr<Command> make_synth_command();
std::unique_ptr<Command> make_validate_command();
std::unique_ptr<Command> make_augment_command();
std::unique_ptr<Command> make_train_command();
std::unique_ptr<Command> make_predict_command();
std::unique_ptr<Command> make_eval_command();
std::unique_ptr<Command> make_gradcheck_command();
std::unique_ptr<Command> make_bench_command();

/// Prints the effective settings in config-file syntax, so the block can be
/// saved and passed back with --config.
class ConfigEcho {
 public:
  ConfigEcho(std::ostream& out, std::string_view section) : out_(out) {
    out_ << "# resolved configuration\n[" << section << "]\n";
  }
  ~ConfigEcho() { out_ << '\n'; }

  template <typename T>
  ConfigEcho& operator()(std::string_view key, const T& value) {
    out_ << key << " = " << format(value) << '\n';
    return *this;
  }

  template <typename T>
  static std::string format(const T& v) {
    std::ostringstream s;
    if constexpr (std::is_same_v<T, bool>) {
      s << (v ? "true" : "false");
    } else if constexpr (std::is_convertible_v<T, std::string_view>) {
      s << '"' << std::string_view(v) << '"';
    } else if constexpr (requires { v.first; v.second; }) {
      s << '[' << format(v.first) << ", " << format(v.second) << ']';
    } else if constexpr (requires { v.begin(); v.end(); }) {
      s << '[';
      bool first = true;
      for (const auto& e : v) {
        s << (first ? "" : ", ") << format(e);
        first = false;
      }
      s << ']';
    } else {
      s.precision(10);
      s << v;
    }
    return s.str();
  }

 private:
  std::ostream& out_;
};

}  // namespace posereg::cli

#endif  // POSEREG_TOOLS_COMMANDS_HPP_
