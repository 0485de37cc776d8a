#pragma once

#include <istream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace poseprompt::cli {

/// CLI11 config reader/writer for JSON files. Keys are long option names
/// without dashes. A top-level object named after a subcommand applies to
/// that subcommand; other keys apply to the subcommand being run.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  const CLI::App* root_;
};

}  // namespace poseprompt::cli
