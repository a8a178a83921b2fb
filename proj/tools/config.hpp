#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vclust/types.hpp"

namespace vclust::cli {

enum class KeyKind { Double, Int, String, Choice, Point, DoubleList, PointList, Bool };

/// One configuration key: its flag, type, default and admissible range.
struct KeySpec {
  std::string name;
  std::string flag;  // long option without the leading dashes
  KeyKind kind = KeyKind::Double;
  std::optional<std::string> fallback;  // default value; none means required where used
  std::vector<std::string> choices;
  double min = -1e300, max = 1e300;
  bool open_min = false, open_max = false;  // strict bounds
  std::string help;
};

/// All keys the tool understands.
const std::vector<KeySpec>& schema();
const KeySpec& key_spec(const std::string& name);

/// Keys read by a subcommand and the subset that has to be given explicitly.
struct CommandKeys {
  std::vector<std::string> keys;
  std::vector<std::string> required;
};
const CommandKeys& command_keys(const std::string& command);
const std::vector<std::string>& command_names();

/// Parsed key = value pairs. Values are kept as text and validated on access and by validate().
class Config {
 public:
  /// Reads `key = value` lines; '#' starts a comment, values may be double quoted.
  /// Throws ConfigError naming the line for malformed input and the key for unknown or repeated keys.
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text, const std::string& origin = "<string>");

  /// Sets or overrides a value (command-line flags). Throws ConfigError for an unknown key.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  /// Checks presence of required keys and the type and range of every key of the command.
  void validate(const std::string& command) const;

  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  std::string text(const std::string& key) const;
  bool flag(const std::string& key) const;
  Vec2 point(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<Vec2> points(const std::string& key) const;

  /// Every key of the command with its effective value (explicit or default), as text.
  nlohmann::json resolved(const std::string& command) const;

 private:
  std::string raw(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace vclust::cli
