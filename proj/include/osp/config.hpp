#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "osp/case_spec.hpp"
#include "osp/drl_trainer.hpp"
#include "osp/perseus.hpp"

namespace osp {

/// Error in a configuration file; `line` is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message);
    int line() const { return line_; }

private:
    int line_;
};

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

/// Field-by-field overrides read from `key = value` text. Keys are namespaced
/// `case.*`, `trainer.*` and `perseus.*`; `#` starts a comment. Unknown or
/// repeated keys are rejected at parse time.
struct ConfigOverlay {
    std::vector<ConfigEntry> entries;

    bool empty() const { return entries.empty(); }
    /// Each apply validates the result and throws ConfigError on bad values.
    void apply(CaseSpec& spec) const;
    void apply(TrainerConfig& cfg) const;
    void apply(PerseusConfig& cfg) const;
};

ConfigOverlay parse_config(const std::string& text);
ConfigOverlay load_config(const std::string& path);

/// Every accepted key, for documentation and error messages.
const std::vector<std::string>& known_config_keys();

}  // namespace osp
