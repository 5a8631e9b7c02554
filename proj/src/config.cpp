#include "osp/config.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "osp/text_io.hpp"

namespace osp {

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + message : "config: " + message),
      line_(line) {}

namespace {

template <class T>
using Setter = std::function<void(T&, const std::string&)>;

int as_int(const std::string& v) { return static_cast<int>(parse_int(v)); }

double positive(const std::string& v) {
    const double x = parse_double(v);
    if (!(x > 0.0)) throw std::invalid_argument("must be positive, got " + v);
    return x;
}

const std::map<std::string, Setter<CaseSpec>>& case_setters() {
    static const std::map<std::string, Setter<CaseSpec>> m{
        {"case.name", [](CaseSpec& c, const std::string& v) { c.name = v; }},
        {"case.nx", [](CaseSpec& c, const std::string& v) { c.grid.nx = as_int(v); }},
        {"case.ny", [](CaseSpec& c, const std::string& v) { c.grid.ny = as_int(v); }},
        {"case.start_x", [](CaseSpec& c, const std::string& v) { c.grid.agent_start.x = as_int(v); }},
        {"case.start_y", [](CaseSpec& c, const std::string& v) { c.grid.agent_start.y = as_int(v); }},
        {"case.model",
         [](CaseSpec& c, const std::string& v) {
             if (v == "isotropic") c.model.variant = ModelVariant::isotropic_2d;
             else if (v == "windy") c.model.variant = ModelVariant::windy_3d;
             else throw std::invalid_argument("model must be 'isotropic' or 'windy'");
         }},
        {"case.lambda_over_dx", [](CaseSpec& c, const std::string& v) { c.model.lambda_over_dx = positive(v); }},
        {"case.r_dt", [](CaseSpec& c, const std::string& v) { c.model.r_dt = positive(v); }},
        {"case.r_bar", [](CaseSpec& c, const std::string& v) { c.model.r_bar = positive(v); }},
        {"case.v_bar", [](CaseSpec& c, const std::string& v) { c.model.v_bar = positive(v); }},
        {"case.tau_bar", [](CaseSpec& c, const std::string& v) { c.model.tau_bar = positive(v); }},
        {"case.h_max", [](CaseSpec& c, const std::string& v) { c.model.h_max = as_int(v); }},
        {"case.t_max", [](CaseSpec& c, const std::string& v) { c.t_max = as_int(v); }},
        {"case.prior_embedding_factor",
         [](CaseSpec& c, const std::string& v) { c.prior_embedding_factor = as_int(v); }},
    };
    return m;
}

const std::map<std::string, Setter<TrainerConfig>>& trainer_setters() {
    static const std::map<std::string, Setter<TrainerConfig>> m{
        {"trainer.lr", [](TrainerConfig& c, const std::string& v) { c.lr = parse_double(v); }},
        {"trainer.epsilon_init", [](TrainerConfig& c, const std::string& v) { c.epsilon_init = parse_double(v); }},
        {"trainer.epsilon_floor", [](TrainerConfig& c, const std::string& v) { c.epsilon_floor = parse_double(v); }},
        {"trainer.epsilon_decay", [](TrainerConfig& c, const std::string& v) { c.epsilon_decay = parse_double(v); }},
        {"trainer.memory_size", [](TrainerConfig& c, const std::string& v) { c.memory_size = as_int(v); }},
        {"trainer.minibatch_size", [](TrainerConfig& c, const std::string& v) { c.minibatch_size = as_int(v); }},
        {"trainer.new_transitions_per_it",
         [](TrainerConfig& c, const std::string& v) { c.new_transitions_per_it = as_int(v); }},
        {"trainer.gd_steps_per_it", [](TrainerConfig& c, const std::string& v) { c.gd_steps_per_it = as_int(v); }},
        {"trainer.update_target_network_it",
         [](TrainerConfig& c, const std::string& v) { c.update_target_network_it = as_int(v); }},
        {"trainer.hidden_units", [](TrainerConfig& c, const std::string& v) { c.hidden_units = as_int(v); }},
        {"trainer.max_iterations", [](TrainerConfig& c, const std::string& v) { c.max_iterations = as_int(v); }},
        {"trainer.eval_every", [](TrainerConfig& c, const std::string& v) { c.eval_every = as_int(v); }},
        {"trainer.eval_episodes", [](TrainerConfig& c, const std::string& v) { c.eval_episodes = as_int(v); }},
        {"trainer.log_every", [](TrainerConfig& c, const std::string& v) { c.log_every = as_int(v); }},
        {"trainer.threads", [](TrainerConfig& c, const std::string& v) { c.threads = as_int(v); }},
    };
    return m;
}

const std::map<std::string, Setter<PerseusConfig>>& perseus_setters() {
    static const std::map<std::string, Setter<PerseusConfig>> m{
        {"perseus.gamma", [](PerseusConfig& c, const std::string& v) { c.gamma = parse_double(v); }},
        {"perseus.shaping_c", [](PerseusConfig& c, const std::string& v) { c.shaping_c = parse_double(v); }},
        {"perseus.bank_size", [](PerseusConfig& c, const std::string& v) { c.bank_size = as_int(v); }},
        {"perseus.stop_patience", [](PerseusConfig& c, const std::string& v) { c.stop_patience = as_int(v); }},
        {"perseus.max_iterations", [](PerseusConfig& c, const std::string& v) { c.max_iterations = as_int(v); }},
        {"perseus.eval_episodes", [](PerseusConfig& c, const std::string& v) { c.eval_episodes = as_int(v); }},
        {"perseus.collection_stall_limit",
         [](PerseusConfig& c, const std::string& v) { c.collection_stall_limit = as_int(v); }},
        {"perseus.threads", [](PerseusConfig& c, const std::string& v) { c.threads = as_int(v); }},
    };
    return m;
}

template <class T>
void apply_entries(const std::vector<ConfigEntry>& entries, const std::map<std::string, Setter<T>>& setters,
                   T& target) {
    for (const auto& e : entries) {
        const auto it = setters.find(e.key);
        if (it == setters.end()) continue;
        try {
            it->second(target, e.value);
        } catch (const std::exception& ex) {
            throw ConfigError(e.line, e.key + ": " + ex.what());
        }
    }
    try {
        target.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(0, ex.what());
    }
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [key, _] : case_setters()) k.push_back(key);
        for (const auto& [key, _] : trainer_setters()) k.push_back(key);
        for (const auto& [key, _] : perseus_setters()) k.push_back(key);
        return k;
    }();
    return keys;
}

ConfigOverlay parse_config(const std::string& text) {
    const auto& keys = known_config_keys();
    ConfigOverlay overlay;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(lineno, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty()) throw ConfigError(lineno, "empty key or value");
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError(lineno, "unknown key '" + key + "'");
        }
        if (!seen.insert(key).second) throw ConfigError(lineno, "duplicate key '" + key + "'");
        overlay.entries.push_back({key, value, lineno});
    }
    return overlay;
}

ConfigOverlay load_config(const std::string& path) { return parse_config(read_file(path)); }

void ConfigOverlay::apply(CaseSpec& spec) const { apply_entries(entries, case_setters(), spec); }
void ConfigOverlay::apply(TrainerConfig& cfg) const { apply_entries(entries, trainer_setters(), cfg); }
void ConfigOverlay::apply(PerseusConfig& cfg) const { apply_entries(entries, perseus_setters(), cfg); }

}  // namespace osp
