#include "repmech/cli.hpp"

#include "repmech/analysis.hpp"
#include "repmech/error.hpp"
#include "repmech/sampling.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <ostream>
#include <sstream>

namespace repmech::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// Rounds to the 12 digits we print so JSON output stays short and stable.
ordered_json num(double value) {
    if (!std::isfinite(value)) return nullptr;
    const std::string text = format_number(value);
    double out = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), out);
    return out;
}

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::ConfigInvalid, where + ": " + what);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

double to_double(const std::string& text, const std::string& where, const std::string& key) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        config_fail(where, key + " expects a number, got '" + text + "'");
    }
    return v;
}

std::uint64_t to_uint(const std::string& text, const std::string& where, const std::string& key) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        config_fail(where, key + " expects a nonnegative integer, got '" + text + "'");
    }
    return v;
}

bool to_bool(const std::string& text, const std::string& where, const std::string& key) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    config_fail(where, key + " expects true or false, got '" + text + "'");
}

std::vector<double> to_doubles(const std::string& text, const std::string& where, const std::string& key) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(to_double(part, where, key));
    return out;
}

std::vector<std::size_t> to_indices(const std::string& text, const std::string& where, const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto& part : split(text, ',')) out.push_back(std::size_t(to_uint(part, where, key)));
    return out;
}

// "lo:hi:step" (inclusive) or a comma list.
std::vector<double> to_grid(const std::string& text, const std::string& where, const std::string& key) {
    if (text.find(':') == std::string::npos) return to_doubles(text, where, key);
    const auto parts = split(text, ':');
    if (parts.size() != 3) config_fail(where, key + " range must be lo:hi:step");
    const double lo = to_double(parts[0], where, key);
    const double hi = to_double(parts[1], where, key);
    const double step = to_double(parts[2], where, key);
    if (!(step > 0.0) || hi < lo) config_fail(where, key + " range needs lo <= hi and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> grid;
    for (std::size_t i = 0; i <= n; ++i) grid.push_back(lo + step * double(i));
    return grid;
}

// ---------------------------------------------------------------------------
// Raw entries shared by the text and JSON readers

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    std::string where;
};

const std::vector<std::string> kSections = {"environment", "agents", "mechanism", "simulation"};

std::vector<Entry> text_entries(const std::string& text, const std::string& origin) {
    std::vector<Entry> entries;
    std::istringstream in(text);
    std::string line, section;
    for (int number = 1; std::getline(in, line); ++number) {
        const std::string where = origin + ":" + std::to_string(number);
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') config_fail(where, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
                config_fail(where, "unknown section [" + section + "]");
            }
            entries.push_back({section, "", "", where});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) config_fail(where, "expected key = value");
        if (section.empty()) config_fail(where, "setting outside of a section");
        entries.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where});
    }
    return entries;
}

std::string json_scalar(const ordered_json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    if (v.is_array()) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            out += json_scalar(v[i], where + "/" + std::to_string(i));
        }
        return out;
    }
    if (v.is_null()) return "";
    config_fail(where, "expected a scalar or an array");
}

std::vector<Entry> json_entries(const std::string& text, const std::string& origin) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        config_fail(origin, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) config_fail(origin, "top level must be an object");
    std::vector<Entry> entries;
    for (const auto& [section, body] : doc.items()) {
        const std::string where = origin + ":/" + section;
        if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
            config_fail(where, "unknown section");
        }
        entries.push_back({section, "", "", where});
        if (section == "agents") {
            if (!body.is_array()) config_fail(where, "agents must be an array");
            for (std::size_t i = 0; i < body.size(); ++i) {
                const std::string aw = where + "/" + std::to_string(i);
                const auto& agent = body[i];
                if (!agent.is_object() || !agent.contains("type")) config_fail(aw, "agent needs a type");
                std::string line = json_scalar(agent["type"], aw + "/type");
                for (const auto& [k, v] : agent.items()) {
                    if (k == "type") continue;
                    const std::string value = json_scalar(v, aw + "/" + k);
                    if (value.find_first_of(" \t") != std::string::npos) config_fail(aw + "/" + k, "value has blanks");
                    line += " " + k + "=" + value;
                }
                entries.push_back({section, "agent", line, aw});
            }
            continue;
        }
        if (!body.is_object()) config_fail(where, "section must be an object");
        for (const auto& [k, v] : body.items()) {
            entries.push_back({section, k, json_scalar(v, where + "/" + k), where + "/" + k});
        }
    }
    return entries;
}

// ---------------------------------------------------------------------------
// Strategy and utility tokens

std::string self_to_string(const SelfStrategy& s) {
    switch (s.rule) {
    case SelfRule::Truthful: return "truthful";
    case SelfRule::Fixed: return "fixed:" + format_number(s.value);
    case SelfRule::Offset: return "offset:" + format_number(s.value);
    case SelfRule::Equilibrium: return "equilibrium";
    case SelfRule::UniformRandom: return "random";
    }
    return "?";
}

std::string cross_to_string(const CrossStrategy& c) {
    switch (c.rule) {
    case CrossRule::Truthful: return "truthful";
    case CrossRule::Affine: return "affine:" + format_number(c.scale) + ":" + format_number(c.shift);
    case CrossRule::UniformRandom: return "random";
    case CrossRule::Collude: {
        std::string s = "collude:" + format_number(c.inflate);
        if (c.bash) s += ":" + format_number(*c.bash);
        return s;
    }
    }
    return "?";
}

std::string image_to_string(const ImageValue& g) {
    if (const auto* p = std::get_if<PowerImage>(&g)) return "power:" + format_number(p->q);
    return "linear";
}

SelfStrategy parse_self(const std::string& text, const std::string& where) {
    const auto parts = split(text, ':');
    const std::string& rule = parts[0];
    if (rule == "truthful" && parts.size() == 1) return {SelfRule::Truthful, 0.0};
    if (rule == "equilibrium" && parts.size() == 1) return {SelfRule::Equilibrium, 0.0};
    if (rule == "random" && parts.size() == 1) return {SelfRule::UniformRandom, 0.0};
    if (rule == "fixed" && parts.size() == 2) return {SelfRule::Fixed, to_double(parts[1], where, "self")};
    if (rule == "offset" && parts.size() == 2) return {SelfRule::Offset, to_double(parts[1], where, "self")};
    config_fail(where, "self must be truthful, equilibrium, random, fixed:<v> or offset:<v>, got '" + text + "'");
}

CrossStrategy parse_cross(const std::string& text, const std::string& where) {
    const auto parts = split(text, ':');
    const std::string& rule = parts[0];
    CrossStrategy c;
    if (rule == "truthful" && parts.size() == 1) return c;
    if (rule == "random" && parts.size() == 1) {
        c.rule = CrossRule::UniformRandom;
        return c;
    }
    if (rule == "affine" && parts.size() == 3) {
        c.rule = CrossRule::Affine;
        c.scale = to_double(parts[1], where, "cross");
        c.shift = to_double(parts[2], where, "cross");
        return c;
    }
    if (rule == "collude" && parts.size() >= 1 && parts.size() <= 3) {
        c.rule = CrossRule::Collude;
        if (parts.size() >= 2) c.inflate = to_double(parts[1], where, "cross");
        if (parts.size() == 3) c.bash = to_double(parts[2], where, "cross");
        return c;
    }
    config_fail(where, "cross must be truthful, random, affine:<scale>:<shift> or collude[:<inflate>[:<bash>]], got '" +
                           text + "'");
}

ImageValue parse_image(const std::string& text, const std::string& where) {
    if (text == "linear") return LinearImage{};
    const auto parts = split(text, ':');
    if (parts.size() == 2 && parts[0] == "power") return PowerImage{to_double(parts[1], where, "g")};
    config_fail(where, "g must be linear or power:<q>, got '" + text + "'");
}

std::optional<MechanismSpec> mechanism_from_name(const std::string& name) {
    std::string n = name;
    std::replace(n.begin(), n.end(), '-', '_');
    if (n == "as" || n == "absolute_scoring") return AbsoluteScoring{};
    if (n == "extended_as") return ExtendedAbsoluteScoring{};
    if (n == "fr" || n == "fair_ranking") return FairRanking{};
    if (n == "simple_averaging" || n == "averaging") return SimpleAveraging{};
    if (n == "pr" || n == "punish_reward") return PunishReward{};
    if (n == "weighted_pr") return WeightedPunishReward{};
    if (n == "direct") return DirectObservation{};
    return std::nullopt;
}

// ---------------------------------------------------------------------------

struct AgentDraft {
    Agent agent;
    AgentStrategy strategy;
    std::string where;
};

AgentKind agent_kind(const std::string& token, const std::string& where) {
    if (auto k = parse_agent_kind(token)) return *k;
    config_fail(where, "unknown agent type '" + token + "' (truth, image, mixed, malicious, colluder)");
}

double default_lambda(AgentKind kind) {
    switch (kind) {
    case AgentKind::Image: return 0.0;
    case AgentKind::Mixed: return 0.5;
    default: return 1.0;
    }
}

Config build_config(const std::vector<Entry>& entries, const std::string& origin) {
    using Section = std::map<std::string, std::pair<std::string, std::string>>; // key -> (value, where)
    std::map<std::string, Section> settings;
    std::vector<Entry> agent_lines;
    std::string agents_where = origin;

    for (const Entry& e : entries) {
        if (e.key.empty()) {
            if (e.section == "agents") agents_where = e.where;
            continue;
        }
        if (e.section == "agents") {
            if (e.key != "agent") config_fail(e.where, "the [agents] section only takes 'agent = ...' lines");
            agent_lines.push_back(e);
            continue;
        }
        auto& sec = settings[e.section];
        if (sec.count(e.key)) config_fail(e.where, "duplicate key '" + e.key + "'");
        sec[e.key] = {e.value, e.where};
    }

    const auto take = [&](const std::string& section, const std::string& key) -> std::optional<std::pair<std::string, std::string>> {
        auto& sec = settings[section];
        auto it = sec.find(key);
        if (it == sec.end()) return std::nullopt;
        auto v = it->second;
        sec.erase(it);
        return v;
    };
    const auto reject_leftovers = [&](const std::string& section, const std::string& context) {
        for (const auto& [key, vw] : settings[section]) {
            config_fail(vw.second, "unknown key '" + key + "' in [" + section + "]" + context);
        }
    };

    Config cfg;
    ScenarioConfig& sc = cfg.scenario;

    // [environment]
    double cross_std = 0.0, cross_bias = 0.0;
    if (auto v = take("environment", "scheme")) {
        if (v->first == "absolute") sc.env.scheme = IndexScheme::Absolute;
        else if (v->first == "relative") sc.env.scheme = IndexScheme::Relative;
        else config_fail(v->second, "scheme must be absolute or relative");
    }
    if (auto v = take("environment", "system_std")) sc.env.system_obs.std = to_double(v->first, v->second, "system_std");
    if (auto v = take("environment", "system_bias")) sc.env.system_obs.bias = to_double(v->first, v->second, "system_bias");
    if (auto v = take("environment", "cross_std")) cross_std = to_double(v->first, v->second, "cross_std");
    if (auto v = take("environment", "cross_bias")) cross_bias = to_double(v->first, v->second, "cross_bias");
    if (auto v = take("environment", "clamp_observations")) {
        sc.env.clamp_observations = to_bool(v->first, v->second, "clamp_observations");
    }
    reject_leftovers("environment", "");

    // [agents]
    std::vector<AgentDraft> drafts;
    bool custom_rules = false;
    for (const Entry& e : agent_lines) {
        std::istringstream tokens(e.value);
        std::string type_token;
        tokens >> type_token;
        if (type_token.empty()) config_fail(e.where, "agent line needs a type");
        AgentDraft d;
        d.where = e.where;
        const AgentKind kind = agent_kind(type_token, e.where);
        d.agent.type.kind = kind;
        d.agent.utility.lambda = default_lambda(kind);
        d.agent.cross_obs = {cross_bias, cross_std};
        std::optional<int> id;
        std::size_t count = 1;
        bool has_quality = false;
        std::set<std::string> seen;
        for (std::string tok; tokens >> tok;) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) config_fail(e.where, "expected key=value, got '" + tok + "'");
            const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
            if (!seen.insert(key).second) config_fail(e.where, "duplicate agent key '" + key + "'");
            if (key == "quality") {
                const double q = to_double(value, e.where, key);
                if (q < 0.0 || q > 1.0) config_fail(e.where, "quality must lie in [0, 1], got " + value);
                d.agent.quality = Quality(q);
                has_quality = true;
            } else if (key == "id") {
                id = int(to_uint(value, e.where, key));
            } else if (key == "lambda") {
                d.agent.utility.lambda = to_double(value, e.where, key);
            } else if (key == "f") {
                d.agent.utility.f.p = to_double(value, e.where, key);
            } else if (key == "g") {
                d.agent.utility.g = parse_image(value, e.where);
            } else if (key == "cross_std") {
                d.agent.cross_obs.std = to_double(value, e.where, key);
            } else if (key == "cross_bias") {
                d.agent.cross_obs.bias = to_double(value, e.where, key);
            } else if (key == "clique") {
                d.agent.type.clique_id = int(to_uint(value, e.where, key));
            } else if (key == "self") {
                d.strategy.self = parse_self(value, e.where);
                custom_rules = true;
            } else if (key == "cross") {
                d.strategy.cross = parse_cross(value, e.where);
                custom_rules = true;
            } else if (key == "count") {
                count = std::size_t(to_uint(value, e.where, key));
                if (count == 0) config_fail(e.where, "count must be >= 1");
            } else {
                config_fail(e.where, "unknown agent key '" + key + "'");
            }
        }
        if (!has_quality) config_fail(e.where, "agent needs quality=<value in [0, 1]>");
        if (kind == AgentKind::Colluder && d.agent.type.clique_id < 0) d.agent.type.clique_id = 0;
        if (id && count > 1) config_fail(e.where, "id= cannot be combined with count=");
        for (std::size_t c = 0; c < count; ++c) {
            AgentDraft copy = d;
            copy.agent.id = id ? *id : int(drafts.size());
            drafts.push_back(copy);
        }
    }
    for (const auto& d : drafts) {
        sc.env.agents.push_back(d.agent);
        sc.profile.push_back(d.strategy);
    }
    const std::size_t k = sc.env.agents.size();

    // [mechanism]
    std::string mech_where = origin;
    if (auto v = take("mechanism", "type")) {
        mech_where = v->second;
        auto spec = mechanism_from_name(v->first);
        if (!spec) config_fail(v->second, "unknown mechanism '" + v->first + "'");
        sc.mechanism = *spec;
    }
    std::vector<std::size_t> identity(k);
    for (std::size_t i = 0; i < k; ++i) identity[i] = i;
    if (auto* ext = std::get_if<ExtendedAbsoluteScoring>(&sc.mechanism)) {
        ext->ring = identity;
        if (auto v = take("mechanism", "ring")) ext->ring = to_indices(v->first, v->second, "ring");
        if (auto v = take("mechanism", "layers")) ext->layers = int(to_uint(v->first, v->second, "layers"));
        if (auto v = take("mechanism", "second_ring")) ext->second_ring = to_indices(v->first, v->second, "second_ring");
    } else if (auto* pr = std::get_if<PunishReward>(&sc.mechanism)) {
        if (auto v = take("mechanism", "a")) pr->a = to_double(v->first, v->second, "a");
    } else if (auto* wpr = std::get_if<WeightedPunishReward>(&sc.mechanism)) {
        if (auto v = take("mechanism", "a")) wpr->a = to_double(v->first, v->second, "a");
        auto w = take("mechanism", "weights");
        if (!w) config_fail(mech_where, "weighted_pr needs weights = w_0, ..., w_{K-1}");
        wpr->weights = to_doubles(w->first, w->second, "weights");
    }
    reject_leftovers("mechanism", " for mechanism " + mechanism_name(sc.mechanism));

    // [simulation]
    if (auto v = take("simulation", "trials")) {
        sc.trials = std::size_t(to_uint(v->first, v->second, "trials"));
        if (sc.trials < 1) config_fail(v->second, "trials must be >= 1");
    }
    if (auto v = take("simulation", "seed")) sc.seed = to_uint(v->first, v->second, "seed");
    if (auto v = take("simulation", "workers")) sc.workers = unsigned(to_uint(v->first, v->second, "workers"));
    if (auto v = take("simulation", "strategy")) {
        if (v->first == "equilibrium") sc.mode = StrategyMode::Equilibrium;
        else if (v->first == "custom") sc.mode = StrategyMode::Custom;
        else config_fail(v->second, "strategy must be equilibrium or custom");
    } else if (custom_rules) {
        sc.mode = StrategyMode::Custom;
    }
    if (auto v = take("simulation", "inflate")) sc.collusion.inflate = to_double(v->first, v->second, "inflate");
    if (auto v = take("simulation", "bash")) sc.collusion.bash = to_double(v->first, v->second, "bash");
    if (auto v = take("simulation", "grid")) {
        cfg.grid = std::size_t(to_uint(v->first, v->second, "grid"));
        if (cfg.grid < 2) config_fail(v->second, "grid must be >= 2");
    }
    if (auto v = take("simulation", "shift_range")) cfg.shift_range = to_double(v->first, v->second, "shift_range");
    if (auto v = take("simulation", "sweep")) {
        cfg.sweep_parameter = parse_sweep_parameter(v->first);
        if (!cfg.sweep_parameter) config_fail(v->second, "sweep must be pr-a, sigma or rho");
    }
    if (auto v = take("simulation", "sweep_grid")) cfg.sweep_grid = to_grid(v->first, v->second, "sweep_grid");
    reject_leftovers("simulation", "");

    if (sc.mode == StrategyMode::Equilibrium && custom_rules) {
        config_fail(origin, "per-agent self=/cross= rules need strategy = custom");
    }
    try {
        sc.env.validate();
    } catch (const Error& e) {
        config_fail(agents_where, e.what());
    }
    try {
        sc.validate();
    } catch (const Error& e) {
        config_fail(mech_where, e.what());
    }
    return cfg;
}

} // namespace

Config parse_config(const std::string& text, const std::string& origin) {
    const auto first = text.find_first_not_of(" \t\r\n");
    const bool json = first != std::string::npos && text[first] == '{';
    return build_config(json ? json_entries(text, origin) : text_entries(text, origin), origin);
}

Config load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) config_fail(path.string(), "cannot read config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

namespace {

ordered_json config_json(const Config& cfg) {
    const ScenarioConfig& sc = cfg.scenario;
    ordered_json env = ordered_json::object();
    env["scheme"] = sc.env.scheme == IndexScheme::Absolute ? "absolute" : "relative";
    env["system_std"] = num(sc.env.system_obs.std);
    env["system_bias"] = num(sc.env.system_obs.bias);
    env["clamp_observations"] = sc.env.clamp_observations;

    ordered_json agents = ordered_json::array();
    for (std::size_t i = 0; i < sc.env.size(); ++i) {
        const Agent& a = sc.env.agents[i];
        ordered_json j = ordered_json::object();
        j["type"] = to_string(a.type.kind);
        j["id"] = a.id;
        j["quality"] = num(a.quality);
        j["lambda"] = num(a.utility.lambda);
        j["f"] = num(a.utility.f.p);
        j["g"] = image_to_string(a.utility.g);
        j["cross_std"] = num(a.cross_obs.std);
        j["cross_bias"] = num(a.cross_obs.bias);
        if (a.type.kind == AgentKind::Colluder) j["clique"] = a.type.clique_id;
        if (sc.mode == StrategyMode::Custom) {
            j["self"] = self_to_string(sc.profile[i].self);
            j["cross"] = cross_to_string(sc.profile[i].cross);
        }
        agents.push_back(j);
    }

    ordered_json mech = ordered_json::object();
    mech["type"] = mechanism_name(sc.mechanism);
    if (const auto* ext = std::get_if<ExtendedAbsoluteScoring>(&sc.mechanism)) {
        mech["ring"] = ext->ring;
        mech["layers"] = ext->layers;
        if (ext->second_ring) mech["second_ring"] = *ext->second_ring;
    } else if (const auto* pr = std::get_if<PunishReward>(&sc.mechanism)) {
        mech["a"] = num(pr->a);
    } else if (const auto* wpr = std::get_if<WeightedPunishReward>(&sc.mechanism)) {
        mech["a"] = num(wpr->a);
        ordered_json w = ordered_json::array();
        for (double x : wpr->weights) w.push_back(num(x));
        mech["weights"] = w;
    }

    ordered_json sim = ordered_json::object();
    sim["trials"] = sc.trials;
    sim["seed"] = sc.seed;
    sim["strategy"] = sc.mode == StrategyMode::Equilibrium ? "equilibrium" : "custom";
    sim["inflate"] = num(sc.collusion.inflate);
    if (sc.collusion.bash) sim["bash"] = num(*sc.collusion.bash);
    sim["grid"] = cfg.grid;
    sim["shift_range"] = num(cfg.shift_range);
    if (cfg.sweep_parameter) sim["sweep"] = to_string(*cfg.sweep_parameter);
    if (!cfg.sweep_grid.empty()) {
        ordered_json g = ordered_json::array();
        for (double x : cfg.sweep_grid) g.push_back(num(x));
        sim["sweep_grid"] = g;
    }

    ordered_json out = ordered_json::object();
    out["environment"] = env;
    out["agents"] = agents;
    out["mechanism"] = mech;
    out["simulation"] = sim;
    return out;
}

} // namespace

std::string canonical_config(const Config& config) { return config_json(config).dump(); }

// ---------------------------------------------------------------------------
// Output files

namespace {

struct Column {
    std::string name;
    std::string type;
    std::string description;
};

class CsvTable {
public:
    explicit CsvTable(std::vector<Column> columns) : columns_(std::move(columns)) {}

    void add_row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_.size()) throw Error(ErrorKind::DimensionMismatch, "csv row width");
        rows_.push_back(cells);
    }

    std::string csv() const {
        std::string out;
        for (std::size_t c = 0; c < columns_.size(); ++c) out += (c ? "," : "") + columns_[c].name;
        out += "\n";
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
            out += "\n";
        }
        return out;
    }

    std::string schema(const std::string& file) const {
        ordered_json cols = ordered_json::array();
        for (const auto& c : columns_) cols.push_back({{"name", c.name}, {"type", c.type}, {"description", c.description}});
        ordered_json j = {{"file", file}, {"delimiter", ","}, {"decimal_separator", "."}, {"line_ending", "LF"},
                          {"header", true}, {"columns", cols}};
        return j.dump(2) + "\n";
    }

private:
    std::vector<Column> columns_;
    std::vector<std::vector<std::string>> rows_;
};

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

class OutputDir {
public:
    OutputDir(fs::path dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
        fs::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + (dir_ / name).string());
        out << content;
        if (!out) throw Error(ErrorKind::InvalidArgument, "failed writing " + (dir_ / name).string());
        paths_.push_back(name);
    }

    void write_table(const std::string& stem, const CsvTable& table) {
        write(stem + ".csv", table.csv());
        write(stem + ".schema.json", table.schema(stem + ".csv"));
    }

    void write_json(const std::string& name, const ordered_json& j) { write(name, j.dump(2) + "\n"); }

    void finish(const std::string& canonical, std::uint64_t seed) {
        ordered_json m = ordered_json::object();
        m["command"] = command_;
        m["config_digest"] = fnv1a_hex(canonical);
        m["seed"] = seed;
        m["tool_version"] = kToolVersion;
        m["output_paths"] = paths_;
        std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
        out << m.dump(2) << "\n";
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::string command_;
    std::vector<std::string> paths_;
};

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
};

Config load_with_flags(const std::string& path, const GlobalFlags& flags) {
    Config cfg = load_config(path);
    if (flags.seed) cfg.scenario.seed = *flags.seed;
    if (flags.trials) {
        if (*flags.trials < 1) config_fail("--trials", "trials must be >= 1");
        cfg.scenario.trials = *flags.trials;
    }
    if (flags.workers) cfg.scenario.workers = *flags.workers;
    return cfg;
}

ordered_json stats_json(const SimStats& s) {
    ordered_json j = ordered_json::object();
    j["trials"] = s.trials;
    j["mae_mean"] = num(s.mae_mean);
    j["mae_stderr"] = num(s.mae_stderr);
    j["budget_mean"] = num(s.budget_mean);
    j["budget_max_abs"] = num(s.budget_max_abs);
    return j;
}

// ---------------------------------------------------------------------------

int cmd_run(const std::string& config_path, const GlobalFlags& flags, std::ostream& out) {
    const Config cfg = load_with_flags(config_path, flags);
    const ScenarioConfig& sc = cfg.scenario;
    const SimStats stats = run_trials(sc);

    OutputDir dir(flags.out.value_or("repmech_out"), "run");
    ordered_json j = stats_json(stats);
    j["mechanism"] = mechanism_name(sc.mechanism);
    j["seed"] = sc.seed;
    j["sigma_prime"] = num(aggregate_sigma(sc.env));
    ordered_json agents = ordered_json::array();
    CsvTable table({{"id", "integer", "agent id"},
                    {"type", "string", "behavioral type"},
                    {"quality", "real", "true quality r_ii"},
                    {"report_mean", "real", "mean self-report"},
                    {"reputation_mean", "real", "mean published reputation"},
                    {"tax_mean", "real", "mean tax"},
                    {"utility_mean", "real", "mean aggregate utility v_i"}});
    for (std::size_t i = 0; i < sc.env.size(); ++i) {
        const Agent& a = sc.env.agents[i];
        agents.push_back({{"id", a.id},
                          {"type", to_string(a.type.kind)},
                          {"quality", num(a.quality)},
                          {"report_mean", num(stats.per_agent_report_mean[i])},
                          {"reputation_mean", num(stats.per_agent_reputation_mean[i])},
                          {"tax_mean", num(stats.per_agent_tax_mean[i])},
                          {"utility_mean", num(stats.per_agent_utility_mean[i])}});
        table.add_row({std::to_string(a.id), to_string(a.type.kind), format_number(a.quality),
                       format_number(stats.per_agent_report_mean[i]), format_number(stats.per_agent_reputation_mean[i]),
                       format_number(stats.per_agent_tax_mean[i]), format_number(stats.per_agent_utility_mean[i])});
    }
    j["agents"] = agents;
    dir.write_json("stats.json", j);
    dir.write_table("agents", table);
    dir.finish(canonical_config(cfg), sc.seed);

    out << "mechanism " << mechanism_name(sc.mechanism) << ", " << stats.trials << " trials\n"
        << "mae_mean " << format_number(stats.mae_mean) << " +- " << format_number(stats.mae_stderr) << "\n"
        << "budget_max_abs " << format_number(stats.budget_max_abs) << "\n"
        << "wrote " << dir.dir().string() << "\n";
    return kOk;
}

int cmd_sweep(const std::string& config_path, const GlobalFlags& flags, const std::string& parameter,
              const std::string& grid_text, std::ostream& out) {
    Config cfg = load_with_flags(config_path, flags);
    if (!parameter.empty()) {
        cfg.sweep_parameter = parse_sweep_parameter(parameter);
        if (!cfg.sweep_parameter) config_fail("--parameter", "must be pr-a, sigma or rho");
    }
    if (!grid_text.empty()) cfg.sweep_grid = to_grid(grid_text, "--grid", "grid");
    if (!cfg.sweep_parameter) config_fail(config_path, "sweep needs a parameter (simulation.sweep or --parameter)");
    if (cfg.sweep_grid.empty()) config_fail(config_path, "sweep needs a grid (simulation.sweep_grid or --grid)");

    const auto rows = sweep(cfg.scenario, *cfg.sweep_parameter, cfg.sweep_grid);
    CsvTable table({{"value", "real", "swept parameter value"},
                    {"sigma_prime", "real", "aggregate cross-report std"},
                    {"mae_mean", "real", "mean total absolute error"},
                    {"mae_stderr", "real", "standard error of mae_mean"},
                    {"budget_mean", "real", "mean sum of taxes"},
                    {"budget_max_abs", "real", "largest per-trial |sum of taxes|"},
                    {"y", "real", "normalized optimal offset (pr-a sweeps)"},
                    {"e_m", "real", "closed-form per-agent error (pr-a sweeps)"},
                    {"expected_gain", "real", "E[r_hat] - r at the optimal report (pr-a sweeps)"}});
    for (const auto& r : rows) {
        table.add_row({format_number(r.value), format_number(r.sigma_prime), format_number(r.stats.mae_mean),
                       format_number(r.stats.mae_stderr), format_number(r.stats.budget_mean),
                       format_number(r.stats.budget_max_abs), cell(r.y), cell(r.e_m), cell(r.expected_gain)});
    }
    OutputDir dir(flags.out.value_or("repmech_out"), "sweep");
    dir.write_table("sweep", table);
    dir.finish(canonical_config(cfg), cfg.scenario.seed);
    out << "swept " << to_string(*cfg.sweep_parameter) << " over " << rows.size() << " points, wrote "
        << dir.dir().string() << "\n";
    return kOk;
}

int cmd_figures(const GlobalFlags& flags, double mu, double sigma_prime, double a_min, double a_max,
                std::size_t points, std::ostream& out) {
    if (points < 2 || !(a_min > 0.0) || !(a_max > a_min) || !(sigma_prime > 0.0)) {
        config_fail("figures", "need points >= 2, 0 < a_min < a_max and sigma' > 0");
    }
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = i + 1 == points ? a_max : a_min + (a_max - a_min) * double(i) / double(points - 1);
    }
    const auto rows = pr_curve(grid, mu, sigma_prime);

    CsvTable fig1({{"a", "real", "band parameter"}, {"y", "real", "root of the first-order condition, in (0, 1)"}});
    CsvTable fig2({{"a", "real", "band parameter"},
                   {"e_m", "real", "punish-reward mean absolute error"},
                   {"averaging_mae", "real", "simple averaging error sqrt(2/pi) sigma'"}});
    CsvTable fig3({{"a", "real", "band parameter"},
                   {"expected_reputation", "real", "E[r_hat] at the optimal self-report"},
                   {"baseline_r", "real", "true quality (reputation under simple averaging)"}});
    for (const auto& r : rows) {
        fig1.add_row({format_number(r.a), format_number(r.y)});
        fig2.add_row({format_number(r.a), format_number(r.e_m), format_number(r.averaging_mae)});
        fig3.add_row({format_number(r.a), format_number(r.expected_reputation), format_number(r.baseline)});
    }
    OutputDir dir(flags.out.value_or("figures"), "figures");
    dir.write_table("fig1", fig1);
    dir.write_table("fig2", fig2);
    dir.write_table("fig3", fig3);
    const ordered_json params = {{"mu", num(mu)}, {"sigma_prime", num(sigma_prime)}, {"a_min", num(a_min)},
                                 {"a_max", num(a_max)}, {"points", points}};
    dir.finish(params.dump(), 0);

    const auto best = std::min_element(rows.begin(), rows.end(), [](const auto& l, const auto& r) { return l.e_m < r.e_m; });
    out << "figures for sigma' = " << format_number(sigma_prime) << ": e_m is smallest at a = " << format_number(best->a)
        << ", wrote " << dir.dir().string() << "\n";
    return kOk;
}

std::string decision_name(Decision d) {
    switch (d) {
    case Decision::SelfReport: return "self";
    case Decision::CrossShift: return "cross-shift";
    default: return "auto";
    }
}

int cmd_check_equilibrium(const std::string& config_path, const GlobalFlags& flags, std::optional<std::size_t> grid,
                          std::ostream& out) {
    Config cfg = load_with_flags(config_path, flags);
    if (grid) cfg.grid = *grid;
    const ScenarioConfig& sc = cfg.scenario;
    const StrategyProfile profile = scenario_profile(sc);

    CsvTable table({{"id", "integer", "agent id"},
                    {"type", "string", "behavioral type"},
                    {"decision", "string", "self or cross-shift"},
                    {"claimed", "real", "claimed strategy point"},
                    {"argmax", "real", "best grid point"},
                    {"gain", "real", "expected utility gain of argmax over the claim"},
                    {"gain_stderr", "real", "paired standard error of gain"},
                    {"verdict", "string", "ok, deviation or skipped"}});
    bool violation = false;
    out << "check-equilibrium: " << mechanism_name(sc.mechanism) << ", " << sc.trials << " trials, grid " << cfg.grid
        << "\n";
    for (std::size_t i = 0; i < sc.env.size(); ++i) {
        const Agent& a = sc.env.agents[i];
        BestResponseOptions opt;
        opt.trials = sc.trials;
        opt.grid = cfg.grid;
        opt.seed = sc.seed;
        opt.workers = sc.workers;
        opt.shift_range = cfg.shift_range;
        const BestResponse br = best_response_numeric(i, sc.mechanism, sc.env, profile, opt);
        std::string verdict;
        if (std::isnan(br.claimed_value)) {
            verdict = "skipped";
        } else {
            const bool far = std::abs(br.argmax - br.claimed_value) > br.grid_step * (1.0 + 1e-9);
            const bool profitable = br.gain > 3.0 * br.gain_stderr;
            verdict = far && profitable ? "deviation" : "ok";
        }
        violation = violation || verdict == "deviation";
        out << "  agent " << a.id << " (" << to_string(a.type.kind) << ") " << decision_name(br.decision)
            << ": claimed " << format_number(br.claimed_value) << ", best " << format_number(br.argmax) << ", gain "
            << format_number(br.gain) << " +- " << format_number(br.gain_stderr) << "  " << verdict << "\n";
        table.add_row({std::to_string(a.id), to_string(a.type.kind), decision_name(br.decision),
                       format_number(br.claimed_value), format_number(br.argmax), format_number(br.gain),
                       format_number(br.gain_stderr), verdict});
    }
    if (flags.out) {
        OutputDir dir(*flags.out, "check-equilibrium");
        dir.write_table("equilibrium", table);
        dir.finish(canonical_config(cfg), sc.seed);
    }
    out << (violation ? "profitable deviation found\n" : "no profitable deviation\n");
    return violation ? kEquilibriumViolation : kOk;
}

std::string yes_no(bool v) { return v ? "yes" : "no"; }
std::string yes_no(const std::optional<bool>& v) { return v ? yes_no(*v) : ""; }

int cmd_report(const std::string& config_path, const GlobalFlags& flags, std::ostream& out) {
    const Config cfg = load_with_flags(config_path, flags);
    const ScenarioConfig& sc = cfg.scenario;
    const Environment& env = sc.env;
    MonteCarloOptions mc{sc.trials, sc.seed, sc.workers};

    CsvTable table({{"id", "integer", "agent id"},
                    {"type", "string", "truth or image"},
                    {"quality", "real", "true quality"},
                    {"rho", "real", "image users among the others over K - 1"},
                    {"gamma", "real", "truth users among the others over K - 1"},
                    {"u_in", "real", "closed-form participation utility"},
                    {"u_out", "real", "reserved utility"},
                    {"participates", "string", "closed-form verdict"},
                    {"participates_threshold", "string", "rho <= 4 sigma^2 or gamma <= 4 (1 - r)"},
                    {"u_in_exact", "real", "participation utility with clamped reports"},
                    {"participates_exact", "string", "verdict with clamped reports"},
                    {"u_in_mc", "real", "Monte Carlo participation utility"},
                    {"u_out_mc", "real", "Monte Carlo reserved utility"},
                    {"participates_mc", "string", "Monte Carlo verdict"}});
    out << "participation under absolute scoring, " << sc.trials << " Monte Carlo trials\n";
    for (std::size_t i = 0; i < env.size(); ++i) {
        const Agent& a = env.agents[i];
        std::optional<ParticipationReport> rep;
        if (a.type.kind == AgentKind::Truth) rep = hetero_truth_participation(env, i, mc);
        else if (a.type.kind == AgentKind::Image) rep = hetero_image_participation(env, i, mc);
        if (!rep) {
            out << "  agent " << a.id << " (" << to_string(a.type.kind) << "): no participation model\n";
            continue;
        }
        out << "  agent " << a.id << " (" << to_string(a.type.kind) << ", r=" << format_number(a.quality)
            << "): u_in " << format_number(rep->u_in) << ", u_out " << format_number(rep->u_out) << ", participates "
            << yes_no(rep->participates) << " (threshold " << yes_no(rep->participates_simplified) << ", Monte Carlo "
            << yes_no(rep->participates_mc) << ")\n";
        table.add_row({std::to_string(a.id), to_string(a.type.kind), format_number(a.quality), format_number(rep->rho),
                       format_number(rep->gamma), format_number(rep->u_in), format_number(rep->u_out),
                       yes_no(rep->participates), yes_no(rep->participates_simplified), format_number(rep->u_in_exact),
                       yes_no(rep->participates_exact), cell(rep->u_in_mc), cell(rep->u_out_mc),
                       yes_no(rep->participates_mc)});
    }

    const SystemGainReport gain = hetero_system_gain(env);
    ScenarioConfig as_run = sc;
    as_run.mechanism = AbsoluteScoring{};
    as_run.mode = StrategyMode::Equilibrium;
    ScenarioConfig direct_run = as_run;
    direct_run.mechanism = DirectObservation{};
    const SimStats as_stats = run_trials(as_run);
    const SimStats direct_stats = run_trials(direct_run);
    const bool gains_mc = as_stats.mae_mean < direct_stats.mae_mean;
    out << "system gain: AS error " << format_number(gain.as_mae) << " vs direct " << format_number(gain.direct_mae)
        << " -> " << yes_no(gain.gains) << " (threshold " << yes_no(gain.gains_simplified) << ", Monte Carlo "
        << format_number(as_stats.mae_mean) << " vs " << format_number(direct_stats.mae_mean) << " -> "
        << yes_no(gains_mc) << ")\n";

    if (flags.out) {
        OutputDir dir(*flags.out, "report");
        dir.write_table("participation", table);
        CsvTable sys({{"as_mae", "real", "closed-form AS error"},
                      {"direct_mae", "real", "direct-observation error"},
                      {"gains", "string", "closed-form verdict"},
                      {"gains_threshold", "string", "rho < 2 sqrt(2/pi) sigma"},
                      {"as_mae_mc", "real", "Monte Carlo AS error"},
                      {"direct_mae_mc", "real", "Monte Carlo direct error"},
                      {"gains_mc", "string", "Monte Carlo verdict"}});
        sys.add_row({format_number(gain.as_mae), format_number(gain.direct_mae), yes_no(gain.gains),
                     yes_no(gain.gains_simplified), format_number(as_stats.mae_mean),
                     format_number(direct_stats.mae_mean), yes_no(gains_mc)});
        dir.write_table("system_gain", sys);
        dir.finish(canonical_config(cfg), sc.seed);
    }
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Crowd-sourced reputation mechanisms: simulation and analysis", "repmech"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kToolVersion));

    GlobalFlags flags;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    unsigned workers = 0;
    std::string out_dir;
    auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
    auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials (overrides the config)");
    auto* workers_opt = app.add_option("--workers", workers, "worker threads; results do not depend on it");
    auto* out_opt = app.add_option("--out", out_dir, "output directory");

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "simulate a scenario, write stats.json and agents.csv");
    run_cmd->add_option("config", config_path, "scenario config")->required();

    std::string parameter, grid_text;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario over a parameter grid");
    sweep_cmd->add_option("config", config_path, "scenario config")->required();
    sweep_cmd->add_option("--parameter", parameter, "pr-a, sigma or rho");
    sweep_cmd->add_option("--grid", grid_text, "lo:hi:step or a comma list");

    double mu = 0.5, sigma_prime = 0.1, a_min = 0.5, a_max = 5.0;
    std::size_t points = 91;
    auto* fig_cmd = app.add_subcommand("figures", "punish-reward curves y(a), e_m(a), E[r_hat](a)");
    fig_cmd->add_option("--mu", mu, "true quality");
    fig_cmd->add_option("--sigma-prime", sigma_prime, "aggregate std");
    fig_cmd->add_option("--a-min", a_min, "smallest band parameter a");
    fig_cmd->add_option("--a-max", a_max, "largest band parameter a");
    fig_cmd->add_option("--points", points, "grid points in a")->check(CLI::Range(2u, 100000u));

    std::size_t grid = 0;
    auto* check_cmd = app.add_subcommand("check-equilibrium", "search for profitable unilateral deviations");
    check_cmd->add_option("config", config_path, "scenario config")->required();
    auto* grid_opt = check_cmd->add_option("--grid", grid, "grid points per agent")->check(CLI::Range(std::size_t(2), std::size_t(100000000)));

    auto* report_cmd = app.add_subcommand("report", "participation thresholds and system gain");
    report_cmd->add_option("config", config_path, "scenario config")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }
    if (*seed_opt) flags.seed = seed;
    if (*trials_opt) flags.trials = trials;
    if (*workers_opt) flags.workers = workers;
    if (*out_opt) flags.out = out_dir;

    try {
        if (*run_cmd) return cmd_run(config_path, flags, out);
        if (*sweep_cmd) return cmd_sweep(config_path, flags, parameter, grid_text, out);
        if (*fig_cmd) return cmd_figures(flags, mu, sigma_prime, a_min, a_max, points, out);
        if (*check_cmd) {
            return cmd_check_equilibrium(config_path, flags, *grid_opt ? std::optional<std::size_t>(grid) : std::nullopt,
                                         out);
        }
        if (*report_cmd) return cmd_report(config_path, flags, out);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigInvalid) {
            err << "config error: " << e.what() << "\n";
            return kConfigError;
        }
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return kRuntimeError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kConfigError;
}

} // namespace repmech::cli
