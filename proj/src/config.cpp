#include "pani/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pani/errors.hpp"

namespace pani {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) fail(where, "unknown key '" + it.key() + "'");
    }
}

double num(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
    if (!j[key].is_number()) fail(where, std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

double num_or(const json& j, const char* key, double dflt) {
    return j.contains(key) ? j[key].get<double>() : dflt;
}

std::vector<double> num_list(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key) || !j[key].is_array())
        fail(where, std::string("'") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j[key]) {
        if (!v.is_number()) fail(where, std::string("'") + key + "' must be numeric");
        out.push_back(v.get<double>());
    }
    return out;
}

Phi parse_phi(const json& j, const std::string& where) {
    check_keys(j, where, {"kind", "value", "exponent"});
    if (!j.contains("kind")) fail(where, "missing 'kind'");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "identity") return Phi::identity();
    if (kind == "constant") return Phi::constant(num(j, where, "value"));
    if (kind == "power") return Phi::power(num(j, where, "exponent"));
    fail(where, "unknown shape kind '" + kind + "'");
}

WeightLaw parse_law(const json& j) {
    const std::string where = "law";
    check_keys(j, where,
               {"kind", "w_star", "values", "probs", "alpha", "breakpoints", "densities"});
    if (!j.contains("kind")) fail(where, "missing 'kind'");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "uniform") return WeightLaw::uniform(num_or(j, "w_star", 1.0));
    if (kind == "beta_poly") return WeightLaw::beta_poly(num(j, where, "alpha"));
    if (kind == "atoms")
        return WeightLaw::atoms(num_list(j, where, "values"), num_list(j, where, "probs"));
    if (kind == "piecewise")
        return WeightLaw::piecewise(num_list(j, where, "breakpoints"),
                                    num_list(j, where, "densities"));
    fail(where, "unknown law kind '" + kind + "'");
}

FitnessModel parse_model(const json& j, const WeightLaw& law) {
    const std::string where = "model";
    check_keys(j, where,
               {"form", "c", "c_g", "c_h", "alpha", "beta", "phi1", "phi2", "h", "g"});
    if (!j.contains("form")) fail(where, "missing 'form'");
    std::string form = j["form"].get<std::string>();
    if (form == "constant")
        return FitnessModel::constant(num(j, where, "c_g"), num(j, where, "c_h"));
    if (form == "random_recursive")
        return FitnessModel::random_recursive(num_or(j, "c_h", 1.0));
    if (form == "classic_pa") return FitnessModel::classic_pa(num(j, where, "c"));
    if (form == "bianconi_barabasi")
        return FitnessModel::bianconi_barabasi(law.w_star());
    if (form == "additive") return FitnessModel::additive(law.w_star());
    if (form == "product") {
        if (!j.contains("phi1") || !j.contains("phi2")) fail(where, "product needs phi1/phi2");
        Phi h = j.contains("h") ? parse_phi(j["h"], where + ".h") : Phi::identity();
        return FitnessModel::product(parse_phi(j["phi1"], where + ".phi1"),
                                     parse_phi(j["phi2"], where + ".phi2"), h,
                                     law.w_star());
    }
    if (form == "separable_sum") {
        if (!j.contains("phi1") || !j.contains("phi2"))
            fail(where, "separable_sum needs phi1/phi2");
        Phi h = j.contains("h") ? parse_phi(j["h"], where + ".h") : Phi::identity();
        return FitnessModel::separable_sum(num(j, where, "alpha"), num(j, where, "beta"),
                                           parse_phi(j["phi1"], where + ".phi1"),
                                           parse_phi(j["phi2"], where + ".phi2"), h,
                                           law.w_star());
    }
    if (form == "table") {
        if (!law.is_atomic()) fail(where, "table form needs an atomic law");
        if (!j.contains("g") || !j["g"].is_array()) fail(where, "table needs a 'g' matrix");
        auto hv = num_list(j, where, "h");
        const auto s = static_cast<Eigen::Index>(law.atom_values().size());
        Eigen::MatrixXd G(s, s);
        if (static_cast<Eigen::Index>(j["g"].size()) != s)
            fail(where, "'g' must be s x s for s atoms");
        for (Eigen::Index i = 0; i < s; ++i) {
            const auto& row = j["g"][static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != s)
                fail(where, "'g' must be s x s for s atoms");
            for (Eigen::Index c = 0; c < s; ++c)
                G(i, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
        Eigen::VectorXd H(s);
        if (static_cast<Eigen::Index>(hv.size()) != s) fail(where, "'h' must have s entries");
        for (Eigen::Index i = 0; i < s; ++i) H(i) = hv[static_cast<std::size_t>(i)];
        return FitnessModel::table(G, H, law.atom_values());
    }
    fail(where, "unknown model form '" + form + "'");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // recover line/column from the byte offset
        int line = 1, col = 1;
        for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(std::string("parse error: ") + e.what(), line, col);
    }
    check_keys(j, "config", {"law", "model", "run", "condensation", "urn", "sweep"});
    if (!j.contains("law")) fail("config", "missing 'law' section");
    if (!j.contains("model")) fail("config", "missing 'model' section");

    ExperimentConfig cfg;
    cfg.law = parse_law(j["law"]);
    cfg.model = parse_model(j["model"], cfg.law);
    cfg.model.validate(cfg.law);

    if (j.contains("run")) {
        const auto& r = j["run"];
        check_keys(r, "run",
                   {"n_steps", "replicas", "master_seed", "bins", "k_max", "stride",
                    "threads"});
        RunConfig run;
        run.n_steps = static_cast<std::int64_t>(num(r, "run", "n_steps"));
        run.replicas = static_cast<int>(num_or(r, "replicas", 1));
        run.master_seed = static_cast<std::uint64_t>(num_or(r, "master_seed", 0));
        run.bins = static_cast<int>(num_or(r, "bins", 64));
        run.k_max = static_cast<int>(num_or(r, "k_max", 64));
        run.stride = static_cast<std::int64_t>(num_or(r, "stride", 0));
        run.threads = static_cast<int>(num_or(r, "threads", 0));
        run.validate();
        cfg.run = run;
    }
    if (j.contains("condensation")) {
        const auto& c = j["condensation"];
        check_keys(c, "condensation", {"eps_grid", "n_grid"});
        CondensationSection sec;
        sec.eps_grid = num_list(c, "condensation", "eps_grid");
        for (double n : num_list(c, "condensation", "n_grid"))
            sec.n_grid.push_back(static_cast<std::int64_t>(n));
        if (sec.eps_grid.empty() || sec.n_grid.empty())
            fail("condensation", "grids must be nonempty");
        cfg.condensation = sec;
    }
    if (j.contains("urn")) {
        const auto& u = j["urn"];
        check_keys(u, "urn", {"m", "k_prime"});
        UrnSection sec;
        sec.m = static_cast<int>(num_or(u, "m", 2));
        sec.k_prime = static_cast<int>(num_or(u, "k_prime", 4));
        if (sec.m < 0 || sec.k_prime < 1) fail("urn", "bad m or k_prime");
        cfg.urn = sec;
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        check_keys(s, "sweep", {"parameter", "from", "to", "count"});
        SweepSection sec;
        sec.parameter = s.contains("parameter") ? s["parameter"].get<std::string>() : "";
        sec.from = num(s, "sweep", "from");
        sec.to = num(s, "sweep", "to");
        sec.count = static_cast<int>(num(s, "sweep", "count"));
        if (sec.parameter != "alpha") fail("sweep", "only the 'alpha' parameter is supported");
        if (sec.count < 2 || sec.count > 10000) fail("sweep", "count outside [2, 1e4]");
        cfg.sweep = sec;
    }
    cfg.canonical_text = j.dump();
    cfg.config_hash = fnv1a(cfg.canonical_text);
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace pani
