#pragma once
/*
 * JSON scenario documents.
 *
 * Keys mirror NetworkScenario. Per-user keys accept a scalar (broadcast to
 * every user) or a list of length n_users. Unknown keys are rejected.
 *
 *   required   n_users, mod_variance_snu, distance_km, excess_noise_snu, beta
 *   per-user   mod_variance_snu, distance_km, attenuation_db_per_km (0.2),
 *              excess_noise_snu, det_efficiency (1), det_electronic_noise_snu (0),
 *              beta, transmittance_override (unset)
 *   network    isolation_kind ("perfect", or "nearest_neighbor_decay" when
 *              isolation_db is present), isolation_db (-50), rep_rate_hz (1e9),
 *              keep_fraction (1), scheme ("frequency"), multiplex_divisor (unset)
 *   regime     regime ("asymptotic"), n_block (1e10), eps_pe, eps_smooth,
 *              eps_pa, eps_cor (1e-10 each), pe_fraction (0.5)
 *   other      description (free text, ignored)
 */

#include <algorithm>
#include <array>
#include <optional>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cvqn/errors.hpp"
#include "cvqn/network.hpp"

namespace cvqn {

inline constexpr std::array<std::string_view, 23> kScenarioKeys = {
    "n_users",        "mod_variance_snu",  "distance_km", "attenuation_db_per_km", "excess_noise_snu",
    "det_efficiency", "det_electronic_noise_snu", "isolation_db", "isolation_kind", "beta",
    "rep_rate_hz",    "keep_fraction",     "scheme",      "regime",                "n_block",
    "eps_pe",         "eps_smooth",        "eps_pa",      "eps_cor",               "pe_fraction",
    "transmittance_override", "multiplex_divisor", "description"};

namespace detail {

// 1-based line of the first occurrence of "key" in the document, 0 if absent.
inline int line_of_key(std::string_view text, std::string_view key) {
    const std::string needle = "\"" + std::string(key) + "\"";
    const auto pos = text.find(needle);
    if (pos == std::string_view::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class ScenarioReader {
public:
    ScenarioReader(const nlohmann::json& doc, std::string_view text, std::string source)
        : doc_(doc), text_(text), source_(std::move(source)) {}

    [[noreturn]] void fail(std::string_view key, const std::string& msg) const {
        std::string where = source_;
        if (const int line = line_of_key(text_, key)) where += ":" + std::to_string(line);
        throw Error(ErrorKind::ParseError, where + ": key '" + std::string(key) + "': " + msg);
    }

    bool has(std::string_view key) const { return doc_.contains(std::string(key)); }

    double number(std::string_view key, std::optional<double> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            fail(key, "missing required key");
        }
        const auto& v = doc_.at(std::string(key));
        if (!v.is_number()) fail(key, "expected a number, got " + std::string(v.type_name()));
        return v.get<double>();
    }

    std::string text(std::string_view key, std::string_view fallback) const {
        if (!has(key)) return std::string(fallback);
        const auto& v = doc_.at(std::string(key));
        if (!v.is_string()) fail(key, "expected a string, got " + std::string(v.type_name()));
        return v.get<std::string>();
    }

    std::vector<double> per_user(std::string_view key, int n, std::optional<double> fallback) const {
        if (!has(key)) {
            if (fallback) return std::vector<double>(static_cast<std::size_t>(n), *fallback);
            fail(key, "missing required key");
        }
        const auto& v = doc_.at(std::string(key));
        if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(n), v.get<double>());
        if (!v.is_array()) fail(key, "expected a number or a list of numbers");
        if (v.size() != static_cast<std::size_t>(n))
            fail(key, "list has " + std::to_string(v.size()) + " entries, n_users is " + std::to_string(n));
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(key, "list entries must be numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    const std::string& source() const { return source_; }

private:
    const nlohmann::json& doc_;
    std::string_view text_;
    std::string source_;
};

template <class Enum, std::size_t K>
Enum parse_enum(const ScenarioReader& r, std::string_view key, std::string_view fallback,
                const std::array<Enum, K>& values) {
    const std::string s = r.text(key, fallback);
    for (Enum e : values)
        if (to_string(e) == s) return e;
    std::string allowed;
    for (Enum e : values) allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(e));
    r.fail(key, "unknown value '" + s + "' (expected one of " + allowed + ")");
}

}  // namespace detail

/// Parses and validates a scenario document. `source` names it in diagnostics.
inline NetworkScenario parse_scenario(std::string_view text, const std::string& source = "<scenario>") {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto offset = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
        throw Error(ErrorKind::ParseError, source + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
    if (!doc.is_object()) throw Error(ErrorKind::ParseError, source + ": top level must be an object");

    const detail::ScenarioReader r(doc, text, source);
    for (const auto& [key, _] : doc.items())
        if (std::find(kScenarioKeys.begin(), kScenarioKeys.end(), key) == kScenarioKeys.end())
            r.fail(key, "unknown key");

    const double n_raw = r.number("n_users");
    if (n_raw != std::floor(n_raw) || n_raw < 1 || n_raw > 4096) r.fail("n_users", "must be an integer in [1, 4096]");
    const int n = static_cast<int>(n_raw);

    NetworkScenario s;
    s.n_users = n;
    s.mod_variance_snu = r.per_user("mod_variance_snu", n, std::nullopt);
    s.beta = r.per_user("beta", n, std::nullopt);
    const auto dist = r.per_user("distance_km", n, std::nullopt);
    const auto att = r.per_user("attenuation_db_per_km", n, kDefaultAttenuationDbPerKm);
    const auto eps = r.per_user("excess_noise_snu", n, std::nullopt);
    const auto eta = r.per_user("det_efficiency", n, 1.0);
    const auto vel = r.per_user("det_electronic_noise_snu", n, 0.0);
    std::vector<double> over;
    if (r.has("transmittance_override")) over = r.per_user("transmittance_override", n, std::nullopt);
    for (int j = 0; j < n; ++j) {
        const auto i = static_cast<std::size_t>(j);
        ChannelParams ch;
        ch.distance_km = dist[i];
        ch.attenuation_db_per_km = att[i];
        ch.excess_noise_snu = eps[i];
        ch.det_efficiency = eta[i];
        ch.det_electronic_noise_snu = vel[i];
        if (!over.empty()) ch.transmittance_override = over[i];
        s.channels.push_back(ch);
    }

    const auto kind = detail::parse_enum(r, "isolation_kind", r.has("isolation_db") ? "nearest_neighbor_decay" : "perfect",
                                         std::array{IsolationKind::perfect, IsolationKind::nearest_neighbor_decay});
    s.isolation.kind = kind;
    s.isolation.isolation_db = r.number("isolation_db", -50.0);
    s.rep_rate_hz = r.number("rep_rate_hz", 1e9);
    s.keep_fraction = r.number("keep_fraction", 1.0);
    s.scheme = detail::parse_enum(r, "scheme", "frequency", std::array{Scheme::frequency, Scheme::temporal, Scheme::splitter});
    if (r.has("multiplex_divisor")) s.multiplex_divisor_override = r.number("multiplex_divisor");

    s.regime.regime = detail::parse_enum(r, "regime", "asymptotic",
                                         std::array{Regime::asymptotic, Regime::finite_size, Regime::composable,
                                                    Regime::composable_finite_size});
    s.regime.n_block = r.number("n_block", 1e10);
    s.regime.eps_pe = r.number("eps_pe", 1e-10);
    s.regime.eps_smooth = r.number("eps_smooth", 1e-10);
    s.regime.eps_pa = r.number("eps_pa", 1e-10);
    s.regime.eps_cor = r.number("eps_cor", 1e-10);
    s.regime.pe_fraction = r.number("pe_fraction", 0.5);
    (void)r.text("description", "");

    try {
        s.validate();
    } catch (const Error& e) {
        throw Error(e.kind(), source + ": " + e.what());
    }
    return s;
}

inline NetworkScenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

/// Inverse of parse_scenario. Per-user lists that are uniform are written as scalars.
inline nlohmann::json to_json(const NetworkScenario& s) {
    nlohmann::json j;
    auto put = [&](const char* key, const std::vector<double>& v) {
        if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); }))
            j[key] = v.front();
        else
            j[key] = v;
    };
    auto field = [&](auto get) {
        std::vector<double> v;
        for (const auto& ch : s.channels) v.push_back(get(ch));
        return v;
    };
    j["n_users"] = s.n_users;
    put("mod_variance_snu", s.mod_variance_snu);
    put("distance_km", field([](const ChannelParams& c) { return c.distance_km; }));
    put("attenuation_db_per_km", field([](const ChannelParams& c) { return c.attenuation_db_per_km; }));
    put("excess_noise_snu", field([](const ChannelParams& c) { return c.excess_noise_snu; }));
    put("det_efficiency", field([](const ChannelParams& c) { return c.det_efficiency; }));
    put("det_electronic_noise_snu", field([](const ChannelParams& c) { return c.det_electronic_noise_snu; }));
    if (std::any_of(s.channels.begin(), s.channels.end(), [](const auto& c) { return c.transmittance_override.has_value(); }))
        put("transmittance_override", field([](const ChannelParams& c) { return c.transmittance_override.value_or(1.0); }));
    put("beta", s.beta);
    j["isolation_kind"] = std::string(to_string(s.isolation.kind));
    j["isolation_db"] = s.isolation.isolation_db;
    j["rep_rate_hz"] = s.rep_rate_hz;
    j["keep_fraction"] = s.keep_fraction;
    j["scheme"] = std::string(to_string(s.scheme));
    if (s.multiplex_divisor_override) j["multiplex_divisor"] = *s.multiplex_divisor_override;
    j["regime"] = std::string(to_string(s.regime.regime));
    j["n_block"] = s.regime.n_block;
    j["eps_pe"] = s.regime.eps_pe;
    j["eps_smooth"] = s.regime.eps_smooth;
    j["eps_pa"] = s.regime.eps_pa;
    j["eps_cor"] = s.regime.eps_cor;
    j["pe_fraction"] = s.regime.pe_fraction;
    return j;
}

}  // namespace cvqn
