#include "sgm/settings.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace sgm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw std::invalid_argument("setting " + key + ": bad number '" + value + "'");
    return v;
}

}  // namespace

const std::vector<std::string>& Settings::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k = {
            "smooth.discount", "smooth.beta",    "smooth.delta",      "smooth.mu",       "smooth.mu_mode",
            "smooth.background", "smooth.upsilon_bg", "smooth.bg_delta",
            "weighting.phi",   "weighting.upsilon", "weighting.mode", "weighting.idf",
            "model.kind",      "model.prior_scale", "model.length_scale", "model.powerset",
            "bm25.k1",         "bm25.b",          "bm25.k3",           "bm25.idf",
        };
        for (const char* level : {"tdm.doc.", "tdm.label.", "tdm.coll."})
            for (const char* field : {"discount", "beta", "delta", "mu", "mu_mode"})
                k.push_back(std::string(level) + field);
        return k;
    }();
    return keys;
}

void Settings::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw std::invalid_argument("unknown setting '" + key + "'");
    values_[key] = value;
}

std::optional<std::string> Settings::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

double Settings::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? to_number(key, *v) : fallback;
}

bool Settings::get_bool(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw std::invalid_argument("setting " + key + ": expected a boolean, got '" + *v + "'");
}

Settings Settings::parse(std::istream& in) {
    Settings s;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("settings line " + std::to_string(line_no) + ": expected key=value");
        s.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return s;
}

Settings Settings::read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open settings file " + path);
    return parse(in);
}

namespace {

DiscountSpec discount_from(const Settings& s, const std::string& prefix, DiscountSpec fallback) {
    DiscountSpec d = fallback;
    if (const auto k = s.get(prefix + "discount")) d.kind = parse_discount_kind(*k);
    d.beta = s.get_double(prefix + "beta", d.beta);
    d.delta = s.get_double(prefix + "delta", d.delta);
    return d;
}

SmoothingConfig level_from(const Settings& s, const std::string& prefix, SmoothingConfig fallback) {
    SmoothingConfig c = fallback;
    c.discount = discount_from(s, prefix, fallback.discount);
    c.mu = s.get_double(prefix + "mu", c.mu);
    if (const auto m = s.get(prefix + "mu_mode")) c.mu_scale = parse_mu_scale(*m);
    return c;
}

}  // namespace

ModelSettings resolve(const Settings& s) {
    ModelSettings m;
    if (const auto k = s.get("model.kind")) {
        if (*k == "mnb") m.kind = ModelKind::mnb;
        else if (*k == "tdm") m.kind = ModelKind::tdm;
        else throw std::invalid_argument("unknown model kind '" + *k + "'");
    }

    SmoothingConfig base;
    base.mu = 1.0;
    m.smoothing = level_from(s, "smooth.", base);
    if (const auto b = s.get("smooth.background")) m.smoothing.background.kind = parse_background_kind(*b);
    m.smoothing.background.upsilon = s.get_double("smooth.upsilon_bg", 0.0);
    m.smoothing.background.delta = s.get_double("smooth.bg_delta", m.smoothing.discount.delta);

    SmoothingConfig doc;
    doc.mu = 1.0;
    SmoothingConfig jm;
    jm.discount = DiscountSpec::linear(0.5);
    m.tdm.document = level_from(s, "tdm.doc.", doc);
    m.tdm.label = level_from(s, "tdm.label.", jm);
    m.tdm.collection = level_from(s, "tdm.coll.", jm);

    m.weighting.phi = s.get_double("weighting.phi", 0.0);
    m.weighting.upsilon = s.get_double("weighting.upsilon", 0.0);
    if (const auto w = s.get("weighting.mode")) m.weighting.mode = parse_weighting_mode(*w);
    if (const auto i = s.get("weighting.idf")) m.weighting.idf_variant = parse_idf_variant(*i);

    m.prior_scale = s.get_double("model.prior_scale", 1.0);
    m.length_scale = s.get_double("model.length_scale", 0.0);
    m.powerset = s.get_bool("model.powerset", true);

    m.bm25.k1 = s.get_double("bm25.k1", m.bm25.k1);
    m.bm25.b = s.get_double("bm25.b", m.bm25.b);
    m.bm25.k3 = s.get_double("bm25.k3", m.bm25.k3);
    if (const auto i = s.get("bm25.idf")) m.bm25.idf_variant = parse_idf_variant(*i);

    m.weighting.validate();
    m.bm25.validate();
    if (m.kind == ModelKind::mnb) {
        m.smoothing.validate();
    } else {
        m.tdm.document.validate();
        m.tdm.label.validate();
        m.tdm.collection.validate();
    }
    if (!(m.prior_scale >= 0.0)) throw std::invalid_argument("model.prior_scale must be >= 0");
    if (!(m.length_scale >= 0.0)) throw std::invalid_argument("model.length_scale must be >= 0");
    return m;
}

GenerativeModel train_model(const Collection& train, const ModelSettings& cfg) {
    std::optional<PowersetCodec> codec;
    const Collection* data = &train;
    Collection encoded;
    if (cfg.powerset) {
        auto [c, k] = powerset_encode(train);
        encoded = std::move(c);
        codec = std::move(k);
        data = &encoded;
    }
    GenerativeModel model = cfg.kind == ModelKind::mnb ? train_mnb(*data, cfg.smoothing, cfg.weighting)
                                                       : train_tdm(*data, cfg.tdm, cfg.weighting);
    model.codec = std::move(codec);
    if (cfg.prior_scale != 1.0) apply_prior_scaling(model, cfg.prior_scale);
    if (cfg.length_scale != 0.0) fit_length_model(model, *data, cfg.length_scale);
    validate(model);
    return model;
}

}  // namespace sgm
