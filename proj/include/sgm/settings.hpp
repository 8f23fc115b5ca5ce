#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgm/baselines.hpp"
#include "sgm/models.hpp"

namespace sgm {

/// Flat key=value settings. Only known keys are accepted.
class Settings {
  public:
    /// Reads `key = value` lines; `#` starts a comment.
    static Settings parse(std::istream& in);
    static Settings read(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    const std::map<std::string, std::string>& values() const { return values_; }

    static const std::vector<std::string>& known_keys();

  private:
    std::map<std::string, std::string> values_;
};

/// Everything needed to train and apply a model, resolved from Settings.
struct ModelSettings {
    ModelKind kind = ModelKind::mnb;
    SmoothingConfig smoothing;
    TdmSmoothing tdm;
    WeightingConfig weighting;
    double prior_scale = 1.0;
    double length_scale = 0.0;
    bool powerset = true;
    Bm25Params bm25;
};

ModelSettings resolve(const Settings& s);

/// Trains per `cfg`, applying Powerset encoding, prior scaling and the
/// length model as configured.
GenerativeModel train_model(const Collection& train, const ModelSettings& cfg);

}  // namespace sgm
