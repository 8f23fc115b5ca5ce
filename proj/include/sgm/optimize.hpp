#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgm {

struct SearchParam {
    std::string name;
    double min = 0.0;
    double max = 1.0;
};

struct SearchSpace {
    std::vector<SearchParam> params;

    void validate() const;
    std::size_t size() const { return params.size(); }
    std::vector<double> midpoint() const;
    std::vector<double> clamp(std::vector<double> point) const;
};

struct SearchConfig {
    std::size_t iterations = 50;
    std::size_t subiterations = 8;
    double decay = 0.9;
    std::size_t ties_kept = 1;  // X
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::optional<std::vector<double>> start;  // box midpoint when absent

    void validate() const;
};

struct TraceEntry {
    std::size_t iteration;
    std::size_t subiteration;
    std::vector<double> point;
    double value;
};

struct SearchResult {
    std::vector<std::vector<double>> best_points;  // up to X tied points
    double best_value;
    double start_value;
    std::vector<TraceEntry> trace;  // one entry per candidate, in draw order
};

/// Objective failure, carrying the point that was being evaluated.
class SearchError : public std::runtime_error {
  public:
    SearchError(const std::string& what, std::vector<double> point);
    const std::vector<double>& point() const { return point_; }

  private:
    std::vector<double> point_;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Gaussian random search maximizing `objective` over the box. Each
/// iteration perturbs the kept points with N(0, sigma^2) steps, sigma
/// starting at half the range and shrinking by `decay` per iteration.
/// Candidates at least as good as the current best are accepted.
SearchResult random_search(const Objective& objective, const SearchSpace& space, const SearchConfig& cfg);

/// Parses "name:min:max".
SearchParam parse_search_param(const std::string& s);

}  // namespace sgm
