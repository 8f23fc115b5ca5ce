#include "sgm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "sgm/corpus.hpp"

namespace sgm {

void SearchSpace::validate() const {
    if (params.empty()) throw std::invalid_argument("search space has no parameters");
    for (const auto& p : params)
        if (!(p.min < p.max) || !std::isfinite(p.min) || !std::isfinite(p.max))
            throw std::invalid_argument("parameter '" + p.name + "' needs finite min < max");
}

std::vector<double> SearchSpace::midpoint() const {
    std::vector<double> m(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) m[i] = 0.5 * (params[i].min + params[i].max);
    return m;
}

std::vector<double> SearchSpace::clamp(std::vector<double> point) const {
    for (std::size_t i = 0; i < params.size(); ++i) point[i] = std::clamp(point[i], params[i].min, params[i].max);
    return point;
}

void SearchConfig::validate() const {
    if (iterations < 1 || subiterations < 1) throw std::invalid_argument("iterations and subiterations must be >= 1");
    if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("decay must lie in (0,1]");
    if (ties_kept < 1) throw std::invalid_argument("ties_kept must be >= 1");
}

SearchError::SearchError(const std::string& what, std::vector<double> point)
    : std::runtime_error(what), point_(std::move(point)) {}

namespace {

std::string describe(const std::vector<double>& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + format_double(p[i]);
    return s + ")";
}

double evaluate(const Objective& f, const std::vector<double>& point) {
    double v = 0.0;
    try {
        v = f(point);
    } catch (const std::exception& e) {
        throw SearchError("objective failed at " + describe(point) + ": " + e.what(), point);
    }
    if (std::isnan(v)) throw SearchError("objective returned NaN at " + describe(point), point);
    return v;
}

void evaluate_all(const Objective& f, const std::vector<std::vector<double>>& points, std::vector<double>& values,
                  std::size_t threads) {
    values.assign(points.size(), 0.0);
    threads = std::min(std::max<std::size_t>(threads, 1), points.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i) values[i] = evaluate(f, points[i]);
        return;
    }
    std::vector<std::exception_ptr> errors(points.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < points.size(); i += threads) {
                try {
                    values[i] = evaluate(f, points[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

SearchResult random_search(const Objective& objective, const SearchSpace& space, const SearchConfig& cfg) {
    space.validate();
    cfg.validate();
    const std::size_t dims = space.size();
    std::vector<double> start = cfg.start ? *cfg.start : space.midpoint();
    if (start.size() != dims) throw std::invalid_argument("start point has the wrong dimension");
    start = space.clamp(std::move(start));

    std::vector<double> sigma(dims);
    for (std::size_t i = 0; i < dims; ++i) sigma[i] = 0.5 * (space.params[i].max - space.params[i].min);

    SearchResult r;
    r.start_value = evaluate(objective, start);
    r.best_value = r.start_value;
    r.best_points = {start};
    r.trace.reserve(cfg.iterations * cfg.subiterations);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> candidates(cfg.subiterations);
    std::vector<double> values;

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        for (std::size_t s = 0; s < cfg.subiterations; ++s) {
            std::vector<double> d = r.best_points[s % r.best_points.size()];
            for (std::size_t i = 0; i < dims; ++i) d[i] += sigma[i] * normal(rng);
            candidates[s] = space.clamp(std::move(d));
        }
        evaluate_all(objective, candidates, values, cfg.threads);

        double top = r.best_value;
        for (double v : values) top = std::max(top, v);
        std::vector<std::vector<double>> kept;
        for (std::size_t s = 0; s < cfg.subiterations; ++s) {
            r.trace.push_back({it, s, candidates[s], values[s]});
            if (values[s] == top && kept.size() < cfg.ties_kept) kept.push_back(candidates[s]);
        }
        if (top == r.best_value)
            for (const auto& p : r.best_points)
                if (kept.size() < cfg.ties_kept) kept.push_back(p);
        if (!kept.empty()) {
            r.best_points = std::move(kept);
            r.best_value = top;
        }
        for (double& sd : sigma) sd *= cfg.decay;
    }
    return r;
}

SearchParam parse_search_param(const std::string& s) {
    const auto a = s.find(':');
    const auto b = s.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
        throw std::invalid_argument("expected name:min:max, got '" + s + "'");
    SearchParam p;
    p.name = s.substr(0, a);
    try {
        p.min = std::stod(s.substr(a + 1, b - a - 1));
        p.max = std::stod(s.substr(b + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("bad bounds in '" + s + "'");
    }
    return p;
}

}  // namespace sgm
