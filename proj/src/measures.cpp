#include "pshlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "json.hpp"
#include "pshlab/errors.hpp"
#include "pshlab/hessian.hpp"

namespace pshlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool center_ok(const std::array<double, 4>& c, int n) {
    for (int a = 0; a < 4; ++a) {
        if (!std::isfinite(c[a])) return false;
        if (a >= 2 * n && c[a] != 0.0) return false;
    }
    return true;
}

// Shortest torus distance between x and c over the 2n active axes.
double torus_distance(const PeriodicGrid& grid, const std::array<double, 4>& x,
                      const std::array<double, 4>& c) {
    double r2 = 0.0;
    for (int a = 0; a < grid.dims(); ++a) {
        const double d = grid.wrap_delta(x[a], c[a]);
        r2 += d * d;
    }
    return std::sqrt(r2);
}

std::array<double, 4> node_point(const PeriodicGrid& grid, std::size_t i) {
    std::array<double, 4> x{0.0, 0.0, 0.0, 0.0};
    for (int a = 0; a < grid.dims(); ++a) x[a] = grid.coord(i, a);
    return x;
}

// Periodized log-distance sum: log of the distance to the pole and to its
// 3^(2n) - 1 nearest lattice translates, each distance floored at r_floor
// (r_floor = 0 keeps the genuine singularity, up to a denormal guard).
double periodized_log(const PeriodicGrid& grid, const std::array<double, 4>& x,
                      const std::array<double, 4>& center, double r_floor) {
    const int dims = grid.dims();
    const double period = grid.period();
    std::array<double, 4> principal{0.0, 0.0, 0.0, 0.0};
    for (int a = 0; a < dims; ++a) principal[a] = grid.wrap_delta(x[a], center[a]);

    double sum = 0.0;
    std::array<int, 4> tau{0, 0, 0, 0};
    const int combos = dims == 2 ? 9 : 81;
    for (int k = 0; k < combos; ++k) {
        int rem = k;
        double r2 = 0.0;
        for (int a = 0; a < dims; ++a) {
            tau[a] = rem % 3 - 1;
            rem /= 3;
            const double d = principal[a] + tau[a] * period;
            r2 += d * d;
        }
        const double r = std::max(std::sqrt(r2), std::max(r_floor, 1e-300));
        sum += std::log(r);
    }
    return sum;
}

double smooth_part(double amplitude, double x1, double period) {
    return amplitude * std::cos(2.0 * kPi * x1 / period);
}

// Smallest s >= 0 with H + s * beta >= 0 (beta positive definite).
double curvature_deficit(const Herm& H, const Herm& beta) {
    double lam_min = 0.0;
    if (H.n == 1) {
        lam_min = H.a11 / beta.a11;
    } else {
        const double db = beta.det();
        const double mix = mixed_det(H, beta);
        const double disc = std::max(mix * mix - db * H.det(), 0.0);
        lam_min = (mix - std::sqrt(disc)) / db;
    }
    return std::max(0.0, -lam_min);
}

double one_cell_cap(double value_at_spacing, double explicit_cap) {
    return explicit_cap > 0.0 ? explicit_cap : value_at_spacing;
}

// Peaked integrable profile used by the "orlicz" kind: in the Zygmund class
// with gauge x * (log(e + x))^m but in no L^p with p > 1.
double orlicz_profile(double r, int n, double m) {
    const double L = -std::log(std::max(r, 1e-300) / 2.0);
    return std::pow(std::max(r, 1e-300), -2.0 * n) * std::pow(L, -(m + 2.0));
}

nlohmann::json spec_to_json_impl(const DensitySpec& spec) {
    nlohmann::json j;
    j["kind"] = spec.kind;
    j["centers"] = nlohmann::json::array();
    for (const auto& c : spec.centers)
        j["centers"].push_back({c[0], c[1], c[2], c[3]});
    j["strengths"] = spec.strengths;
    j["p"] = spec.p;
    j["orlicz_m"] = spec.orlicz_m;
    j["q"] = spec.q;
    j["amplitude"] = spec.amplitude;
    j["truncation"] = spec.truncation;
    if (spec.g_factor) j["g_factor"] = spec_to_json_impl(*spec.g_factor);
    return j;
}

DensitySpec spec_from_json_impl(const nlohmann::json& j) {
    DensitySpec spec;
    spec.kind = j.value("kind", spec.kind);
    if (j.contains("centers")) {
        for (const auto& row : j.at("centers")) {
            if (!row.is_array() || row.size() != 4)
                throw IoError("density spec: each center must be a 4-vector");
            spec.centers.push_back(
                {row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                 row[3].get<double>()});
        }
    }
    if (j.contains("strengths"))
        spec.strengths = j.at("strengths").get<std::vector<double>>();
    spec.p = j.value("p", spec.p);
    spec.orlicz_m = j.value("orlicz_m", spec.orlicz_m);
    spec.q = j.value("q", spec.q);
    spec.amplitude = j.value("amplitude", spec.amplitude);
    spec.truncation = j.value("truncation", spec.truncation);
    if (j.contains("g_factor"))
        spec.g_factor =
            std::make_shared<DensitySpec>(spec_from_json_impl(j.at("g_factor")));
    return spec;
}

} // namespace

// ---------------------------------------------------------------------------
// DensitySpec
// ---------------------------------------------------------------------------

void DensitySpec::validate(int n) const {
    if (n != 1 && n != 2) throw ParameterError("density spec: n must be 1 or 2");
    const bool known = kind == "uniform" || kind == "manufactured" ||
                       kind == "lp-singular" || kind == "orlicz" ||
                       kind == "exp-singular";
    if (!known) throw ParameterError("density spec: unknown kind '" + kind + "'");
    if (!std::isfinite(truncation) || truncation < 0.0)
        throw ParameterError("density spec: truncation must be >= 0");

    for (const auto& c : centers)
        if (!center_ok(c, n))
            throw ParameterError(
                "density spec: centers must be finite with unused axes zero");

    if (kind == "manufactured") {
        const double budget = n == 1 ? 1.7 : 2.5; // sum of modulation coefficients
        if (!(amplitude >= 0.0) || amplitude * budget > 0.95)
            throw ParameterError(
                "density spec: manufactured amplitude leaves no positivity margin");
    }
    if (kind == "lp-singular" || kind == "exp-singular" || kind == "orlicz") {
        if (centers.empty())
            throw ParameterError("density spec: singular kind needs >= 1 center");
    }
    if (kind == "lp-singular" || kind == "exp-singular") {
        if (strengths.size() != centers.size())
            throw ParameterError(
                "density spec: need one strength per singularity center");
        for (double s : strengths)
            if (!std::isfinite(s))
                throw ParameterError("density spec: strengths must be finite");
    }
    if (kind == "lp-singular") {
        if (!(p > 1.0))
            throw ParameterError("density spec: lp-singular requires p > 1");
        for (double two_a : strengths) {
            if (!(two_a > 0.0))
                throw ParameterError("density spec: pole exponents must be > 0");
            if (!(two_a * p < 2.0 * n))
                throw ParameterError(
                    "density spec: pole exponent contradicts the declared L^p "
                    "class (need exponent * p < 2n)");
        }
    }
    if (kind == "orlicz" && !(orlicz_m > 0.0))
        throw ParameterError("density spec: orlicz gauge exponent must be > 0");
    if (kind == "exp-singular") {
        for (double c : strengths)
            if (!(c >= 0.0))
                throw ParameterError(
                    "density spec: Lelong coefficients must be >= 0");
        if (!(q > 1.0))
            throw ParameterError("density spec: exp-singular requires q > 1");
        if (g_factor) g_factor->validate(n);
    }
}

std::string density_spec_to_json(const DensitySpec& spec) {
    return spec_to_json_impl(spec).dump(2);
}

DensitySpec density_spec_from_json(const std::string& text) {
    try {
        return spec_from_json_impl(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("density spec: ") + e.what());
    }
}

std::string weight_spec_to_json(const WeightSpec& spec) {
    nlohmann::json j;
    j["lelong_data"] = nlohmann::json::array();
    for (const auto& d : spec.data)
        j["lelong_data"].push_back(
            {{"center", {d.center[0], d.center[1], d.center[2], d.center[3]}},
             {"coefficient", d.coefficient}});
    j["smooth_amplitude"] = spec.smooth_amplitude;
    return j.dump(2);
}

WeightSpec weight_spec_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        WeightSpec spec;
        spec.smooth_amplitude = j.value("smooth_amplitude", 0.0);
        if (j.contains("lelong_data")) {
            for (const auto& row : j.at("lelong_data")) {
                LelongDatum d;
                const auto& c = row.at("center");
                if (!c.is_array() || c.size() != 4)
                    throw IoError("weight spec: each center must be a 4-vector");
                for (int a = 0; a < 4; ++a) d.center[a] = c[a].get<double>();
                d.coefficient = row.at("coefficient").get<double>();
                spec.data.push_back(d);
            }
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("weight spec: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// build_density
// ---------------------------------------------------------------------------

GridMeasure build_density(const DensitySpec& spec, const PeriodicGrid& grid,
                          const HermitianBackground& bg,
                          std::vector<double>* truncation_log, double* raw_mass) {
    const int n = grid.n();
    if (bg.n() != n)
        throw ParameterError("build_density: grid and background dimensions differ");
    spec.validate(n);
    if (truncation_log) truncation_log->clear();

    const std::size_t count = grid.node_count();
    std::vector<double> w(count, 0.0);

    if (spec.kind == "uniform") {
        std::fill(w.begin(), w.end(), 1.0);
    } else if (spec.kind == "manufactured") {
        const double A = spec.amplitude;
        for (std::size_t i = 0; i < count; ++i) {
            const auto x = node_point(grid, i);
            const double tp = 2.0 * kPi / grid.period();
            double v = 1.0 + A * (std::cos(tp * x[0]) + 0.7 * std::cos(tp * x[1]));
            if (n == 2)
                v += A * (0.5 * std::cos(tp * x[2]) - 0.3 * std::cos(tp * x[3]));
            w[i] = v;
        }
    } else if (spec.kind == "lp-singular" || spec.kind == "orlicz") {
        const std::size_t m = spec.centers.size();
        std::vector<double> caps(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const double at_cell =
                spec.kind == "lp-singular"
                    ? std::pow(grid.spacing(), -spec.strengths[k])
                    : orlicz_profile(grid.spacing(), n, spec.orlicz_m);
            caps[k] = one_cell_cap(at_cell, spec.truncation);
            if (truncation_log) truncation_log->push_back(caps[k]);
        }
        for (std::size_t i = 0; i < count; ++i) {
            const auto x = node_point(grid, i);
            double v = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double r = torus_distance(grid, x, spec.centers[k]);
                const double raw =
                    spec.kind == "lp-singular"
                        ? std::pow(std::max(r, 1e-300), -spec.strengths[k])
                        : orlicz_profile(r, n, spec.orlicz_m);
                v += std::min(raw, caps[k]);
            }
            w[i] = v;
        }
    } else { // exp-singular
        std::vector<LelongDatum> data(spec.centers.size());
        for (std::size_t k = 0; k < data.size(); ++k)
            data[k] = LelongDatum{spec.centers[k], spec.strengths[k]};
        const QuasiPshWeight psi(grid, std::move(data), bg);
        if (truncation_log)
            for (double c : spec.strengths)
                truncation_log->push_back(std::pow(psi.truncation_floor(), -c));

        std::vector<double> g(count, 1.0);
        if (spec.g_factor)
            g = build_density(*spec.g_factor, grid, bg).weights();
        const auto& pv = psi.values();
        for (std::size_t i = 0; i < count; ++i) w[i] = g[i] * std::exp(-pv[i]);
    }

    const double total = pairwise_sum(w) * grid.cell_volume();
    if (!std::isfinite(total) || !(total > 0.0))
        throw NonNormalizable("density '" + spec.kind +
                              "' sampled to zero or non-finite mass");
    if (raw_mass) *raw_mass = total;
    GridMeasure mu(grid, std::move(w));
    mu.normalize_probability();
    return mu;
}

double skoda_integral(const GridFunction& phi, double lambda) {
    if (!phi.has_grid()) throw ParameterError("skoda_integral: empty field");
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw ParameterError("skoda_integral: lambda must be >= 0");
    std::vector<double> terms(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        terms[i] = std::exp(-lambda * phi[i]);
    return pairwise_sum(terms) * phi.grid().cell_volume();
}

// ---------------------------------------------------------------------------
// QuasiPshWeight
// ---------------------------------------------------------------------------

QuasiPshWeight::QuasiPshWeight(const PeriodicGrid& grid,
                               std::vector<LelongDatum> data,
                               const HermitianBackground& bg,
                               double smooth_amplitude)
    : grid_(std::make_shared<PeriodicGrid>(grid)),
      bg_(std::make_shared<HermitianBackground>(bg)),
      data_(std::move(data)),
      smooth_amplitude_(smooth_amplitude) {
    if (bg.n() != grid.n())
        throw ParameterError("quasi-psh weight: grid and background dimensions differ");
    if (!std::isfinite(smooth_amplitude_))
        throw ParameterError("quasi-psh weight: smooth amplitude must be finite");
    for (const auto& d : data_) {
        if (!center_ok(d.center, grid.n()))
            throw ParameterError(
                "quasi-psh weight: centers must be finite with unused axes zero");
        if (!(d.coefficient >= 0.0) || !std::isfinite(d.coefficient))
            throw ParameterError(
                "quasi-psh weight: Lelong coefficients must be >= 0");
    }

    r_floor_ = grid.spacing();
    GridFunction raw(grid, 0.0);
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const auto x = node_point(grid, i);
        double v = smooth_part(smooth_amplitude_, x[0], grid.period());
        for (const auto& d : data_)
            v += d.coefficient * periodized_log(grid, x, d.center, r_floor_);
        raw[i] = v;
    }
    shift_ = raw.max();
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] -= shift_;
    values_ = std::move(raw);
    values_.check_finite("quasi-psh weight samples");

    const HessianField H = complex_hessian(values_, bg);
    double worst = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i)
        worst = std::max(worst, curvature_deficit(H.at(i), bg.beta()));
    K_ = worst;
}

double QuasiPshWeight::evaluate_untruncated(const std::array<double, 4>& x) const {
    double v = smooth_part(smooth_amplitude_, x[0], grid_->period());
    for (const auto& d : data_)
        v += d.coefficient * periodized_log(*grid_, x, d.center, 0.0);
    return v - shift_;
}

// ---------------------------------------------------------------------------
// Lelong numbers and singular sets
// ---------------------------------------------------------------------------

double lelong_number(const QuasiPshWeight& psi, const std::array<double, 4>& x) {
    const PeriodicGrid& grid = psi.grid();
    const int dims = grid.dims();

    std::vector<std::array<double, 4>> dirs;
    if (dims == 2) {
        const int na = 128;
        dirs.reserve(na);
        for (int k = 0; k < na; ++k) {
            const double a = 2.0 * kPi * k / na;
            dirs.push_back({std::cos(a), std::sin(a), 0.0, 0.0});
        }
    } else {
        // Product sweep of the 3-sphere: (theta, phi1, phi2).
        for (int it = 0; it < 6; ++it) {
            const double th = (it + 0.5) * (0.5 * kPi / 6.0);
            for (int k1 = 0; k1 < 12; ++k1) {
                const double a1 = 2.0 * kPi * k1 / 12.0;
                for (int k2 = 0; k2 < 12; ++k2) {
                    const double a2 = 2.0 * kPi * k2 / 12.0;
                    dirs.push_back({std::cos(th) * std::cos(a1),
                                    std::cos(th) * std::sin(a1),
                                    std::sin(th) * std::cos(a2),
                                    std::sin(th) * std::sin(a2)});
                }
            }
        }
    }

    // Small radii keep the slope clean: the smooth residual of the finite
    // periodization contaminates the fit only at first order in r.
    constexpr int kLevels = 6;
    std::array<double, kLevels> logs{}, ring{};
    for (int j = 0; j < kLevels; ++j) {
        const double r = 0.01 * std::pow(0.5, j);
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& u : dirs) {
            std::array<double, 4> z{0.0, 0.0, 0.0, 0.0};
            for (int a = 0; a < 4; ++a) z[a] = x[a] + r * u[a];
            best = std::max(best, psi.evaluate_untruncated(z));
        }
        logs[j] = std::log(r);
        ring[j] = best;
    }

    double mx = 0.0, my = 0.0;
    for (int j = 0; j < kLevels; ++j) {
        mx += logs[j];
        my += ring[j];
    }
    mx /= kLevels;
    my /= kLevels;
    double sxx = 0.0, sxy = 0.0;
    for (int j = 0; j < kLevels; ++j) {
        sxx += (logs[j] - mx) * (logs[j] - mx);
        sxy += (logs[j] - mx) * (ring[j] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss = 0.0;
    for (int j = 0; j < kLevels; ++j) {
        const double e = ring[j] - (intercept + slope * logs[j]);
        ss += e * e;
    }
    const double rms = std::sqrt(ss / kLevels);
    if (rms > 0.25 * (1.0 + std::abs(slope)))
        throw FitUnstable("ring maxima are not affine in log r", rms);
    return slope;
}

namespace {

// Declared Lelong number per node: poles snapped to their nearest node, with
// coefficients at coinciding nodes accumulated.
std::map<std::size_t, double> snapped_coefficients(const QuasiPshWeight& psi) {
    const PeriodicGrid& grid = psi.grid();
    const int res = grid.res();
    std::map<std::size_t, double> agg;
    for (const auto& d : psi.lelong_data()) {
        std::array<int, 4> idx{0, 0, 0, 0};
        for (int a = 0; a < grid.dims(); ++a) {
            long k = std::lround(d.center[a] / grid.spacing());
            k %= res;
            if (k < 0) k += res;
            idx[a] = static_cast<int>(k);
        }
        agg[grid.pack(idx)] += d.coefficient;
    }
    return agg;
}

} // namespace

std::vector<std::uint8_t> singular_set(const QuasiPshWeight& psi, double c) {
    if (!std::isfinite(c)) throw ParameterError("singular_set: threshold not finite");
    const std::size_t count = psi.grid().node_count();
    std::vector<std::uint8_t> mask(count, 0);
    if (c <= 0.0) {
        // E_0 is everything: every point has Lelong number >= 0.
        std::fill(mask.begin(), mask.end(), 1);
        return mask;
    }
    const double tol = 1e-12 * (1.0 + std::abs(c));
    for (const auto& [idx, coeff] : snapped_coefficients(psi))
        if (coeff >= c - tol) mask[idx] = 1;
    return mask;
}

// ---------------------------------------------------------------------------
// relative_bound_check
// ---------------------------------------------------------------------------

RelativeBoundReport relative_bound_check(const GridFunction& phi,
                                         const QuasiPshWeight& psi,
                                         double alpha, double beta, double q,
                                         int max_cells) {
    if (!phi.has_grid()) throw ParameterError("relative_bound_check: empty field");
    const PeriodicGrid& grid = psi.grid();
    if (!phi.grid().same_layout(grid))
        throw ParameterError("relative_bound_check: phi and psi grids differ");
    if (!(q > 0.0)) throw ParameterError("relative_bound_check: q must be > 0");
    if (max_cells < 0) max_cells = 0;

    RelativeBoundReport rep;
    rep.alpha = alpha;
    rep.beta = beta;
    rep.q = q;
    rep.sup_phi = phi.max();
    rep.min_phi_global = phi.min();

    const auto& pv = psi.values();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < phi.size(); ++i)
        worst = std::min(worst, phi[i] - (alpha * pv[i] - beta));
    rep.worst_margin = worst;
    const double tol =
        1e-9 * (1.0 + std::abs(beta) + std::abs(alpha) * std::abs(pv.min()));
    rep.lower_bound_holds = worst >= -tol;

    const auto mask = singular_set(psi, 1.0 / q);
    std::vector<std::array<int, 4>> sing;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) sing.push_back(grid.unpack(i));
    rep.singular_nodes = sing.size();

    if (sing.empty()) {
        rep.min_phi_at_distance.assign(static_cast<std::size_t>(max_cells) + 1,
                                       rep.min_phi_global);
        return rep;
    }

    const int res = grid.res();
    std::vector<double> mins(static_cast<std::size_t>(max_cells) + 1,
                             std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const auto c = grid.unpack(i);
        int dist = std::numeric_limits<int>::max();
        for (const auto& s : sing) {
            int d = 0;
            for (int a = 0; a < grid.dims(); ++a) {
                int da = std::abs(c[a] - s[a]);
                da = std::min(da, res - da);
                d = std::max(d, da);
            }
            dist = std::min(dist, d);
        }
        const int top = std::min(dist, max_cells);
        for (int k = 0; k <= top; ++k) mins[k] = std::min(mins[k], phi[i]);
    }
    while (!mins.empty() && !std::isfinite(mins.back())) mins.pop_back();
    rep.min_phi_at_distance = std::move(mins);
    return rep;
}

} // namespace pshlab
