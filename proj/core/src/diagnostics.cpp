#include "mixlab/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mixlab/parallel.hpp"

namespace mixlab {

double MixParams::omega() const { return std::sqrt((1.0 + gamma_bar) / 2.0); }

void MixParams::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(kappa)) throw std::invalid_argument("kappa must be in (0,1)");
    if (!in_unit(gamma_bar)) throw std::invalid_argument("gamma_bar must be in (0,1)");
    if (!in_unit(alpha)) throw std::invalid_argument("alpha must be in (0,1)");
}

// -- radius ladder ------------------------------------------------------------

double RadiusLadder::rung(double h, int idx) {
    static const double quarter[4] = {1.0, 0x1.306fe0a31b715p+0,  // 2^(1/4)
                                      0x1.6a09e667f3bcdp+0,       // 2^(1/2)
                                      0x1.ae89f995ad3adp+0};      // 2^(3/4)
    return std::ldexp(quarter[idx & 3], idx >> 2) * h;
}

RadiusLadder RadiusLadder::geometric(double h, double top) {
    if (!(h > 0.0) || !(top >= h)) throw std::invalid_argument("bad radius ladder range");
    RadiusLadder ladder;
    ladder.h = h;
    for (int idx = 0;; ++idx) {
        const double r = rung(h, idx);
        ladder.radii.push_back(r);
        if (r >= top) break;
        if (idx > 256) throw std::logic_error("radius ladder runaway");
    }
    return ladder;
}

// -- rasterized disk ------------------------------------------------------------

DiskSpans DiskSpans::build(double r, double h) {
    DiskSpans spans;
    const double rr = r * r;
    // Cell membership: dx*dx + dy*dy < r*r with dx = (t+0.5)h, dy = (k+0.5)h.
    const auto inside = [&](int t, int k) {
        const double dx = (t + 0.5) * h;
        const double dy = (k + 0.5) * h;
        return dx * dx + dy * dy < rr;
    };
    for (int k = 0;; ++k) {
        if (!inside(0, k)) break;  // row has no cells; wider rows cannot reappear
        const double dy = (k + 0.5) * h;
        const double wf = std::sqrt(std::max(0.0, rr - dy * dy)) / h;
        int w = std::max(1, int(wf));
        while (inside(w, k)) ++w;           // w = smallest excluded offset
        while (w > 0 && !inside(w - 1, k)) --w;
        spans.half.push_back(w);
        spans.total_cells += 4 * std::int64_t(w);  // two rows (up/down), two sides
    }
    return spans;
}

int dilation_steps(double r, double h) { return int(std::floor(r / h)); }

// -- geometric mixing scale ------------------------------------------------------

namespace {

// One scan backend per field mode; both share the identical violation
// predicate |S| >= kappa * N_full * max|rho| with S the clipped span sum.
struct BinaryScan {
    const SignSat& sat;
    int n;

    std::int64_t ball_sum(const DiskSpans& spans, int gi, int gj) const {
        const int K = int(spans.half.size());
        std::int64_t s = 0;
        const int up = std::min(K, n - gj);
        for (int k = 0; k < up; ++k) {
            const int w = spans.half[std::size_t(k)];
            const int a = std::max(gi - w, 0), b = std::min(gi + w, n);
            if (a < b) s += sat.row_span(gj + k, a, b);
        }
        const int down = std::min(K, gj);
        for (int k = 0; k < down; ++k) {
            const int w = spans.half[std::size_t(k)];
            const int a = std::max(gi - w, 0), b = std::min(gi + w, n);
            if (a < b) s += sat.row_span(gj - 1 - k, a, b);
        }
        return s;
    }

    // Upper bound on |ball_sum| from the disk's bounding rectangle:
    // |P - M| <= max(P, M) <= (cells + |sum|)/2 over the clipped rectangle.
    double ball_bound(const DiskSpans& spans, int gi, int gj) const {
        const int K = int(spans.half.size());
        const int w0 = spans.half.empty() ? 0 : spans.half[0];
        const int i0 = std::max(gi - w0, 0), i1 = std::min(gi + w0, n);
        const int j0 = std::max(gj - K, 0), j1 = std::min(gj + K, n);
        if (i0 >= i1 || j0 >= j1) return 0.0;
        const double cells = double(i1 - i0) * double(j1 - j0);
        const double s = double(sat.rect_sum(i0, i1, j0, j1));
        return 0.5 * (cells + std::abs(s));
    }

    double ball_abs_sum(const DiskSpans& spans, int gi, int gj) const {
        return std::abs(double(ball_sum(spans, gi, gj)));
    }
};

struct ContinuousScan {
    const ValueSat& sat;
    int n;

    double ball_abs_sum(const DiskSpans& spans, int gi, int gj) const {
        const int K = int(spans.half.size());
        double s = 0.0;
        const int up = std::min(K, n - gj);
        for (int k = 0; k < up; ++k) {
            const int w = spans.half[std::size_t(k)];
            const int a = std::max(gi - w, 0), b = std::min(gi + w, n);
            if (a < b) s += sat.row_span(gj + k, a, b);
        }
        const int down = std::min(K, gj);
        for (int k = 0; k < down; ++k) {
            const int w = spans.half[std::size_t(k)];
            const int a = std::max(gi - w, 0), b = std::min(gi + w, n);
            if (a < b) s += sat.row_span(gj - 1 - k, a, b);
        }
        return std::abs(s);
    }

    double ball_bound(const DiskSpans& spans, int gi, int gj) const {
        const int K = int(spans.half.size());
        const int w0 = spans.half.empty() ? 0 : spans.half[0];
        const int i0 = std::max(gi - w0, 0), i1 = std::min(gi + w0, n);
        const int j0 = std::max(gj - K, 0), j1 = std::min(gj + K, n);
        if (i0 >= i1 || j0 >= j1) return 0.0;
        return sat.rect_abs_sum(i0, i1, j0, j1);
    }
};

template <class Scan>
bool scan_has_violation(const Scan& scan, const DiskSpans& spans, double threshold, int lo,
                        int hi) {
    std::atomic<bool> found{false};
    parallel_for_chunks(lo, std::int64_t(hi) + 1, [&](std::int64_t j0, std::int64_t j1) {
        for (std::int64_t gj = j0; gj < j1 && !found.load(std::memory_order_relaxed); ++gj) {
            for (int gi = lo; gi <= hi; ++gi) {
                if (scan.ball_bound(spans, gi, int(gj)) < threshold) continue;
                if (scan.ball_abs_sum(spans, gi, int(gj)) >= threshold) {
                    found.store(true, std::memory_order_relaxed);
                    break;
                }
            }
        }
    });
    return found.load();
}

template <class Scan>
std::optional<std::array<int, 2>> scan_first_violator(const Scan& scan, const DiskSpans& spans,
                                                      double threshold, int lo, int hi) {
    for (int gj = lo; gj <= hi; ++gj)
        for (int gi = lo; gi <= hi; ++gi) {
            if (scan.ball_bound(spans, gi, gj) < threshold) continue;
            if (scan.ball_abs_sum(spans, gi, gj) >= threshold) return std::array<int, 2>{gi, gj};
        }
    return std::nullopt;
}

}  // namespace

GeometricScaleResult geometric_mixing_scale(const TracerField& field, const MixParams& params) {
    params.validate();
    const double maxabs = field.max_abs();
    if (!(maxabs > 0.0)) throw std::invalid_argument("geometric mixing scale of a zero field");
    if (std::abs(field.mean()) > 1e-12)
        throw std::invalid_argument("geometric mixing scale requires a mean-zero field");

    const GridSpec grid = field.grid();
    const double h = grid.h();
    const int n = grid.n();
    const RadiusLadder ladder = RadiusLadder::geometric(h, std::sqrt(2.0));

    std::optional<SignSat> ssat;
    std::optional<ValueSat> vsat;
    if (field.is_binary())
        ssat.emplace(field);
    else
        vsat.emplace(field);

    GeometricScaleResult res;
    for (int idx = 0; idx < int(ladder.radii.size()); ++idx) {
        const double r = ladder.radii[std::size_t(idx)];
        const DiskSpans spans = DiskSpans::build(r, h);
        const double threshold = params.kappa * double(spans.total_cells) * maxabs;
        const int steps = dilation_steps(r, h);
        const int lo = -steps, hi = n + steps;
        bool violated;
        if (field.is_binary()) {
            violated = scan_has_violation(BinaryScan{*ssat, n}, spans, threshold, lo, hi);
        } else {
            violated = scan_has_violation(ContinuousScan{*vsat, n}, spans, threshold, lo, hi);
        }
        if (!violated) {
            res.value = r;
            res.upper_bracket = r;
            res.lower_bracket = idx > 0 ? ladder.radii[std::size_t(idx) - 1] : 0.0;
            res.found = true;
            res.ladder_index = idx;
            if (idx > 0) {
                // Deterministic witness at the last failing rung (row-major order).
                const double rp = ladder.radii[std::size_t(idx) - 1];
                const DiskSpans sp = DiskSpans::build(rp, h);
                const double th = params.kappa * double(sp.total_cells) * maxabs;
                const int st = dilation_steps(rp, h);
                res.binding_center =
                    field.is_binary()
                        ? scan_first_violator(BinaryScan{*ssat, n}, sp, th, -st, n + st)
                        : scan_first_violator(ContinuousScan{*vsat, n}, sp, th, -st, n + st);
            }
            return res;
        }
    }
    res.value = ladder.radii.back();
    res.lower_bracket = ladder.radii.back();
    res.upper_bracket = std::numeric_limits<double>::infinity();
    res.found = false;
    res.ladder_index = int(ladder.radii.size());
    return res;
}

// -- characteristic length scale ----------------------------------------------

GridSquare GridSquare::tile(const GridSpec& g, const Tiling& t, int ti, int tj) {
    if (!t.compatible_with(g)) throw std::invalid_argument("tiling level incompatible with grid");
    if (ti < 0 || tj < 0 || ti >= t.tiles_per_side() || tj >= t.tiles_per_side())
        throw std::invalid_argument("tile index out of range");
    const int w = t.tile_cells(g);
    return {ti * w, tj * w, w};
}

namespace {

// Qualifying ball for the LS scan: count(J cap B) > threshold, centers on
// nodes of E eroded by r. The erosion test (node offset)*h >= r is exact.
struct LsScan {
    const CellSet& J;
    const GridSquare& E;
    double h;

    bool qualifies(const DiskSpans& spans, double threshold, int gi, int gj) const {
        const int K = int(spans.half.size());
        std::int64_t cnt = 0;
        for (int k = 0; k < K; ++k) {
            const int w = spans.half[std::size_t(k)];
            const int n = J.grid().n();
            const int a = std::max(gi - w, 0), b = std::min(gi + w, n);
            if (a >= b) continue;
            if (gj + k < n) cnt += J.row_span(gj + k, a, b);
            if (gj - 1 - k >= 0) cnt += J.row_span(gj - 1 - k, a, b);
        }
        return double(cnt) > threshold;
    }

    bool prune(const DiskSpans& spans, double threshold, int gi, int gj) const {
        const int K = int(spans.half.size());
        const int w0 = spans.half.empty() ? 0 : spans.half[0];
        const double bound = double(J.rect_count(gi - w0, gi + w0, gj - K, gj + K));
        return !(bound > threshold);
    }
};

bool ls_exists(const LsScan& scan, const DiskSpans& spans, double threshold, double r, int& wi,
               int& wj, bool want_witness) {
    const GridSquare& E = scan.E;
    const double h = scan.h;
    // Node offsets admissible when both distances to the sides of E are >= r.
    int olo = 0;
    while (olo <= E.cells && olo * h < r) ++olo;
    const int ohi = E.cells - olo;
    if (olo > ohi) return false;

    if (want_witness) {
        for (int oj = olo; oj <= ohi; ++oj)
            for (int oi = olo; oi <= ohi; ++oi) {
                const int gi = E.i0 + oi, gj = E.j0 + oj;
                if (scan.prune(spans, threshold, gi, gj)) continue;
                if (scan.qualifies(spans, threshold, gi, gj)) {
                    wi = gi;
                    wj = gj;
                    return true;
                }
            }
        return false;
    }

    std::atomic<bool> found{false};
    parallel_for_chunks(olo, std::int64_t(ohi) + 1, [&](std::int64_t a, std::int64_t b) {
        for (std::int64_t oj = a; oj < b && !found.load(std::memory_order_relaxed); ++oj)
            for (int oi = olo; oi <= ohi; ++oi) {
                const int gi = E.i0 + oi, gj = E.j0 + int(oj);
                if (scan.prune(spans, threshold, gi, gj)) continue;
                if (scan.qualifies(spans, threshold, gi, gj)) {
                    found.store(true, std::memory_order_relaxed);
                    break;
                }
            }
    });
    return found.load();
}

}  // namespace

LengthScaleResult characteristic_length_scale(const CellSet& J, const GridSquare& E,
                                              const MixParams& params) {
    params.validate();
    const GridSpec& g = J.grid();
    const int n = g.n();
    if (E.cells <= 0 || E.i0 < 0 || E.j0 < 0 || E.i0 + E.cells > n || E.j0 + E.cells > n)
        throw std::invalid_argument("region is not grid aligned within Q");
    const double h = g.h();
    const double cap = 0.5 * E.cells * h;  // largest inscribed ball radius

    LengthScaleResult res;
    res.upper_bracket = cap;
    if (cap < h) return res;

    const RadiusLadder ladder = RadiusLadder::geometric(h, cap);
    const LsScan scan{J, E, h};
    for (int idx = int(ladder.radii.size()) - 1; idx >= 0; --idx) {
        const double r = ladder.radii[std::size_t(idx)];
        if (r > cap) continue;  // no admissible center
        const DiskSpans spans = DiskSpans::build(r, h);
        if (spans.total_cells == 0) break;
        const double threshold = params.ls_threshold() * double(spans.total_cells);
        int wi = 0, wj = 0;
        if (ls_exists(scan, spans, threshold, r, wi, wj, false)) {
            ls_exists(scan, spans, threshold, r, wi, wj, true);  // deterministic witness
            res.value = r;
            res.lower_bracket = r;
            res.upper_bracket =
                idx + 1 < int(ladder.radii.size())
                    ? std::min(cap, ladder.radii[std::size_t(idx) + 1])
                    : cap;
            res.found = true;
            res.witness_center = std::array<int, 2>{wi, wj};
            return res;
        }
        res.upper_bracket = r;  // failed rung: LS is below it
    }
    return res;
}

UnmixednessCertificate unmixedness_certificate(const TracerField& field, int k_level,
                                               const MixParams& params) {
    params.validate();
    if (!field.is_binary())
        throw std::invalid_argument("unmixedness certificate requires a binary field");
    Tiling tiling{k_level};
    if (!tiling.compatible_with(field.grid()))
        throw std::invalid_argument("tiling level incompatible with grid");

    const CellSet pos = CellSet::positive_cells(field);
    const CellSet neg = CellSet::negative_cells(field);
    const int ts = tiling.tiles_per_side();
    const double lambda_k = tiling.lambda();

    UnmixednessCertificate cert;
    cert.level = k_level;
    cert.tile_ratio.resize(std::size_t(ts) * ts);
    cert.tile_ls_pos.resize(std::size_t(ts) * ts);
    cert.tile_ls_neg.resize(std::size_t(ts) * ts);
    for (int tj = 0; tj < ts; ++tj)
        for (int ti = 0; ti < ts; ++ti) {
            const GridSquare E = GridSquare::tile(field.grid(), tiling, ti, tj);
            const double lp = characteristic_length_scale(pos, E, params).value;
            const double ln = characteristic_length_scale(neg, E, params).value;
            const std::size_t t = std::size_t(tj) * ts + ti;
            cert.tile_ls_pos[t] = lp;
            cert.tile_ls_neg[t] = ln;
            cert.tile_ratio[t] = std::max(lp, ln) / lambda_k;
        }
    cert.min_ratio = *std::min_element(cert.tile_ratio.begin(), cert.tile_ratio.end());
    cert.certified = cert.min_ratio >= params.alpha;
    return cert;
}

// -- Sobolev norms (finite-difference route) -----------------------------------

namespace {

// 4th-order centered first derivative, zero extension outside the sample.
void derive_axis(const std::vector<double>& in, std::vector<double>& out, int n, bool x_axis,
                 double h) {
    const double c1 = 8.0 / (12.0 * h), c2 = 1.0 / (12.0 * h);
    const auto at = [&](int i, int j) -> double {
        if (i < 0 || i >= n || j < 0 || j >= n) return 0.0;
        return in[std::size_t(j) * n + i];
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double d;
            if (x_axis)
                d = c1 * (at(i + 1, j) - at(i - 1, j)) - c2 * (at(i + 2, j) - at(i - 2, j));
            else
                d = c1 * (at(i, j + 1) - at(i, j - 1)) - c2 * (at(i, j + 2) - at(i, j - 2));
            out[std::size_t(j) * n + i] = d;
        }
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

}  // namespace

double sobolev_norm(const VelocitySample& sample, double s, double p) {
    const bool p_inf = std::isinf(p);
    if (!p_inf && !(p > 1.0)) throw std::invalid_argument("p must be in (1, inf]");
    const int n = sample.grid.n();
    const double h = sample.grid.h();
    if (std::int64_t(sample.u.size()) != sample.grid.cell_count() ||
        std::int64_t(sample.v.size()) != sample.grid.cell_count())
        throw std::invalid_argument("velocity sample does not match its grid");

    const bool integral_s = std::floor(s) == s;
    if (!integral_s) {
        if (p != 2.0)
            throw std::invalid_argument("fractional s requires p = 2");
        const double a = fractional_sobolev_l2(sample.grid, sample.u, s);
        const double b = fractional_sobolev_l2(sample.grid, sample.v, s);
        return std::sqrt(a * a + b * b);
    }
    const int si = int(s);
    if (si < 1) throw std::invalid_argument("s must be >= 1");

    std::vector<double> acc(std::size_t(n) * n, 0.0);
    std::vector<double> work, tmp;
    for (const std::vector<double>* comp : {&sample.u, &sample.v}) {
        for (int a = 0; a <= si; ++a) {
            const int b = si - a;
            work = *comp;
            tmp.resize(work.size());
            for (int q = 0; q < a; ++q) {
                derive_axis(work, tmp, n, true, h);
                std::swap(work, tmp);
            }
            for (int q = 0; q < b; ++q) {
                derive_axis(work, tmp, n, false, h);
                std::swap(work, tmp);
            }
            const double coeff = binomial(si, a);
            for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += coeff * work[c] * work[c];
        }
    }

    if (p_inf) {
        double mx = 0.0;
        for (double v : acc) mx = std::max(mx, v);
        return std::sqrt(mx);
    }
    if (p == 2.0) {
        double sum = 0.0;
        for (double v : acc) sum += v;
        return std::sqrt(sum * h * h);
    }
    double sum = 0.0;
    for (double v : acc) sum += std::pow(v, 0.5 * p);
    return std::pow(sum * h * h, 1.0 / p);
}

// -- Lusin-Lipschitz profile -----------------------------------------------------

std::vector<std::uint32_t> FlowMap::inverse() const {
    if (std::int64_t(forward.size()) != grid.cell_count())
        throw std::invalid_argument("flow map does not match its grid");
    std::vector<std::uint32_t> inv(forward.size(), std::uint32_t(-1));
    for (std::size_t c = 0; c < forward.size(); ++c) {
        const std::uint32_t t = forward[c];
        if (t >= forward.size() || inv[t] != std::uint32_t(-1))
            throw std::invalid_argument("flow map is not a permutation");
        inv[t] = std::uint32_t(c);
    }
    return inv;
}

LusinProfile lusin_lipschitz_profile(const FlowMap& map, double cost, double p,
                                     std::uint64_t seed, int pairs_per_scale) {
    if (!(p > 1.0)) throw std::invalid_argument("p must be > 1");
    const int n = map.grid.n();
    const std::vector<std::uint32_t> inv = map.inverse();
    const auto cx = [&](std::uint32_t c) { return map.grid.cell_center_x(int(c) % n); };
    const auto cy = [&](std::uint32_t c) { return map.grid.cell_center_y(int(c) / n); };

    struct Pair {
        std::uint32_t a, b;
        double ratio;
    };
    std::vector<Pair> pairs;
    std::vector<double> stat(map.forward.size(), 0.0);
    std::mt19937_64 rng(seed);
    static const int offs[8][2] = {{1, 0},  {0, 1},  {1, 1},   {-1, 1},
                                   {-1, 0}, {0, -1}, {-1, -1}, {1, -1}};
    for (int d = 1; d <= n / 2; d *= 2) {
        for (int t = 0; t < pairs_per_scale; ++t) {
            const int i = int(rng() % std::uint64_t(n));
            const int j = int(rng() % std::uint64_t(n));
            const auto& o = offs[rng() % 8];
            const int i2 = i + o[0] * d, j2 = j + o[1] * d;
            if (i2 < 0 || i2 >= n || j2 < 0 || j2 >= n) continue;
            const std::uint32_t a = std::uint32_t(j) * n + i;
            const std::uint32_t b = std::uint32_t(j2) * n + i2;
            const double fx = cx(inv[a]) - cx(inv[b]);
            const double fy = cy(inv[a]) - cy(inv[b]);
            const double gx = cx(a) - cx(b);
            const double gy = cy(a) - cy(b);
            const double ratio = std::sqrt((fx * fx + fy * fy) / (gx * gx + gy * gy));
            pairs.push_back({a, b, ratio});
            stat[a] = std::max(stat[a], ratio);
            stat[b] = std::max(stat[b], ratio);
        }
    }

    // Total order: largest stretch first, cell index tie-break. The removal
    // sets for growing epsilon are nested prefixes, so L is non-increasing.
    std::vector<std::uint32_t> order(stat.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (stat[a] != stat[b]) return stat[a] > stat[b];
        return a < b;
    });
    std::vector<std::uint32_t> rank(stat.size());
    for (std::uint32_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

    LusinProfile prof;
    prof.cost = cost;
    prof.p = p;
    const double eps_list[5] = {0.01, 0.02, 0.05, 0.10, 0.20};
    for (double eps : eps_list) {
        const std::uint64_t removed = std::uint64_t(eps * double(stat.size()));
        double L = 1.0;
        bool any = false;
        for (const Pair& pr : pairs) {
            if (rank[pr.a] < removed || rank[pr.b] < removed) continue;
            L = any ? std::max(L, pr.ratio) : pr.ratio;
            any = true;
        }
        if (!any) L = 1.0;
        prof.excluded_fraction.push_back(eps);
        prof.lipschitz.push_back(L);
    }

    // One-parameter fit of the theorem's shape L(eps) ~ exp(c * cost / eps^(1/p)).
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < prof.excluded_fraction.size(); ++i) {
        const double u = cost / std::pow(prof.excluded_fraction[i], 1.0 / p);
        num += u * std::log(std::max(prof.lipschitz[i], 1e-300));
        den += u * u;
    }
    prof.fitted_c = den > 0.0 ? num / den : 0.0;
    for (double eps : prof.excluded_fraction)
        prof.bound_shape.push_back(std::exp(prof.fitted_c * cost / std::pow(eps, 1.0 / p)));
    return prof;
}

}  // namespace mixlab
