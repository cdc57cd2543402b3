#include "mixlab/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mixlab/diagnostics.hpp"
#include "mixlab/errors.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab {

double default_swirl_amplitude() { return 1.0 / (4.0 * M_PI); }

// s(t) = sin^2(pi(t+1/2)) = (1 - cos(2 pi (t+1/2)))/2 and its derivatives
// s^(q)(t) = -(1/2) (2 pi)^q cos(2 pi (t+1/2) + q pi/2).
namespace {
double s_factor(int q, double t) {
    const double theta = 2.0 * M_PI * (t + 0.5);
    if (q == 0) return 0.5 * (1.0 - std::cos(theta));
    return -0.5 * std::pow(2.0 * M_PI, q) * std::cos(theta + 0.5 * M_PI * q);
}
bool outside_q(double x, double y) {
    return std::abs(x) > 0.5 || std::abs(y) > 0.5;
}
}  // namespace

SwirlVelocity::SwirlVelocity(double amplitude) : amplitude_(amplitude) {}

std::array<double, 2> SwirlVelocity::value(double, double x, double y) const {
    if (outside_q(x, y)) return {0.0, 0.0};
    // u = A s(x) s'(y), v = -A s'(x) s(y)
    return {amplitude_ * s_factor(0, x) * s_factor(1, y),
            -amplitude_ * s_factor(1, x) * s_factor(0, y)};
}

double SwirlVelocity::derivative(int comp, int a, int b, double, double x, double y) const {
    if (outside_q(x, y)) return 0.0;
    if (comp == 0) return amplitude_ * s_factor(a, x) * s_factor(b + 1, y);
    return -amplitude_ * s_factor(a + 1, x) * s_factor(b, y);
}

// -- permutations ---------------------------------------------------------------

std::vector<std::uint32_t> perm_identity(int m) {
    const std::size_t size = std::size_t(1) << (2 * m);
    std::vector<std::uint32_t> p(size);
    for (std::size_t c = 0; c < size; ++c) p[c] = std::uint32_t(c);
    return p;
}

namespace {
// Middle-column swap applied to the four column bands of every tile at dyadic
// level `level`; acts on x indices only.
void stack_interleave_columns(std::vector<std::uint32_t>& colmap, int m, int level) {
    if (m < level + 2) throw std::invalid_argument("grid too coarse for interleave level");
    static const int swap[4] = {0, 2, 1, 3};
    const int band = m - level - 2;  // log2 of the column band width
    for (auto& c : colmap) {
        const std::uint32_t tile = c >> (m - level);
        const std::uint32_t local = c & ((1u << (m - level)) - 1);
        const std::uint32_t col = local >> band;
        const std::uint32_t rest = local & ((1u << band) - 1);
        c = (tile << (m - level)) | (std::uint32_t(swap[col]) << band) | rest;
    }
}

std::vector<std::uint32_t> columns_to_perm(const std::vector<std::uint32_t>& colmap, int m) {
    const int n = 1 << m;
    std::vector<std::uint32_t> p(std::size_t(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            p[std::size_t(j) * n + i] = std::uint32_t(j) * n + colmap[std::size_t(i)];
    return p;
}
}  // namespace

std::vector<std::uint32_t> perm_interleave(int m) { return perm_deep(m, 1, 0); }

std::vector<std::uint32_t> perm_deep(int m, int d, int start_level) {
    if (d < 1 || start_level < 0) throw std::invalid_argument("bad deep block parameters");
    if (m < start_level + d + 1)
        throw std::invalid_argument("grid too coarse for deep block depth");
    const int n = 1 << m;
    std::vector<std::uint32_t> colmap(std::size_t(n));
    for (int i = 0; i < n; ++i) colmap[std::size_t(i)] = std::uint32_t(i);
    // each pass maps the accumulated targets through that level's swap
    for (int level = start_level; level < start_level + d; ++level)
        stack_interleave_columns(colmap, m, level);
    return columns_to_perm(colmap, m);
}

std::vector<std::uint32_t> perm_baker(int m) {
    if (m < 1) throw std::invalid_argument("baker needs m >= 1");
    const int n = 1 << m;
    std::vector<std::uint32_t> p(std::size_t(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int i2, j2;
            if (i < n / 2) {
                i2 = 2 * i + (j & 1);
                j2 = j >> 1;
            } else {
                i2 = 2 * (i - n / 2) + (j & 1);
                j2 = (j >> 1) + n / 2;
            }
            p[std::size_t(j) * n + i] = std::uint32_t(j2) * n + i2;
        }
    return p;
}

std::vector<std::uint32_t> refine_permutation(const std::vector<std::uint32_t>& perm, int q,
                                              int m) {
    if (m < q) throw std::invalid_argument("refinement target below native resolution");
    if (perm.size() != (std::size_t(1) << (2 * q)))
        throw std::invalid_argument("permutation size does not match resolution");
    if (m == q) return perm;
    const int nq = 1 << q, n = 1 << m, f = 1 << (m - q);
    std::vector<std::uint32_t> p(std::size_t(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const std::uint32_t t = perm[std::size_t(j / f) * nq + (i / f)];
            const int ti = int(t) % nq, tj = int(t) / nq;
            p[std::size_t(j) * n + i] = std::uint32_t(tj * f + j % f) * n + (ti * f + i % f);
        }
    return p;
}

std::vector<std::uint32_t> compose_permutations(const std::vector<std::uint32_t>& first,
                                                const std::vector<std::uint32_t>& second) {
    if (first.size() != second.size()) throw std::invalid_argument("permutation size mismatch");
    std::vector<std::uint32_t> p(first.size());
    for (std::size_t c = 0; c < first.size(); ++c) p[c] = second[std::size_t(first[c])];
    return p;
}

// -- snapped swirl map -----------------------------------------------------------

namespace {
std::vector<std::uint32_t> perm_swirl(int m, const VelocityField& vel, int substeps) {
    const GridSpec grid{m};
    const int n = grid.n();
    const double h = grid.h();
    const double dt = 1.0 / substeps;
    std::vector<std::uint32_t> target(std::size_t(n) * n);

    parallel_for_chunks(0, std::int64_t(n), [&](std::int64_t j0, std::int64_t j1) {
        for (std::int64_t j = j0; j < j1; ++j)
            for (int i = 0; i < n; ++i) {
                double x = grid.cell_center_x(i), y = grid.cell_center_y(int(j));
                for (int step = 0; step < substeps; ++step) {
                    const double t = step * dt;
                    const auto k1 = vel.value(t, x, y);
                    const auto k2 = vel.value(t + 0.5 * dt, x + 0.5 * dt * k1[0], y + 0.5 * dt * k1[1]);
                    const auto k3 = vel.value(t + 0.5 * dt, x + 0.5 * dt * k2[0], y + 0.5 * dt * k2[1]);
                    const auto k4 = vel.value(t + dt, x + dt * k3[0], y + dt * k3[1]);
                    x += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                    y += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
                }
                const int ci = std::clamp(int(std::floor((x + 0.5) / h)), 0, n - 1);
                const int cj = std::clamp(int(std::floor((y + 0.5) / h)), 0, n - 1);
                target[std::size_t(j) * n + i] = std::uint32_t(cj) * n + ci;
            }
    });

    // Resolve snapping collisions: sources claim targets in row-major order;
    // a taken target falls back to the nearest unclaimed cell, rings scanned
    // in row-major order.
    std::vector<std::uint8_t> claimed(std::size_t(n) * n, 0);
    std::vector<std::uint32_t> perm(std::size_t(n) * n);
    for (std::size_t src = 0; src < perm.size(); ++src) {
        std::uint32_t t = target[src];
        if (claimed[t]) {
            const int ti = int(t) % n, tj = int(t) / n;
            bool placed = false;
            for (int radius = 1; radius < 2 * n && !placed; ++radius) {
                for (int dj = -radius; dj <= radius && !placed; ++dj) {
                    const int j = tj + dj;
                    if (j < 0 || j >= n) continue;
                    const bool edge_row = std::abs(dj) == radius;
                    for (int di = -radius; di <= radius; ++di) {
                        if (!edge_row && std::abs(di) != radius) continue;
                        const int i = ti + di;
                        if (i < 0 || i >= n) continue;
                        const std::uint32_t cand = std::uint32_t(j) * n + i;
                        if (!claimed[cand]) {
                            t = cand;
                            placed = true;
                            break;
                        }
                    }
                }
            }
            if (!placed) throw std::logic_error("snapped swirl map could not be completed");
        }
        claimed[t] = 1;
        perm[src] = t;
    }
    return perm;
}
}  // namespace

// -- block constructors ------------------------------------------------------------

std::vector<std::uint32_t> Block::permutation(int m) const {
    if (m < native_q) throw ResolutionError("field resolution below block native resolution");
    const int gen_at = (fixed_q > 0 && fixed_q < m) ? fixed_q : m;
    std::vector<std::uint32_t> p;
    switch (kind) {
        case BlockKind::interleave: p = perm_interleave(gen_at); break;
        case BlockKind::deep: p = perm_deep(gen_at, mix_gain, start_level); break;
        case BlockKind::baker: p = perm_baker(gen_at); break;
        case BlockKind::swirl: p = perm_swirl(gen_at, *velocity, swirl_substeps); break;
    }
    return gen_at == m ? p : refine_permutation(p, gen_at, m);
}

Block canonical_interleave_block(double amplitude) {
    Block b;
    b.kind = BlockKind::interleave;
    b.native_q = 2;
    b.depth_gain = 0;
    b.mix_gain = 1;
    b.velocity = std::make_shared<SwirlVelocity>(amplitude);
    return b;
}

Block baker_block() {
    Block b;
    b.kind = BlockKind::baker;
    b.native_q = 1;
    b.depth_gain = 0;
    b.mix_gain = 1;
    return b;
}

Block deep_block(int d, int q, int start_level, double amplitude) {
    if (d < 1) throw std::invalid_argument("deep block depth must be >= 1");
    if (start_level < 0) throw std::invalid_argument("deep block start level must be >= 0");
    Block b;
    b.kind = BlockKind::deep;
    b.native_q = start_level + d + 1;
    if (q > 0) {
        if (q < b.native_q) throw std::invalid_argument("deep block needs q >= start + d + 1");
        b.fixed_q = q;
        b.native_q = q;
    }
    b.depth_gain = d - 1;
    b.mix_gain = d;
    b.start_level = start_level;
    b.velocity = std::make_shared<SwirlVelocity>(amplitude);
    return b;
}

Block swirl_block(double amplitude, int substeps) {
    if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
    Block b;
    b.kind = BlockKind::swirl;
    b.native_q = 1;
    b.depth_gain = 0;
    b.mix_gain = 0;
    b.approximate = true;
    b.swirl_substeps = substeps;
    b.velocity = std::make_shared<SwirlVelocity>(amplitude);
    return b;
}

TracerField apply_block(const Block& block, const TracerField& field) {
    const std::vector<std::uint32_t> perm = block.permutation(field.grid().m);
    if (field.is_binary()) {
        std::vector<std::int8_t> out(field.signs().size());
        for (std::size_t c = 0; c < perm.size(); ++c) out[perm[c]] = field.signs()[c];
        return TracerField::binary(field.grid(), std::move(out));
    }
    std::vector<double> out(field.values().size());
    for (std::size_t c = 0; c < perm.size(); ++c) out[perm[c]] = field.values()[c];
    return TracerField::continuous(field.grid(), std::move(out));
}

// -- costs ---------------------------------------------------------------------------

double analytic_wsp_norm(const VelocityField& v, double t, int s, double p, int quad_cells) {
    if (s < 1) throw std::invalid_argument("s must be >= 1");
    const bool p_inf = std::isinf(p);
    if (!p_inf && !(p > 1.0)) throw std::invalid_argument("p must be in (1, inf]");
    const int q = quad_cells;
    const double h = 1.0 / q;

    std::vector<double> binom(std::size_t(s) + 1, 1.0);
    for (int a = 1; a <= s; ++a) binom[std::size_t(a)] = binom[std::size_t(a - 1)] * double(s - a + 1) / double(a);

    // Per-row partial results reduced in row order: thread-count independent.
    std::vector<double> row_acc(std::size_t(q), 0.0);
    parallel_for_chunks(0, q, [&](std::int64_t j0, std::int64_t j1) {
        for (std::int64_t j = j0; j < j1; ++j) {
            const double y = -0.5 + (double(j) + 0.5) * h;
            double acc = 0.0;
            for (int i = 0; i < q; ++i) {
                const double x = -0.5 + (i + 0.5) * h;
                double f2 = 0.0;
                for (int a = 0; a <= s; ++a) {
                    const double du = v.derivative(0, a, s - a, t, x, y);
                    const double dv = v.derivative(1, a, s - a, t, x, y);
                    f2 += binom[std::size_t(a)] * (du * du + dv * dv);
                }
                if (p_inf)
                    acc = std::max(acc, f2);
                else if (p == 2.0)
                    acc += f2;
                else
                    acc += std::pow(f2, 0.5 * p);
            }
            row_acc[std::size_t(j)] = acc;
        }
    });

    if (p_inf) {
        double mx = 0.0;
        for (double v2 : row_acc) mx = std::max(mx, v2);
        return std::sqrt(mx);
    }
    double sum = 0.0;
    for (double v2 : row_acc) sum += v2;
    if (p == 2.0) return std::sqrt(sum * h * h);
    return std::pow(sum * h * h, 1.0 / p);
}

double block_cost(const Block& block, double s, double p) {
    if (!block.has_velocity())
        throw MissingVelocityError("block has no velocity sampler; cost undefined");
    if (!(s >= 1.0)) throw std::invalid_argument("s must be >= 1");
    const bool integral_s = std::floor(s) == s;
    if (!integral_s && p != 2.0)
        throw std::invalid_argument("fractional s requires p = 2");

    const auto norm_at = [&](double t) -> double {
        if (integral_s) return analytic_wsp_norm(*block.velocity, t, int(s), p);
        // fractional: spectral multiplier on a fine sample
        const GridSpec g{9};
        const int n = g.n();
        std::vector<double> u(std::size_t(n) * n), v(std::size_t(n) * n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const auto val = block.velocity->value(t, g.cell_center_x(i), g.cell_center_y(j));
                u[std::size_t(j) * n + i] = val[0];
                v[std::size_t(j) * n + i] = val[1];
            }
        const double a = fractional_sobolev_l2(g, u, s);
        const double b = fractional_sobolev_l2(g, v, s);
        return std::sqrt(a * a + b * b);
    };

    if (block.velocity->time_constant()) return norm_at(0.0);
    // composite Simpson over [0,1]
    const int nt = 32;
    double sum = norm_at(0.0) + norm_at(1.0);
    for (int i = 1; i < nt; ++i) sum += (i % 2 ? 4.0 : 2.0) * norm_at(double(i) / nt);
    return sum / (3.0 * nt);
}

}  // namespace mixlab
