#include "mixlab/grid.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mixlab {

TracerField TracerField::binary(GridSpec grid, std::vector<std::int8_t> signs) {
    if (grid.m < 0 || grid.m > 15) throw std::invalid_argument("grid resolution m out of range");
    if (std::int64_t(signs.size()) != grid.cell_count())
        throw std::invalid_argument("sign array does not match grid size");
    std::int64_t balance = 0;
    for (std::int8_t s : signs) {
        if (s != 1 && s != -1) throw std::invalid_argument("binary field entries must be +-1");
        balance += s;
    }
    if (balance != 0) throw std::invalid_argument("binary field must have exactly balanced signs");
    TracerField f;
    f.grid_ = grid;
    f.mode_ = FieldMode::binary;
    f.signs_ = std::move(signs);
    return f;
}

TracerField TracerField::continuous(GridSpec grid, std::vector<double> values) {
    if (grid.m < 0 || grid.m > 15) throw std::invalid_argument("grid resolution m out of range");
    if (std::int64_t(values.size()) != grid.cell_count())
        throw std::invalid_argument("value array does not match grid size");
    TracerField f;
    f.grid_ = grid;
    f.mode_ = FieldMode::continuous;
    f.values_ = std::move(values);
    return f;
}

double TracerField::mean() const {
    if (is_binary()) {
        std::int64_t s = 0;
        for (std::int8_t v : signs_) s += v;
        return double(s) / double(size());
    }
    double s = 0.0;
    for (double v : values_) s += v;
    return s / double(size());
}

double TracerField::max_abs() const {
    if (is_binary()) return 1.0;
    double r = 0.0;
    for (double v : values_) r = std::max(r, std::abs(v));
    return r;
}

double TracerField::l2_norm() const {
    // L2 over Q with the cell-area weight h^2.
    double s = 0.0;
    if (is_binary()) {
        s = double(size());
    } else {
        for (double v : values_) s += v * v;
    }
    return std::sqrt(s * grid_.h() * grid_.h());
}

TracerField TracerField::to_continuous() const {
    if (!is_binary()) return *this;
    std::vector<double> vals(signs_.begin(), signs_.end());
    return continuous(grid_, std::move(vals));
}

// -- patterns ---------------------------------------------------------------

TracerField init_pattern(GridSpec grid, const Pattern& pattern) {
    const int n = grid.n();
    switch (pattern.kind) {
        case PatternKind::left_right_halves: {
            if (grid.m < 1) throw std::invalid_argument("left_right_halves needs m >= 1");
            std::vector<std::int8_t> s(grid.cell_count());
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) s[std::size_t(j) * n + i] = (i < n / 2) ? 1 : -1;
            return TracerField::binary(grid, std::move(s));
        }
        case PatternKind::top_bottom_halves: {
            if (grid.m < 1) throw std::invalid_argument("top_bottom_halves needs m >= 1");
            std::vector<std::int8_t> s(grid.cell_count());
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) s[std::size_t(j) * n + i] = (j >= n / 2) ? 1 : -1;
            return TracerField::binary(grid, std::move(s));
        }
        case PatternKind::checkerboard: {
            if (pattern.level < 1) throw std::invalid_argument("checkerboard level must be >= 1");
            if (pattern.level > grid.m)
                throw std::invalid_argument("checkerboard level exceeds grid resolution");
            const int shift = grid.m - pattern.level;
            std::vector<std::int8_t> s(grid.cell_count());
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    s[std::size_t(j) * n + i] = (((i >> shift) + (j >> shift)) & 1) ? -1 : 1;
            return TracerField::binary(grid, std::move(s));
        }
        case PatternKind::stripes: {
            if (pattern.level < 1) throw std::invalid_argument("stripes level must be >= 1");
            if (pattern.level > grid.m)
                throw std::invalid_argument("stripes level exceeds grid resolution");
            const int shift = grid.m - pattern.level;
            std::vector<std::int8_t> s(grid.cell_count());
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    s[std::size_t(j) * n + i] = ((i >> shift) & 1) ? -1 : 1;
            return TracerField::binary(grid, std::move(s));
        }
        case PatternKind::from_file: {
            TracerField f = read_field(pattern.path);
            if (f.grid() != grid) throw std::invalid_argument("field file resolution mismatch");
            return f;
        }
    }
    throw std::invalid_argument("unknown pattern");
}

// -- tile statistics ---------------------------------------------------------

static void check_tiling(const TracerField& field, const Tiling& tiling, int ti, int tj) {
    if (!tiling.compatible_with(field.grid()))
        throw std::invalid_argument("tiling level incompatible with grid");
    if (ti < 0 || tj < 0 || ti >= tiling.tiles_per_side() || tj >= tiling.tiles_per_side())
        throw std::invalid_argument("tile index out of range");
}

std::int64_t tile_sign_sum(const TracerField& field, const Tiling& tiling, int ti, int tj) {
    check_tiling(field, tiling, ti, tj);
    if (!field.is_binary()) throw std::invalid_argument("tile_sign_sum requires a binary field");
    const int w = tiling.tile_cells(field.grid());
    const int n = field.grid().n();
    std::int64_t sum = 0;
    for (int j = tj * w; j < (tj + 1) * w; ++j) {
        const std::int8_t* row = field.signs().data() + std::size_t(j) * n + std::size_t(ti) * w;
        for (int i = 0; i < w; ++i) sum += row[i];
    }
    return sum;
}

double tile_average(const TracerField& field, const Tiling& tiling, int ti, int tj) {
    check_tiling(field, tiling, ti, tj);
    const int w = tiling.tile_cells(field.grid());
    const std::int64_t cells = std::int64_t(w) * w;
    if (field.is_binary()) return double(tile_sign_sum(field, tiling, ti, tj)) / double(cells);
    const int n = field.grid().n();
    double sum = 0.0;
    for (int j = tj * w; j < (tj + 1) * w; ++j) {
        const double* row = field.values().data() + std::size_t(j) * n + std::size_t(ti) * w;
        for (int i = 0; i < w; ++i) sum += row[i];
    }
    return sum / double(cells);
}

bool is_mixed_at_scale(const TracerField& field, int k_level) {
    Tiling t{k_level};
    if (!t.compatible_with(field.grid()))
        throw std::invalid_argument("tiling level incompatible with grid");
    const int ts = t.tiles_per_side();
    for (int tj = 0; tj < ts; ++tj)
        for (int ti = 0; ti < ts; ++ti) {
            if (field.is_binary()) {
                if (tile_sign_sum(field, t, ti, tj) != 0) return false;
            } else {
                if (std::abs(tile_average(field, t, ti, tj)) > 1e-12) return false;
            }
        }
    return true;
}

int mixed_level(const TracerField& field) {
    int best = -1;
    for (int k = 0; k <= field.grid().m; ++k) {
        if (is_mixed_at_scale(field, k))
            best = k;
        else
            break;  // mixed at k implies mixed at all j <= k, so first failure ends the scan
    }
    return best;
}

TracerField refine(const TracerField& field, int new_m) {
    const int m = field.grid().m;
    if (new_m < m) throw std::invalid_argument("refine target must be >= current resolution");
    if (new_m == m) return field;
    const int n_old = field.grid().n();
    const int factor = 1 << (new_m - m);
    const int n_new = n_old * factor;
    GridSpec g{new_m};
    if (field.is_binary()) {
        std::vector<std::int8_t> s(g.cell_count());
        for (int j = 0; j < n_new; ++j)
            for (int i = 0; i < n_new; ++i)
                s[std::size_t(j) * n_new + i] = field.sign(i / factor, j / factor);
        return TracerField::binary(g, std::move(s));
    }
    std::vector<double> v(g.cell_count());
    for (int j = 0; j < n_new; ++j)
        for (int i = 0; i < n_new; ++i)
            v[std::size_t(j) * n_new + i] = field.value(i / factor, j / factor);
    return TracerField::continuous(g, std::move(v));
}

// -- file io -----------------------------------------------------------------

void write_field(const TracerField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open field file for writing: " + path);
    const int n = field.grid().n();
    out << "mixlab-field v1 m=" << field.grid().m << " mode="
        << (field.is_binary() ? "binary" : "continuous") << "\n";
    char buf[40];
    for (int j = n - 1; j >= 0; --j) {  // row 0 of the file is the top of Q
        for (int i = 0; i < n; ++i) {
            if (i) out << ' ';
            if (field.is_binary()) {
                out << int(field.sign(i, j));
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", field.value(i, j));
                out << buf;
            }
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing field file: " + path);
}

TracerField read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open field file: " + path);
    std::string header;
    std::getline(in, header);
    int m = -1;
    char mode_buf[32] = {0};
    if (std::sscanf(header.c_str(), "mixlab-field v1 m=%d mode=%31s", &m, mode_buf) != 2)
        throw std::runtime_error("bad field file header: " + header);
    const std::string mode_str(mode_buf);
    if (m < 0 || m > 15) throw std::runtime_error("field file resolution out of range");
    GridSpec g{m};
    const int n = g.n();
    const bool binary = mode_str == "binary";
    if (!binary && mode_str != "continuous")
        throw std::runtime_error("bad field file mode: " + mode_str);

    std::vector<std::int8_t> signs;
    std::vector<double> values;
    if (binary)
        signs.resize(std::size_t(g.cell_count()));
    else
        values.resize(std::size_t(g.cell_count()));

    for (int r = 0; r < n; ++r) {
        const int j = n - 1 - r;
        for (int i = 0; i < n; ++i) {
            double v;
            if (!(in >> v)) throw std::runtime_error("field file truncated");
            if (binary) {
                if (v != 1.0 && v != -1.0)
                    throw std::runtime_error("binary field file entry is not +-1");
                signs[std::size_t(j) * n + i] = std::int8_t(v);
            } else {
                values[std::size_t(j) * n + i] = v;
            }
        }
    }
    return binary ? TracerField::binary(g, std::move(signs))
                  : TracerField::continuous(g, std::move(values));
}

}  // namespace mixlab
