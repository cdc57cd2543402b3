#include "mixlab/sat.hpp"

#include <cmath>
#include <stdexcept>

namespace mixlab {

namespace {

template <class Cell, class RowT, class CumT, class Get>
void build_tables(int n, std::vector<RowT>& rows, std::vector<CumT>& cum, Get get) {
    rows.assign(std::size_t(n) * (n + 1), RowT(0));
    cum.assign(std::size_t(n + 1) * (n + 1), CumT(0));
    for (int j = 0; j < n; ++j) {
        RowT* r = rows.data() + std::size_t(j) * (n + 1);
        RowT acc = 0;
        for (int i = 0; i < n; ++i) {
            acc += RowT(get(i, j));
            r[i + 1] = acc;
        }
        const CumT* prev = cum.data() + std::size_t(j) * (n + 1);
        CumT* cur = cum.data() + std::size_t(j + 1) * (n + 1);
        for (int i = 0; i <= n; ++i) cur[i] = prev[i] + CumT(r[i]);
    }
}

template <class CumT>
CumT rect_query(const std::vector<CumT>& cum, int n, int i0, int i1, int j0, int j1) {
    i0 = std::max(i0, 0);
    j0 = std::max(j0, 0);
    i1 = std::min(i1, n);
    j1 = std::min(j1, n);
    if (i0 >= i1 || j0 >= j1) return CumT(0);
    const auto at = [&](int i, int j) { return cum[std::size_t(j) * (n + 1) + i]; };
    return at(i1, j1) - at(i0, j1) - at(i1, j0) + at(i0, j0);
}

}  // namespace

SignSat::SignSat(const TracerField& field) : n_(field.grid().n()) {
    if (!field.is_binary()) throw std::invalid_argument("SignSat requires a binary field");
    const auto& s = field.signs();
    build_tables<std::int8_t>(n_, rows_, cum_,
                              [&](int i, int j) { return s[std::size_t(j) * n_ + i]; });
}

std::int64_t SignSat::rect_sum(int i0, int i1, int j0, int j1) const {
    return rect_query(cum_, n_, i0, i1, j0, j1);
}

ValueSat::ValueSat(const TracerField& field) : n_(field.grid().n()) {
    build_tables<double>(n_, rows_, cum_, [&](int i, int j) { return field.value(i, j); });
    std::vector<double> dummy_rows;
    build_tables<double>(n_, dummy_rows, cum_abs_,
                         [&](int i, int j) { return std::abs(field.value(i, j)); });
}

double ValueSat::rect_sum(int i0, int i1, int j0, int j1) const {
    return rect_query(cum_, n_, i0, i1, j0, j1);
}

double ValueSat::rect_abs_sum(int i0, int i1, int j0, int j1) const {
    return rect_query(cum_abs_, n_, i0, i1, j0, j1);
}

CellSet::CellSet(GridSpec grid, std::vector<std::uint8_t> members)
    : grid_(grid), members_(std::move(members)) {
    if (std::int64_t(members_.size()) != grid_.cell_count())
        throw std::invalid_argument("cell set does not match grid size");
    for (auto v : members_)
        if (v > 1) throw std::invalid_argument("cell set entries must be 0/1");
    build_tables<std::uint8_t>(n(), rows_, cum_,
                               [&](int i, int j) { return members_[std::size_t(j) * n() + i]; });
    count_ = cum_.back();
}

CellSet CellSet::positive_cells(const TracerField& field) {
    if (!field.is_binary()) throw std::invalid_argument("positive_cells requires a binary field");
    std::vector<std::uint8_t> m(field.signs().size());
    for (std::size_t c = 0; c < m.size(); ++c) m[c] = field.signs()[c] > 0 ? 1 : 0;
    return CellSet(field.grid(), std::move(m));
}

CellSet CellSet::negative_cells(const TracerField& field) {
    if (!field.is_binary()) throw std::invalid_argument("negative_cells requires a binary field");
    std::vector<std::uint8_t> m(field.signs().size());
    for (std::size_t c = 0; c < m.size(); ++c) m[c] = field.signs()[c] < 0 ? 1 : 0;
    return CellSet(field.grid(), std::move(m));
}

std::int64_t CellSet::rect_count(int i0, int i1, int j0, int j1) const {
    return rect_query(cum_, n(), i0, i1, j0, j1);
}

}  // namespace mixlab
