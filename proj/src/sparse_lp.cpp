#include "escflex/sparse_lp.hpp"

#include "escflex/csv.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace escflex {

double SparseLp::objective(std::span<const double> x) const {
    double total = 0.0;
    for (std::size_t j = 0; j < num_cols(); ++j) total += cost[j] * x[j];
    return total;
}

std::vector<double> SparseLp::row_activity(std::span<const double> x) const {
    std::vector<double> act(num_rows(), 0.0);
    for (std::size_t j = 0; j < num_cols(); ++j)
        for (auto k = col_start[j]; k < col_start[j + 1]; ++k) act[row_index[k]] += value[k] * x[j];
    return act;
}

double SparseLp::max_violation(std::span<const double> x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < num_cols(); ++j) {
        worst = std::max(worst, lower[j] - x[j]);
        worst = std::max(worst, x[j] - upper[j]);
    }
    auto act = row_activity(x);
    for (std::size_t i = 0; i < num_rows(); ++i) {
        double gap = act[i] - rhs[i];
        worst = std::max(worst, sense[i] == RowSense::Equal ? std::abs(gap) : gap);
    }
    return worst;
}

std::size_t SparseLpBuilder::add_column(double cost, double lower, double upper) {
    if (!std::isfinite(cost) || std::isnan(lower) || std::isnan(upper) || lower > upper)
        throw std::invalid_argument("SparseLpBuilder: bad column data");
    cost_.push_back(cost);
    lower_.push_back(lower);
    upper_.push_back(upper);
    return cost_.size() - 1;
}

std::size_t SparseLpBuilder::add_row(RowSense sense, double rhs, std::span<const Term> terms) {
    if (!std::isfinite(rhs)) throw std::invalid_argument("SparseLpBuilder: non-finite rhs");
    scratch_.assign(terms.begin(), terms.end());
    std::sort(scratch_.begin(), scratch_.end(), [](const Term& a, const Term& b) { return a.col < b.col; });
    const auto row = rhs_.size();
    for (std::size_t k = 0; k < scratch_.size();) {
        auto col = scratch_[k].col;
        if (col >= cost_.size()) throw std::out_of_range("SparseLpBuilder: column out of range");
        double sum = 0.0;
        for (; k < scratch_.size() && scratch_[k].col == col; ++k) sum += scratch_[k].coef;
        if (!std::isfinite(sum)) throw std::invalid_argument("SparseLpBuilder: non-finite coefficient");
        if (sum != 0.0) entries_.push_back({row, col, sum});
    }
    sense_.push_back(sense);
    rhs_.push_back(rhs);
    return row;
}

SparseLp SparseLpBuilder::finish() const {
    SparseLp lp;
    lp.cost = cost_;
    lp.lower = lower_;
    lp.upper = upper_;
    lp.sense = sense_;
    lp.rhs = rhs_;
    const auto n = cost_.size();
    lp.col_start.assign(n + 1, 0);
    for (const auto& e : entries_) ++lp.col_start[e.col + 1];
    for (std::size_t j = 0; j < n; ++j) lp.col_start[j + 1] += lp.col_start[j];
    lp.row_index.resize(entries_.size());
    lp.value.resize(entries_.size());
    auto next = lp.col_start;
    // entries_ are in row order, so each column comes out sorted by row
    for (const auto& e : entries_) {
        auto k = next[e.col]++;
        lp.row_index[k] = e.row;
        lp.value[k] = e.coef;
    }
    return lp;
}

SparseLp append_row(const SparseLp& lp, RowSense sense, double rhs, std::span<const Term> terms) {
    if (!std::isfinite(rhs)) throw std::invalid_argument("append_row: non-finite rhs");
    std::vector<double> add(lp.num_cols(), 0.0);
    for (const auto& t : terms) {
        if (t.col >= lp.num_cols()) throw std::out_of_range("append_row: column out of range");
        add[t.col] += t.coef;
    }
    SparseLp out;
    out.cost = lp.cost;
    out.lower = lp.lower;
    out.upper = lp.upper;
    out.sense = lp.sense;
    out.sense.push_back(sense);
    out.rhs = lp.rhs;
    out.rhs.push_back(rhs);
    const auto row = lp.num_rows();
    out.col_start.push_back(0);
    for (std::size_t j = 0; j < lp.num_cols(); ++j) {
        for (auto k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
            out.row_index.push_back(lp.row_index[k]);
            out.value.push_back(lp.value[k]);
        }
        if (add[j] != 0.0) {
            out.row_index.push_back(row);
            out.value.push_back(add[j]);
        }
        out.col_start.push_back(out.row_index.size());
    }
    return out;
}

std::string to_mps(const SparseLp& lp, std::string_view model_name, const std::vector<std::string>& column_names,
                   const std::vector<std::string>& row_names) {
    auto cname = [&](std::size_t j) { return column_names.empty() ? fmt::format("C{}", j) : column_names[j]; };
    auto rname = [&](std::size_t i) { return row_names.empty() ? fmt::format("R{}", i) : row_names[i]; };
    std::string out;
    out += fmt::format("NAME {}\n", model_name);
    out += "ROWS\n N COST\n";
    for (std::size_t i = 0; i < lp.num_rows(); ++i)
        out += fmt::format(" {} {}\n", lp.sense[i] == RowSense::Equal ? 'E' : 'L', rname(i));
    out += "COLUMNS\n";
    for (std::size_t j = 0; j < lp.num_cols(); ++j) {
        if (lp.cost[j] != 0.0) out += fmt::format(" {} COST {}\n", cname(j), format_number(lp.cost[j]));
        for (auto k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k)
            out += fmt::format(" {} {} {}\n", cname(j), rname(lp.row_index[k]), format_number(lp.value[k]));
        if (lp.cost[j] == 0.0 && lp.col_start[j] == lp.col_start[j + 1])
            out += fmt::format(" {} COST 0\n", cname(j));
    }
    out += "RHS\n";
    for (std::size_t i = 0; i < lp.num_rows(); ++i)
        if (lp.rhs[i] != 0.0) out += fmt::format(" RHS {} {}\n", rname(i), format_number(lp.rhs[i]));
    std::string bounds;
    for (std::size_t j = 0; j < lp.num_cols(); ++j) {
        double lo = lp.lower[j], up = lp.upper[j];
        if (lo == up) {
            bounds += fmt::format(" FX BND {} {}\n", cname(j), format_number(lo));
            continue;
        }
        if (lo == -kInf && up == kInf) {
            bounds += fmt::format(" FR BND {}\n", cname(j));
            continue;
        }
        if (lo == -kInf)
            bounds += fmt::format(" MI BND {}\n", cname(j));
        else if (lo != 0.0)
            bounds += fmt::format(" LO BND {} {}\n", cname(j), format_number(lo));
        if (up != kInf) bounds += fmt::format(" UP BND {} {}\n", cname(j), format_number(up));
    }
    if (!bounds.empty()) out += "BOUNDS\n" + bounds;
    out += "ENDATA\n";
    return out;
}

}  // namespace escflex
