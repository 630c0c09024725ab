#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace escflex {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal };

struct Term {
    std::size_t col;
    double coef;
};

/// A linear program  min c'x  s.t.  rows (<= or =) rhs,  lower <= x <= upper,
/// with the constraint matrix stored column-wise.
struct SparseLp {
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;

    std::vector<std::size_t> col_start;  // size num_cols() + 1
    std::vector<std::size_t> row_index;
    std::vector<double> value;

    std::vector<RowSense> sense;
    std::vector<double> rhs;

    std::size_t num_cols() const { return cost.size(); }
    std::size_t num_rows() const { return rhs.size(); }
    std::size_t nnz() const { return value.size(); }

    double objective(std::span<const double> x) const;
    std::vector<double> row_activity(std::span<const double> x) const;
    /// Largest bound or row violation of x, in absolute units.
    double max_violation(std::span<const double> x) const;
};

/// Accumulates rows and columns in any order and produces a SparseLp.
/// Duplicate columns within a row are merged; exact zeros are dropped.
class SparseLpBuilder {
public:
    std::size_t add_column(double cost, double lower = 0.0, double upper = kInf);
    std::size_t add_row(RowSense sense, double rhs, std::span<const Term> terms);

    std::size_t num_cols() const { return cost_.size(); }
    std::size_t num_rows() const { return rhs_.size(); }
    void set_cost(std::size_t col, double cost) { cost_[col] = cost; }

    SparseLp finish() const;

private:
    std::vector<double> cost_, lower_, upper_;
    std::vector<RowSense> sense_;
    std::vector<double> rhs_;
    struct Entry {
        std::size_t row, col;
        double coef;
    };
    std::vector<Entry> entries_;
    std::vector<Term> scratch_;
};

/// Copy of lp with one more row (terms need not be sorted; duplicates are
/// merged); the new row is the last one.
SparseLp append_row(const SparseLp& lp, RowSense sense, double rhs, std::span<const Term> terms);

/// Free-format MPS text. Names must not contain whitespace; empty name
/// vectors fall back to C<j> / R<i>.
std::string to_mps(const SparseLp& lp, std::string_view model_name,
                   const std::vector<std::string>& column_names = {},
                   const std::vector<std::string>& row_names = {});

}  // namespace escflex
