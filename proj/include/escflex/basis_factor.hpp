#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace escflex {

/// Sparse column handed to the factorization: parallel row/value arrays.
struct ColumnView {
    std::span<const int> rows;
    std::span<const double> values;
};

/// LU factors of a square basis (KLU) plus a product-form eta file for the
/// column replacements made since the last refactorization.
class BasisFactor {
public:
    explicit BasisFactor(std::size_t m);
    ~BasisFactor();
    BasisFactor(const BasisFactor&) = delete;
    BasisFactor& operator=(const BasisFactor&) = delete;

    /// Which basis position is dependent and which row it leaves uncovered.
    struct Deficiency {
        std::size_t position;
        std::size_t row;
    };

    /// Factorizes B whose k-th column is columns[k]. Returns false when B is
    /// numerically singular; `deficiencies()` then lists the columns to swap
    /// for the logicals of the listed rows.
    bool factorize(std::span<const ColumnView> columns);
    const std::vector<Deficiency>& deficiencies() const { return deficient_; }

    /// x <- B^{-1} x
    void ftran(std::vector<double>& x) const;
    /// x <- B^{-T} x
    void btran(std::vector<double>& x) const;

    /// Records that column `position` was replaced; alpha = B^{-1} a_entering.
    void replace(std::size_t position, const std::vector<double>& alpha);
    std::size_t eta_count() const { return etas_.size(); }

private:
    struct Eta {
        std::size_t pivot;
        double pivot_value;
        std::vector<int> index;
        std::vector<double> value;
    };

    void release();

    std::size_t m_;
    std::vector<Deficiency> deficient_;
    struct Klu;
    std::unique_ptr<Klu> klu_;
    std::vector<Eta> etas_;
};

}  // namespace escflex
