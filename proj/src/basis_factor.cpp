#include "escflex/basis_factor.hpp"

#include <klu.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace escflex {

struct BasisFactor::Klu {
    klu_common common{};
    klu_symbolic* symbolic = nullptr;
    klu_numeric* numeric = nullptr;
    std::vector<int> col_start, row_index;
    std::vector<double> value;
};

BasisFactor::BasisFactor(std::size_t m) : m_(m), klu_(std::make_unique<Klu>()) {
    klu_defaults(&klu_->common);
    klu_->common.halt_if_singular = 0;
    klu_->common.tol = 0.1;  // stricter partial pivoting than the default 0.001
}

BasisFactor::~BasisFactor() { release(); }

void BasisFactor::release() {
    if (klu_->numeric) klu_free_numeric(&klu_->numeric, &klu_->common);
    if (klu_->symbolic) klu_free_symbolic(&klu_->symbolic, &klu_->common);
}

bool BasisFactor::factorize(std::span<const ColumnView> columns) {
    if (columns.size() != m_) throw std::invalid_argument("BasisFactor: column count mismatch");
    release();
    etas_.clear();
    deficient_.clear();
    auto& k = *klu_;
    k.col_start.assign(m_ + 1, 0);
    k.row_index.clear();
    k.value.clear();
    for (std::size_t j = 0; j < m_; ++j) {
        k.row_index.insert(k.row_index.end(), columns[j].rows.begin(), columns[j].rows.end());
        k.value.insert(k.value.end(), columns[j].values.begin(), columns[j].values.end());
        k.col_start[j + 1] = static_cast<int>(k.row_index.size());
    }
    if (m_ == 0) return true;
    const int n = static_cast<int>(m_);
    k.symbolic = klu_analyze(n, k.col_start.data(), k.row_index.data(), &k.common);
    if (!k.symbolic) throw std::runtime_error("BasisFactor: symbolic analysis failed");
    k.numeric = klu_factor(k.col_start.data(), k.row_index.data(), k.value.data(), k.symbolic, &k.common);
    if (!k.numeric) throw std::runtime_error("BasisFactor: numeric factorization failed");

    // KLU scales rows to unit max, so a vanishing pivot marks a dependent
    // column; the row left uncovered is the one it would have eliminated
    const auto* udiag = static_cast<const double*>(k.numeric->Udiag);
    for (int j = 0; j < n; ++j)
        if (!(std::abs(udiag[j]) > 1e-11))
            deficient_.push_back({static_cast<std::size_t>(k.symbolic->Q[j]), static_cast<std::size_t>(k.numeric->Pnum[j])});
    return deficient_.empty();
}

void BasisFactor::ftran(std::vector<double>& x) const {
    if (m_ == 0) return;
    klu_solve(klu_->symbolic, klu_->numeric, static_cast<int>(m_), 1, x.data(), &klu_->common);
    for (const auto& e : etas_) {
        double& xr = x[e.pivot];
        if (xr == 0.0) continue;
        xr /= e.pivot_value;
        for (std::size_t k = 0; k < e.index.size(); ++k) x[e.index[k]] -= e.value[k] * xr;
    }
}

void BasisFactor::btran(std::vector<double>& x) const {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double sum = x[it->pivot];
        for (std::size_t k = 0; k < it->index.size(); ++k) sum -= it->value[k] * x[it->index[k]];
        x[it->pivot] = sum / it->pivot_value;
    }
    klu_tsolve(klu_->symbolic, klu_->numeric, static_cast<int>(m_), 1, x.data(), &klu_->common);
}

void BasisFactor::replace(std::size_t position, const std::vector<double>& alpha) {
    Eta e;
    e.pivot = position;
    e.pivot_value = alpha[position];
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (i == position || alpha[i] == 0.0 || std::abs(alpha[i]) < 1e-14) continue;
        e.index.push_back(static_cast<int>(i));
        e.value.push_back(alpha[i]);
    }
    etas_.push_back(std::move(e));
}

}  // namespace escflex
