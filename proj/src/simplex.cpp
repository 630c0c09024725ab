#include "escflex/simplex.hpp"

#include "escflex/basis_factor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace escflex {

std::string_view to_string(LpStatus status) {
    switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::TimeLimit: return "time_limit";
    case LpStatus::IterationLimit: return "iteration_limit";
    case LpStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

namespace {

double pow2_round(double v) { return std::exp2(std::round(std::log2(v))); }

// Deterministic value in [0, 1) from an index.
double hash_unit(std::size_t j) {
    std::uint64_t z = j + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

enum : char { kBasic = 0, kLower = 1, kUpper = 2, kFree = 3 };

// How the dual phase ended.
enum class DualEnd { Final, Optimal, Trouble };

class Simplex {
public:
    Simplex(const SparseLp& lp, const SimplexOptions& opt)
        : lp_(lp), opt_(opt), n_(lp.num_cols()), m_(lp.num_rows()), factor_(m_),
          start_(std::chrono::steady_clock::now()) {}

    LpResult run();

private:
    // problem setup
    void scale();
    void init_point();

    // linear algebra
    ColumnView column(std::size_t j) const;
    bool refactor();
    void compute_basics();
    void compute_duals();
    void pivot_row(const std::vector<double>& rho);
    void load_column(std::size_t j, std::vector<double>& out) const;

    double tol_of(double bound) const { return opt_.feasibility_tol * std::max(1.0, std::abs(bound)); }
    double infeasibility(std::size_t j) const;
    bool primal_feasible(double factor) const;
    bool fixed(std::size_t j) const { return lo_[j] == up_[j]; }
    bool eligible(std::size_t j) const;
    void set_nonbasic(std::size_t j);
    void pivot(std::size_t r, std::size_t q, char leaving_status, const std::vector<double>& alpha);
    bool limits_hit(LpStatus& status);
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    DualEnd dual(LpStatus& status, bool perturb);
    bool residuals_ok() const;
    LpStatus primal(bool perturb);

    LpResult finish(LpStatus status);

    const SparseLp& lp_;
    SimplexOptions opt_;
    std::size_t n_, m_;

    // scaled problem; variables 0..n-1 structural, n..n+m-1 logicals (+1 coef)
    std::vector<double> row_scale_, col_scale_;
    double cost_scale_ = 1.0, rhs_scale_ = 1.0;
    std::vector<int> a_start_, a_row_;
    std::vector<double> a_val_;
    std::vector<int> r_start_, r_col_;  // row-wise copy for pivot rows
    std::vector<double> r_val_;
    std::vector<int> slack_row_;
    double one_ = 1.0;
    std::vector<double> cost_, work_cost_, lo_, up_, b_;

    // state
    std::vector<double> x_, d_, weight_, dse_;
    std::vector<char> status_;
    std::vector<std::size_t> head_;
    std::vector<std::ptrdiff_t> pos_;
    BasisFactor factor_;
    std::size_t iterations_ = 0;
    std::size_t since_refactor_ = 0;
    double pivot_tol_ = 1e-7;
    std::chrono::steady_clock::time_point start_;

    // sparse pivot row over the columns rho touches
    std::vector<double> row_val_;
    std::vector<char> row_mark_;
    std::vector<std::size_t> row_idx_;

    std::vector<std::size_t> certificate_rows_;
};

ColumnView Simplex::column(std::size_t j) const {
    if (j < n_) {
        auto s = static_cast<std::size_t>(a_start_[j]), e = static_cast<std::size_t>(a_start_[j + 1]);
        return {std::span<const int>(a_row_.data() + s, e - s), std::span<const double>(a_val_.data() + s, e - s)};
    }
    return {std::span<const int>(&slack_row_[j - n_], 1), std::span<const double>(&one_, 1)};
}

void Simplex::load_column(std::size_t j, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    auto col = column(j);
    for (std::size_t k = 0; k < col.rows.size(); ++k) out[col.rows[k]] = col.values[k];
}

void Simplex::scale() {
    row_scale_.assign(m_, 1.0);
    col_scale_.assign(n_, 1.0);
    if (opt_.scaling && lp_.nnz() > 0) {
        for (int pass = 0; pass < 6; ++pass) {
            std::vector<double> rmin(m_, kInf), rmax(m_, 0.0);
            for (std::size_t j = 0; j < n_; ++j)
                for (auto k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
                    auto i = lp_.row_index[k];
                    double v = std::abs(lp_.value[k]) * row_scale_[i] * col_scale_[j];
                    rmin[i] = std::min(rmin[i], v);
                    rmax[i] = std::max(rmax[i], v);
                }
            for (std::size_t i = 0; i < m_; ++i)
                if (rmax[i] > 0.0) row_scale_[i] = pow2_round(row_scale_[i] / std::sqrt(rmin[i] * rmax[i]));
            for (std::size_t j = 0; j < n_; ++j) {
                double cmin = kInf, cmax = 0.0;
                for (auto k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
                    double v = std::abs(lp_.value[k]) * row_scale_[lp_.row_index[k]] * col_scale_[j];
                    cmin = std::min(cmin, v);
                    cmax = std::max(cmax, v);
                }
                if (cmax > 0.0) col_scale_[j] = pow2_round(col_scale_[j] / std::sqrt(cmin * cmax));
            }
        }
    }
    // scaled matrix, column- and row-wise
    a_start_.assign(n_ + 1, 0);
    a_row_.resize(lp_.nnz());
    a_val_.resize(lp_.nnz());
    r_start_.assign(m_ + 1, 0);
    for (std::size_t j = 0; j < n_; ++j) {
        for (auto k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
            a_row_[k] = static_cast<int>(lp_.row_index[k]);
            a_val_[k] = lp_.value[k] * row_scale_[lp_.row_index[k]] * col_scale_[j];
            ++r_start_[lp_.row_index[k] + 1];
        }
        a_start_[j + 1] = static_cast<int>(lp_.col_start[j + 1]);
    }
    std::partial_sum(r_start_.begin(), r_start_.end(), r_start_.begin());
    r_col_.resize(lp_.nnz());
    r_val_.resize(lp_.nnz());
    {
        std::vector<int> fill(r_start_.begin(), r_start_.end() - 1);
        for (std::size_t j = 0; j < n_; ++j)
            for (int k = a_start_[j]; k < a_start_[j + 1]; ++k) {
                auto at = fill[a_row_[k]]++;
                r_col_[at] = static_cast<int>(j);
                r_val_[at] = a_val_[k];
            }
    }
    slack_row_.resize(m_);
    std::iota(slack_row_.begin(), slack_row_.end(), 0);

    // magnitude of right-hand sides and finite bounds, brought near 1
    double log_sum = 0.0;
    std::size_t count = 0;
    auto note = [&](double v) {
        if (v != 0.0 && std::isfinite(v)) {
            log_sum += std::log2(std::abs(v));
            ++count;
        }
    };
    for (std::size_t i = 0; i < m_; ++i) note(lp_.rhs[i] * row_scale_[i]);
    for (std::size_t j = 0; j < n_; ++j) {
        note(lp_.lower[j] / col_scale_[j]);
        note(lp_.upper[j] / col_scale_[j]);
    }
    rhs_scale_ = (opt_.scaling && count > 0) ? std::exp2(std::round(log_sum / static_cast<double>(count))) : 1.0;

    double cmax = 0.0;
    for (std::size_t j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(lp_.cost[j] * col_scale_[j]));
    cost_scale_ = (opt_.scaling && cmax > 0.0) ? pow2_round(1.0 / cmax) : 1.0;

    const auto total = n_ + m_;
    cost_.assign(total, 0.0);
    lo_.assign(total, 0.0);
    up_.assign(total, kInf);
    b_.resize(m_);
    for (std::size_t j = 0; j < n_; ++j) {
        cost_[j] = lp_.cost[j] * col_scale_[j] * cost_scale_;
        lo_[j] = lp_.lower[j] / col_scale_[j] / rhs_scale_;
        up_[j] = lp_.upper[j] / col_scale_[j] / rhs_scale_;
    }
    for (std::size_t i = 0; i < m_; ++i) {
        b_[i] = lp_.rhs[i] * row_scale_[i] / rhs_scale_;
        if (lp_.sense[i] == RowSense::Equal) up_[n_ + i] = 0.0;
    }
    row_val_.assign(total, 0.0);
    row_mark_.assign(total, 0);
}

void Simplex::set_nonbasic(std::size_t j) {
    // the bound that keeps the reduced cost dual feasible where there is a choice
    const bool lo_ok = std::isfinite(lo_[j]), up_ok = std::isfinite(up_[j]);
    if (lo_ok && (!up_ok || work_cost_[j] >= 0.0)) {
        x_[j] = lo_[j];
        status_[j] = kLower;
    } else if (up_ok) {
        x_[j] = up_[j];
        status_[j] = kUpper;
    } else {
        x_[j] = 0.0;
        status_[j] = kFree;
    }
}

void Simplex::init_point() {
    const auto total = n_ + m_;
    x_.assign(total, 0.0);
    status_.assign(total, kLower);
    work_cost_ = cost_;
    for (std::size_t j = 0; j < n_; ++j) set_nonbasic(j);
    head_.resize(m_);
    pos_.assign(total, -1);
    for (std::size_t i = 0; i < m_; ++i) {
        head_[i] = n_ + i;
        pos_[n_ + i] = static_cast<std::ptrdiff_t>(i);
        status_[n_ + i] = kBasic;
    }
    weight_.assign(total, 1.0);
    dse_.assign(m_, 1.0);  // exact for the slack basis
}

bool Simplex::refactor() {
    std::vector<ColumnView> cols(m_);
    since_refactor_ = 0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        for (std::size_t k = 0; k < m_; ++k) cols[k] = column(head_[k]);
        if (factor_.factorize(cols)) return true;
        // swap dependent columns for the logicals of the rows they leave uncovered
        bool swapped = false;
        for (const auto& d : factor_.deficiencies()) {
            const auto logical = n_ + d.row;
            if (status_[logical] == kBasic) continue;
            const auto out = head_[d.position];
            const bool lo_ok = std::isfinite(lo_[out]), up_ok = std::isfinite(up_[out]);
            if (lo_ok && (!up_ok || x_[out] - lo_[out] <= up_[out] - x_[out])) {
                x_[out] = lo_[out];
                status_[out] = kLower;
            } else if (up_ok) {
                x_[out] = up_[out];
                status_[out] = kUpper;
            } else {
                status_[out] = kFree;
            }
            pos_[out] = -1;
            head_[d.position] = logical;
            pos_[logical] = static_cast<std::ptrdiff_t>(d.position);
            status_[logical] = kBasic;
            weight_[out] = 1.0;
            dse_[d.position] = 1.0;
            swapped = true;
        }
        if (!swapped) return false;
    }
    return false;
}

void Simplex::compute_basics() {
    std::vector<double> r = b_;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (status_[j] == kBasic || x_[j] == 0.0) continue;
        auto col = column(j);
        for (std::size_t k = 0; k < col.rows.size(); ++k) r[col.rows[k]] -= col.values[k] * x_[j];
    }
    factor_.ftran(r);
    for (std::size_t k = 0; k < m_; ++k) x_[head_[k]] = r[k];
}

void Simplex::compute_duals() {
    std::vector<double> y(m_);
    for (std::size_t k = 0; k < m_; ++k) y[k] = work_cost_[head_[k]];
    factor_.btran(y);
    d_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (status_[j] == kBasic) continue;
        double s = work_cost_[j];
        if (j >= n_) {
            s -= y[j - n_];
        } else {
            for (int k = a_start_[j]; k < a_start_[j + 1]; ++k) s -= a_val_[k] * y[a_row_[k]];
        }
        d_[j] = s;
    }
}

void Simplex::pivot_row(const std::vector<double>& rho) {
    for (auto j : row_idx_) {
        row_val_[j] = 0.0;
        row_mark_[j] = 0;
    }
    row_idx_.clear();
    auto touch = [&](std::size_t j, double v) {
        if (!row_mark_[j]) {
            row_mark_[j] = 1;
            row_idx_.push_back(j);
        }
        row_val_[j] += v;
    };
    for (std::size_t i = 0; i < m_; ++i) {
        const double v = rho[i];
        if (std::abs(v) < 1e-14) continue;
        for (int k = r_start_[i]; k < r_start_[i + 1]; ++k) touch(static_cast<std::size_t>(r_col_[k]), v * r_val_[k]);
        touch(n_ + i, v);
    }
}

double Simplex::infeasibility(std::size_t j) const {
    if (x_[j] < lo_[j] - tol_of(lo_[j])) return lo_[j] - x_[j];
    if (x_[j] > up_[j] + tol_of(up_[j])) return x_[j] - up_[j];
    return 0.0;
}

bool Simplex::primal_feasible(double factor) const {
    for (std::size_t k = 0; k < m_; ++k) {
        auto j = head_[k];
        if (x_[j] < lo_[j] - factor * tol_of(lo_[j]) || x_[j] > up_[j] + factor * tol_of(up_[j])) return false;
    }
    return true;
}

bool Simplex::eligible(std::size_t j) const {
    const double tol = opt_.optimality_tol;
    switch (status_[j]) {
    case kLower: return d_[j] < -tol && up_[j] > lo_[j];
    case kUpper: return d_[j] > tol && up_[j] > lo_[j];
    case kFree: return std::abs(d_[j]) > tol;
    default: return false;
    }
}

void Simplex::pivot(std::size_t r, std::size_t q, char leaving_status, const std::vector<double>& alpha) {
    const auto leaving = head_[r];
    status_[leaving] = fixed(leaving) ? static_cast<char>(kLower) : leaving_status;
    x_[leaving] = status_[leaving] == kLower ? lo_[leaving] : up_[leaving];
    pos_[leaving] = -1;
    head_[r] = q;
    pos_[q] = static_cast<std::ptrdiff_t>(r);
    status_[q] = kBasic;
    factor_.replace(r, alpha);
    ++since_refactor_;
    ++iterations_;
}

bool Simplex::limits_hit(LpStatus& status) {
    if (iterations_ >= opt_.max_iterations) {
        status = LpStatus::IterationLimit;
        return true;
    }
    if ((iterations_ & 63) == 0 && elapsed() > opt_.time_limit_seconds) {
        status = LpStatus::TimeLimit;
        return true;
    }
    return false;
}

// Dual simplex with dual steepest-edge pricing and a Harris ratio test,
// from a dual feasible basis. Reduced costs that drift infeasible are
// absorbed by shifting their costs; the primal cleanup undoes shifts and
// the perturbation.
DualEnd Simplex::dual(LpStatus& status, bool perturb) {
    const double tol_d = opt_.optimality_tol;
    for (std::size_t j = 0; j < n_ && perturb; ++j) {
        if (status_[j] == kBasic || fixed(j)) continue;
        double xi = (5e-7 + 1e-6 * std::abs(cost_[j])) * (1.0 + hash_unit(j));
        if (status_[j] == kLower) work_cost_[j] += xi;
        else if (status_[j] == kUpper) work_cost_[j] -= xi;
    }
    compute_duals();
    auto shift_infeasible_duals = [&] {
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (status_[j] == kBasic || fixed(j)) continue;
            const bool bad = (status_[j] == kLower && d_[j] < -tol_d) || (status_[j] == kUpper && d_[j] > tol_d) ||
                             (status_[j] == kFree && std::abs(d_[j]) > tol_d);
            if (bad) {
                work_cost_[j] -= d_[j];
                d_[j] = 0.0;
            }
        }
    };
    shift_infeasible_duals();

    std::vector<double> rho(m_), alpha(m_), tau(m_);
    int trouble = 0;
    while (true) {
        if (limits_hit(status)) return DualEnd::Final;
        if (since_refactor_ >= opt_.refactor_interval) {
            if (!refactor()) return DualEnd::Trouble;
            compute_basics();
            compute_duals();
            shift_infeasible_duals();
        }

        // leaving row: largest squared infeasibility over its edge weight
        std::ptrdiff_t r = -1;
        double best = 0.0;
        bool any_infeasible = false;
        for (std::size_t k = 0; k < m_; ++k) {
            double inf = infeasibility(head_[k]);
            if (inf <= 0.0) continue;
            any_infeasible = true;
            double score = inf * inf / dse_[k];
            if (score > best) best = score, r = static_cast<std::ptrdiff_t>(k);
        }
        if (r < 0 && any_infeasible) {
            // weights overflowed; start them afresh
            std::fill(dse_.begin(), dse_.end(), 1.0);
            continue;
        }
        if (r < 0) {
            if (since_refactor_ > 0) {
                since_refactor_ = opt_.refactor_interval;  // confirm on fresh factors
                continue;
            }
            return DualEnd::Optimal;
        }
        const auto rk = static_cast<std::size_t>(r);
        const auto leaving = head_[rk];
        const bool below = x_[leaving] < lo_[leaving];
        const double sigma = below ? -1.0 : 1.0;

        std::fill(rho.begin(), rho.end(), 0.0);
        rho[rk] = 1.0;
        factor_.btran(rho);
        pivot_row(rho);

        // pivots are judged against the largest entry of the row
        double a_max = 0.0;
        for (auto j : row_idx_)
            if (status_[j] != kBasic && !fixed(j)) a_max = std::max(a_max, std::abs(row_val_[j]));
        const double piv_tol = std::max(pivot_tol_, 1e-7 * a_max);

        // Harris pass 1: the longest step keeping reduced costs within tolerance
        double t_max = kInf;
        for (auto j : row_idx_) {
            if (status_[j] == kBasic || fixed(j)) continue;
            double a = sigma * row_val_[j];
            if (std::abs(a) <= piv_tol) continue;
            if (status_[j] == kLower && a > 0.0) t_max = std::min(t_max, (d_[j] + tol_d) / a);
            else if (status_[j] == kUpper && a < 0.0) t_max = std::min(t_max, (d_[j] - tol_d) / a);
            else if (status_[j] == kFree) t_max = std::min(t_max, (std::abs(d_[j]) + tol_d) / std::abs(a));
        }
        if (!std::isfinite(t_max)) {
            if (since_refactor_ > 0) {
                since_refactor_ = opt_.refactor_interval;
                continue;
            }
            // rho combines rows into one that cannot be satisfied
            certificate_rows_.clear();
            double rmax = 0.0;
            for (double v : rho) rmax = std::max(rmax, std::abs(v));
            for (std::size_t i = 0; i < m_; ++i)
                if (std::abs(rho[i]) > 1e-9 * rmax) certificate_rows_.push_back(i);
            status = LpStatus::Infeasible;
            return DualEnd::Final;
        }
        // pass 2: the largest pivot among them
        std::size_t q = n_ + m_;
        double best_a = 0.0;
        for (auto j : row_idx_) {
            if (status_[j] == kBasic || fixed(j)) continue;
            double a = sigma * row_val_[j];
            if (std::abs(a) <= piv_tol) continue;
            double ratio;
            if (status_[j] == kLower && a > 0.0) ratio = d_[j] / a;
            else if (status_[j] == kUpper && a < 0.0) ratio = d_[j] / a;
            else if (status_[j] == kFree) ratio = std::abs(d_[j]) / std::abs(a);
            else continue;
            if (ratio <= t_max && std::abs(a) > best_a) best_a = std::abs(a), q = j;
        }
        if (q == n_ + m_) return DualEnd::Trouble;

        load_column(q, alpha);
        factor_.ftran(alpha);
        const double alpha_r = alpha[rk];
        const double alpha_row = row_val_[q];
        if (std::abs(alpha_r - alpha_row) > 1e-6 * (1.0 + std::abs(alpha_r)) || std::abs(alpha_r) <= pivot_tol_) {
            // the factors drifted; redo this iteration on fresh ones
            if (since_refactor_ == 0 || ++trouble > 50) return DualEnd::Trouble;
            since_refactor_ = opt_.refactor_interval;
            continue;
        }
        if (std::abs(alpha_r - alpha_row) > 1e-9 * (1.0 + std::abs(alpha_r)))
            since_refactor_ = std::max(since_refactor_, opt_.refactor_interval - 1);

        // dual step; a slightly wrong-signed d_q is shifted to zero instead
        double theta_d = d_[q] / alpha_r;
        if (theta_d * sigma < 0.0) {
            work_cost_[q] -= d_[q];
            d_[q] = 0.0;
            theta_d = 0.0;
        }
        if (theta_d != 0.0)
            for (auto j : row_idx_)
                if (status_[j] != kBasic) d_[j] -= theta_d * row_val_[j];
        d_[leaving] = -theta_d;
        d_[q] = 0.0;

        // primal step
        const double bound = below ? lo_[leaving] : up_[leaving];
        const double theta_p = (x_[leaving] - bound) / alpha_r;
        for (std::size_t k = 0; k < m_; ++k)
            if (alpha[k] != 0.0) x_[head_[k]] -= theta_p * alpha[k];
        x_[q] += theta_p;

        // steepest-edge weights
        tau = rho;
        factor_.ftran(tau);
        double w_r = 0.0;  // exact: |rho|^2
        for (double v : rho) w_r += v * v;
        for (std::size_t k = 0; k < m_; ++k) {
            if (k == rk || alpha[k] == 0.0) continue;
            double ratio = alpha[k] / alpha_r;
            double w = std::max(dse_[k] + ratio * (ratio * w_r - 2.0 * tau[k]), 1e-12);
            dse_[k] = std::isfinite(w) ? std::min(w, 1e30) : 1e30;
        }
        dse_[rk] = std::max(w_r / (alpha_r * alpha_r), 1e-12);

        pivot(rk, q, below ? kLower : kUpper, alpha);
    }
}

// Bounded primal simplex (composite phase 1, Devex pricing, Harris ratio
// test with bound flips) from the current basis.
LpStatus Simplex::primal(bool perturb) {
    bool perturbed = false;
    int phase = primal_feasible(1.0) ? 2 : 1;
    auto enter_phase2 = [&](bool with_perturbation) {
        phase = 2;
        work_cost_ = cost_;
        if (with_perturbation) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (fixed(j)) continue;
                double xi = (1e-6 * std::abs(cost_[j]) + 1e-9) * (1.0 + hash_unit(j));
                work_cost_[j] += status_[j] == kUpper ? -xi : xi;
            }
            perturbed = true;
        }
        compute_duals();
    };
    if (phase == 2) enter_phase2(perturb);

    std::vector<double> alpha(m_), rho(m_);
    std::vector<char> rejected(n_ + m_, 0);  // candidates without a usable pivot
    std::size_t n_rejected = 0;
    int recoveries = 0;
    LpStatus status = LpStatus::NumericalFailure;
    while (true) {
        if (limits_hit(status)) return status;

        if (since_refactor_ >= opt_.refactor_interval) {
            if (!refactor()) return LpStatus::NumericalFailure;
            compute_basics();
            if (phase == 2 && !primal_feasible(10.0)) phase = 1;
            if (phase == 2) compute_duals();
        }

        if (phase == 1) {
            bool any = false;
            std::fill(work_cost_.begin(), work_cost_.end(), 0.0);
            for (std::size_t k = 0; k < m_; ++k) {
                auto j = head_[k];
                if (x_[j] < lo_[j] - tol_of(lo_[j])) work_cost_[j] = -1.0, any = true;
                else if (x_[j] > up_[j] + tol_of(up_[j])) work_cost_[j] = 1.0, any = true;
            }
            if (!any) {
                enter_phase2(perturb && !perturbed);
                continue;
            }
            compute_duals();
        }

        // pricing
        std::size_t q = n_ + m_;
        double best = 0.0;
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (status_[j] == kBasic || rejected[j] || !eligible(j)) continue;
            double score = d_[j] * d_[j] / weight_[j];
            if (score > best) best = score, q = j;
        }
        if (q == n_ + m_ && n_rejected > 0) {
            // only doubtful candidates remain: retry them on fresh factors
            if (++recoveries > 20) return LpStatus::NumericalFailure;
            std::fill(rejected.begin(), rejected.end(), 0);
            n_rejected = 0;
            since_refactor_ = opt_.refactor_interval;
            continue;
        }
        if (q == n_ + m_) {
            if (since_refactor_ > 0) {
                since_refactor_ = opt_.refactor_interval;  // confirm on fresh factors
                continue;
            }
            if (phase == 1) {
                certificate_rows_.clear();
                for (std::size_t k = 0; k < m_; ++k) {
                    auto j = head_[k];
                    if (j >= n_ && infeasibility(j) > 0.0) certificate_rows_.push_back(j - n_);
                }
                return LpStatus::Infeasible;
            }
            if (perturbed) {
                perturbed = false;
                work_cost_ = cost_;
                compute_duals();
                continue;
            }
            return LpStatus::Optimal;
        }

        load_column(q, alpha);
        factor_.ftran(alpha);
        const double dir = d_[q] < 0.0 ? 1.0 : -1.0;

        // Harris two-pass ratio test
        double theta_max = kInf;
        bool tiny_only = false;
        for (std::size_t k = 0; k < m_; ++k) {
            if (alpha[k] == 0.0) continue;
            if (std::abs(alpha[k]) <= pivot_tol_) {
                tiny_only = true;
                continue;
            }
            auto j = head_[k];
            double delta = -dir * alpha[k];
            double v = x_[j];
            if (v < lo_[j] - tol_of(lo_[j])) {
                if (delta > 0.0) theta_max = std::min(theta_max, (lo_[j] - v + tol_of(lo_[j])) / delta);
            } else if (v > up_[j] + tol_of(up_[j])) {
                if (delta < 0.0) theta_max = std::min(theta_max, (v - up_[j] + tol_of(up_[j])) / -delta);
            } else if (delta < 0.0 && std::isfinite(lo_[j])) {
                theta_max = std::min(theta_max, (v - lo_[j] + tol_of(lo_[j])) / -delta);
            } else if (delta > 0.0 && std::isfinite(up_[j])) {
                theta_max = std::min(theta_max, (up_[j] - v + tol_of(up_[j])) / delta);
            }
        }
        const double range = up_[q] - lo_[q];
        std::ptrdiff_t r = -1;
        double theta = kInf, best_alpha = 0.0;
        bool to_lower = false;
        if (std::isfinite(theta_max)) {
            for (std::size_t k = 0; k < m_; ++k) {
                if (std::abs(alpha[k]) <= pivot_tol_) continue;
                auto j = head_[k];
                double delta = -dir * alpha[k];
                double v = x_[j], ratio;
                bool lower;
                if (v < lo_[j] - tol_of(lo_[j])) {
                    if (delta <= 0.0) continue;
                    ratio = (lo_[j] - v) / delta, lower = true;
                } else if (v > up_[j] + tol_of(up_[j])) {
                    if (delta >= 0.0) continue;
                    ratio = (v - up_[j]) / -delta, lower = false;
                } else if (delta < 0.0 && std::isfinite(lo_[j])) {
                    ratio = std::max(0.0, v - lo_[j]) / -delta, lower = true;
                } else if (delta > 0.0 && std::isfinite(up_[j])) {
                    ratio = std::max(0.0, up_[j] - v) / delta, lower = false;
                } else {
                    continue;
                }
                if (ratio <= theta_max && std::abs(alpha[k]) > best_alpha) {
                    best_alpha = std::abs(alpha[k]);
                    r = static_cast<std::ptrdiff_t>(k);
                    theta = ratio;
                    to_lower = lower;
                }
            }
        }
        const bool flip = std::isfinite(range) && range <= theta_max;
        if (!flip && r < 0) {
            if (phase == 2 && !tiny_only) return LpStatus::Unbounded;
            // phase 1 cannot be unbounded: set the candidate aside
            rejected[q] = 1;
            ++n_rejected;
            continue;
        }
        if (flip) theta = range;

        for (std::size_t k = 0; k < m_; ++k)
            if (alpha[k] != 0.0) x_[head_[k]] -= dir * theta * alpha[k];
        x_[q] += dir * theta;

        if (flip) {
            ++iterations_;
            status_[q] = status_[q] == kLower ? kUpper : kLower;
            x_[q] = status_[q] == kLower ? lo_[q] : up_[q];
            continue;
        }

        const auto rk = static_cast<std::size_t>(r);
        const auto leaving = head_[rk];
        const double alpha_r = alpha[rk];

        // pivot row for reduced-cost and weight updates
        std::fill(rho.begin(), rho.end(), 0.0);
        rho[rk] = 1.0;
        factor_.btran(rho);
        pivot_row(rho);
        // the same pivot seen from the row side; a mismatch means the factors drifted
        if (std::abs(row_val_[q] - alpha_r) > 1e-7 * (1.0 + std::abs(alpha_r)))
            since_refactor_ = opt_.refactor_interval;
        const double theta_d = d_[q] / alpha_r;
        const double wq = weight_[q];
        for (auto j : row_idx_) {
            if (status_[j] == kBasic || j == q) continue;
            double arj = row_val_[j];
            if (arj == 0.0) continue;
            if (phase == 2) d_[j] -= theta_d * arj;
            double ratio = arj / alpha_r;
            weight_[j] = std::max(weight_[j], ratio * ratio * wq);
        }
        weight_[leaving] = std::max(wq / (alpha_r * alpha_r), 1.0);
        d_[leaving] = -theta_d;
        d_[q] = 0.0;

        pivot(rk, q, to_lower ? kLower : kUpper, alpha);
        if (n_rejected > 0) {
            std::fill(rejected.begin(), rejected.end(), 0);
            n_rejected = 0;
        }
    }
}

// Rows and bounds checked in original units, unclamped.
bool Simplex::residuals_ok() const {
    const double rel = opt_.residual_tol, abs_floor = 100.0 * opt_.residual_tol;
    std::vector<double> x(n_), act(m_, 0.0), size(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        x[j] = x_[j] * col_scale_[j] * rhs_scale_;
        if (x[j] < lp_.lower[j] - std::max(rel * std::abs(lp_.lower[j]), abs_floor)) return false;
        if (x[j] > lp_.upper[j] + std::max(rel * std::abs(lp_.upper[j]), abs_floor)) return false;
        for (auto k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
            double term = lp_.value[k] * x[j];
            act[lp_.row_index[k]] += term;
            size[lp_.row_index[k]] += std::abs(term);
        }
    }
    for (std::size_t i = 0; i < m_; ++i) {
        double gap = act[i] - lp_.rhs[i];
        double viol = lp_.sense[i] == RowSense::Equal ? std::abs(gap) : std::max(0.0, gap);
        if (viol > std::max(rel * std::max({1.0, size[i], std::abs(lp_.rhs[i])}), abs_floor)) return false;
    }
    return true;
}

LpResult Simplex::run() {
    scale();
    init_point();
    if (!refactor()) return finish(LpStatus::NumericalFailure);
    compute_basics();

    LpStatus status = LpStatus::NumericalFailure;
    DualEnd end = dual(status, true);
    if (end == DualEnd::Final) return finish(status);
    // drop perturbation and shifts; after a clean dual finish this is
    // usually optimal at once
    if (!refactor()) return finish(LpStatus::NumericalFailure);
    compute_basics();
    status = primal(end == DualEnd::Trouble);

    // scaled tolerances can leave residuals that matter in original units:
    // tighten and carry on from the same basis
    for (int round = 0; round < 3 && status == LpStatus::Optimal && !residuals_ok(); ++round) {
        opt_.feasibility_tol *= 0.01;
        if (!refactor()) break;
        compute_basics();
        end = dual(status, false);
        if (end == DualEnd::Final) return finish(status);
        if (!refactor()) break;
        compute_basics();
        status = primal(false);
    }
    return finish(status);
}

LpResult Simplex::finish(LpStatus status) {
    LpResult res;
    res.status = status;
    res.iterations = iterations_;
    if (status == LpStatus::Optimal) {
        if (refactor()) compute_basics();
    }
    res.x.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        double v = x_.empty() ? 0.0 : x_[j] * col_scale_[j] * rhs_scale_;
        // snap onto bounds crossed by rounding
        if (status == LpStatus::Optimal) v = std::clamp(v, lp_.lower[j], lp_.upper[j]);
        res.x[j] = v;
    }
    if (status == LpStatus::Optimal) {
        std::vector<double> y(m_);
        for (std::size_t k = 0; k < m_; ++k) y[k] = cost_[head_[k]];
        factor_.btran(y);
        res.row_dual.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) res.row_dual[i] = y[i] * row_scale_[i] / cost_scale_;
        res.objective = lp_.objective(res.x);
    }
    if (status == LpStatus::Infeasible) {
        res.infeasible_rows = certificate_rows_;
        std::sort(res.infeasible_rows.begin(), res.infeasible_rows.end());
    }
    return res;
}

}  // namespace

LpResult solve_simplex(const SparseLp& lp, const SimplexOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    Simplex simplex(lp, options);
    auto res = simplex.run();
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

}  // namespace escflex
