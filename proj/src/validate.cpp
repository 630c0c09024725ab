#include "escflex/validate.hpp"

#include <fmt/core.h>

#include <cmath>
#include <stdexcept>

namespace escflex {

namespace {

// Accumulates lhs terms, remembering their size for the relative tolerance.
struct Residual {
    double lhs = 0.0;
    double size = 0.0;
    void add(double v) {
        lhs += v;
        size += std::abs(v);
    }
};

}  // namespace

std::vector<Violation> validate_solution(const Scenario& sc, const PlanSolution& s, double tol) {
    const VariableSpace space(sc);
    for (auto k : kAllVarKinds) {
        const auto& g = s[k];
        auto rows = space.entities(k);
        auto cols = space.has(k) ? space.steps(k) : 0;
        if (g.rows() != rows || (rows > 0 && g.cols() != cols))
            throw std::invalid_argument(fmt::format("solution grid {} is {}x{}, expected {}x{}", symbol(k), g.rows(),
                                                    g.cols(), rows, cols));
    }

    std::vector<Violation> out;
    const auto n = sc.horizon.n_steps;
    const double dt = sc.horizon.step_hours;
    const auto sites = sc.process_sites();
    const bool trucks = !sc.paths.empty();
    const double theta = sc.truck.theta();
    const Grid q = sc.product_injection();
    auto prev = [n](std::size_t t, std::size_t lag) { return (t + n - lag % n) % n; };
    auto wraps = [n](std::size_t t, std::size_t lag) { return lag % n > t; };

    const auto& C = s[VarKind::Charge];
    const auto& Y = s[VarKind::StationaryTrucks];
    const auto& X = s[VarKind::Product];
    const auto& F = s[VarKind::Raw];
    const auto& p = s[VarKind::Power];
    const auto& z = s[VarKind::NonRenewable];
    const auto& y = s[VarKind::LoadedDispatch];
    const auto& ye = s[VarKind::EmptyDispatch];
    const auto& m = s[VarKind::ProcessStart];

    auto check = [&](RowRole role, std::size_t entity, std::size_t t, bool wrapped, const Residual& r, double rhs,
                     bool equality) {
        double gap = r.lhs - rhs;
        double viol = equality ? std::abs(gap) : std::max(0.0, gap);
        double scale = std::max({1.0, r.size, std::abs(rhs)});
        if (viol > std::max(tol * scale, 100.0 * tol)) {
            RowTag tag{role, entity, t, wrapped};
            out.push_back({tag, viol, fmt::format("{}: residual {:.6g}", describe(tag, sc), viol)});
        }
    };

    for (std::size_t i = 0; i < sc.locations.size(); ++i)
        for (std::size_t t = 0; t < n; ++t) {
            const bool first = wraps(t, 1);
            // charge: C[t] - C[t-1] = dt (p - manufacturing draw) - trip energy
            Residual rc;
            bool wc = first;
            rc.add(C(i, t));
            rc.add(-C(i, prev(t, 1)));
            rc.add(-dt * p(i, t));
            for (std::size_t k = 0; k < sites.size(); ++k) {
                if (sites[k].location != i) continue;
                const auto& proc = sc.processes[sites[k].process];
                for (std::size_t tau = 0; tau < proc.duration_steps; ++tau) {
                    rc.add(dt * proc.power_per_unit_kw * m(k, prev(t, tau)));
                    wc |= wraps(t, tau);
                }
            }
            for (std::size_t k = 0; k < sc.paths.size(); ++k)
                if (sc.paths[k].origin == i) rc.add(sc.paths[k].energy_kwh * (y(k, t) + theta * ye(k, t)));
            check(RowRole::ChargeBalance, i, t, wc, rc, 0.0, true);

            if (trucks) {
                Residual ry;
                bool wy = first;
                ry.add(Y(i, t));
                ry.add(-Y(i, prev(t, 1)));
                for (std::size_t k = 0; k < sc.paths.size(); ++k) {
                    const auto& path = sc.paths[k];
                    if (path.origin == i) ry.add(y(k, t) + ye(k, t));
                    if (path.dest == i) {
                        auto a = prev(t, path.travel_steps);
                        ry.add(-(y(k, a) + ye(k, a)));
                        wy |= wraps(t, path.travel_steps);
                    }
                }
                check(RowRole::TruckBalance, i, t, wy, ry, 0.0, true);
            }

            Residual rx;
            bool wx = first;
            rx.add(X(i, t));
            rx.add(-X(i, prev(t, 1)));
            for (std::size_t k = 0; k < sc.paths.size(); ++k) {
                const auto& path = sc.paths[k];
                if (path.origin == i) rx.add(sc.truck.load_kg * y(k, t));
                if (path.dest == i) {
                    rx.add(-sc.truck.load_kg * y(k, prev(t, path.travel_steps)));
                    wx |= wraps(t, path.travel_steps);
                }
            }
            for (std::size_t k = 0; k < sites.size(); ++k) {
                if (sites[k].location != i) continue;
                const auto& proc = sc.processes[sites[k].process];
                rx.add(-proc.output_per_unit_kg * m(k, prev(t, proc.duration_steps)));
                wx |= wraps(t, proc.duration_steps);
            }
            check(RowRole::ProductBalance, i, t, wx, rx, q(i, t), true);

            Residual rf;
            rf.add(F(i, t));
            rf.add(-F(i, prev(t, 1)));
            for (std::size_t k = 0; k < sites.size(); ++k)
                if (sites[k].location == i) rf.add(sc.processes[sites[k].process].raw_per_unit_kg * m(k, t));
            check(RowRole::RawBalance, i, t, first, rf, sc.exogenous.raw_kg(i, t), true);

            Residual rr;
            rr.add(C(i, t));
            rr.add(-C(i, prev(t, 1)));
            if (trucks) rr.add(-dt / sc.truck.full_charge_hours * sc.truck.battery_kwh * Y(i, prev(t, 1)));
            check(RowRole::ChargeRate, i, t, first, rr, 0.0, false);

            Residual rcap;
            rcap.add(C(i, t));
            if (trucks) rcap.add(-sc.truck.battery_kwh * Y(i, t));
            check(RowRole::ChargeCapacity, i, t, false, rcap, 0.0, false);

            if (trucks && sc.truck.charge_before_departure) {
                Residual rd;
                bool departs = false;
                for (std::size_t k = 0; k < sc.paths.size(); ++k)
                    if (sc.paths[k].origin == i) {
                        departs = true;
                        rd.add(sc.paths[k].energy_kwh * (y(k, t) + theta * ye(k, t)));
                    }
                rd.add(-C(i, prev(t, 1)));
                if (departs) check(RowRole::DepartureCharge, i, t, first, rd, 0.0, false);
            }

            Residual rw;
            rw.add(X(i, t));
            rw.add(F(i, t));
            rw.add(-s[VarKind::WarehouseCap](i, 0));
            check(RowRole::WarehouseCapacity, i, t, false, rw, 0.0, false);
        }

    if (trucks)
        for (std::size_t t = 0; t < n; ++t) {
            Residual r;
            bool w = false;
            for (std::size_t i = 0; i < sc.locations.size(); ++i) r.add(Y(i, t));
            for (std::size_t k = 0; k < sc.paths.size(); ++k)
                for (std::size_t tau = 0; tau < sc.paths[k].travel_steps; ++tau) {
                    r.add(y(k, prev(t, tau)) + ye(k, prev(t, tau)));
                    w |= wraps(t, tau);
                }
            r.add(-s[VarKind::FleetSize](0, 0));
            check(RowRole::FleetSize, 0, t, w, r, 0.0, false);
        }

    for (std::size_t k = 0; k < sites.size(); ++k) {
        const auto& proc = sc.processes[sites[k].process];
        for (std::size_t t = 0; t < n; ++t) {
            Residual r;
            bool w = false;
            for (std::size_t tau = 0; tau < proc.duration_steps; ++tau) {
                r.add(m(k, prev(t, tau)));
                w |= wraps(t, tau);
            }
            r.add(-s[VarKind::EquipCap](k, 0));
            check(RowRole::EquipmentCapacity, k, t, w, r, 0.0, false);
        }
    }

    for (std::size_t t = 0; t < n; ++t) {
        Residual r;
        for (std::size_t i = 0; i < sc.locations.size(); ++i) r.add(p(i, t));
        r.add(-z(0, t));
        check(RowRole::PowerBalance, 0, t, false, r, sc.renewable_total_kw(t), false);
    }

    // nonnegativity, entity = column index in the variable space
    for (auto k : kAllVarKinds) {
        const auto& g = s[k];
        for (std::size_t e = 0; e < g.rows(); ++e)
            for (std::size_t t = 0; t < g.cols(); ++t) {
                double v = g(e, t);
                if (v < -tol * std::max(1.0, std::abs(v))) {
                    RowTag tag{RowRole::Nonnegativity, space(k, e, t), t, false};
                    out.push_back({tag, -v, fmt::format("{} = {:.6g} is negative", space.name({k, e, t}, sc), v)});
                }
            }
    }
    return out;
}

}  // namespace escflex
