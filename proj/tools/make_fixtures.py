#!/usr/bin/env python3
"""Writes the scenario fixtures under tests/fixtures/.

The renewable series and demands are synthetic: smooth multi-day wind
weather, a clear-sky solar day shape with cloud dimming, and steady demand
at each city. Rerunning the script reproduces the files byte for byte.
"""
import argparse
import math
import pathlib

import numpy as np


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


def fmt(x):
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def solar_shape(hour):
    # clear-sky shape, sunrise 6h, sunset 19h
    if hour <= 6 or hour >= 19:
        return 0.0
    return math.sin(math.pi * (hour - 6) / 13) ** 1.5


def southeast(out, n_steps=168, step_hours=2.0):
    rng = np.random.default_rng(20240611)
    locs = [("SAV", "Savannah", 9.5, 5.5), ("ATL", "Atlanta", 3, 8), ("JAX", "Jacksonville", 5.5, 3)]
    hours = np.arange(n_steps) * step_hours + step_hours / 2

    # regional weather: a windy first week and a calmer second one, with
    # fronts lasting two to three days; each city sees it with a lag
    days = hours / 24
    regional = 0.42 + 0.22 * np.cos(2 * np.pi * days / 14) + 0.16 * np.sin(2 * np.pi * days / 2.6)
    clouds = 0.75 + 0.25 * np.cos(2 * np.pi * (days - 3) / 9)
    rows = []
    for k in range(n_steps):
        for i, (lid, _, _, _) in enumerate(locs):
            lag = int(round(i * 3 / step_hours))
            w = regional[max(0, k - lag)] + 0.05 * rng.standard_normal()
            s = solar_shape(hours[k] % 24) * clouds[k] * (0.95 + 0.05 * rng.standard_normal())
            rows.append([k, lid, fmt(round(min(1, max(0, w)), 4)), fmt(round(min(1, max(0, s)), 4))])
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "capacity_factors.csv", ["step", "location", "wind_cf", "solar_cf"], rows)
    write_csv(out / "locations.csv", ["id", "name", "wind_mw", "solar_mw"],
              [[lid, name, w, s] for lid, name, w, s in locs])
    # distances by road; energy about 1.25 kWh/km loaded
    write_csv(out / "paths.csv", ["origin", "dest", "travel_steps", "energy_kwh", "distance_km"], [
        ["SAV", "ATL", 2, 500, 400], ["ATL", "SAV", 2, 500, 400],
        ["SAV", "JAX", 1, 280, 225], ["JAX", "SAV", 1, 280, 225],
        ["ATL", "JAX", 3, 690, 555], ["JAX", "ATL", 3, 690, 555],
    ])
    # steady consumption in kg per step; cleared at the deadline of each window
    per_step = {"SAV": 15000, "ATL": 35000, "JAX": 20000}
    demand = [[lid, k, -kg] for lid, kg in per_step.items() for k in range(n_steps)]
    write_csv(out / "demand.csv", ["location", "step", "kg_signed"], demand)
    # raw material arrives as fast as it is used up
    write_csv(out / "raw_arrivals.csv", ["location", "step", "kg"],
              [["SAV", k, sum(per_step.values())] for k in range(n_steps)])
    (out / "params.toml").write_text(f"""# Synthetic three-city network around a Savannah cement plant.
[horizon]
n_steps = {n_steps}
step_hours = {fmt(step_hours)}
demand_clearing = "weekly"

[truck]
battery_kwh = 900
load_kg = 20000
empty_weight_kg = 10000
full_charge_hours = 2
unit_cost = 150000
lifetime_years = 30

# one unit is 150 t of clinker, 56,667 kWh drawn over a 2 h step
[process.cement]
sites = "SAV"
duration_steps = 1
power_per_unit_kw = 28333.5
output_per_unit_kg = 150000
raw_per_unit_kg = 150000
equip_unit_cost = 25000
equip_lifetime_years = 40

[warehouse]
area_m2 = 4645
height_m = 9.88
density_kg_m3 = 1440
construction_cost = 1150000
lifetime_years = 30

[costs]
carbon_tax = 0
epsilon = 0.001
battery_cost_per_kwh = 400
battery_lifetime_years = 5
""")


def tiny_pair(out):
    """Two cities, six one-hour steps, a factory at A and one truckload due at B."""
    out.mkdir(parents=True, exist_ok=True)
    n = 6
    write_csv(out / "locations.csv", ["id", "name", "wind_mw", "solar_mw"], [["A", "Plant", 1, 0], ["B", "Town", 0, 1]])
    write_csv(out / "paths.csv", ["origin", "dest", "travel_steps", "energy_kwh", "distance_km"],
              [["A", "B", 1, 300, 240], ["B", "A", 1, 300, 240]])
    wind = [0.9, 0.2, 0.0, 0.1, 0.6, 0.8]
    sun = [0.0, 0.3, 0.9, 1.0, 0.4, 0.0]
    rows = []
    for k in range(n):
        rows.append([k, "A", fmt(wind[k]), 0])
        rows.append([k, "B", 0, fmt(sun[k])])
    write_csv(out / "capacity_factors.csv", ["step", "location", "wind_cf", "solar_cf"], rows)
    write_csv(out / "demand.csv", ["location", "step", "kg_signed"], [["B", 5, -20000]])
    write_csv(out / "raw_arrivals.csv", ["location", "step", "kg"], [["A", 0, 20000]])
    (out / "params.toml").write_text("""[horizon]
n_steps = 6
step_hours = 1
demand_clearing = "per-step"

[truck]
battery_kwh = 900
load_kg = 20000
empty_weight_kg = 10000
full_charge_hours = 2
unit_cost = 150000
lifetime_years = 30

[process.cement]
sites = "A"
duration_steps = 1
power_per_unit_kw = 200
output_per_unit_kg = 10000
raw_per_unit_kg = 10000
equip_unit_cost = 25000
equip_lifetime_years = 40

[costs]
k_store = 6.62e-8
carbon_tax = 50
""")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    root = pathlib.Path(__file__).resolve().parent.parent
    ap.add_argument("--out", type=pathlib.Path, default=root / "tests" / "fixtures")
    args = ap.parse_args()
    southeast(args.out / "southeast")
    tiny_pair(args.out / "tiny_pair")


if __name__ == "__main__":
    main()
