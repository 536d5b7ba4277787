#!/usr/bin/env python3
"""Regenerate the Surf Coast demo fixtures (locations.csv, refuges.csv).

Deterministic: fixed seed, stable ordering. Coordinates are UTM-like metres
roughly matching the Surf Coast Shire townships. Allocation numbers are per
location: a hard residency cap for home-taggable locations, a popularity
weight elsewhere.
"""

import csv
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "surfcoast"

# town centre, residential count, business, shopping, beaches (popular, quiet)
TOWNS = [
    ("Torquay", (767000.0, 5754000.0), 1150, 60, 28, (2, 2)),
    ("Jan Juc", (764200.0, 5752200.0), 420, 10, 6, (1, 1)),
    ("Anglesea", (757500.0, 5742500.0), 520, 24, 14, (1, 1)),
    ("Aireys Inlet", (754000.0, 5735500.0), 260, 8, 5, (1, 1)),
    ("Lorne", (746500.0, 5724500.0), 470, 22, 12, (2, 1)),
    ("Winchelsea", (740000.0, 5765000.0), 310, 14, 8, (0, 0)),
    ("Moriac", (752000.0, 5762000.0), 160, 6, 3, (0, 0)),
    ("Deans Marsh", (737000.0, 5748000.0), 110, 4, 2, (0, 0)),
]

# out-of-region source nodes used as VisitorDaytime homes
SOURCES = [
    ("Geelong Rd East", (785000.0, 5772000.0), "Geelong Gateway", 15000),
    ("Princes Hwy", (795000.0, 5778000.0), "Geelong Gateway", 10000),
    ("Great Ocean Rd West", (730000.0, 5716000.0), "West Gateway", 8000),
]

REFUGES = [
    ("geelong-showgrounds", (792000.0, 5772500.0), "Geelong", 20000),
    ("colac-rec-reserve", (712000.0, 5738000.0), "Colac", 10000),
    ("torquay-slsc", (767500.0, 5753200.0), "Torquay", 3000),
    ("jan-juc-slsc", (764000.0, 5751900.0), "Jan Juc", 800),
    ("anglesea-hall", (757800.0, 5742300.0), "Anglesea", 1500),
    ("aireys-hall", (754100.0, 5735600.0), "Aireys Inlet", 800),
    ("lorne-foreshore", (746800.0, 5724200.0), "Lorne", 2000),
    ("winchelsea-rec", (740200.0, 5765200.0), "Winchelsea", 2500),
]


def scatter(rng, centre, spread):
    return (
        round(centre[0] + rng.uniform(-spread, spread), 1),
        round(centre[1] + rng.uniform(-spread, spread), 1),
    )


def main():
    rng = random.Random(5429)
    OUT.mkdir(parents=True, exist_ok=True)
    rows = []
    next_id = 1

    def add(centre, spread, locality, allocation, types):
        nonlocal next_id
        x, y = scatter(rng, centre, spread)
        rows.append([next_id, x, y, locality, allocation, types])
        next_id += 1

    for name, centre, residential, business, shopping, beaches in TOWNS:
        for _ in range(residential):
            add(centre, 1600.0, name, 6, "residential")
        for _ in range(business):
            add(centre, 900.0, name, 40, "business")
        for _ in range(shopping):
            add(centre, 500.0, name, 120, "shopping")
        popular, quiet = beaches
        for _ in range(popular):
            add((centre[0], centre[1] - 1200.0), 700.0, name, 400, "beach|beach_popular")
        for _ in range(quiet):
            add((centre[0], centre[1] - 1400.0), 900.0, name, 150, "beach")
        # schools, care facilities and halls double as dependant locations
        for _ in range(max(1, residential // 250)):
            add(centre, 1000.0, name, 60, "school|community|dependant")
        for _ in range(2):
            add(centre, 1200.0, name, 80, "attraction|community")
        # short-term accommodation in the coastal towns
        if name not in ("Winchelsea", "Moriac", "Deans Marsh"):
            for _ in range(10):
                add(centre, 1100.0, name, 350, "accommodation")

    for _, centre, locality, allocation in SOURCES:
        x, y = scatter(rng, centre, 200.0)
        rows.append([next_id, x, y, locality, allocation, "source|landmark"])
        next_id += 1

    with open(OUT / "locations.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "x", "y", "locality", "allocation", "types"])
        writer.writerows(rows)

    with open(OUT / "refuges.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "x", "y", "locality", "capacity"])
        for rid, (x, y), locality, capacity in REFUGES:
            writer.writerow([rid, x, y, locality, capacity])

    residential_capacity = sum(r[4] for r in rows if "residential" in r[5])
    accommodation_capacity = sum(r[4] for r in rows if "accommodation" in r[5])
    source_capacity = sum(r[4] for r in rows if "source" in r[5])
    print(f"{len(rows)} locations")
    print(f"residential capacity {residential_capacity}")
    print(f"accommodation capacity {accommodation_capacity}")
    print(f"source capacity {source_capacity}")


if __name__ == "__main__":
    main()
