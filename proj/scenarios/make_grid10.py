#!/usr/bin/env python3
"""Generate the congested 10x10 grid scenario (grid10.json)."""

import argparse
import json
import math
from pathlib import Path

N = 10
SPACING = 400.0
CAR_SPEED = 13.9
WALK_OFFSET = 5.0
STOP_OFFSET = 15.0


def car_id(i, j):
    return 1 + j * N + i


def walk_id(i, j):
    return 101 + j * N + i


def stop_id(line, k):
    return 201 + line * N + k


def perimeter(i, j):
    return i in (0, N - 1) or j in (0, N - 1)


def pos(i, j):
    return i * SPACING, j * SPACING


def central(i, j):
    return 3 <= i <= 6 and 3 <= j <= 6


# Onward and return windows (start, end) in seconds after midnight.
WINDOWS = {
    "Faculty": ((27000, 32400), (61200, 68400)),
    "Students": ((28800, 36000), (57600, 64800)),
    "Staff": ((25200, 28800), (61200, 64800)),
}


def job_windows(scale):
    out = []
    for job, spans in WINDOWS.items():
        squeezed = []
        for start, end in spans:
            mid, half = (start + end) / 2, (end - start) / 2 * scale
            squeezed.append([round(mid - half, 3), round(mid + half, 3)])
        out.append({"job": job, "onward": squeezed[0], "return": squeezed[1]})
    return out


def build(args):
    car_nodes, car_edges, walk_nodes, walk_edges = [], [], [], []
    for j in range(N):
        for i in range(N):
            x, y = pos(i, j)
            car_nodes.append({"id": car_id(i, j), "x": x, "y": y, "modes": ["car"]})
            walk_nodes.append({"id": walk_id(i, j), "x": x + WALK_OFFSET, "y": y, "modes": ["walk"]})

    next_edge = 1
    background = []
    for j in range(N):
        for i in range(N):
            for di, dj in ((1, 0), (0, 1)):
                a, b = (i, j), (i + di, j + dj)
                if b[0] >= N or b[1] >= N:
                    continue
                arterial = (j == 5 and dj == 0) or (i == 5 and di == 0)
                capacity = args.arterial_capacity if arterial else args.capacity
                for u, v in ((a, b), (b, a)):
                    car_edges.append({
                        "id": next_edge, "from": car_id(*u), "to": car_id(*v), "modes": ["car"],
                        "length": SPACING, "free_flow": {"car": round(SPACING / CAR_SPEED, 6)},
                        "capacity": capacity,
                    })
                    loaded = (central(*u) and central(*v)) if args.background_area == "central" else (
                        perimeter(*u) and perimeter(*v))
                    if args.background > 0 and loaded:
                        background.append({"edge": next_edge, "steps": [
                            [args.am_start, args.am_end, args.background * capacity],
                            [args.pm_start, args.pm_end, args.background * capacity],
                        ]})
                    next_edge += 1
                    walk_edges.append({
                        "id": 10000 + next_edge, "from": walk_id(*u), "to": walk_id(*v), "modes": ["walk"],
                        "length": SPACING,
                    })

    stops, lines = [], []
    for line in range(2):
        cells = [(k, 5) for k in range(N)] if line == 0 else [(5, k) for k in range(N)]
        ids = []
        for k, (i, j) in enumerate(cells):
            x, y = pos(i, j)
            stops.append({"id": stop_id(line, k), "x": x + WALK_OFFSET, "y": y + STOP_OFFSET, "modes": ["transit"]})
            ids.append(stop_id(line, k))
        route = ids + ids[-2::-1]
        departures = [5 * 3600 + k * args.headway for k in range(int(18 * 3600 / args.headway))]
        lines.append({"id": line + 1, "stops": route, "departures": departures,
                      "leg_times": [args.leg_time] * (len(route) - 1), "capacity": args.bus_capacity})
    # Stop 5 of both lines is the same intersection; drop the duplicate position of line 1.
    stops = [s for s in stops if s["id"] != stop_id(1, 5)]
    for l in lines:
        l["stops"] = [stop_id(0, 5) if s == stop_id(1, 5) else s for s in l["stops"]]

    lo = 5 - args.campus // 2
    campus = [(i, j) for j in range(lo, lo + args.campus) for i in range(lo, lo + args.campus)]
    zones = []
    quadrants = {"nw": (0, 4, 5, 9), "ne": (5, 9, 5, 9), "sw": (0, 4, 0, 4), "se": (5, 9, 0, 4)}
    for name, (i0, i1, j0, j1) in quadrants.items():
        origins = []
        for j in range(j0, j1 + 1):
            for i in range(i0, i1 + 1):
                if (i, j) in campus:
                    continue
                ring = max(abs(i - 4.5), abs(j - 4.5))
                weight = ring * (args.corridor_weight if i == 5 or j == 5 else 1.0)
                origins.append({"node": walk_id(i, j), "weight": round(weight, 3)})
        zones.append({
            "id": name, "population": 1000, "origins": origins,
            "destinations": [{"node": walk_id(i, j), "weight": 1.0} for i, j in campus],
            "job_mix": [{"job": "Faculty", "weight": 1}, {"job": "Students", "weight": 2},
                        {"job": "Staff", "weight": 1}],
            "car_ownership": args.car_ownership, "bike_ownership": 0.0,
        })

    return {
        "name": "grid10",
        "link_radius": 30.0,
        "projection": {"lat": 36.1447, "lon": -86.8027},
        "layers": [
            {"name": "car", "nodes": car_nodes, "edges": car_edges},
            {"name": "walk", "nodes": walk_nodes, "edges": walk_edges},
        ],
        "transit": {"stops": stops, "lines": lines, "first_edge_id": 50000},
        "scm_defaults": {
            "base": {"parking": True, "time": 30.0},
            "by_target_mode": {
                "car": {"required_possession": "car", "time": 60.0},
                "walk": {"parking": True, "time": 60.0},
                "transit": {"parking": True, "cost": 2.0, "time": 30.0},
            },
        },
        "background": {"period": 86400, "edges": background},
        "zones": zones,
        "job_windows": job_windows(args.window_scale),
        "profile": {"weights": [args.w_time, args.w_money, args.w_transfers], "walk_speed": 1.4, "bike_speed": 4.5},
        "simulation": {"horizon_s": 86400, "seed": args.seed, "population": args.population,
                       "alpha_grid": [round(0.1 * k, 1) for k in range(11)], "bin_s": 900,
                       "return_trips": True, "replan_limit": 1},
    }


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", type=Path, default=Path(__file__).with_name("grid10.json"))
    p.add_argument("--capacity", type=float, default=3)
    p.add_argument("--arterial-capacity", type=float, default=4)
    p.add_argument("--background", type=float, default=0.3, help="peak background as a fraction of capacity")
    p.add_argument("--background-area", choices=("central", "perimeter"), default="perimeter")
    p.add_argument("--campus", type=int, default=3, help="side of the square block of destination nodes")
    p.add_argument("--am-start", type=float, default=25200)
    p.add_argument("--am-end", type=float, default=36000)
    p.add_argument("--pm-start", type=float, default=57600)
    p.add_argument("--pm-end", type=float, default=68400)
    p.add_argument("--window-scale", type=float, default=0.07, help="shrink departure windows about their centres")
    p.add_argument("--leg-time", type=float, default=30.0, help="bus seconds per block")
    p.add_argument("--headway", type=float, default=120.0)
    p.add_argument("--corridor-weight", type=float, default=6.0, help="origin weight multiplier on transit corridors")
    p.add_argument("--bus-capacity", type=int, default=60)
    p.add_argument("--car-ownership", type=float, default=0.8)
    p.add_argument("--population", type=int, default=500)
    p.add_argument("--seed", type=int, default=20240501)
    p.add_argument("--w-time", type=float, default=1.0)
    p.add_argument("--w-money", type=float, default=0.0)
    p.add_argument("--w-transfers", type=float, default=0.0)
    args = p.parse_args()
    doc = build(args)
    args.out.write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
