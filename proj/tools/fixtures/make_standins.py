"""Write 1000-row synthetic stand-ins for the House and Mental health data.

The real data sets are not shipped.  These files have the same column count
(9 and 12) and come with a graph, so the whole pipeline can be exercised on
them.  Values are drawn from a mixture network over the graph, so colliders
really are multi-modal.

    python3 tools/fixtures/make_standins.py data/standins
"""
import json
import sys

import numpy as np

HOUSE_NODES = ["MedInc", "HouseAge", "AveRooms", "AveBedrms", "Population",
               "AveOccup", "Latitude", "Longitude", "MedHouseVal"]
HOUSE_EDGES = [("Latitude", "Longitude"), ("Latitude", "MedHouseVal"),
               ("MedInc", "MedHouseVal"), ("MedInc", "AveRooms"),
               ("AveRooms", "AveBedrms"), ("HouseAge", "Population"),
               ("Population", "AveOccup"), ("MedHouseVal", "AveOccup"),
               ("HouseAge", "AveRooms")]

MH_NODES = [f"mh{i:02d}" for i in range(12)]
MH_EDGES = [("mh00", "mh02"), ("mh01", "mh02"), ("mh02", "mh03"), ("mh03", "mh05"),
            ("mh04", "mh05"), ("mh04", "mh06"), ("mh06", "mh07"), ("mh05", "mh08"),
            ("mh07", "mh08"), ("mh08", "mh09"), ("mh09", "mh10"), ("mh01", "mh11"),
            ("mh10", "mh11")]


def topo(nodes, edges):
    order, done = [], set()
    while len(order) < len(nodes):
        for n in nodes:
            if n not in done and all(p in done for p, c in edges if c == n):
                order.append(n)
                done.add(n)
    return order


def draw(nodes, edges, rows, rng):
    data = {}
    for n in topo(nodes, edges):
        parents = [p for p, c in edges if c == n]
        if not parents:
            data[n] = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 2), rows)
            continue
        # one branch per parent: a crude multi-modal conditional
        k = rng.integers(0, len(parents), rows)
        out = np.empty(rows)
        for i, p in enumerate(parents):
            w, b, s = rng.uniform(-1.5, 1.5), rng.uniform(-1, 1), rng.uniform(0.2, 0.8)
            mask = k == i
            out[mask] = w * data[p][mask] + b + rng.normal(0, s, mask.sum())
        data[n] = out
    return np.column_stack([data[n] for n in nodes])


def write(directory, stem, nodes, edges, description, seed):
    rng = np.random.default_rng(seed)
    values = draw(nodes, edges, 1000, rng)
    with open(f"{directory}/{stem}.csv", "w") as f:
        f.write(",".join(nodes) + "\n")
        for row in values:
            f.write(",".join(f"{v:.10g}" for v in row) + "\n")
    with open(f"{directory}/{stem}.json", "w") as f:
        json.dump({"description": description, "nodes": nodes,
                   "edges": [list(e) for e in edges]}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "data/standins"
    write(out, "house_standin", HOUSE_NODES, HOUSE_EDGES,
          "Synthetic 1000-row stand-in with the House column layout; "
          "AveOccup is a collider of Population and MedHouseVal.", 1)
    write(out, "mental_health_standin", MH_NODES, MH_EDGES,
          "Synthetic 1000-row stand-in with 12 continuous columns.", 2)
