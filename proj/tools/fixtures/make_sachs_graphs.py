"""Regenerate the Sachs graph fixtures under data/sachs/.

Structure learning is not part of gmmpc; this script only records how the
shipped graph files were produced.  Requires pandas and pgmpy.

    python3 tools/fixtures/make_sachs_graphs.py data/sachs/sachs.csv data/sachs
"""
import json
import logging
import sys
import warnings

import pandas as pd

warnings.filterwarnings("ignore")
logging.disable(logging.WARNING)

from pgmpy.estimators import PC, ExpertKnowledge, HillClimbSearch  # noqa: E402

# Orientation for edges PC leaves undirected.  None of these creates a new
# v-structure, so the result stays in the PC equivalence class.
PC_ORIENT = {("pmek", "praf"): ("praf", "pmek"),
             ("P38", "PKC"): ("PKC", "P38"),
             ("PKC", "pjnk"): ("PKC", "pjnk")}


def write(path, nodes, edges, description):
    doc = {"description": description, "nodes": nodes,
           "edges": sorted([list(e) for e in edges],
                           key=lambda e: (nodes.index(e[0]), nodes.index(e[1])))}
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def main(csv_path, out_dir):
    df = pd.read_csv(csv_path)
    cols = list(df.columns)
    # pgmpy's Gaussian scores go through a formula parser that rejects "/".
    safe = [f"v{i}" for i in range(len(cols))]
    back = dict(zip(safe, cols))
    z = (df - df.mean()) / df.std(ddof=0)
    z.columns = safe

    pdag = PC(z).estimate(ci_test="pearsonr", significance_level=1e-20,
                          return_type="pdag", show_progress=False)
    e = {(back[a], back[b]) for a, b in pdag.edges()}
    pc_edges = set()
    for a, b in e:
        if (b, a) in e:
            key = tuple(sorted((a, b)))
            pc_edges.add(PC_ORIENT[key])
        else:
            pc_edges.add((a, b))
    write(f"{out_dir}/sachs_pc.json", cols, pc_edges,
          "PC (pgmpy, pearsonr, alpha=1e-20, z-scored data); undirected edges "
          "oriented praf->pmek, PKC->P38, PKC->pjnk")

    gs = HillClimbSearch(z).estimate(scoring_method="bic-g", max_iter=31,
                                     show_progress=False)
    write(f"{out_dir}/sachs_gs.json", cols,
          {(back[a], back[b]) for a, b in gs.edges()},
          "greedy hill climbing (pgmpy, Gaussian BIC), 31 edge operations")

    sk = PC(z).estimate(ci_test="pearsonr", significance_level=0.99,
                        return_type="skeleton", show_progress=False)[0]
    space = [(a, b) for a, b in sk.edges()] + [(b, a) for a, b in sk.edges()]
    mm = HillClimbSearch(z).estimate(
        scoring_method="bic-g", max_iter=27,
        expert_knowledge=ExpertKnowledge(search_space=space),
        show_progress=False)
    write(f"{out_dir}/sachs_mmhc.json", cols,
          {(back[a], back[b]) for a, b in mm.edges()},
          "MMHC-style: hill climbing (Gaussian BIC) restricted to a PC "
          "skeleton (alpha=0.99), 27 edge operations")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
