"""Straight-line recomputation of evolution.csv from a flows file.

Independent of the C++ code: numpy for the quartile, networkx for the
undirected clustering. Usage: evolution_reference.py flows.csv universe.csv first last
"""
import csv
import sys
from collections import defaultdict

import networkx as nx
import numpy as np


def main(flows_path, universe_path, first, last):
    with open(universe_path) as f:
        codes = sorted(row["code"] for row in csv.DictReader(f))
    flows = defaultdict(float)
    with open(flows_path) as f:
        for row in csv.DictReader(f):
            flows[(int(row["year"]), row["origin"], row["destination"])] += float(row["value_kusd"])
    print("year,nodes,edges,average_degree,density,average_clustering")
    for year in range(first, last + 1):
        values = [v for (y, _, _), v in flows.items() if y == year and v > 0]
        threshold = float(np.percentile(values, 25, method="linear"))
        directed = [(o, d) for (y, o, d), v in flows.items() if y == year and v > threshold]
        und = nx.Graph()
        und.add_nodes_from(codes)
        und.add_edges_from(directed)
        n = len(codes)
        avg_degree = sum(d for _, d in und.degree()) / n
        density = len(directed) / (n * (n - 1))
        clustering = sum(nx.clustering(und).values()) / n
        print(f"{year},{n},{len(directed)},{avg_degree!r},{density!r},{clustering!r}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2], int(sys.argv[3]), int(sys.argv[4]))
