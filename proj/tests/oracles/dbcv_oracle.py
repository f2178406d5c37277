"""Freeze DBCV reference values for the C++ tests.

Implements the validity index directly from its definition with numpy and
networkx, independently of the library code, and writes the fixtures plus
expected scores to tests/data/dbcv_fixtures.json.
"""
import json
import math
import pathlib

import networkx as nx
import numpy as np


def core_distance(dists, dim):
    # mean of (1/d)^dim over the other members, raised to -1/dim
    if np.any(dists == 0):
        return 0.0
    logs = -dim * np.log(dists)
    top = logs.max()
    log_mean = top + math.log(np.exp(logs - top).sum()) - math.log(len(dists))
    return math.exp(-log_mean / dim)


def validity(points, labels):
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    n, dim = points.shape
    dist = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(-1))
    ids = sorted(set(labels.tolist()) - {-1})
    core = np.zeros(n)
    for c in ids:
        members = np.flatnonzero(labels == c)
        for i in members:
            others = [dist[i, j] for j in members if j != i]
            core[i] = core_distance(np.array(others), dim)

    def mreach(i, j):
        return max(core[i], core[j], dist[i, j])

    dsc, internal = {}, {}
    for c in ids:
        members = np.flatnonzero(labels == c).tolist()
        g = nx.Graph()
        for a in members:
            for b in members:
                if a < b:
                    g.add_edge(a, b, weight=mreach(a, b))
        tree = nx.minimum_spanning_tree(g, algorithm="prim")
        nodes = [v for v in members if tree.degree(v) > 1] or members
        edges = [d["weight"] for u, v, d in tree.edges(data=True) if u in nodes and v in nodes]
        if not edges:
            edges = [d["weight"] for _, _, d in tree.edges(data=True)]
        dsc[c] = max(edges)
        internal[c] = nodes

    score = 0.0
    for c in ids:
        if len(ids) == 1:
            sep = 0.0
        else:
            sep = min(mreach(i, j) for o in ids if o != c for i in internal[c] for j in internal[o])
        denom = max(sep, dsc[c])
        v = 0.0 if denom == 0 else (sep - dsc[c]) / denom
        score += (labels == c).sum() / n * v
    return score


def blobs(rng, centers, per, sigma, noise, dim):
    pts, labels = [], []
    for c, center in enumerate(centers):
        for _ in range(per):
            pts.append(center + sigma * rng.standard_normal(dim))
            labels.append(c)
    for _ in range(noise):
        pts.append(rng.uniform(-3, 3, dim))
        labels.append(-1)
    return pts, labels


def main():
    rng = np.random.default_rng(20240531)
    fixtures = []
    for idx in range(20):
        dim = int(rng.integers(2, 9))
        kind = idx % 4
        if kind == 0:  # two tight, far-separated clusters
            centers = [np.zeros(dim), np.full(dim, 10.0)]
            pts, labels = blobs(rng, centers, int(rng.integers(6, 15)), 0.1, 0, dim)
        elif kind == 1:  # uniform noise labeled as one cluster
            pts = list(rng.uniform(0, 1, (int(rng.integers(10, 30)), dim)))
            labels = [0] * len(pts)
        elif kind == 2:  # several clusters plus noise points
            k = int(rng.integers(2, 5))
            centers = [rng.uniform(-5, 5, dim) for _ in range(k)]
            pts, labels = blobs(rng, centers, int(rng.integers(4, 10)), 0.5, int(rng.integers(0, 5)), dim)
        else:  # overlapping clusters with shuffled labels
            centers = [np.zeros(dim), np.full(dim, 1.0)]
            pts, labels = blobs(rng, centers, int(rng.integers(5, 12)), 1.0, 2, dim)
            flip = rng.choice(len(labels), size=2, replace=False)
            for f in flip:
                if labels[f] >= 0:
                    labels[f] = 1 - labels[f]
        fixtures.append({
            "points": [list(map(float, p)) for p in pts],
            "labels": [int(l) for l in labels],
            "expected": validity(pts, labels),
        })
    out = pathlib.Path(__file__).resolve().parents[1] / "data" / "dbcv_fixtures.json"
    out.write_text(json.dumps(fixtures, indent=1) + "\n")
    print(f"wrote {len(fixtures)} fixtures to {out}")


if __name__ == "__main__":
    main()
