#!/usr/bin/env python3
"""Independent reference numbers for the synthetic bundle.

Prints, per leave-one-out fold, the nearest-neighbour recommendation's
metric@1 and the mean nAcc@1 of the nearest-neighbour pipeline, the Constant
baseline (first greedy pick) and the expected value of one uniform random
draw. The test suite freezes these values.
"""
import json
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
B = os.path.join(HERE, "synthetic")


def fnv1a64(s):
    h = 0xCBF29CE484222325
    for c in s.encode():
        h ^= c
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def embed(text, dim=256):
    toks = [t.lower() for t in "".join(ch if ch.isalnum() else " " for ch in text).split()]
    v = [0.0] * dim
    for t in toks:
        v[fnv1a64(t) % dim] += 1.0
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


tasks = [json.loads(l) for l in open(os.path.join(B, "tasks.jsonl"))]
rows = [json.loads(l) for l in open(os.path.join(B, "table.jsonl"))]
key = lambda v: (v["cost"], v["gamma"], v["kernel"])
table = {(r["task_id"], key(r["values"])): r["metric"] for r in rows}
grid = sorted({key(r["values"]) for r in rows})
ids = [t["task_id"] for t in tasks]
lo = {t: min(table[(t, g)] for g in grid) for t in ids}
hi = {t: max(table[(t, g)] for g in grid) for t in ids}
nacc = lambda t, m: 100.0 * (m - lo[t]) / (hi[t] - lo[t])
vec = {t["task_id"]: embed(t["description"]) for t in tasks}

nn_metrics, nn_nacc, const_nacc, rand_nacc = [], [], [], []
for held in ids:
    train = [t for t in ids if t != held]
    sims = [(-sum(a * b for a, b in zip(vec[held], vec[t])), t) for t in train]
    nearest = min(sims)[1]
    best = sorted(grid, key=lambda g: -table[(nearest, g)])[0]
    nn_metrics.append(table[(held, best)])
    nn_nacc.append(nacc(held, table[(held, best)]))

    means = [(sum(nacc(t, table[(t, g)]) for t in train) / len(train), g) for g in grid]
    top = max(m for m, _ in means)
    pick = [g for m, g in means if m == top][0]
    const_nacc.append(nacc(held, table[(held, pick)]))
    rand_nacc.append(sum(nacc(held, table[(held, g)]) for g in grid) / len(grid))

print("nn metric@1:", ", ".join(repr(m) for m in nn_metrics))
print("nn mean nAcc@1:", repr(sum(nn_nacc) / len(ids)))
print("constant mean nAcc@1:", repr(sum(const_nacc) / len(ids)))
print("random expected nAcc@1:", repr(sum(rand_nacc) / len(ids)))
