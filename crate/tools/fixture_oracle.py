#!/usr/bin/env python3
"""Reference evaluation of the bundled fixture.

Reads the CSV trees written by `antifragility fixture --out DIR` and prints
global A for every agent, measure and scale as Rust tuples, ready to paste
into crates/core/tests/fixture_values.rs.

    python3 tools/fixture_oracle.py DIR
"""
import csv
import datetime as dt
import sys
from collections import defaultdict
from fractions import Fraction
from pathlib import Path

START, END = dt.date(2014, 1, 1), dt.date(2014, 12, 31)


def key(d, scale):
    if scale == 0:
        return d.toordinal()
    if scale == 1:
        y, w, _ = d.isocalendar()
        return y * 100 + w
    return d.year * 100 + d.month


def norm(xs):
    present = [x for x in xs if x is not None]
    if not present:
        return xs
    lo, hi = min(present), max(present)
    return [None if x is None else (Fraction(1, 2) if hi == lo else (x - lo) / (hi - lo)) for x in xs]


def frac(s):
    return None if s == "" else Fraction(s)


def bucket(rows, scale):
    out = []
    for d, o, v, m in rows:
        k = key(d, scale)
        if out and out[-1][0] == k:
            out[-1][2] += v
        else:
            out.append([k, o, v, m])
    return out


def load(path):
    rows = []
    with open(path) as f:
        for r in csv.DictReader(f):
            d = dt.date.fromisoformat(r["date"])
            if START <= d <= END:
                rows.append((d, frac(r["open"]), frac(r["volume"]), frac(r.get("market_cap", ""))))
    return rows


def load_index(path):
    with open(path) as f:
        return [(dt.date.fromisoformat(r["date"]), Fraction(r["level"])) for r in csv.DictReader(f)
                if START <= dt.date.fromisoformat(r["date"]) <= END]


def mean(xs):
    return sum(xs) / len(xs)


def diffs(keys, xs):
    return {keys[j]: xs[j] - xs[j - 1] for j in range(1, len(xs)) if xs[j] is not None and xs[j - 1] is not None}


def evaluate(root, kind, scale):
    agents = {}
    for p in sorted((root / "data").glob("*.csv")):
        rows = load(p)
        if len(rows) < 2:
            continue
        b = bucket(rows, scale)
        if len(b) < 2:
            continue
        keys = [r[0] for r in b]
        agents[p.stem] = dict(keys=keys, raw=[r[1] for r in b], p=norm([r[1] for r in b]),
                              v=norm([r[2] for r in b]), m=norm([r[3] for r in b]))
    sat = {a: diffs(x["keys"], x["p"]) for a, x in agents.items()}

    def system(contrib):
        acc = defaultdict(list)
        for c in contrib.values():
            for k, val in c.items():
                acc[k].append(val)
        return {k: mean(v) for k, v in acc.items()}

    P = {}
    if kind == "stock":
        P["afp"] = system({a: {k: abs(s) for k, s in sat[a].items()} for a in agents})
        P["afv"] = system({a: {k: abs(sat[a][k] + dv) / 2 for k, dv in diffs(x["keys"], x["v"]).items()}
                           for a, x in agents.items()})
        idx = {}
        for name in ["VIX", "NASDAQ", "DJI", "SPX"]:
            b = bucket([(d, l, Fraction(0), None) for d, l in load_index(root / "indexes" / f"{name}.csv")], scale)
            idx[name] = ([r[0] for r in b], norm([r[1] for r in b]))
        P["afx"] = dict(zip(*idx["VIX"]))
        ds = [{k: abs(x) for k, x in diffs(*idx[n]).items()} for n in ["NASDAQ", "DJI", "SPX"]]
        P["af3m"] = {k: mean([d[k] for d in ds]) for k in ds[0] if all(k in d for d in ds)}
    else:
        raw = system({a: {k: abs(x) for k, x in diffs(v["keys"], v["raw"]).items()} for a, v in agents.items()})
        ks = sorted(raw)
        P["afp"] = dict(zip(ks, norm([raw[k] for k in ks])))
        P["afv"] = system({a: {k: abs(x) for k, x in diffs(v["keys"], v["v"]).items()} for a, v in agents.items()})
        P["afn"] = system({a: {v["keys"][j]: abs(v["p"][j - 1] - v["p"][j - 2]) for j in range(2, len(v["keys"]))}
                           for a, v in agents.items()})
        P["afm"] = system({a: {k: abs(x) for k, x in diffs(v["keys"], v["m"]).items()} for a, v in agents.items()})

    out = []
    for m, pm in P.items():
        for a in sorted(agents):
            inst = [s * pm[k] for k, s in sat[a].items() if k in pm]
            if inst:
                out.append((a, m, scale, mean(inst), len(inst)))
    return out


def main():
    base = Path(sys.argv[1])
    for kind in ["stock", "crypto"]:
        print(f"// {kind}")
        for scale in [0, 1, 2]:
            for a, m, s, g, n in evaluate(base / kind, kind, scale):
                print(f'    ("{a}", "{m}", {s}, {float(g)!r}, {n}),')


if __name__ == "__main__":
    main()
