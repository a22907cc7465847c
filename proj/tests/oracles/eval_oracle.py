#!/usr/bin/env python3
"""Independent reference for the cross-validation protocol.

Generates the synthetic20 fixture (ratings, movies, profiles, explicit fold
assignment) and prints the MAE every (method, k) cell must reproduce. Written
against plain dicts with no shared code, so it can check the C++ path.

    python3 tests/oracles/eval_oracle.py tests/fixtures/synthetic20
"""
import json
import math
import os
import random
import sys

USERS = 20
ITEMS = 15
FOLDS = 5
K_VALUES = [1, 2, 3, 5, 10]
GENRES = ["Action", "Comedy", "Drama", "Horror", "Romance", "Sci-Fi"]
DIRECTORS = ["Director %d" % d for d in range(5)]
ACTORS = ["Actor %d" % a for a in range(10)]


def generate(rng):
    ratings = []
    taste = {u: rng.choice(GENRES) for u in range(1, USERS + 1)}
    movies = {}
    for i in range(1, ITEMS + 1):
        g = sorted(rng.sample(GENRES, rng.randint(1, 3)))
        d = sorted(rng.sample(DIRECTORS, rng.randint(0, 2)))
        a = sorted(rng.sample(ACTORS, rng.randint(0, 4)))
        movies[100 + i] = {"title": "Movie %d (199%d)" % (i, i % 10), "genres": g, "directors": d, "actors": a}
    for u in range(1, USERS + 1):
        for item, m in movies.items():
            if rng.random() < 0.6:
                base = 4 if taste[u] in m["genres"] else 2
                v = max(1, min(5, base + rng.choice([-1, 0, 0, 1])))
                ratings.append((u, item, v, 978300000 + len(ratings)))
    # A user and a movie that only ever appear in a test fold.
    movies[100 + ITEMS + 1] = {"title": "Lonely Movie (1999)", "genres": ["Drama"], "directors": [], "actors": []}
    ratings.append((1, 100 + ITEMS + 1, 4, 978309999))
    ratings.append((USERS + 1, 101, 3, 978309998))
    return ratings, movies


def fold_of(u, i):
    return (u * 7 + i * 3) % FOLDS


def norm(labels):
    return {l.strip().lower() for l in labels if l.strip()}


def weight(m, t, max_features):
    gm, gt = norm(m["genres"]), norm(t["genres"])
    dm, dt = norm(m["directors"]), norm(t["directors"])
    common_actors = norm(m["actors"]) & norm(t["actors"])
    shared = len(gm & gt) + len(dm & dt) + len(common_actors)
    nm = len(gm) + len(dm) + len(common_actors)
    nt = len(gt) + len(dt) + len(common_actors)
    if shared >= 1:
        return (1 + shared) / (math.sqrt(nm) * math.sqrt(nt))
    return 1.0 / max_features


def run(ratings, movies, method):
    max_features = max(len(norm(m["genres"])) + len(norm(m["directors"])) + len(norm(m["actors"]))
                       for m in movies.values())
    err = {k: 0.0 for k in K_VALUES}
    count = {k: 0 for k in K_VALUES}
    fallbacks = {k: 0 for k in K_VALUES}
    skipped = 0
    for f in range(FOLDS):
        train = {}
        test = []
        for (u, i, v, _) in ratings:
            if fold_of(u, i) == f:
                test.append((u, i, v))
            else:
                train.setdefault(u, {})[i] = v
        means = {u: sum(r.values()) / len(r) for u, r in train.items()}
        for (a, t, actual) in sorted(test):
            if a not in train:
                skipped += len(K_VALUES)
                continue
            scored = []
            for u in sorted(train):
                if u == a or t not in train[u]:
                    continue
                common = sorted(set(train[a]) & set(train[u]))
                if not common:
                    continue
                num = sa = su = 0.0
                for i in common:
                    w = weight(movies[i], movies[t], max_features) if method == "WPC" else 1.0
                    da = w * (train[a][i] - means[a])
                    du = w * (train[u][i] - means[u])
                    num += da * du
                    sa += da * da
                    su += du * du
                raw = 0.0 if sa == 0 or su == 0 else num / (math.sqrt(sa) * math.sqrt(su))
                cf = 1.0 if len(common) > 50 else len(common) / 50.0
                scored.append((-(raw * cf), u, raw * cf))
            scored.sort()
            for k in K_VALUES:
                top = scored[:k]
                den = sum(abs(s) for (_, _, s) in top)
                if not top or abs(den) < 1e-9:
                    pred = means[a]
                    fallbacks[k] += 1
                else:
                    num = sum((train[u][t] - means[u]) * s for (_, u, s) in top)
                    pred = means[a] + num / den
                pred = min(5.0, max(1.0, pred))
                err[k] += abs(actual - pred)
                count[k] += 1
    return {k: (err[k] / count[k], count[k], fallbacks[k]) for k in K_VALUES}, skipped // len(K_VALUES)


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "synthetic20"
    os.makedirs(out_dir, exist_ok=True)
    ratings, movies = generate(random.Random(20240601))
    with open(os.path.join(out_dir, "ratings.dat"), "w") as fh:
        for (u, i, v, ts) in ratings:
            fh.write("%d::%d::%d::%d\n" % (u, i, v, ts))
    with open(os.path.join(out_dir, "movies.dat"), "w") as fh:
        for i, m in sorted(movies.items()):
            fh.write("%d::%s::%s\n" % (i, m["title"], "|".join(m["genres"])))
    with open(os.path.join(out_dir, "profiles.jsonl"), "w") as fh:
        for i, m in sorted(movies.items()):
            fh.write(json.dumps({"item_id": i, "title": m["title"], "genres": m["genres"],
                                 "directors": m["directors"], "actors": m["actors"],
                                 "source": "override", "status": "overridden"}) + "\n")
    with open(os.path.join(out_dir, "folds.txt"), "w") as fh:
        for (u, i, _, _) in ratings:
            fh.write("%d %d %d\n" % (u, i, fold_of(u, i)))
    print("ratings", len(ratings))
    for method in ("PC", "WPC"):
        cells, skipped = run(ratings, movies, method)
        for k in K_VALUES:
            mae, n, fb = cells[k]
            print("%s k=%d mae=%.17g predictions=%d fallbacks=%d skipped=%d" % (method, k, mae, n, fb, skipped))


if __name__ == "__main__":
    main()
