"""Smoke test for the tsfeat extension module.

Build and run from the workspace root:

    cargo build -p tsfeat-python --release --features extension-module
    cp target/release/libtsfeat_py.so python/tsfeat.so
    python3 python/smoke_test.py
"""

import math
import random

import tsfeat


def mixture(n, length, seed=0):
    rng = random.Random(seed)
    out = []
    for i in range(n):
        p1, p2 = 3.0 + 1.7 * i, 5.0 + 1.3 * ((i * 7) % n)
        ph = rng.random() * 2 * math.pi
        values = [
            10 + math.sin(2 * math.pi * t / p1 + ph) + 0.5 * math.sin(2 * math.pi * t / p2)
            + 0.05 * rng.gauss(0, 1)
            for t in range(length)
        ]
        out.append((f"S{i + 1:02d}", values))
    return out


def main():
    assert tsfeat.smape([0.0], [5.0]) == 200.0
    assert tsfeat.forecast("rw_drift", [float(v) for v in range(1, 11)], 3) == [11.0, 12.0, 13.0]
    assert set(tsfeat.models()) >= {"naive2", "theta", "ets"}
    assert tsfeat.combine([0.5, 0.5], [[1.0, 2.0], [3.0, 4.0]]) == [2.0, 3.0]

    wins = tsfeat.windows([float(t % 5) for t in range(40)], 16)
    assert wins and all(len(v) == 16 for _, v in wins)

    series = mixture(6, 120)
    small = {"conv_blocks": "8x8,16x5,8x3", "window_length": "24", "epochs": "20"}
    ext = tsfeat.Extractor.train(series, options=small)
    ids, rows = ext.features(series)
    assert ids == [s for s, _ in series] and all(len(r) == ext.n_features for r in rows)
    again = tsfeat.Extractor.from_text(ext.to_text())
    assert again.features(series) == (ids, rows)
    print(f"extractor: accuracy {ext.accuracy:.3f}, {ext.n_features} features")

    labels, inertia, silhouette, _ = tsfeat.kmeans(rows, 2, restarts=5)
    coords, _ = tsfeat.pca(rows)
    close, far = tsfeat.similarity_extremes(ids, rows)
    assert len(labels) == len(coords) == 6 and close[2] <= far[2]

    rng = random.Random(1)
    feats = [[rng.uniform(-1, 1) for _ in range(3)] for _ in range(200)]
    errs = [[0.0, 20.0] if f[0] > 0 else [20.0, 0.0] for f in feats]
    gbdt = tsfeat.Gbdt.fit(feats, errs)
    w = gbdt.predict_weights([0.5, 0.0, 0.0])
    assert w[0] > 0.8 and abs(sum(w) - 1) < 1e-12

    means, weights = tsfeat.run_pipeline(mixture(12, 100, seed=2), 8, options={**small, "epochs": "5"})
    print("mean sMAPE:", ", ".join(f"{m} {v:.2f}" for m, v in means))
    assert means[-1][0] == "combined" and len(weights) == 12

    try:
        tsfeat.smape([1.0], [1.0, 2.0])
    except ValueError as e:
        print("error surfaced:", e)
    else:
        raise AssertionError("length mismatch accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
