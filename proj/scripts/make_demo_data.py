#!/usr/bin/env python3
"""Regenerates the demo catalog, histogram, gate metadata and pipeline config under data/demo."""
import csv
import json
import random
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "data" / "demo"

# (combo, count): a long tail from a few hundred down to singletons.
COMBOS = [
    ("Song|Ding|White|Bowl", 420),
    ("Song|Longquan|Celadon|Bowl", 380),
    ("Song|Jingdezhen|BluishWhite|Bowl", 340),
    ("Song|Jian|Black|TeaBowl", 300),
    ("Song|Cizhou|White|Pillow", 180),
    ("Song|Yaozhou|Celadon|Bowl", 160),
    ("Yuan|Jingdezhen|BluishWhite|Plate", 150),
    ("Song|Jizhou|Black|TeaBowl", 140),
    ("Song|Ding|White|Plate", 130),
    ("Song|Jun|SkyBlue|Washer", 110),
    ("Yuan|Jun|SkyBlue|Bowl", 100),
    ("Song|Longquan|PeaGreen|Vase", 90),
    ("Yuan|Longquan|Celadon|Plate", 70),
    ("Song|Ru|SkyBlue|Washer", 60),
    ("Yuan|Jingdezhen|Blue|Meiping", 55),
    ("Song|Longquan|Celadon|Washer", 45),
    ("Yuan|Cizhou|Black|Jar", 40),
    ("Song|Jingdezhen|BluishWhite|Cup", 35),
    ("Song|Yaozhou|Celadon|Ewer", 22),
    ("Song|Jian|Brown|TeaBowl", 20),
    ("Song|Peng|White|Bowl", 18),
    ("Song|Ding|White|Box", 17),
    ("Yuan|Jingdezhen|Red|StemCup", 16),
    ("Song|Huozhou|White|Dish", 15),
    ("Song|Cizhou|Green|Pillow", 14),
    ("Song|Jingdezhen|BluishWhite|IncenseBurner", 13),
    ("Song|Linchuan|White|Bowl", 12),
    ("Yuan|Jun|Purple|Basin", 11),
    ("Song|Cizhou|White|Pot", 10),
    ("Song|Longquan|Celadon|Planter", 10),
    ("Song|Longquan|Celadon|Vase", 9),
    ("Song|Xicun|Green|Pillow", 9),
    ("Song|Longquan|Celadon|Dish", 8),
    ("Song|Guang|Yellow|Jar", 8),
    ("Yuan|Jun|MoonWhite|Washer", 7),
    ("Song|Longquan|Celadon|Pot", 6),
    ("Song|Ding|White|Washer", 6),
    ("Song|Ge|Celadon|Zun", 5),
    ("Song|Jizhou|TeaDust|Jar", 5),
    ("Song|Jizhou|Brown|Bowl", 4),
    ("Song|Ding|White|Dish", 4),
    ("Song|Jizhou|Persimmon|Vase", 4),
    ("Yuan|Jun|MoonWhite|Bowl", 3),
    ("Song|Cizhou|White|Vase", 3),
    ("Song|Ding|IvoryWhite|Bowl", 3),
    ("Song|Ding|IvoryWhite|Washer", 2),
    ("Song|Ding|IvoryWhite|Vase", 2),
    ("Song|Ding|IvoryWhite|Plate", 2),
    ("Song|Jian|Black|Cup", 2),
    ("Song|Jizhou|Black|Dish", 2),
    ("Song|Ge|SkyBlue|Cheng", 2),
    ("Yuan|Jun|MoonWhite|Vase", 1),
    ("Yuan|Jun|MoonWhite|Plate", 1),
    ("Song|Guan|MoonWhite|Dish", 1),
    ("Song|Ding|IvoryWhite|Pot", 1),
    ("Song|Ding|IvoryWhite|Cup", 1),
    ("Song|Ding|IvoryWhite|Dish", 1),
    ("Song|Ding|White|Cup", 1),
    ("Song|Ding|Brown|Plate", 1),
    ("Song|Longquan|Celadon|Cup", 1),
    ("Yuan|Jingdezhen|BluishWhite|Lamp", 1),
]


def main() -> None:
    rng = random.Random(20240611)
    OUT.mkdir(parents=True, exist_ok=True)

    rows = []
    for combo, n in COMBOS:
        rows.extend([combo] * n)
    rng.shuffle(rows)
    with open(OUT / "catalog.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "image_path", "dynasty", "kiln", "glaze", "type", "source"])
        for i, combo in enumerate(rows, start=1):
            rid = f"P{i:05d}"
            source = "PMBJ" if rng.random() < 0.06 else "PMTP"
            w.writerow([rid, f"img/{rid}.jpg", *combo.split("|"), source])

    counts = Counter(rows)
    with open(OUT / "histogram.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["combo", "count"])
        for combo in sorted(counts):
            w.writerow([combo, counts[combo]])

    with open(OUT / "gate_metadata.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "width", "height", "intact", "mean_r", "mean_g", "mean_b", "var_r", "var_g", "var_b"])
        for i in range(1, 201):
            width = height = 512
            intact = 1
            means = [round(rng.uniform(0.3, 0.7), 4) for _ in range(3)]
            vars_ = [round(rng.uniform(0.02, 0.08), 4) for _ in range(3)]
            roll = rng.random()
            if roll < 0.03:
                width = height = 256
            elif roll < 0.05:
                intact = 0
            elif roll < 0.08:
                means[rng.randrange(3)] = round(rng.uniform(0.96, 0.99), 4)
            elif roll < 0.10:
                vars_[rng.randrange(3)] = round(rng.uniform(0.0001, 0.0009), 4)
            w.writerow([f"job-{i:06d}", width, height, intact, *means, *vars_])

    config = {
        "catalog": "catalog.csv",
        "vocab_dir": "../vocab",
        "lexicon": "../lexicon.json",
        "allocation_spec": "../specs/dataset_a.json",
        "gate_metadata": "gate_metadata.csv",
        "seed": 42,
        "beta": 0.999,
        "cap": 10.0,
        "normalization": "mean_one",
        "aug_threshold": 50,
        "aug_target": 100,
        "gate": {"expected_width": 512, "expected_height": 512,
                 "channel_mean": [0.05, 0.95], "channel_variance": [0.001, 0.25]},
    }
    (OUT / "pipeline.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
