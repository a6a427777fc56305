#!/usr/bin/env python3
"""Generates the 100-sample curation fixture and its stage-by-stage expected
results. The expectations here are an independent simulation of each stage's
documented rule (nearest-rank quantile, pattern match, strict pass-rate
interior, target/count weights); the C++ tests compare against them exactly.

Run from tests/fixtures/:  python3 make_curation_fixture.py
"""

import json
import math

PROOF_IDS = {3, 17, 23, 42, 55, 61, 78, 96}


def category(i):
    r = i % 10
    if r <= 5:
        return "algebra"
    if r <= 8:
        return "geometry"
    return "logic"


def sample(i):
    s = {
        "task_id": f"s{i:03d}",
        "prompt_text": (
            f"Prove that {i} squared is nonnegative" if (i in PROOF_IDS and i % 2 == 1)
            else f"show that {i} plus zero equals {i}" if i in PROOF_IDS
            else f"Compute the value of {i} + {i + 1}"
        ),
        "reference_answer": str(2 * i + 1),
        "category": category(i),
        "proxy_loss": 1.0 + (i % 20) * 0.25,
        "pass_rate": (i % 10) / 9.0,
    }
    return s


def main():
    corpus = [sample(i) for i in range(100)]

    # Stage 1: loss filter, quantile 0.9, nearest-rank threshold, ties kept.
    losses = sorted(s["proxy_loss"] for s in corpus)
    rank = math.ceil(0.9 * len(losses))
    threshold = losses[rank - 1]
    after_loss = [s for s in corpus if s["proxy_loss"] <= threshold]

    # Stage 2: default pattern rules, case-insensitive substring.
    rules = ["prove that", "show that"]
    def matches(s):
        text = (s["prompt_text"] + "\n" + s["reference_answer"]).lower()
        return any(r in text for r in rules)
    after_pattern = [s for s in after_loss if not matches(s)]

    # Stage 3: difficulty filter, strict interior of (0, 1).
    after_difficulty = [s for s in after_pattern if 0.0 < s["pass_rate"] < 1.0]

    # Reweight over the final kept corpus.
    targets = {"algebra": 0.6, "geometry": 0.4}
    counts = {}
    for s in after_difficulty:
        counts[s["category"]] = counts.get(s["category"], 0) + 1
    weights = {s["task_id"]: targets[s["category"]] / counts[s["category"]]
               for s in after_difficulty}

    with open("curation_corpus.jsonl", "w") as f:
        for s in corpus:
            f.write(json.dumps(s) + "\n")

    expected = {
        "loss_quantile": 0.9,
        "loss_threshold": threshold,
        "kept_after_loss": [s["task_id"] for s in after_loss],
        "kept_after_pattern": [s["task_id"] for s in after_pattern],
        "kept_after_difficulty": [s["task_id"] for s in after_difficulty],
        "reweight_targets": targets,
        "weights": weights,
        "weight_sum": sum(weights.values()),
    }
    with open("curation_expected.json", "w") as f:
        json.dump(expected, f, indent=1)
    print(f"loss: {len(corpus)} -> {len(after_loss)} (threshold {threshold})")
    print(f"pattern: {len(after_loss)} -> {len(after_pattern)}")
    print(f"difficulty: {len(after_pattern)} -> {len(after_difficulty)}")
    print(f"weight sum: {sum(weights.values())!r}")


if __name__ == "__main__":
    main()
