#!/usr/bin/env python3
"""Regenerates the annotation fixtures and their expected outputs.

The expected maps are computed here with exact fractions, independently of
the C++ code, and stored as correctly rounded doubles.
"""
import json
import pathlib
import random
from fractions import Fraction

W = H = 16
HERE = pathlib.Path(__file__).resolve().parent


def rle(bits):
    runs, cur, n = [], 0, 0
    for b in bits:
        if b != cur:
            runs.append(n)
            cur, n = b, 0
        n += 1
    runs.append(n)
    return f"{W}x{H}:" + ",".join(map(str, runs))


def rect(x0, y0, x1, y1):
    return [1 if x0 <= x < x1 and y0 <= y < y1 else 0 for y in range(H) for x in range(W)]


def iou(a, b):
    inter = sum(x & y for x, y in zip(a, b))
    union = sum(x | y for x, y in zip(a, b))
    return Fraction(1) if union == 0 else Fraction(inter, union)


def noisy(truth, rng, flips):
    bits = list(truth)
    for i in rng.sample(range(W * H), flips):
        bits[i] ^= 1
    return bits


def keep_fraction(truth, keep):
    """Keeps the first `keep` marked cells, so IoU = keep / |truth|."""
    out, kept = [], 0
    for b in truth:
        if b and kept < keep:
            out.append(1)
            kept += 1
        else:
            out.append(0)
    return out


SENTINELS = {
    "s01": rect(2, 2, 7, 4),       # 10 cells
    "s02": rect(8, 8, 13, 10),     # 10 cells
    "s03": rect(0, 10, 10, 16),
    "s04": rect(4, 0, 14, 5),      # 50 cells
    "s05": rect(10, 2, 15, 14),
    "s06": rect(3, 6, 8, 14),      # 40 cells
}

DESIGNS = {
    "d_alpha": rect(1, 1, 9, 6),
    "d_beta": rect(6, 4, 15, 12),
    "d_gamma": rect(0, 8, 8, 16),
    "d_delta": rect(3, 3, 13, 13),
    "d_epsilon": rect(9, 0, 16, 7),
}


def write_sentinels(dirpath, ids):
    dirpath.mkdir(parents=True, exist_ok=True)
    for sid in ids:
        (dirpath / f"{sid}.json").write_text(json.dumps({"sentinel_id": sid, "rle": rle(SENTINELS[sid])}) + "\n")


def expected_maps(accepted_masks):
    out = {}
    for did, masks in sorted(accepted_masks.items()):
        n = len(masks)
        vals = [float(Fraction(sum(m[i] for m in masks), n)) for i in range(W * H)]
        out[did] = {"w": W, "h": H, "annotators": n, "values": vals}
    return out


def gate(ious):
    passed = sum(1 for v in ious if v > Fraction(3, 5))
    return Fraction(passed, len(ious)) >= Fraction(2, 3)


def corpus():
    """25 participants x (5 designs + 3 sentinels) = 200 lines."""
    rng = random.Random(20240607)
    sids = sorted(SENTINELS)
    lines, accepted, rejected = [], {}, []
    participants = [f"p{i:02d}" for i in range(25)]
    bad = {"p04": "random", "p13": "one_of_three", "p21": "boundary"}
    for k, pid in enumerate(participants):
        trio = [sids[(k + j) % len(sids)] for j in range(3)]
        sentinel_masks = []
        for j, sid in enumerate(trio):
            truth = SENTINELS[sid]
            mode = bad.get(pid)
            if mode == "random":
                m = [rng.randint(0, 1) for _ in range(W * H)]
            elif mode == "one_of_three":
                m = noisy(truth, rng, 2) if j == 0 else [0] * (W * H)
            elif mode == "boundary":
                # Two sentinels at IoU exactly 0.6 fail the strict rule.
                m = truth if j == 0 else keep_fraction(truth, sum(truth) * 3 // 5)
            elif k % 7 == 3 and j == 2:
                # Good participant missing one sentinel still passes 2 of 3.
                m = [0] * (W * H)
            else:
                m = noisy(truth, rng, 2)
            sentinel_masks.append((sid, m))
        ious = [iou(m, SENTINELS[sid]) for sid, m in sentinel_masks]
        ok = gate(ious)
        if pid in bad:
            assert not ok, pid
        else:
            assert ok, pid
        design_masks = []
        for did, truth in DESIGNS.items():
            design_masks.append((did, noisy(truth, rng, rng.randint(0, 20))))
            lines.append({"design_id": did, "participant_id": pid, "rle": rle(design_masks[-1][1])})
        for sid, m in sentinel_masks:
            lines.append({"participant_id": pid, "sentinel_id": sid, "rle": rle(m)})
        if ok:
            for did, m in design_masks:
                accepted.setdefault(did, []).append(m)
        else:
            rejected.append(pid)
    rng.shuffle(lines)
    assert len(lines) == 200
    return lines, accepted, rejected, [p for p in participants if p not in bad]


def small():
    """10 single-HIT participants, 2 failing the gate."""
    rng = random.Random(7)
    lines, accepted, rejected = [], {}, []
    for k in range(10):
        pid = f"q{k}"
        good = k not in (2, 7)
        trio = ["s01", "s02", "s03"]
        m = noisy(DESIGNS["d_alpha"], rng, k)
        lines.append({"design_id": "d_alpha", "participant_id": pid, "hit_id": "h1", "rle": rle(m)})
        for sid in trio:
            sm = noisy(SENTINELS[sid], rng, 1) if good else [0] * (W * H)
            lines.append({"participant_id": pid, "hit_id": "h1", "sentinel_id": sid, "rle": rle(sm)})
        (accepted.setdefault("d_alpha", []) if good else rejected).append(m if good else pid)
    return lines, accepted, rejected


def main():
    root = HERE / "annotation"
    write_sentinels(root / "sentinels", sorted(SENTINELS))
    lines, accepted, rejected, ok = corpus()
    (root / "masks.jsonl").write_text("".join(json.dumps(l) + "\n" for l in lines))
    (root / "expected.json").write_text(json.dumps({
        "accepted_participants": ok,
        "rejected_participants": sorted(rejected),
        "maps": expected_maps(accepted),
    }) + "\n")

    lines, accepted, rejected = small()
    (root / "small.jsonl").write_text("".join(json.dumps(l) + "\n" for l in lines))
    (root / "small_expected.json").write_text(json.dumps({
        "rejected_participants": rejected,
        "maps": expected_maps(accepted),
    }) + "\n")


if __name__ == "__main__":
    main()
