#!/usr/bin/env python3
"""Writes the shipped reflow templates (counts 2..8, portrait and landscape)."""
import json
import math
import pathlib
import sys

MARGIN = 40
GAP = 30


def grid(x, y, w, h, n, cols):
    rows = math.ceil(n / cols)
    cw = (w - GAP * (cols - 1)) / cols
    ch = (h - GAP * (rows - 1)) / rows
    boxes = []
    for i in range(n):
        r, c = divmod(i, cols)
        boxes.append({"x": x + c * (cw + GAP), "y": y + r * (ch + GAP), "w": cw, "h": ch})
    return boxes


def portrait(n):
    W, H = 900, 1600
    inner_w = W - 2 * MARGIN
    hero_h = 420
    boxes = [{"x": MARGIN, "y": MARGIN, "w": inner_w, "h": hero_h}]
    rest = n - 1
    top = MARGIN + hero_h + GAP
    cols = 1 if rest <= 2 else 2
    boxes += grid(MARGIN, top, inner_w, H - MARGIN - top, rest, cols)
    return W, H, boxes


def landscape(n):
    W, H = 1600, 900
    inner_h = H - 2 * MARGIN
    hero_w = 700
    boxes = [{"x": MARGIN, "y": MARGIN, "w": hero_w, "h": inner_h}]
    rest = n - 1
    left = MARGIN + hero_w + GAP
    cols = 1 if rest <= 2 else 2
    boxes += grid(left, MARGIN, W - MARGIN - left, inner_h, rest, cols)
    return W, H, boxes


def main(out):
    out = pathlib.Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for n in range(2, 9):
        for family, fn in (("portrait", portrait), ("landscape", landscape)):
            W, H, boxes = fn(n)
            tpl = {
                "id": f"{family}-{n}",
                "canvas": {"w": W, "h": H},
                "placeholders": [{"bbox": b, "rank": i + 1} for i, b in enumerate(boxes)],
            }
            (out / f"{family}-{n}.json").write_text(json.dumps(tpl, indent=2) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "templates")
