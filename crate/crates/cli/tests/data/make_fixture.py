"""Regenerates export.json and predictions/ for the end-to-end fixture.

Predictions are drawn with PIL so they do not share code with the Rust
rasterizer. Run from this directory: python3 make_fixture.py
"""

import json
import math
import os
import random

from PIL import Image, ImageDraw

W, H = 48, 40
DEFECTS = ["Rot", "Rot (maybe)", "Pressure Wood", "Discoloration", "Ingrowth/Crack"]
# lowest precedence first, so later draws win
DRAW_ORDER = ["Crosscut", "Pressure Wood", "Ingrowth/Crack", "Rot (maybe)", "Discoloration", "Rot"]
CLASS_ID = {
    "Crosscut": 1,
    "Rot": 2,
    "Rot (maybe)": 3,
    "Pressure Wood": 4,
    "Discoloration": 5,
    "Ingrowth/Crack": 6,
}

rng = random.Random(7)


def blob(cx, cy, rx, ry, n):
    pts = []
    for k in range(n):
        a = 2 * math.pi * k / n
        r = 0.8 + 0.4 * rng.random()
        pts.append((cx + rx * r * math.cos(a), cy + ry * r * math.sin(a)))
    return pts


def clamp(p):
    return (min(max(p[0], 0.0), W), min(max(p[1], 0.0), H))


def scene(with_speck):
    regions = [("Crosscut", blob(24, 20, 19, 15, 16))]
    for _ in range(rng.randint(2, 4)):
        label = rng.choice(DEFECTS)
        cx, cy = 24 + rng.uniform(-14, 14), 20 + rng.uniform(-11, 11)
        regions.append((label, blob(cx, cy, rng.uniform(3, 8), rng.uniform(3, 7), rng.randint(5, 7))))
    if with_speck:
        cx, cy = 24 + rng.uniform(-8, 8), 20 + rng.uniform(-6, 6)
        regions.append((rng.choice(DEFECTS), blob(cx, cy, 1.2, 1.2, 4)))
    return [(label, [clamp(p) for p in pts]) for label, pts in regions]


def jitter(regions, amount, drop=0.0):
    out = []
    for i, (label, pts) in enumerate(regions):
        if i > 0 and rng.random() < drop:
            continue
        out.append((label, [clamp((x + rng.uniform(-amount, amount), y + rng.uniform(-amount, amount))) for x, y in pts]))
    return out


def result(label, pts, idx, origin=None):
    item = {
        "id": f"r{idx}",
        "type": "polygonlabels",
        "original_width": W,
        "original_height": H,
        "value": {
            "points": [[round(x * 100 / W, 3), round(y * 100 / H, 3)] for x, y in pts],
            "polygonlabels": [label],
        },
    }
    if origin:
        item["origin"] = origin
    return item


def annotation(email, regions, updated_at, origin=None):
    return {
        "completed_by": {"id": sum(map(ord, email)), "email": email},
        "updated_at": updated_at,
        "was_cancelled": False,
        "result": [result(label, pts, i, origin) for i, (label, pts) in enumerate(regions)],
    }


def draw(regions):
    img = Image.new("L", (W, H), 0)
    d = ImageDraw.Draw(img)
    for label in DRAW_ORDER:
        for l, pts in regions:
            if l == label:
                d.polygon(pts, fill=CLASS_ID[label])
    return img


tasks = []
os.makedirs("predictions", exist_ok=True)

for k in range(1, 11):
    sid = f"log-{k:02d}"
    regions = scene(with_speck=k % 3 == 0)
    anns = []
    if k == 2:
        anns.append(annotation("sam@pre", jitter(regions, 2.0), "2023-01-01T00:00:00Z", "prediction"))
    anns.append(annotation("expert@lab", regions, f"2023-02-{k:02d}T10:00:00Z"))
    if k == 5:
        # a rectangle result is skipped on import
        anns[-1]["result"].append({"id": "box", "type": "rectanglelabels", "value": {}})
    tasks.append({"id": k, "data": {"image": f"/data/upload/1/{sid}.jpg", "subset": "data"}, "annotations": anns})

    pred = jitter(regions, 2.0, drop=0.2)
    pred = [(rng.choice(DEFECTS) if i > 0 and rng.random() < 0.15 else l, p) for i, (l, p) in enumerate(pred)]
    draw(pred).save(f"predictions/{sid}.png")

for k in range(1, 4):
    sid = f"warm-{k}"
    regions = scene(with_speck=False)
    anns = [
        annotation("ann1@lab", regions, "2023-03-01T09:00:00Z"),
        annotation("ann2@lab", jitter(regions, 1.5), "2023-03-01T10:00:00Z"),
        annotation("ann3@lab", jitter(regions, 2.5, drop=0.3), "2023-03-01T11:00:00Z"),
    ]
    tasks.append({"id": 100 + k, "data": {"image": f"{sid}.jpg", "subset": "warmup"}, "annotations": anns})

tasks.append(
    {
        "id": 200,
        "data": {"image": "example-1.jpg", "subset": "examples"},
        "annotations": [annotation("expert@lab", scene(with_speck=False), "2023-01-15T08:00:00Z")],
    }
)

with open("export.json", "w") as f:
    json.dump(tasks, f, indent=1)
    f.write("\n")
