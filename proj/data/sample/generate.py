#!/usr/bin/env python3
"""Regenerates the small sample corpus in this directory (deterministic)."""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(7)

SUBJECTS = ["A red bicycle leaning on a wall", "Two cats asleep on a sofa", "A lighthouse at dusk",
            "A bowl of ramen with 3.5 eggs", "An old typewriter", "A field of sunflowers",
            "A street market", "A snowy mountain cabin"]
SETTINGS = ["Narrow cobbled alley.", "Sunlit living room.", "Rocky coastline under clouds.",
            "Wooden counter in a small shop.", "Attic desk by a window.", "Open countryside.",
            "Crowded square at noon.", "Pine forest in winter."]
AESTHETICS = ["Warm tones, soft contrast.", "Muted pastel palette.", "Dramatic orange sky.",
              "Steam and rich colour.", "Sepia mood.", "Bright saturated yellow.",
              "Busy, vivid scene.", "Cold blue light."]
CAMERAS = ["Shot at 35mm, f/2.8.", "Eye-level camera, shallow depth of field.", "Wide angle from low.",
           "Overhead close-up.", "Macro lens.", "Drone camera, high angle.", "Handheld camera.",
           "Telephoto, 1/250 s."]

records, aes, det = [], [], []
dims = [(96, 96), (128, 96), (96, 40), (48, 48), (96, 96), (112, 80), (96, 96), (80, 120)]
for i, (w, h) in enumerate(dims):
    rid = f"img{i:03d}"
    level = [30, 120, 90, 200, 250, 140, 8, 160][i]
    path = HERE / "images" / f"{rid}.ppm"
    path.parent.mkdir(exist_ok=True)
    body = bytearray()
    for _ in range(w * h):
        body += bytes(max(0, min(255, level + rng.randint(-6, 6))) for _ in range(3))
    path.write_bytes(f"P6\n{w} {h}\n255\n".encode() + bytes(body))
    caption = " ".join(f"{k + 1}. {s}" for k, s in
                       enumerate([SUBJECTS[i] + ".", SETTINGS[i], AESTHETICS[i], CAMERAS[i]]))
    records.append({"id": rid, "uri": f"images/{rid}.ppm", "width": w, "height": h, "caption_raw": caption})
    aes.append({"id": rid, "aesthetic": [5.6, 4.2, 6.1, 5.0, 5.3, 6.4, 5.9, 4.9][i]})
    quads = []
    if i in (1, 5):
        s = [60, 300][i == 5]
        quads.append({"points": [[100, 100], [100 + s, 100], [100 + s, 100 + s], [100, 100 + s]],
                      "confidence": 0.9})
    quads.append({"points": [[10, 10], [60, 10], [60, 30], [10, 30]], "confidence": 0.5})
    det.append({"id": rid, "polygons": quads})

def dump(name, rows):
    (HERE / name).write_text("".join(json.dumps(r) + "\n" for r in rows))

dump("manifest.jsonl", records)
dump("aesthetic.jsonl", aes)
dump("detections.jsonl", det)
dump("pairs.jsonl", [{"id": r["id"], "uri": r["uri"], "caption": r["caption_raw"]} for r in records])
